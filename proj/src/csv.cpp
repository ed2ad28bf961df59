#include "simlmc/csv.hpp"

#include <cmath>
#include <cstdio>

#include "simlmc/error.hpp"

namespace simlmc::io {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header)
    : out_(path), path_(path), columns_(header.size()) {
    if (!out_) throw Error("cannot write " + path.string());
    bool first = true;
    for (const auto& h : header) {
        out_ << (first ? "" : ",") << h;
        first = false;
    }
    out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_) throw Error(path_.string() + ": row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, double>) {
                    out_ << format_double(v);
                } else if constexpr (std::is_same_v<T, bool>) {
                    out_ << (v ? "true" : "false");
                } else {
                    out_ << v;
                }
            },
            cells[i]);
    }
    out_ << '\n';
    if (!out_) throw Error("write failed: " + path_.string());
}

}  // namespace simlmc::io
