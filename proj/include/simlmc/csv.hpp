#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

namespace simlmc::io {

using Cell = std::variant<std::string, double, std::int64_t, std::uint64_t, bool>;

/// Comma-separated output with a header row; doubles use 17 significant digits
/// so that they round-trip exactly.
class CsvWriter {
public:
    // Throws Error if the file cannot be created.
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header);

    void row(const std::vector<Cell>& cells);
    std::size_t columns() const noexcept { return columns_; }

private:
    std::ofstream out_;
    std::filesystem::path path_;
    std::size_t columns_;
};

std::string format_double(double v);

}  // namespace simlmc::io
