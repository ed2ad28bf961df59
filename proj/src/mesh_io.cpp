#include "simlmc/mesh_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "simlmc/error.hpp"

namespace simlmc::fem {

namespace {

// Whitespace tokenizer that remembers the line each token came from.
class TokenReader {
public:
    TokenReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    bool next(std::string& tok) {
        while (pos_ >= tokens_.size()) {
            std::string line;
            if (!std::getline(in_, line)) return false;
            ++line_no_;
            tokens_.clear();
            pos_ = 0;
            std::istringstream ls(line);
            std::string t;
            while (ls >> t) tokens_.push_back(t);
        }
        tok = tokens_[pos_++];
        return true;
    }

    std::string expect_token(const char* what) {
        std::string tok;
        if (!next(tok)) fail(std::string("unexpected end of file, expected ") + what);
        return tok;
    }

    void expect_keyword(const char* keyword) {
        const auto tok = expect_token(keyword);
        if (tok != keyword) fail("expected '" + std::string(keyword) + "', found '" + tok + "'");
    }

    std::size_t read_size(const char* what) {
        const auto tok = expect_token(what);
        std::size_t v = 0;
        const auto* end = tok.data() + tok.size();
        auto [p, ec] = std::from_chars(tok.data(), end, v);
        if (ec != std::errc() || p != end) fail("invalid " + std::string(what) + " '" + tok + "'");
        return v;
    }

    int read_int(const char* what) {
        const auto tok = expect_token(what);
        int v = 0;
        const auto* end = tok.data() + tok.size();
        auto [p, ec] = std::from_chars(tok.data(), end, v);
        if (ec != std::errc() || p != end) fail("invalid " + std::string(what) + " '" + tok + "'");
        return v;
    }

    double read_double(const char* what) {
        const auto tok = expect_token(what);
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::logic_error&) {
            fail("invalid " + std::string(what) + " '" + tok + "'");
        }
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw MeshFormatError(source_, line_no_, msg);
    }

    std::size_t line() const { return line_no_; }

private:
    std::istream& in_;
    std::string source_;
    std::vector<std::string> tokens_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

}  // namespace

Mesh2D read_mesh(std::istream& in, const std::string& source_name) {
    TokenReader r(in, source_name);
    Mesh2D m;

    r.expect_keyword("nodes");
    const auto n_nodes = r.read_size("node count");
    m.nodes.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const auto id = r.read_size("node id");
        if (id != i) r.fail("node id " + std::to_string(id) + " out of order, expected " + std::to_string(i));
        m.nodes[i].x = r.read_double("x coordinate");
        m.nodes[i].y = r.read_double("y coordinate");
    }

    r.expect_keyword("elements");
    const auto n_elems = r.read_size("element count");
    m.elements.resize(n_elems);
    for (std::size_t e = 0; e < n_elems; ++e) {
        const auto id = r.read_size("element id");
        if (id != e) r.fail("element id " + std::to_string(id) + " out of order, expected " + std::to_string(e));
        for (auto& n : m.elements[e]) {
            n = r.read_size("element node id");
            if (n >= n_nodes) {
                r.fail("element " + std::to_string(e) + " references node " + std::to_string(n) +
                       " beyond node count " + std::to_string(n_nodes));
            }
        }
    }

    r.expect_keyword("dirichlet");
    const auto n_dir = r.read_size("Dirichlet count");
    m.dirichlet_nodes.resize(n_dir);
    for (auto& d : m.dirichlet_nodes) {
        d = r.read_size("Dirichlet node id");
        if (d >= n_nodes) r.fail("Dirichlet node " + std::to_string(d) + " beyond node count");
    }

    r.expect_keyword("neumann");
    const auto n_neu = r.read_size("Neumann count");
    m.neumann_edges.resize(n_neu);
    for (auto& ne : m.neumann_edges) {
        ne.element = r.read_size("Neumann element");
        if (ne.element >= n_elems) r.fail("Neumann element " + std::to_string(ne.element) + " beyond element count");
        ne.edge = r.read_int("Neumann edge");
        if (ne.edge < 0 || ne.edge > 3) r.fail("Neumann edge index must be in 0..3");
        ne.tx = r.read_double("traction x");
        ne.ty = r.read_double("traction y");
    }

    std::string extra;
    if (r.next(extra)) r.fail("trailing content '" + extra + "'");
    return m;
}

Mesh2D read_mesh_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open mesh file " + path.string());
    return read_mesh(in, path.string());
}

void write_mesh(std::ostream& out, const Mesh2D& mesh) {
    if (!mesh.rollers.empty()) throw Error("roller supports cannot be written to the mesh format");
    out << std::setprecision(17);
    out << "nodes " << mesh.node_count() << '\n';
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        out << i << ' ' << mesh.nodes[i].x << ' ' << mesh.nodes[i].y << '\n';
    }
    out << "elements " << mesh.element_count() << '\n';
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto& el = mesh.elements[e];
        out << e << ' ' << el[0] << ' ' << el[1] << ' ' << el[2] << ' ' << el[3] << '\n';
    }
    out << "dirichlet " << mesh.dirichlet_nodes.size() << '\n';
    for (auto d : mesh.dirichlet_nodes) out << d << '\n';
    out << "neumann " << mesh.neumann_edges.size() << '\n';
    for (const auto& ne : mesh.neumann_edges) {
        out << ne.element << ' ' << ne.edge << ' ' << ne.tx << ' ' << ne.ty << '\n';
    }
}

void write_mesh_file(const std::filesystem::path& path, const Mesh2D& mesh) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write mesh file " + path.string());
    write_mesh(out, mesh);
}

std::filesystem::path level_file(const std::filesystem::path& dir, std::size_t level) {
    return dir / ("mesh_l" + std::to_string(level) + ".txt");
}

MeshHierarchy load_mesh_hierarchy(const std::filesystem::path& dir) {
    const auto first = level_file(dir, 0);
    if (!std::filesystem::exists(first)) throw Error("mesh file not found: " + first.string());
    std::vector<Mesh2D> meshes;
    for (std::size_t l = 0;; ++l) {
        const auto path = level_file(dir, l);
        if (!std::filesystem::exists(path)) break;
        meshes.push_back(read_mesh_file(path));
        meshes.back().level = static_cast<int>(l);
    }
    return make_hierarchy(std::move(meshes));
}

void save_mesh_hierarchy(const std::filesystem::path& dir, const MeshHierarchy& hierarchy) {
    std::filesystem::create_directories(dir);
    for (std::size_t l = 0; l < hierarchy.level_count(); ++l) {
        write_mesh_file(level_file(dir, l), hierarchy.meshes[l]);
    }
}

}  // namespace simlmc::fem
