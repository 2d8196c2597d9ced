#include "ucp/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ucp/errors.hpp"

namespace ucp::io {

namespace {
std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path);
    out << content;
    if (!out) throw io_error("short write to " + path);
}

void write_matrix_market(const std::string& path, const SparseSymmetricOperator& op) {
    std::ostringstream out;
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    // lower-triangle entries with the potential folded into the diagonal
    std::int64_t count = 0;
    std::ostringstream body;
    for (std::int64_t i = 0; i < op.n; ++i) {
        bool diag_emitted = false;
        for (std::int64_t k = op.row_ptr[static_cast<std::size_t>(i)];
             k < op.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            const std::int64_t j = op.col[static_cast<std::size_t>(k)];
            if (j > i) continue;
            double v = op.val[static_cast<std::size_t>(k)];
            if (j == i) {
                diag_emitted = true;
                if (op.has_potential()) v += op.diagonal_potential[static_cast<std::size_t>(i)];
            }
            body << (i + 1) << ' ' << (j + 1) << ' ' << fmt17(v) << '\n';
            ++count;
        }
        if (!diag_emitted && op.has_potential() &&
            op.diagonal_potential[static_cast<std::size_t>(i)] != 0.0) {
            body << (i + 1) << ' ' << (i + 1) << ' '
                 << fmt17(op.diagonal_potential[static_cast<std::size_t>(i)]) << '\n';
            ++count;
        }
    }
    out << op.n << ' ' << op.n << ' ' << count << '\n' << body.str();
    write_text_file(path, out.str());
}

SparseSymmetricOperator read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
        throw io_error(path + ": not a Matrix Market file");
    if (line.find("symmetric") == std::string::npos || line.find("coordinate") == std::string::npos)
        throw io_error(path + ": expected coordinate real symmetric");
    do {
        if (!std::getline(in, line)) throw io_error(path + ": truncated header");
    } while (!line.empty() && line[0] == '%');
    std::istringstream hdr(line);
    std::int64_t rows = 0, cols = 0, nnz = 0;
    hdr >> rows >> cols >> nnz;
    if (rows != cols || rows <= 0) throw io_error(path + ": bad dimensions");

    std::vector<std::map<std::int64_t, double>> entries(static_cast<std::size_t>(rows));
    for (std::int64_t e = 0; e < nnz; ++e) {
        std::int64_t i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) throw io_error(path + ": truncated entries");
        --i;
        --j;
        if (i < 0 || j < 0 || i >= rows || j >= rows || j > i)
            throw io_error(path + ": entry outside the lower triangle");
        entries[static_cast<std::size_t>(i)][j] += v;
        if (i != j) entries[static_cast<std::size_t>(j)][i] += v;
    }
    SparseSymmetricOperator op;
    op.n = rows;
    op.row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
    for (std::int64_t i = 0; i < rows; ++i)
        op.row_ptr[static_cast<std::size_t>(i) + 1] =
            op.row_ptr[static_cast<std::size_t>(i)] +
            static_cast<std::int64_t>(entries[static_cast<std::size_t>(i)].size());
    op.col.reserve(static_cast<std::size_t>(op.row_ptr.back()));
    op.val.reserve(static_cast<std::size_t>(op.row_ptr.back()));
    for (std::int64_t i = 0; i < rows; ++i)
        for (const auto& [j, v] : entries[static_cast<std::size_t>(i)]) {
            op.col.push_back(static_cast<std::int32_t>(j));
            op.val.push_back(v);
        }
    return op;
}

void write_grid_mask(const std::string& path, const GridDiscretization& grid) {
    std::ostringstream out;
    out << "ucpgrid 1\n";
    out << "dim " << grid.dim << "\n";
    out << "shape";
    for (auto s : grid.shape) out << ' ' << s;
    out << "\nh " << fmt17(grid.h) << "\norigin";
    for (auto o : grid.origin) out << ' ' << fmt17(o);
    out << "\ndata\n";
    std::string s = out.str();
    s.reserve(s.size() + grid.node_class.size());
    for (auto c : grid.node_class) s.push_back(static_cast<char>(c));
    write_text_file(path, s);
}

GridDiscretization read_grid_mask(const std::string& path) {
    const std::string all = read_text_file(path);
    std::istringstream in(all);
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "ucpgrid" || version != 1) throw io_error(path + ": not a grid mask file");
    GridDiscretization g;
    std::string key;
    in >> key >> g.dim;
    if (key != "dim") throw io_error(path + ": bad header (dim)");
    in >> key;
    if (key != "shape") throw io_error(path + ": bad header (shape)");
    g.shape.resize(static_cast<std::size_t>(g.dim));
    for (auto& s : g.shape) in >> s;
    in >> key >> g.h;
    if (key != "h") throw io_error(path + ": bad header (h)");
    in >> key;
    if (key != "origin") throw io_error(path + ": bad header (origin)");
    g.origin.resize(static_cast<std::size_t>(g.dim));
    for (auto& o : g.origin) in >> o;
    in >> key;
    if (key != "data") throw io_error(path + ": bad header (data)");
    // the data block starts right after the newline following "data"
    const auto pos = all.find("data\n");
    if (pos == std::string::npos) throw io_error(path + ": missing data block");
    const std::size_t start = pos + 5;
    const std::int64_t total = g.node_count();
    if (all.size() - start != static_cast<std::size_t>(total))
        throw io_error(path + ": data block size mismatch");
    g.node_class.resize(static_cast<std::size_t>(total));
    std::memcpy(g.node_class.data(), all.data() + start, static_cast<std::size_t>(total));
    g.dof_of_node.assign(static_cast<std::size_t>(total), -1);
    for (std::int64_t f = 0; f < total; ++f)
        if (g.active(f)) {
            g.dof_of_node[static_cast<std::size_t>(f)] = g.n_dofs++;
            g.node_of_dof.push_back(f);
        }
    return g;
}

void write_ball_csv(const std::string& path, const BallUnion& u) {
    std::ostringstream out;
    if (u.dim == 3) {
        out << "cx,cy,cz,r\n";
    } else {
        for (int i = 0; i < u.dim; ++i) out << 'c' << (i + 1) << ',';
        out << "r\n";
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        for (int a = 0; a < u.dim; ++a)
            out << fmt17(u.centers[i][static_cast<std::size_t>(a)]) << ',';
        out << fmt17(u.radii[i]) << '\n';
    }
    write_text_file(path, out.str());
}

BallUnion read_ball_csv(const std::string& path, int dim) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    BallUnion u(dim);
    std::string line;
    bool first = true;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (first && (line[0] == 'c' || line[0] == 'C')) {
            first = false;
            continue; // header
        }
        first = false;
        std::istringstream ls(line);
        Point c(static_cast<std::size_t>(dim));
        double r = 0.0;
        char comma = ',';
        for (int a = 0; a < dim; ++a) {
            if (!(ls >> c[static_cast<std::size_t>(a)] >> comma))
                throw io_error(path + ": malformed row at line " + std::to_string(lineno));
        }
        if (!(ls >> r)) throw io_error(path + ": malformed row at line " + std::to_string(lineno));
        u.add(std::move(c), r);
    }
    return u;
}

void write_spectral_result(const std::string& path, const spectral::SpectralResult& r) {
    nlohmann::json j;
    j["eigenvalues"] = r.eigenvalues;
    j["residuals"] = r.residuals;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["n"] = r.eigenvectors.empty() ? 0 : r.eigenvectors.front().size();
    j["k"] = r.eigenvectors.size();
    j["vector_format"] = "float64le";
    std::string s = j.dump();
    s.push_back('\n');
    for (const auto& v : r.eigenvectors) {
        const char* p = reinterpret_cast<const char*>(v.data());
        s.append(p, v.size() * sizeof(double));
    }
    write_text_file(path, s);
}

spectral::SpectralResult read_spectral_result(const std::string& path) {
    const std::string all = read_text_file(path);
    const auto nl = all.find('\n');
    if (nl == std::string::npos) throw io_error(path + ": missing header line");
    const auto j = nlohmann::json::parse(all.substr(0, nl));
    spectral::SpectralResult r;
    r.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    r.residuals = j.at("residuals").get<std::vector<double>>();
    r.iterations = j.at("iterations").get<int>();
    r.converged = j.at("converged").get<bool>();
    const std::size_t n = j.at("n").get<std::size_t>();
    const std::size_t k = j.at("k").get<std::size_t>();
    if (all.size() - nl - 1 != n * k * sizeof(double))
        throw io_error(path + ": vector block size mismatch");
    const char* p = all.data() + nl + 1;
    r.eigenvectors.assign(k, std::vector<double>(n));
    for (std::size_t i = 0; i < k; ++i) {
        std::memcpy(r.eigenvectors[i].data(), p, n * sizeof(double));
        p += n * sizeof(double);
    }
    return r;
}

} // namespace ucp::io
