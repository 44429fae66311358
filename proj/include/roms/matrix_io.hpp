#pragma once

#include "roms/common.hpp"
#include "roms/indices.hpp"
#include "roms/version.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace roms {

// Matrix files are plain text:
//   # rows=<R> cols=<C> field=<real|complex>
// followed by R lines of comma-separated values, 17 significant digits.
// Complex entries are interleaved re,im, so complex lines carry 2C values.

inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline double parse_value(std::string_view tok, const std::string& path, Index line) {
    double v = 0;
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e)
        throw IoError(path + ":" + std::to_string(line) + ": malformed number '" +
                      std::string(tok) + "'");
    if (!std::isfinite(v))
        throw IoError(path + ":" + std::to_string(line) + ": non-finite entry '" +
                      std::string(tok) + "'");
    return v;
}

inline void split_csv(std::string_view s, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace detail

struct MatrixHeader {
    Index rows = 0;
    Index cols = 0;
    bool complex_field = false;
};

inline MatrixHeader parse_matrix_header(const std::string& line, const std::string& path) {
    MatrixHeader h;
    std::istringstream ss(line);
    std::string hash, tok;
    ss >> hash;
    if (hash != "#")
        throw IoError(path + ":1: expected header '# rows=<R> cols=<C> field=<real|complex>'");
    bool have_rows = false, have_cols = false, have_field = false;
    while (ss >> tok) {
        if (tok.rfind("rows=", 0) == 0) {
            h.rows = std::stoll(tok.substr(5));
            have_rows = true;
        } else if (tok.rfind("cols=", 0) == 0) {
            h.cols = std::stoll(tok.substr(5));
            have_cols = true;
        } else if (tok.rfind("field=", 0) == 0) {
            std::string f = tok.substr(6);
            if (f == "real")
                h.complex_field = false;
            else if (f == "complex")
                h.complex_field = true;
            else
                throw IoError(path + ":1: unknown field kind '" + f + "'");
            have_field = true;
        } else {
            throw IoError(path + ":1: unknown header token '" + tok + "'");
        }
    }
    if (!have_rows || !have_cols || !have_field)
        throw IoError(path + ":1: header must declare rows=, cols=, field=");
    if (h.rows < 1 || h.cols < 1)
        throw IoError(path + ":1: rows and cols must be >= 1");
    return h;
}

template <typename Scalar>
void write_matrix(const std::string& path, const Matrix<Scalar>& M) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    out << "# rows=" << M.rows() << " cols=" << M.cols() << " field="
        << (is_complex_v<Scalar> ? "complex" : "real") << "\n";
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) {
            if (j) out << ',';
            if constexpr (is_complex_v<Scalar>) {
                out << format_value(M(i, j).real()) << ','
                    << format_value(M(i, j).imag());
            } else {
                out << format_value(M(i, j));
            }
        }
        out << "\n";
    }
    if (!out)
        throw IoError("write failed: " + path);
}

inline MatrixHeader read_matrix_header(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw IoError(path + ": empty file");
    return parse_matrix_header(line, path);
}

template <typename Scalar>
Matrix<Scalar> read_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw IoError(path + ": empty file");
    MatrixHeader h = parse_matrix_header(line, path);
    if (h.complex_field && !is_complex_v<Scalar>)
        throw IoError(path + ": field=complex cannot be read into a real matrix");

    const Index vals_per_row = h.complex_field ? 2 * h.cols : h.cols;
    Matrix<Scalar> M(h.rows, h.cols);
    std::vector<std::string_view> toks;
    Index r = 0;
    Index lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (r >= h.rows)
            throw IoError(path + ":" + std::to_string(lineno) + ": more than " +
                          std::to_string(h.rows) + " data rows");
        detail::split_csv(line, toks);
        if (static_cast<Index>(toks.size()) != vals_per_row)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(vals_per_row) + " values, got " +
                          std::to_string(toks.size()));
        for (Index j = 0; j < h.cols; ++j) {
            if (h.complex_field) {
                double re = detail::parse_value(toks[static_cast<std::size_t>(2 * j)], path, lineno);
                double im = detail::parse_value(toks[static_cast<std::size_t>(2 * j + 1)], path, lineno);
                if constexpr (is_complex_v<Scalar>)
                    M(r, j) = Scalar(re, im);
                else
                    M(r, j) = Scalar(re);  // unreachable, guarded above
            } else {
                double re = detail::parse_value(toks[static_cast<std::size_t>(j)], path, lineno);
                if constexpr (is_complex_v<Scalar>)
                    M(r, j) = Scalar(re, 0.0);
                else
                    M(r, j) = re;
            }
        }
        ++r;
    }
    if (r != h.rows)
        throw IoError(path + ": expected " + std::to_string(h.rows) +
                      " data rows, got " + std::to_string(r));
    return M;
}

// Index files: one 1-based index per line, selection order.
inline void write_index_set(const std::string& path, const IndexSet& idx) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    for (int v : idx.values)
        out << v << "\n";
    if (!out)
        throw IoError("write failed: " + path);
}

inline IndexSet read_index_set(const std::string& path, int ambient) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open: " + path);
    std::vector<int> vals;
    std::string line;
    Index lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        int v = 0;
        auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc())
            throw IoError(path + ":" + std::to_string(lineno) + ": malformed index '" +
                          line + "'");
        vals.push_back(v);
    }
    if (vals.empty())
        throw IoError(path + ": no indices");
    return make_index_set(std::move(vals), ambient);
}

// CSV reports carry a provenance comment: tool version plus a digest of the
// effective config that produced them.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& config_digest_source)
        : out_(path) {
        if (!out_)
            throw IoError("cannot open for writing: " + path);
        out_ << "# roms " << version << " config=" << fnv1a64_hex(config_digest_source)
             << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << "\n";
    }

    std::ofstream& stream() { return out_; }

private:
    std::ofstream out_;
};

inline std::string format_csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return format_value(v);
}

}  // namespace roms
