// PHD1 phase-diagram files: a line-oriented text header (magic, version,
// model parameters, axis values as decimal text) followed by the raw grid as
// little-endian IEEE-754 doubles, row-major with T as the slow axis.
#ifndef NNIQS_PHD1_HPP
#define NNIQS_PHD1_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nniqs/core.hpp"
#include "nniqs/phase.hpp"

namespace nniqs::phd1 {

inline constexpr const char* kMagic = "PHD1";
inline constexpr int kVersion = 1;

namespace detail {

// %.17g round-trips any double through decimal text.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void put_f64_le(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64_le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw io_error("PHD1: truncated grid data");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

inline std::string expect_line(std::istream& is, const char* what) {
    std::string line;
    if (!std::getline(is, line)) throw io_error(std::string("PHD1: missing ") + what);
    return line;
}

inline std::vector<double> parse_axis(const std::string& line, const char* key) {
    std::istringstream ss(line);
    std::string k;
    ss >> k;
    if (k != key) throw io_error(std::string("PHD1: expected ") + key + " record");
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    if (vals.empty()) throw io_error(std::string("PHD1: empty ") + key);
    return vals;
}

} // namespace detail

inline void write(const phase::PhaseDiagram& d, const std::string& path) {
    if (d.values.rows() != d.axes.t_values.size() || d.values.cols() != d.axes.mu_values.size())
        throw invariant_error("PHD1: grid shape does not match axes");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("PHD1: cannot open for writing: " + path);

    os << kMagic << ' ' << kVersion << '\n';
    os << "generator " << d.generator_version << '\n';
    os << "n " << d.params.n_sites << '\n';
    os << "w_over_g " << detail::fmt(d.params.w_over_g) << '\n';
    os << "mu_over_g " << detail::fmt(d.params.mu_over_g) << '\n';
    os << "rows " << d.values.rows() << '\n';
    os << "cols " << d.values.cols() << '\n';
    os << "t_axis";
    for (double v : d.axes.t_values) os << ' ' << detail::fmt(v);
    os << '\n';
    os << "mu_axis";
    for (double v : d.axes.mu_values) os << ' ' << detail::fmt(v);
    os << '\n';
    os << "grid\n";
    for (double v : d.values) detail::put_f64_le(os, v);
    if (!os) throw io_error("PHD1: write failed: " + path);
}

inline phase::PhaseDiagram read(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("PHD1: cannot open for reading: " + path);

    {
        std::istringstream head(detail::expect_line(is, "header"));
        std::string magic;
        int version = -1;
        head >> magic >> version;
        if (magic != kMagic) throw io_error("PHD1: unknown magic '" + magic + "'");
        if (version != kVersion)
            throw io_error("PHD1: unsupported version " + std::to_string(version));
    }

    phase::PhaseDiagram d;
    {
        std::istringstream ss(detail::expect_line(is, "generator"));
        std::string k;
        ss >> k >> d.generator_version;
        if (k != "generator") throw io_error("PHD1: expected generator record");
    }
    std::size_t rows = 0, cols = 0;
    auto read_kv = [&](const char* key) -> std::string {
        std::istringstream ss(detail::expect_line(is, key));
        std::string k, v;
        ss >> k >> v;
        if (k != key || v.empty()) throw io_error(std::string("PHD1: expected ") + key + " record");
        return v;
    };
    d.params.n_sites = static_cast<std::size_t>(std::stoul(read_kv("n")));
    d.params.w_over_g = std::stod(read_kv("w_over_g"));
    d.params.mu_over_g = std::stod(read_kv("mu_over_g"));
    rows = static_cast<std::size_t>(std::stoul(read_kv("rows")));
    cols = static_cast<std::size_t>(std::stoul(read_kv("cols")));

    d.axes.t_values = detail::parse_axis(detail::expect_line(is, "t_axis"), "t_axis");
    d.axes.mu_values = detail::parse_axis(detail::expect_line(is, "mu_axis"), "mu_axis");
    if (detail::expect_line(is, "grid marker") != "grid")
        throw io_error("PHD1: expected grid marker");
    if (d.axes.t_values.size() != rows || d.axes.mu_values.size() != cols)
        throw io_error("PHD1: axis lengths disagree with declared shape");

    d.values = Matrix(rows, cols);
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] = detail::get_f64_le(is);
    char extra;
    if (is.read(&extra, 1)) throw io_error("PHD1: trailing bytes after grid");
    try {
        d.params.validate();
        d.axes.validate();
    } catch (const invariant_error& e) {
        throw io_error(std::string("PHD1: invalid content: ") + e.what());
    }
    return d;
}

} // namespace nniqs::phd1

#endif
