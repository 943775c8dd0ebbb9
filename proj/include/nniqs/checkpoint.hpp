// IQS1 checkpoint files: a line-oriented text header (magic, version,
// architecture, step counter) followed by every parameter tensor as
// little-endian IEEE-754 doubles in declared visitation order. Optimizer
// moments are transient and not stored; predictions round-trip bit-exactly.
#ifndef NNIQS_CHECKPOINT_HPP
#define NNIQS_CHECKPOINT_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "nniqs/core.hpp"
#include "nniqs/net.hpp"

namespace nniqs::checkpoint {

inline constexpr const char* kMagic = "IQS1";
inline constexpr int kVersion = 1;

namespace detail {

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
    if (!is) throw io_error("IQS1: truncated parameter data");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

inline std::string expect_line(std::istream& is, const char* what) {
    std::string line;
    if (!std::getline(is, line)) throw io_error(std::string("IQS1: missing ") + what);
    return line;
}

inline std::size_t read_size(std::istream& is, const char* key) {
    std::istringstream ss(expect_line(is, key));
    std::string k, v;
    ss >> k >> v;
    if (k != key || v.empty())
        throw io_error(std::string("IQS1: expected ") + key + " record");
    return static_cast<std::size_t>(std::stoull(v));
}

} // namespace detail

inline void save(const net::NetworkState& s, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("IQS1: cannot open for writing: " + path);
    os << kMagic << ' ' << kVersion << '\n';
    os << "generator " << kGeneratorVersion << '\n';
    os << "in_channels " << s.config.in_channels << '\n';
    os << "latent_channels " << s.config.latent_channels << '\n';
    os << "n_res_blocks " << s.config.n_res_blocks << '\n';
    os << "hidden_width " << s.config.hidden_width << '\n';
    os << "n_hidden_layers " << s.config.n_hidden_layers << '\n';
    os << "step " << s.step << '\n';
    os << "params\n";
    net::visit_params(s.params, [&](const double* p, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) detail::put_f64_le(os, p[i]);
    });
    if (!os) throw io_error("IQS1: write failed: " + path);
}

inline net::NetworkState load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("IQS1: cannot open for reading: " + path);
    {
        std::istringstream head(detail::expect_line(is, "header"));
        std::string magic;
        int version = -1;
        head >> magic >> version;
        if (magic != kMagic) throw io_error("IQS1: unknown magic '" + magic + "'");
        if (version != kVersion)
            throw io_error("IQS1: unsupported version " + std::to_string(version));
    }
    {
        std::istringstream ss(detail::expect_line(is, "generator"));
        std::string k, v;
        ss >> k >> v;
        if (k != "generator") throw io_error("IQS1: expected generator record");
    }
    net::NetworkState s;
    s.config.in_channels = detail::read_size(is, "in_channels");
    s.config.latent_channels = detail::read_size(is, "latent_channels");
    s.config.n_res_blocks = detail::read_size(is, "n_res_blocks");
    s.config.hidden_width = detail::read_size(is, "hidden_width");
    s.config.n_hidden_layers = detail::read_size(is, "n_hidden_layers");
    s.step = detail::read_size(is, "step");
    if (detail::expect_line(is, "params marker") != "params")
        throw io_error("IQS1: expected params marker");
    try {
        s.config.validate();
    } catch (const invariant_error& e) {
        throw io_error(std::string("IQS1: invalid architecture: ") + e.what());
    }
    s.params = net::make_params(s.config);
    net::visit_params(s.params, [&](double* p, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) p[i] = detail::get_f64_le(is);
    });
    char extra;
    if (is.read(&extra, 1)) throw io_error("IQS1: trailing bytes after parameters");
    return s;
}

// Load for a caller that requires a specific architecture.
inline net::NetworkState load(const std::string& path, const net::NetworkConfig& expected) {
    net::NetworkState s = load(path);
    if (!(s.config == expected))
        throw io_error("IQS1: checkpoint architecture does not match the expected config");
    return s;
}

} // namespace nniqs::checkpoint

#endif
