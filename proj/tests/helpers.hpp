#pragma once

#include <unistd.h>
#include <zlib.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace swvae::test {

// Unique scratch directory removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("swvae_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

// --- npy/zip builders for the archive-adapter tests ---

inline std::vector<unsigned char> npy_bytes(const std::string& dtype,
                                            const std::vector<std::int64_t>& shape,
                                            const std::vector<unsigned char>& payload) {
    std::string dims;
    for (std::size_t i = 0; i < shape.size(); ++i) dims += std::to_string(shape[i]) + ", ";
    std::string header =
        "{'descr': '" + dtype + "', 'fortran_order': False, 'shape': (" + dims + "), }";
    while ((10 + header.size() + 1) % 64 != 0) header += ' ';
    header += '\n';

    std::vector<unsigned char> out;
    const unsigned char magic[8] = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
    out.insert(out.end(), magic, magic + 8);
    out.push_back(static_cast<unsigned char>(header.size() & 0xff));
    out.push_back(static_cast<unsigned char>(header.size() >> 8));
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

struct ZipFileEntry {
    std::string name;
    std::vector<unsigned char> data;
};

// Minimal stored-entry zip writer.
inline void write_zip(const std::filesystem::path& path, const std::vector<ZipFileEntry>& entries) {
    std::ofstream out(path, std::ios::binary);
    auto put16 = [&](std::uint16_t v) {
        out.put(static_cast<char>(v & 0xff));
        out.put(static_cast<char>(v >> 8));
    };
    auto put32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
    };

    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> crcs;
    for (const auto& entry : entries) {
        offsets.push_back(static_cast<std::uint32_t>(out.tellp()));
        const auto crc = static_cast<std::uint32_t>(
            ::crc32(0, entry.data.data(), static_cast<uInt>(entry.data.size())));
        crcs.push_back(crc);
        put32(0x04034b50u);
        put16(20); put16(0); put16(0); put16(0); put16(0);
        put32(crc);
        put32(static_cast<std::uint32_t>(entry.data.size()));
        put32(static_cast<std::uint32_t>(entry.data.size()));
        put16(static_cast<std::uint16_t>(entry.name.size()));
        put16(0);
        out.write(entry.name.data(), static_cast<std::streamsize>(entry.name.size()));
        out.write(reinterpret_cast<const char*>(entry.data.data()),
                  static_cast<std::streamsize>(entry.data.size()));
    }
    const auto dir_start = static_cast<std::uint32_t>(out.tellp());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        put32(0x02014b50u);
        put16(20); put16(20); put16(0); put16(0); put16(0); put16(0);
        put32(crcs[i]);
        put32(static_cast<std::uint32_t>(entries[i].data.size()));
        put32(static_cast<std::uint32_t>(entries[i].data.size()));
        put16(static_cast<std::uint16_t>(entries[i].name.size()));
        put16(0); put16(0); put16(0); put16(0);
        put32(0);
        put32(offsets[i]);
        out.write(entries[i].name.data(), static_cast<std::streamsize>(entries[i].name.size()));
    }
    const auto dir_end = static_cast<std::uint32_t>(out.tellp());
    put32(0x06054b50u);
    put16(0); put16(0);
    put16(static_cast<std::uint16_t>(entries.size()));
    put16(static_cast<std::uint16_t>(entries.size()));
    put32(dir_end - dir_start);
    put32(dir_start);
    put16(0);
}

// Composite-Simpson estimate of KL(N(mu_l, sigma_l^2) || N(mu_m, sigma_m^2)),
// independent of any closed form.
inline double numeric_gaussian_kl(double mu_l, double sigma_l, double mu_m, double sigma_m) {
    const double lo = mu_l - 14.0 * sigma_l;
    const double hi = mu_l + 14.0 * sigma_l;
    const int n = 40000;  // even
    const double h = (hi - lo) / n;
    auto log_pdf = [](double x, double mu, double sigma) {
        const double z = (x - mu) / sigma;
        return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * M_PI);
    };
    auto integrand = [&](double x) {
        const double lq = log_pdf(x, mu_l, sigma_l);
        return std::exp(lq) * (lq - log_pdf(x, mu_m, sigma_m));
    };
    double sum = integrand(lo) + integrand(hi);
    for (int i = 1; i < n; ++i) sum += integrand(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

inline std::vector<char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace swvae::test
