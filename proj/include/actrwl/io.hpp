#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "actrwl/ffpe.hpp"
#include "actrwl/hash.hpp"
#include "actrwl/process.hpp"

namespace actrwl {

/// Shortest round-trip decimal for doubles; '.' decimal point regardless of
/// locale, so files are bit-stable across machines.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

/// SampleSet CSV: one audit comment line, a header row, then one value per row.
inline void write_sample_csv(const std::string& path, const SampleSet& s,
                             const std::string& scenario_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_sample_csv: cannot open " + path);
    out << "# actrwl samples scenario=" << scenario_hash << " seed=" << s.seed << "\n";
    out << "process,alpha,c,t0,t,seed,value\n";
    const std::string meta = s.process + "," + format_double(s.alpha) + "," +
                             format_double(s.c) + "," + format_double(s.t0) + "," +
                             format_double(s.t) + "," + std::to_string(s.seed) + ",";
    for (double v : s.values) out << meta << format_double(v) << "\n";
}

/// GridDensity CSV: x,t,value rows (atom mass on the audit line).
inline void write_density_csv(const std::string& path, const GridDensity& d,
                              const std::string& scenario_hash, std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_density_csv: cannot open " + path);
    out << "# actrwl density scenario=" << scenario_hash << " seed=" << seed
        << " atom_mass=" << format_double(d.atom_mass) << "\n";
    out << "x,t,value\n";
    for (std::size_t i = 0; i < d.nx(); ++i)
        out << format_double(d.x(i)) << "," << format_double(d.t) << ","
            << format_double(d.values[i]) << "\n";
}

// Binary table layout (little-endian):
//   bytes 0..3   magic "ACTB"
//   u32          version (1)
//   u32          dtype tag (0 = float64)
//   u64          rows
//   u64          cols
//   rows*cols f64 payload, row-major
struct BinaryTable {
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::vector<double> data; // row-major
};

inline void write_binary_table(const std::string& path, const BinaryTable& t) {
    if (t.data.size() != t.rows * t.cols)
        throw std::invalid_argument("write_binary_table: shape mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_binary_table: cannot open " + path);
    const char magic[4] = {'A', 'C', 'T', 'B'};
    const std::uint32_t version = 1, dtype = 0;
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&dtype), 4);
    out.write(reinterpret_cast<const char*>(&t.rows), 8);
    out.write(reinterpret_cast<const char*>(&t.cols), 8);
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

inline BinaryTable read_binary_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_binary_table: cannot open " + path);
    char magic[4];
    std::uint32_t version = 0, dtype = 0;
    BinaryTable t;
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "ACTB")
        throw std::runtime_error("read_binary_table: bad magic");
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&dtype), 4);
    if (version != 1 || dtype != 0)
        throw std::runtime_error("read_binary_table: unsupported version/dtype");
    in.read(reinterpret_cast<char*>(&t.rows), 8);
    in.read(reinterpret_cast<char*>(&t.cols), 8);
    t.data.resize(t.rows * t.cols);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!in) throw std::runtime_error("read_binary_table: truncated payload");
    return t;
}

} // namespace actrwl
