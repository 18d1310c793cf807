#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "gaugelab/core/field.hpp"
#include "gaugelab/core/radial.hpp"

namespace gaugelab {

/// Binary layout: uint64 N, float64 L, uint64 field count, float64 t, then
/// for each field N*N (re, im) float64 pairs in row-major (x-major) order.
struct Snapshot {
  double t = 0.0;
  std::vector<ComplexField2D> fields;
};

inline void write_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
  if (snap.fields.empty()) throw InvalidInput("write_snapshot: no fields");
  const auto& g = snap.fields.front().grid();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("write_snapshot: cannot open " + path.string());
  const std::uint64_t n = g.n(), count = snap.fields.size();
  const double l = g.half_length();
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&l), sizeof l);
  os.write(reinterpret_cast<const char*>(&count), sizeof count);
  os.write(reinterpret_cast<const char*>(&snap.t), sizeof snap.t);
  for (const auto& f : snap.fields) {
    if (!(f.grid() == g)) throw InvalidInput("write_snapshot: fields on different grids");
    os.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(cplx)));
  }
  if (!os) throw IoError("write_snapshot: write failed for " + path.string());
}

inline Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("read_snapshot: cannot open " + path.string());
  std::uint64_t n = 0, count = 0;
  double l = 0.0;
  Snapshot snap;
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  is.read(reinterpret_cast<char*>(&l), sizeof l);
  is.read(reinterpret_cast<char*>(&count), sizeof count);
  is.read(reinterpret_cast<char*>(&snap.t), sizeof snap.t);
  if (!is || n > (1u << 14) || count > 64) throw IoError("read_snapshot: bad header in " + path.string());
  const PeriodicGrid2D grid(static_cast<int>(n), l);
  for (std::uint64_t c = 0; c < count; ++c) {
    ComplexField2D f(grid);
    is.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(cplx)));
    if (!is) throw IoError("read_snapshot: truncated file " + path.string());
    snap.fields.push_back(std::move(f));
  }
  return snap;
}

inline Snapshot spin_snapshot(const SpinField& s, double t) {
  Snapshot snap{t, {}};
  for (int a = 0; a < 3; ++a) snap.fields.push_back(to_complex(s[a]));
  return snap;
}

inline SpinField spin_from_snapshot(const Snapshot& snap) {
  if (snap.fields.size() != 3) throw InvalidInput("spin_from_snapshot: expected 3 fields");
  return SpinField(real_part(snap.fields[0]), real_part(snap.fields[1]), real_part(snap.fields[2]));
}

inline void write_field_csv(const std::filesystem::path& path, const ComplexField2D& f) {
  std::ofstream os(path);
  if (!os) throw IoError("write_field_csv: cannot open " + path.string());
  os << "x,y,re,im\n" << std::setprecision(17);
  const auto& g = f.grid();
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      const cplx v = f(i, j);
      os << g.coord(i) << ',' << g.coord(j) << ',' << v.real() << ',' << v.imag() << '\n';
    }
}

inline void write_profile_csv(const std::filesystem::path& path, const RadialProfile& q) {
  std::ofstream os(path);
  if (!os) throw IoError("write_profile_csv: cannot open " + path.string());
  os << "rho,reQ,imQ\n" << std::setprecision(17);
  for (int j = 0; j < q.size(); ++j) os << q.grid().rho(j) << ',' << q[j].real() << ',' << q[j].imag() << '\n';
}

/// Reads a profile CSV written by write_profile_csv; the nodes must form a
/// staggered grid.
inline RadialProfile read_profile_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("read_profile_csv: cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  std::vector<double> rho;
  std::vector<cplx> q;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double r, re, im;
    char c1, c2;
    if (!(ss >> r >> c1 >> re >> c2 >> im)) throw IoError("read_profile_csv: malformed row '" + line + "'");
    rho.push_back(r);
    q.emplace_back(re, im);
  }
  if (rho.size() < 8) throw IoError("read_profile_csv: too few rows");
  const double h = 2.0 * rho.front();
  const RadialGrid grid(static_cast<int>(rho.size()), h * static_cast<double>(rho.size()));
  for (std::size_t j = 0; j < rho.size(); ++j)
    if (std::abs(rho[j] - grid.rho(static_cast<int>(j))) > 1e-9 * grid.rho_max())
      throw IoError("read_profile_csv: nodes are not a staggered grid");
  return RadialProfile(grid, std::move(q));
}

}  // namespace gaugelab
