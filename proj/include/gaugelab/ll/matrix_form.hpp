#pragma once

#include <algorithm>
#include <cmath>

#include "gaugelab/core/field.hpp"
#include "gaugelab/core/su2.hpp"

namespace gaugelab {

/// S = [[s3, s1 + i s2], [s1 - i s2, -s3]] per node.
class MatrixSpinField {
 public:
  explicit MatrixSpinField(MatrixField m) : m_(std::move(m)) {}

  const PeriodicGrid2D& grid() const noexcept { return m_.grid(); }
  std::size_t size() const noexcept { return m_.size(); }
  Mat2 at(std::size_t k) const noexcept { return m_.at(k); }
  const MatrixField& matrices() const noexcept { return m_; }

  /// Largest of the Hermitian, trace and S^2 = I defects over nodes.
  double invariant_defect() const {
    double worst = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
      const Mat2 s = at(k);
      worst = std::max({worst, (s - s.dagger()).frobenius(), std::abs(s.trace()),
                        (s * s - Mat2::identity()).frobenius()});
    }
    return worst;
  }

 private:
  MatrixField m_;
};

inline Mat2 spin_matrix(const std::array<double, 3>& s) {
  return {cplx(s[2], 0.0), cplx(s[0], s[1]), cplx(s[0], -s[1]), cplx(-s[2], 0.0)};
}

inline std::array<double, 3> spin_vector(const Mat2& m) { return {m.b.real(), m.b.imag(), m.a.real()}; }

inline MatrixSpinField to_matrix(const SpinField& s) {
  MatrixField m(s.grid());
  for (std::size_t k = 0; k < s.size(); ++k) m.set(k, spin_matrix(s.at(k)));
  return MatrixSpinField(std::move(m));
}

inline SpinField from_matrix(const MatrixSpinField& s, double tol = 1e-10) {
  if (s.invariant_defect() > tol) throw InvalidInput("from_matrix: S is not Hermitian traceless with S^2 = I");
  SpinField out(s.grid());
  for (std::size_t k = 0; k < s.size(); ++k) out.set(k, spin_vector(s.at(k)));
  return out;
}

}  // namespace gaugelab
