#include "qrl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qrl/error.hpp"

namespace qrl {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kNormTol = 1e-10;
constexpr int kJacobiSweeps = 100;
constexpr double kPhaseZeroTol = 1e-12;

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(Errc::DimMismatch, "matrix dims " + std::to_string(a.dim()) + " and " +
                                       std::to_string(b.dim()));
  }
}

void require_hermitian(const ComplexMatrix& h) {
  if (h.dim() == 0) throw Error(Errc::BadDim, "empty matrix");
  const double defect = hermiticity_defect(h);
  if (defect > kHermitianTol) {
    throw Error(Errc::NotHermitian, "|H - H^dagger|_max = " + std::to_string(defect));
  }
}

double off_diagonal_norm(const ComplexMatrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if (i != j) sum += std::norm(a(i, j));
  return std::sqrt(sum);
}

// Zeroes a(p,q) with J = Phi * R, Phi = diag(1, e^{-i arg a_pq}) on {p,q} and
// R the real Jacobi rotation; a <- J^dagger a J, v <- v J.
void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
  const Complex apq = a(p, q);
  const double g = std::abs(apq);
  if (g == 0.0) return;
  const std::size_t n = a.dim();
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const Complex phase = std::conj(apq) / g;  // e^{-i theta}

  const double zeta = (aqq - app) / (2.0 * g);
  const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  const Complex jpp = c;
  const Complex jpq = s;
  const Complex jqp = -s * phase;
  const Complex jqq = c * phase;

  for (std::size_t i = 0; i < n; ++i) {
    const Complex xp = a(i, p);
    const Complex xq = a(i, q);
    a(i, p) = xp * jpp + xq * jqp;
    a(i, q) = xp * jpq + xq * jqq;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const Complex xp = a(p, j);
    const Complex xq = a(q, j);
    a(p, j) = std::conj(jpp) * xp + std::conj(jqp) * xq;
    a(q, j) = std::conj(jpq) * xp + std::conj(jqq) * xq;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = a(p, p).real();
  a(q, q) = a(q, q).real();

  for (std::size_t i = 0; i < n; ++i) {
    const Complex xp = v(i, p);
    const Complex xq = v(i, q);
    v(i, p) = xp * jpp + xq * jqp;
    v(i, q) = xp * jpq + xq * jqq;
  }
}

void normalize_phase(std::vector<Complex>& col) {
  for (Complex& x : col) {
    const double mag = std::abs(x);
    if (mag > kPhaseZeroTol) {
      const Complex rot = std::conj(x) / mag;
      for (Complex& y : col) y *= rot;
      x = Complex(mag, 0.0);
      return;
    }
  }
}

bool lex_less(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
    if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
  }
  return false;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}

ComplexMatrix::ComplexMatrix(std::size_t dim, std::vector<Complex> row_major)
    : dim_(dim), data_(std::move(row_major)) {
  if (data_.size() != dim_ * dim_) {
    throw Error(Errc::DimMismatch, "expected " + std::to_string(dim_ * dim_) + " entries, got " +
                                       std::to_string(data_.size()));
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
  ComplexMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
  require_same_dim(lhs, rhs);
  const std::size_t n = lhs.dim();
  ComplexMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const Complex x = lhs(i, k);
      if (x == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += x * rhs(k, j);
    }
  return out;
}

ComplexMatrix operator+(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
  require_same_dim(lhs, rhs);
  ComplexMatrix out = lhs;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += rhs.data_[i];
  return out;
}

ComplexMatrix operator-(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
  require_same_dim(lhs, rhs);
  ComplexMatrix out = lhs;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= rhs.data_[i];
  return out;
}

ComplexMatrix operator*(Complex scale, const ComplexMatrix& m) {
  ComplexMatrix out = m;
  for (Complex& x : out.data_) x *= scale;
  return out;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

double hermiticity_defect(const ComplexMatrix& h) { return max_abs_diff(h, h.adjoint()); }

double unitarity_defect(const ComplexMatrix& u) {
  return max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(u.dim()));
}

double frobenius_norm(const ComplexMatrix& m) {
  double sum = 0.0;
  for (const Complex& x : m.data()) sum += std::norm(x);
  return std::sqrt(sum);
}

StateVector::StateVector(std::vector<Complex> amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.empty()) throw Error(Errc::DimMismatch, "empty state");
  const double n = norm();
  if (std::abs(n * n - 1.0) > kNormTol) {
    throw Error(Errc::OutOfRange, "state norm^2 = " + std::to_string(n * n));
  }
}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) {
    throw Error(Errc::OutOfRange,
                "basis index " + std::to_string(index) + " >= dim " + std::to_string(dim));
  }
  std::vector<Complex> amps(dim);
  amps[index] = 1.0;
  return StateVector(std::move(amps));
}

StateVector StateVector::normalized(std::vector<Complex> amplitudes) {
  double sum = 0.0;
  for (const Complex& x : amplitudes) sum += std::norm(x);
  if (sum == 0.0) throw Error(Errc::OutOfRange, "zero vector");
  const double scale = 1.0 / std::sqrt(sum);
  for (Complex& x : amplitudes) x *= scale;
  return StateVector(std::move(amplitudes));
}

double StateVector::norm() const {
  double sum = 0.0;
  for (const Complex& x : amps_) sum += std::norm(x);
  return std::sqrt(sum);
}

Complex inner(const StateVector& bra, const StateVector& ket) {
  if (bra.dim() != ket.dim()) throw Error(Errc::DimMismatch, "inner product of unequal dims");
  Complex sum{};
  for (std::size_t i = 0; i < bra.dim(); ++i) sum += std::conj(bra[i]) * ket[i];
  return sum;
}

double overlap(const StateVector& a, const StateVector& b) { return std::abs(inner(a, b)); }

StateVector column(const ComplexMatrix& m, std::size_t col) {
  if (col >= m.dim()) throw Error(Errc::OutOfRange, "column " + std::to_string(col));
  std::vector<Complex> amps(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) amps[i] = m(i, col);
  return StateVector(std::move(amps));
}

ComplexMatrix Eigensystem::reconstruct() const {
  const std::size_t n = dim();
  ComplexMatrix out(n);
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out(i, j) += eigenvalues[l] * eigenvectors(i, l) * std::conj(eigenvectors(j, l));
  return out;
}

Eigensystem eig_hermitian(const ComplexMatrix& h) {
  require_hermitian(h);
  const std::size_t n = h.dim();
  // Symmetrize so rounding asymmetry below the tolerance does not leak in.
  ComplexMatrix a = 0.5 * (h + h.adjoint());
  ComplexMatrix v = ComplexMatrix::identity(n);

  const double scale = std::max(1.0, frobenius_norm(a));
  const double target = 1e-15 * scale;
  int sweep = 0;
  while (off_diagonal_norm(a) > target) {
    if (++sweep > kJacobiSweeps) {
      throw Error(Errc::NoConvergence, "Jacobi exceeded " + std::to_string(kJacobiSweeps) +
                                           " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) jacobi_rotate(a, v, p, q);
  }

  struct Pair {
    double value;
    std::vector<Complex> vec;
  };
  std::vector<Pair> pairs(n);
  for (std::size_t l = 0; l < n; ++l) {
    pairs[l].value = a(l, l).real();
    pairs[l].vec.resize(n);
    for (std::size_t i = 0; i < n; ++i) pairs[l].vec[i] = v(i, l);
    normalize_phase(pairs[l].vec);
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const Pair& x, const Pair& y) { return x.value < y.value; });

  // Degenerate runs get the lexicographic tie-break.
  const double degenerate_tol = 1e-12 * scale;
  for (std::size_t begin = 0; begin < n;) {
    std::size_t end = begin + 1;
    while (end < n && pairs[end].value - pairs[end - 1].value <= degenerate_tol) ++end;
    if (end - begin > 1) {
      std::sort(pairs.begin() + static_cast<std::ptrdiff_t>(begin),
                pairs.begin() + static_cast<std::ptrdiff_t>(end),
                [](const Pair& x, const Pair& y) { return lex_less(x.vec, y.vec); });
    }
    begin = end;
  }

  Eigensystem out;
  out.eigenvalues.resize(n);
  out.eigenvectors = ComplexMatrix(n);
  for (std::size_t l = 0; l < n; ++l) {
    out.eigenvalues[l] = pairs[l].value;
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, l) = pairs[l].vec[i];
  }
  return out;
}

ComplexMatrix unitary_from_hermitian(const ComplexMatrix& h, double tau) {
  if (!std::isfinite(tau)) throw Error(Errc::OutOfRange, "tau must be finite");
  const Eigensystem es = eig_hermitian(h);
  const std::size_t n = h.dim();
  ComplexMatrix u(n);
  for (std::size_t l = 0; l < n; ++l) {
    const Complex phase = std::polar(1.0, -es.eigenvalues[l] * tau);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex left = phase * es.eigenvectors(i, l);
      for (std::size_t j = 0; j < n; ++j) u(i, j) += left * std::conj(es.eigenvectors(j, l));
    }
  }
  return u;
}

std::array<Complex, 4> two_level_block(const RotationAngles& angles) {
  using namespace std::complex_literals;
  const double cx = std::cos(angles.phi_x / 2), sx = std::sin(angles.phi_x / 2);
  const double cy = std::cos(angles.phi_y / 2), sy = std::sin(angles.phi_y / 2);
  const Complex za = std::polar(1.0, -angles.phi_z / 2);
  const Complex zb = std::polar(1.0, angles.phi_z / 2);

  // X = [[cx, -i sx], [-i sx, cx]], Z = diag(za, zb), Y = [[cy, -sy], [sy, cy]]
  const Complex zx00 = za * cx, zx01 = za * (-1i * sx);
  const Complex zx10 = zb * (-1i * sx), zx11 = zb * cx;
  return {cy * zx00 - sy * zx10, cy * zx01 - sy * zx11,  //
          sy * zx00 + cy * zx10, sy * zx01 + cy * zx11};
}

namespace {
void require_pair(std::size_t a, std::size_t b, std::size_t dim) {
  if (a >= b || b >= dim) {
    throw Error(Errc::BadIndices, "need 0 <= a < b < dim, got a=" + std::to_string(a) +
                                      " b=" + std::to_string(b) + " dim=" + std::to_string(dim));
  }
}
}  // namespace

ComplexMatrix two_level_rotation(std::size_t a, std::size_t b, std::size_t dim,
                                 const RotationAngles& angles) {
  require_pair(a, b, dim);
  const auto u = two_level_block(angles);
  ComplexMatrix m = ComplexMatrix::identity(dim);
  m(a, a) = u[0];
  m(a, b) = u[1];
  m(b, a) = u[2];
  m(b, b) = u[3];
  return m;
}

void right_multiply_two_level(ComplexMatrix& m, std::size_t a, std::size_t b,
                              const RotationAngles& angles) {
  require_pair(a, b, m.dim());
  const auto u = two_level_block(angles);
  for (std::size_t i = 0; i < m.dim(); ++i) {
    const Complex x = m(i, a);
    const Complex y = m(i, b);
    m(i, a) = x * u[0] + y * u[2];
    m(i, b) = x * u[1] + y * u[3];
  }
}

StateVector apply_unitary(const ComplexMatrix& u, const StateVector& psi) {
  if (u.dim() != psi.dim()) {
    throw Error(Errc::DimMismatch, "operator dim " + std::to_string(u.dim()) + " vs state dim " +
                                       std::to_string(psi.dim()));
  }
  std::vector<Complex> out(psi.dim());
  for (std::size_t i = 0; i < u.dim(); ++i) {
    Complex sum{};
    for (std::size_t j = 0; j < u.dim(); ++j) sum += u(i, j) * psi[j];
    out[i] = sum;
  }
  return StateVector(std::move(out));
}

std::string binary_index_label(std::size_t j, std::size_t n_qubits) {
  if (n_qubits == 0 || n_qubits >= 64 || j >= (std::size_t{1} << n_qubits)) {
    throw Error(Errc::OutOfRange, "index " + std::to_string(j) + " does not fit in " +
                                      std::to_string(n_qubits) + " qubits");
  }
  std::string bits(n_qubits, '0');
  for (std::size_t pos = 0; pos < n_qubits; ++pos)
    if ((j >> pos) & 1U) bits[n_qubits - 1 - pos] = '1';
  return bits;
}

void orthonormalize_columns(ComplexMatrix& m) {
  const std::size_t n = m.dim();
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t prev = 0; prev < c; ++prev) {
      Complex proj{};
      for (std::size_t i = 0; i < n; ++i) proj += std::conj(m(i, prev)) * m(i, c);
      for (std::size_t i = 0; i < n; ++i) m(i, c) -= proj * m(i, prev);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += std::norm(m(i, c));
    const double inv = 1.0 / std::sqrt(sum);
    for (std::size_t i = 0; i < n; ++i) m(i, c) *= inv;
  }
}

}  // namespace qrl
