#pragma once

// Dense complex linear algebra for the small Hilbert spaces the protocol
// works in (dim <= 64). Matrices are row-major.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qrl {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxDim = 64;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  /// Zero matrix.
  explicit ComplexMatrix(std::size_t dim);
  /// Takes dim*dim row-major entries; throws DimMismatch otherwise.
  ComplexMatrix(std::size_t dim, std::vector<Complex> row_major);

  static ComplexMatrix identity(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }

  Complex& operator()(std::size_t row, std::size_t col) { return data_[row * dim_ + col]; }
  const Complex& operator()(std::size_t row, std::size_t col) const {
    return data_[row * dim_ + col];
  }

  std::span<const Complex> data() const noexcept { return data_; }

  ComplexMatrix adjoint() const;

  friend ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs);
  friend ComplexMatrix operator+(const ComplexMatrix& lhs, const ComplexMatrix& rhs);
  friend ComplexMatrix operator-(const ComplexMatrix& lhs, const ComplexMatrix& rhs);
  friend ComplexMatrix operator*(Complex scale, const ComplexMatrix& m);

  bool operator==(const ComplexMatrix&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Complex> data_;
};

/// max_ij |a_ij - b_ij|
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
/// max_ij |H - H^dagger|
double hermiticity_defect(const ComplexMatrix& h);
/// max_ij |U^dagger U - I|
double unitarity_defect(const ComplexMatrix& u);
double frobenius_norm(const ComplexMatrix& m);

class StateVector {
 public:
  StateVector() = default;
  /// Validates sum |a_j|^2 = 1 within 1e-10 (DimMismatch on empty input,
  /// OutOfRange on a bad norm).
  explicit StateVector(std::vector<Complex> amplitudes);

  static StateVector basis(std::size_t dim, std::size_t index);
  /// Rescales to unit norm before validating.
  static StateVector normalized(std::vector<Complex> amplitudes);

  std::size_t dim() const noexcept { return amps_.size(); }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }
  std::span<const Complex> amplitudes() const noexcept { return amps_; }
  double norm() const;

 private:
  std::vector<Complex> amps_;
};

/// <bra|ket>
Complex inner(const StateVector& bra, const StateVector& ket);
/// |<a|b>|, the only phase-insensitive comparison used for states.
double overlap(const StateVector& a, const StateVector& b);

StateVector column(const ComplexMatrix& m, std::size_t col);

struct Eigensystem {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // column l is the l-th eigenvector

  std::size_t dim() const noexcept { return eigenvalues.size(); }
  StateVector eigenvector(std::size_t l) const { return column(eigenvectors, l); }
  /// sum_l lambda_l |l><l|
  ComplexMatrix reconstruct() const;
};

/// Angles of a pseudo-random two-level rotation, in radians.
struct RotationAngles {
  double phi_x = 0.0;
  double phi_y = 0.0;
  double phi_z = 0.0;

  bool operator==(const RotationAngles&) const = default;
};

/// Cyclic complex Jacobi diagonalization (sweep budget 100). Eigenvalues
/// ascending; each eigenvector phase-normalized so its first nonzero component
/// is real positive; degenerate eigenvalues ordered lexicographically by their
/// normalized eigenvectors.
Eigensystem eig_hermitian(const ComplexMatrix& h);

/// exp(-i tau H) built from the spectral decomposition of H.
ComplexMatrix unitary_from_hermitian(const ComplexMatrix& h, double tau);

/// 2x2 block, row-major, of exp(-i phi_y S_y) exp(-i phi_z S_z) exp(-i phi_x S_x)
/// in the ordered basis {|a>, |b>} with S = sigma/2.
std::array<Complex, 4> two_level_block(const RotationAngles& angles);

/// Full dim x dim two-level rotation acting on span{|a>, |b>}, a < b.
ComplexMatrix two_level_rotation(std::size_t a, std::size_t b, std::size_t dim,
                                 const RotationAngles& angles);

/// m <- m * u where u is the two-level rotation on {a, b}; O(dim), touches
/// only columns a and b.
void right_multiply_two_level(ComplexMatrix& m, std::size_t a, std::size_t b,
                              const RotationAngles& angles);

StateVector apply_unitary(const ComplexMatrix& u, const StateVector& psi);

/// Big-endian bit string of j with n_qubits digits: (5, 4) -> "0101".
std::string binary_index_label(std::size_t j, std::size_t n_qubits);

/// Modified Gram-Schmidt over the columns, in column order.
void orthonormalize_columns(ComplexMatrix& m);

}  // namespace qrl
