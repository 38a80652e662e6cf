#include <numbers>

#include "qrl/linalg.hpp"
#include "support.hpp"

using namespace qrl;
using namespace qrl::test;
using std::numbers::pi;

namespace {

// Generators on span{|a>, |b>} of a dim-dimensional space.
ComplexMatrix generator(char axis, std::size_t a, std::size_t b, std::size_t dim) {
  ComplexMatrix s(dim);
  switch (axis) {
    case 'x':
      s(a, b) = s(b, a) = 0.5;
      break;
    case 'y':
      s(a, b) = Complex(0, -0.5);
      s(b, a) = Complex(0, 0.5);
      break;
    default:
      s(a, a) = 0.5;
      s(b, b) = -0.5;
  }
  return s;
}

ComplexMatrix rotation_oracle(std::size_t a, std::size_t b, std::size_t dim,
                              const RotationAngles& angles) {
  return expm_taylor(generator('y', a, b, dim), angles.phi_y) *
         expm_taylor(generator('z', a, b, dim), angles.phi_z) *
         expm_taylor(generator('x', a, b, dim), angles.phi_x);
}

RotationAngles random_angles(std::mt19937_64& gen, double w = 1.0) {
  return {draw(gen, -w * pi, w * pi), draw(gen, -w * pi, w * pi),
          draw(gen, -w * pi, w * pi)};
}

}  // namespace

TEST_CASE("matrix basics") {
  const ComplexMatrix y = pauli_y();
  CHECK(max_abs_diff(y.adjoint(), y) == 0.0);
  CHECK(max_abs_diff(pauli_x() * pauli_x(), ComplexMatrix::identity(2)) == 0.0);
  CHECK(hermiticity_defect(y) == 0.0);
  CHECK(unitarity_defect(y) < 1e-15);
  CHECK(frobenius_norm(ComplexMatrix::identity(4)) == doctest::Approx(2.0));
  CHECK_THROWS_CODE(ComplexMatrix(2, {1.0, 2.0, 3.0}), Errc::DimMismatch);
  CHECK_THROWS_CODE(pauli_x() * ComplexMatrix::identity(3), Errc::DimMismatch);
}

TEST_CASE("state vector validation") {
  CHECK_NOTHROW(StateVector({1.0, 0.0}));
  CHECK_THROWS_CODE(StateVector({1.0, 1.0}), Errc::OutOfRange);
  CHECK_THROWS_CODE(StateVector(std::vector<Complex>{}), Errc::DimMismatch);
  CHECK(StateVector::normalized({3.0, 4.0})[1].real() == doctest::Approx(0.8));
  CHECK(overlap(StateVector::basis(3, 1), StateVector::basis(3, 1)) == 1.0);
  CHECK(overlap(StateVector::basis(3, 0), StateVector::basis(3, 2)) == 0.0);
  const StateVector phased({Complex(0, 1) / std::sqrt(2.0), Complex(0, 1) / std::sqrt(2.0)});
  const StateVector plain({1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)});
  CHECK(overlap(phased, plain) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("eig_hermitian examples") {
  SUBCASE("diagonal") {
    const Eigensystem e = eig_hermitian(diag({1.0, 2.0}));
    CHECK(e.eigenvalues == std::vector<double>{1.0, 2.0});
    CHECK(max_abs_diff(e.eigenvectors, ComplexMatrix::identity(2)) == 0.0);
  }
  SUBCASE("spin x") {
    const Eigensystem e = eig_hermitian(Complex(0.5) * pauli_x());
    CHECK(e.eigenvalues[0] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(e.eigenvalues[1] == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("unsorted diagonal sorts ascending") {
    const Eigensystem e = eig_hermitian(diag({3.0, -1.0, 2.0}));
    CHECK(e.eigenvalues == std::vector<double>{-1.0, 2.0, 3.0});
    CHECK(std::abs(e.eigenvectors(1, 0)) == 1.0);
  }
  SUBCASE("not hermitian") {
    ComplexMatrix m = pauli_x();
    m(0, 1) = 2.0;
    CHECK_THROWS_CODE(eig_hermitian(m), Errc::NotHermitian);
  }
}

TEST_CASE("eig_hermitian phase convention and degenerate ordering") {
  std::mt19937_64 gen(11);
  const ComplexMatrix h = random_hermitian(5, gen);
  const Eigensystem e = eig_hermitian(h);
  for (std::size_t l = 0; l < 5; ++l) {
    for (std::size_t i = 0; i < 5; ++i) {
      if (std::abs(e.eigenvectors(i, l)) > 1e-12) {
        CHECK(e.eigenvectors(i, l).imag() == 0.0);
        CHECK(e.eigenvectors(i, l).real() > 0.0);
        break;
      }
    }
  }

  // Identity is fully degenerate; the tie-break gives a reproducible basis.
  const Eigensystem id = eig_hermitian(ComplexMatrix::identity(3));
  CHECK(id.eigenvectors == eig_hermitian(ComplexMatrix::identity(3)).eigenvectors);
  CHECK(max_abs_diff(id.reconstruct(), ComplexMatrix::identity(3)) < 1e-15);

  // Degenerate pair in a rotated basis: repeated calls agree bit for bit.
  const ComplexMatrix u = random_unitary(4, gen);
  const ComplexMatrix d = u * diag({1.0, 1.0, -2.0, 3.0}) * u.adjoint();
  ComplexMatrix dh = d;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) dh(i, j) = 0.5 * (d(i, j) + std::conj(d(j, i)));
  const Eigensystem a = eig_hermitian(dh);
  const Eigensystem b = eig_hermitian(dh);
  CHECK(a.eigenvectors == b.eigenvectors);
  CHECK(a.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.eigenvalues[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("property: eigendecomposition reconstructs within 1e-10") {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const ComplexMatrix h = random_hermitian(n, gen);
    const Eigensystem e = eig_hermitian(h);
    REQUIRE(max_abs_diff(e.reconstruct(), h) < 1e-10);
    REQUIRE(unitarity_defect(e.eigenvectors) < 1e-10);
    for (std::size_t l = 1; l < n; ++l) REQUIRE(e.eigenvalues[l - 1] <= e.eigenvalues[l]);
  }
  const ComplexMatrix big = random_hermitian(64, gen);
  const Eigensystem e = eig_hermitian(big);
  CHECK(max_abs_diff(e.reconstruct(), big) < 1e-10);
}

TEST_CASE("unitary_from_hermitian examples") {
  CHECK(max_abs_diff(unitary_from_hermitian(ComplexMatrix(3), 1.7), ComplexMatrix::identity(3)) <
        1e-15);

  const ComplexMatrix u = unitary_from_hermitian(Complex(0.5) * pauli_x(), pi);
  CHECK(std::abs(u(1, 0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(max_abs_diff(u, Complex(0, -1) * pauli_x()) < 1e-12);
  CHECK(max_abs_diff(u, expm_taylor(Complex(0.5) * pauli_x(), pi)) < 1e-12);

  const ComplexMatrix ud = unitary_from_hermitian(diag({-0.3, 1.1}), 2.0);
  CHECK(std::abs(ud(0, 0) - std::exp(Complex(0, 0.6))) < 1e-15);
  CHECK(std::abs(ud(1, 1) - std::exp(Complex(0, -2.2))) < 1e-15);
  CHECK(std::abs(ud(0, 1)) == 0.0);
}

TEST_CASE("property: unitary_from_hermitian against the series oracle") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const ComplexMatrix h = random_hermitian(n, gen);
    const double t1 = draw(gen, -2.0, 2.0);
    const double t2 = draw(gen, -2.0, 2.0);
    const ComplexMatrix u1 = unitary_from_hermitian(h, t1);
    REQUIRE(max_abs_diff(u1, expm_taylor(h, t1)) < 1e-9);
    REQUIRE(unitarity_defect(u1) < 1e-10);
    REQUIRE(max_abs_diff(u1 * h, h * u1) < 1e-9);
    REQUIRE(max_abs_diff(unitary_from_hermitian(h, t1 + t2),
                         u1 * unitary_from_hermitian(h, t2)) < 1e-9);
  }
}

TEST_CASE("two_level_rotation examples") {
  CHECK(max_abs_diff(two_level_rotation(0, 1, 2, {}), ComplexMatrix::identity(2)) == 0.0);

  RotationAngles flip;
  flip.phi_x = pi;
  const ComplexMatrix u = two_level_rotation(0, 1, 2, flip);
  CHECK(max_abs_diff(u, Complex(0, -1) * pauli_x()) < 1e-15);
  CHECK(max_abs_diff(u, expm_taylor(Complex(0.5) * pauli_x(), pi)) < 1e-12);

  std::mt19937_64 gen(3);
  const ComplexMatrix v = two_level_rotation(1, 3, 4, random_angles(gen));
  for (std::size_t i : {0, 2}) {
    for (std::size_t j = 0; j < 4; ++j) {
      const Complex expected = i == j ? 1.0 : 0.0;
      CHECK(v(i, j) == expected);
      CHECK(v(j, i) == expected);
    }
  }

  CHECK_THROWS_CODE(two_level_rotation(1, 1, 2, {}), Errc::BadIndices);
  CHECK_THROWS_CODE(two_level_rotation(1, 0, 2, {}), Errc::BadIndices);
  CHECK_THROWS_CODE(two_level_rotation(0, 4, 4, {}), Errc::BadIndices);
}

TEST_CASE("property: two-level rotation matches y.z.x exponential product") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t dim = 2 + trial % 5;
    const std::size_t a = trial % (dim - 1);
    const std::size_t b = a + 1 + (trial / 7) % (dim - 1 - a);
    const RotationAngles angles = random_angles(gen, 2.0);
    const ComplexMatrix u = two_level_rotation(a, b, dim, angles);
    REQUIRE(unitarity_defect(u) < 1e-10);
    REQUIRE(max_abs_diff(u, rotation_oracle(a, b, dim, angles)) < 1e-10);

    const ComplexMatrix m = random_unitary(dim, gen);
    ComplexMatrix fast = m;
    right_multiply_two_level(fast, a, b, angles);
    REQUIRE(max_abs_diff(fast, m * u) < 1e-12);
  }
}

TEST_CASE("apply_unitary") {
  const StateVector zero = StateVector::basis(2, 0);
  CHECK(apply_unitary(ComplexMatrix::identity(2), zero).amplitudes()[0] == Complex(1.0));
  const StateVector flipped = apply_unitary(pauli_x(), zero);
  CHECK(flipped[0] == Complex(0.0));
  CHECK(flipped[1] == Complex(1.0));

  const StateVector rotated = apply_unitary(expm_taylor(Complex(0.5) * pauli_x(), pi), zero);
  CHECK(std::abs(rotated[0]) < 1e-12);
  CHECK(std::abs(rotated[1] - Complex(0, -1)) < 1e-12);

  CHECK_THROWS_CODE(apply_unitary(ComplexMatrix::identity(3), zero), Errc::DimMismatch);

  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const StateVector out = apply_unitary(random_unitary(n, gen), random_state(n, gen));
    REQUIRE(std::abs(out.norm() - 1.0) < 1e-10);
  }
}

TEST_CASE("binary_index_label") {
  CHECK(binary_index_label(5, 4) == "0101");
  CHECK(binary_index_label(0, 2) == "00");
  CHECK(binary_index_label(3, 2) == "11");
  CHECK(binary_index_label(2, 2) == "10");
  CHECK_THROWS_CODE(binary_index_label(4, 2), Errc::OutOfRange);
}

TEST_CASE("orthonormalize_columns repairs drift and keeps a unitary fixed") {
  std::mt19937_64 gen(17);
  const ComplexMatrix u = random_unitary(5, gen);
  ComplexMatrix copy = u;
  orthonormalize_columns(copy);
  CHECK(max_abs_diff(copy, u) < 1e-12);

  ComplexMatrix drifted = u;
  drifted(2, 3) += 1e-6;
  drifted(0, 1) -= 2e-6;
  CHECK(unitarity_defect(drifted) > 1e-7);
  orthonormalize_columns(drifted);
  CHECK(unitarity_defect(drifted) < 1e-14);
}
