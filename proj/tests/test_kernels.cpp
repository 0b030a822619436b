#include <doctest.h>

#include <cmath>

#include "expect.hpp"
#include "kkf/kernels.hpp"

using namespace kkf;
using kkf::test::code_of;
using kkf::test::Rng;

namespace {

EigenBasis path2_basis() {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  return eigendecompose(laplacian(build_graph(a)));
}

std::vector<KernelSpec> all_families(std::size_t n) {
  const int half = static_cast<int>(n / 2);
  return {KernelSpec::diffusion(1.7),          KernelSpec::p_step(40.0, 3), KernelSpec::regularized(2.5),
          KernelSpec::bandlimited(20.0, half), KernelSpec::band_rejection(5.0, 2, half), KernelSpec::identity()};
}

}  // namespace

TEST_CASE("spectral_weight values") {
  CHECK(spectral_weight(KernelSpec::diffusion(0.0), 3.7, 1, 5) == 1.0);
  CHECK(spectral_weight(KernelSpec::diffusion(2.0), 1.0, 1, 5) == doctest::Approx(std::exp(1.0)));
  CHECK(spectral_weight(KernelSpec::bandlimited(50.0, 20), 0.0, 1, 81) == doctest::Approx(0.02));
  CHECK(spectral_weight(KernelSpec::bandlimited(50.0, 20), 0.0, 21, 81) == 50.0);
  CHECK(spectral_weight(KernelSpec::p_step(2.55, 6), 0.0, 1, 5) == doctest::Approx(3.645e-3).epsilon(1e-3));
  CHECK(spectral_weight(KernelSpec::p_step(2.55, 6), 0.0, 1, 5) == doctest::Approx(std::pow(2.55, -6)));
  CHECK(spectral_weight(KernelSpec::regularized(4.0), 0.5, 1, 5) == 3.0);
  const KernelSpec br = KernelSpec::band_rejection(4.0, 2, 2);
  CHECK(spectral_weight(br, 0.0, 1, 6) == 0.25);
  CHECK(spectral_weight(br, 0.0, 2, 6) == 4.0);
  CHECK(spectral_weight(br, 0.0, 4, 6) == 4.0);
  CHECK(spectral_weight(br, 0.0, 5, 6) == 0.25);
  CHECK(spectral_weight(KernelSpec::identity(), 9.0, 3, 5) == 1.0);
  CHECK(code_of([] { spectral_weight(KernelSpec::p_step(2.0, 1), 2.0, 1, 3); }) == ErrorCode::PStepPole);
}

TEST_CASE("kernel spec validation") {
  CHECK(code_of([] { validate(KernelSpec::diffusion(-1.0), 3); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { validate(KernelSpec::p_step(1.5, 1), 3); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { validate(KernelSpec::p_step(2.5, 0), 3); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { validate(KernelSpec::bandlimited(0.0, 1), 3); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { validate(KernelSpec::bandlimited(2.0, 4), 3); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { validate(KernelSpec::band_rejection(2.0, 2, 2), 3); }) == ErrorCode::InvalidParameter);
  validate(KernelSpec::band_rejection(2.0, 1, 2), 3);
}

TEST_CASE("build_kernel hand cases") {
  const EigenBasis one{Matrix::Ones(1, 1), Vector::Zero(1)};
  CHECK(build_kernel(one, KernelSpec::diffusion(2.0)).matrix(0, 0) == doctest::Approx(1.0));

  const KernelMatrix k = build_kernel(path2_basis(), KernelSpec::diffusion(2.0));
  const double e = std::exp(-2.0);
  Matrix expected(2, 2);
  expected << 1 + e, 1 - e, 1 - e, 1 + e;
  expected *= 0.5;
  CHECK((k.matrix - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(k.matrix(0, 0) == doctest::Approx(0.5677).epsilon(1e-4));
  CHECK(k.matrix(0, 1) == doctest::Approx(0.4323).epsilon(1e-4));
  REQUIRE(k.spectral_values);
  CHECK((*k.spectral_values)(1) == doctest::Approx(e));

  Rng rng(21);
  const EigenBasis b = test::random_basis(9, rng);
  CHECK((build_kernel(b, KernelSpec::identity()).matrix - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff() <= 1e-10);

  // p-step needs a > lambda_max.
  const double lmax = b.eigenvalues.maxCoeff();
  CHECK(code_of([&] { build_kernel(b, KernelSpec::p_step(std::max(2.0, lmax * 0.99), 2)); }) == ErrorCode::PStepPole);
}

TEST_CASE("kernel invariants for every family") {
  Rng rng(22);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::Index n = 6 + 2 * rep;
    const Matrix a = test::random_adjacency(n, rng);
    const Matrix l = laplacian(build_graph(a));
    const EigenBasis b = eigendecompose(l);
    for (const KernelSpec& spec : all_families(static_cast<std::size_t>(n))) {
      const Matrix k = build_kernel(b, spec).matrix;
      CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
      for (int t = 0; t < 100; ++t) {
        const Vector x = test::gaussian_vector(n, rng);
        CHECK(x.dot(k * x) >= -1e-9 * x.squaredNorm());
      }
      CHECK((k * l - l * k).norm() <= 1e-8);
    }
  }
}

TEST_CASE("pseudo-inverse kernel of r(lambda) = lambda reproduces the Laplacian regularizer") {
  Rng rng(23);
  const Eigen::Index n = 10;
  const Matrix l = laplacian(build_graph(test::random_adjacency(n, rng)));
  const EigenBasis b = eigendecompose(l);
  Vector values(n);
  for (Eigen::Index i = 0; i < n; ++i) values(i) = b.eigenvalues(i) > 1e-12 ? 1.0 / b.eigenvalues(i) : 0.0;
  const Matrix k = spectral_matrix(b, values);
  const Matrix k_pinv = k.completeOrthogonalDecomposition().pseudoInverse();
  for (int t = 0; t < 20; ++t) {
    Vector f = test::gaussian_vector(n, rng);
    f.array() -= f.mean();
    const double lhs = f.dot(k_pinv * f);
    CHECK(std::abs(lhs - f.dot(l * f)) <= 1e-8 * std::max(1.0, lhs));
  }
}

TEST_CASE("degenerate kernel") {
  // (a - lambda)^-p of order 1e-16 falls under the pseudo-inverse threshold.
  const EigenBasis b = path2_basis();
  CHECK(code_of([&] { build_kernel(b, KernelSpec::p_step(1e4, 4)); }) == ErrorCode::DegenerateKernel);
  CHECK(code_of([&] { make_dictionary(b, {KernelSpec::p_step(1e4, 4)}); }) == ErrorCode::DegenerateKernel);
}

TEST_CASE("dictionary combination") {
  Rng rng(24);
  const Eigen::Index n = 8;
  const EigenBasis b = test::random_basis(n, rng);
  const std::vector<KernelSpec> specs = {KernelSpec::diffusion(0.5), KernelSpec::regularized(2.0),
                                         KernelSpec::bandlimited(10.0, 3)};
  const KernelDictionary dict = make_dictionary(b, specs);
  CHECK(dict.num_kernels() == 3);
  CHECK(dict.num_nodes() == 8);

  const KernelMatrix k1 = build_kernel(b, specs[0]);
  CHECK(combine(dict, Vector::Unit(3, 0)).matrix == k1.matrix);

  Vector half(3);
  half << 0.5, 0.5, 0.0;
  const Vector avg = 0.5 * (dict.spectra.row(0) + dict.spectra.row(1)).transpose();
  CHECK((*combine(dict, half).spectral_values - avg).cwiseAbs().maxCoeff() <= 1e-15);

  for (int t = 0; t < 20; ++t) {
    const Vector theta = Vector::Random(3).cwiseAbs();
    Matrix dense = Matrix::Zero(n, n);
    for (int p = 0; p < 3; ++p) dense += theta(p) * build_kernel(b, specs[static_cast<std::size_t>(p)]).matrix;
    CHECK((combine(dict, theta).matrix - dense).norm() <= 1e-10);

    const Vector t2 = Vector::Random(3).cwiseAbs();
    const double a = test::uniform(rng, 0.1, 2.0), c = test::uniform(rng, 0.1, 2.0);
    const Matrix lhs = combine(dict, a * theta + c * t2).matrix;
    const Matrix rhs = a * combine(dict, theta).matrix + c * combine(dict, t2).matrix;
    CHECK((lhs - rhs).norm() <= 1e-10);
  }

  CHECK(code_of([&] { combine(dict, Vector::Zero(3)); }) == ErrorCode::AllZeroCoefficients);
  CHECK(code_of([&] { combine(dict, -Vector::Unit(3, 1)); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([&] { combined_spectrum(dict, Vector::Ones(2)); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { make_dictionary(b, {}); }) == ErrorCode::InvalidParameter);
}
