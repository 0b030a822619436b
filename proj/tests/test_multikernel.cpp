#include <doctest.h>

#include <cmath>
#include <limits>

#include "expect.hpp"
#include "filter_instances.hpp"
#include "kkf/multikernel.hpp"

using namespace kkf;
using kkf::test::code_of;
using kkf::test::Rng;

namespace {

// Dictionary over the standard basis with the given spectra rows.
KernelDictionary raw_dictionary(const Matrix& spectra) {
  const Eigen::Index n = spectra.cols();
  KernelDictionary d;
  d.basis.eigenvectors = Matrix::Identity(n, n);
  d.basis.eigenvalues = Vector::LinSpaced(n, 0.0, 1.0);
  d.spectra = spectra;
  return d;
}

std::vector<KernelSpec> family_dictionary() {
  return {KernelSpec::diffusion(0.5), KernelSpec::diffusion(2.0), KernelSpec::regularized(1.0),
          KernelSpec::p_step(20.0, 2), KernelSpec::bandlimited(50.0, 3), KernelSpec::band_rejection(50.0, 1, 2)};
}

ProjectedCorrelation random_rcheck(const EigenBasis& b, Rng& rng) {
  return project_correlation(b, test::random_spd(b.eigenvectors.rows(), rng));
}

Vector random_theta(Eigen::Index p, Rng& rng, double lo = 0.1, double hi = 2.0) {
  Vector t(p);
  for (Eigen::Index i = 0; i < p; ++i) t(i) = test::uniform(rng, lo, hi);
  return t;
}

}  // namespace

TEST_CASE("accumulators") {
  const MKLConfig cfg;
  auto acc = CorrelationAccumulator::make(1, AccumulatorMode::Forgetting);
  MKLConfig half = cfg;
  half.gamma_nu = 0.5;
  acc = accumulate(acc, Vector::Constant(1, 1.0), Vector::Zero(1), half);
  CHECK(acc.sigma_nu(0, 0) == 1.5);

  auto mean = CorrelationAccumulator::make(2, AccumulatorMode::SampleMean);
  CHECK(mean.correlation_nu().isZero());
  mean = accumulate(mean, Vector::Constant(2, 2.0), Vector::Constant(2, 1.0), cfg);
  mean = accumulate(mean, Vector::Zero(2), Vector::Zero(2), cfg);
  CHECK(mean.correlation_nu() == Matrix::Constant(2, 2, 2.0));
  CHECK(mean.correlation_eta() == Matrix::Constant(2, 2, 0.5));

  Rng rng(51);
  for (double gamma : {0.5, 0.9, 1.0}) {
    MKLConfig g = cfg;
    g.gamma_nu = g.gamma_eta = gamma;
    const Eigen::Index n = 5;
    std::vector<Vector> nus, res;
    for (int t = 0; t < 20; ++t) {
      nus.push_back(test::gaussian_vector(n, rng));
      res.push_back(test::gaussian_vector(n, rng));
    }
    auto a = CorrelationAccumulator::make(n, AccumulatorMode::Forgetting);
    for (std::size_t t = 0; t < nus.size(); ++t) a = accumulate(a, nus[t], res[t], g);
    const auto steps = static_cast<double>(nus.size());
    Matrix direct_nu = std::pow(gamma, steps) * Matrix::Identity(n, n);
    Matrix direct_eta = direct_nu;
    for (std::size_t k = 0; k < nus.size(); ++k) {
      const double w = std::pow(gamma, steps - 1.0 - static_cast<double>(k));
      direct_nu += w * nus[k] * nus[k].transpose();
      direct_eta += w * res[k] * res[k].transpose();
    }
    CHECK((a.sigma_nu - direct_nu).norm() <= 1e-12 * direct_nu.norm());
    CHECK((a.sigma_eta - direct_eta).norm() <= 1e-12 * direct_eta.norm());
    CHECK(a.sigma_nu == a.sigma_nu.transpose());
  }
  CHECK(code_of([&] { accumulate(acc, Vector::Zero(2), Vector::Zero(1), cfg); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("projection") {
  Rng rng(52);
  const EigenBasis b = test::random_basis(6, rng);
  CHECK((project_correlation(b, Matrix::Identity(6, 6)).matrix - Matrix::Identity(6, 6)).norm() <= 1e-12);
  const Matrix s = test::random_spd(6, rng);
  const Matrix back = b.eigenvectors * project_correlation(b, s).matrix * b.eigenvectors.transpose();
  CHECK((back - s).norm() <= 1e-11 * s.norm());
  CHECK(code_of([&] { project_correlation(b, Matrix::Identity(5, 5)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("kernel matching objective") {
  const KernelDictionary one = raw_dictionary(Matrix::Ones(1, 2));
  const ProjectedCorrelation id{Matrix::Identity(2, 2)};
  CHECK(km_objective(Vector::Ones(1), id, one, 0.0) == 2.0);
  CHECK(km_objective(Vector::Ones(1), id, one, 1.0) == 3.0);
  CHECK(std::isinf(km_objective(Vector::Zero(1), id, one, 1.0)));
  CHECK(code_of([&] { km_gradient(Vector::Zero(1), id, one, 1.0); }) == ErrorCode::InfeasiblePoint);
  // Zero correlation entries do not care about the spectrum.
  CHECK(km_objective(Vector::Zero(1), ProjectedCorrelation{Matrix::Zero(2, 2)}, one, 1.0) == 0.0);
  CHECK(code_of([&] { km_objective(Vector::Ones(2), id, one, 1.0); }) == ErrorCode::DimensionMismatch);

  const Vector g0 = km_gradient(Vector::Constant(1, 0.7), ProjectedCorrelation{Matrix::Zero(2, 2)}, one, 1.5);
  CHECK(g0(0) == doctest::Approx(2.0 * 1.5 * 0.7));
  const double theta = 0.8;
  CHECK(km_gradient(Vector::Constant(1, theta), id, one, 1.0)(0) == doctest::Approx(-2.0 / (theta * theta) + 2 * theta));

  Rng rng(53);
  for (int rep = 0; rep < 10; ++rep) {
    const EigenBasis b = test::random_basis(7, rng);
    const KernelDictionary d = make_dictionary(b, family_dictionary());
    const Matrix sigma = test::random_spd(7, rng);
    const ProjectedCorrelation r = project_correlation(b, sigma);
    const Vector th = random_theta(6, rng);
    const double mu = test::uniform(rng, 0.0, 2.0);
    // Dense trace form.
    const double dense = (sigma * combine(d, th).matrix.inverse()).trace() + mu * th.squaredNorm();
    CHECK(km_objective(th, r, d, mu) == doctest::Approx(dense).epsilon(1e-9));

    const Vector g = km_gradient(th, r, d, mu);
    for (Eigen::Index p = 0; p < th.size(); ++p) {
      const double h = 1e-6 * (1 + std::abs(th(p)));
      Vector up = th, dn = th;
      up(p) += h;
      dn(p) -= h;
      const double fd = (km_objective(up, r, d, mu) - km_objective(dn, r, d, mu)) / (2 * h);
      CHECK(std::abs(fd - g(p)) <= 1e-5 * std::max(1.0, std::abs(g(p))));
    }
  }
}

TEST_CASE("strong convexity") {
  Rng rng(54);
  const EigenBasis b = test::random_basis(6, rng);
  const KernelDictionary d = make_dictionary(b, family_dictionary());
  for (int rep = 0; rep < 100; ++rep) {
    const ProjectedCorrelation r = random_rcheck(b, rng);
    const double mu = test::uniform(rng, 0.01, 2.0);
    const Vector a = random_theta(6, rng, 0.0, 2.0), c = random_theta(6, rng, 0.0, 2.0);
    const double mid = km_objective(0.5 * (a + c), r, d, mu);
    const double bound =
        0.5 * km_objective(a, r, d, mu) + 0.5 * km_objective(c, r, d, mu) - 0.25 * mu * (a - c).squaredNorm();
    CHECK(mid <= bound + 1e-9 * std::max(1.0, std::abs(bound)));
  }
}

TEST_CASE("sample-mean objective equals the averaged quadratic form") {
  Rng rng(55);
  for (int rep = 0; rep < 10; ++rep) {
    const EigenBasis b = test::random_basis(6, rng);
    const KernelDictionary d = make_dictionary(b, family_dictionary());
    auto acc = CorrelationAccumulator::make(6, AccumulatorMode::SampleMean);
    std::vector<Vector> hist;
    for (int t = 0; t < 12; ++t) {
      hist.push_back(test::gaussian_vector(6, rng));
      acc = accumulate(acc, hist.back(), Vector::Zero(6), MKLConfig{});
    }
    const Vector th = random_theta(6, rng);
    const double lambda2 = test::uniform(rng, 0.2, 3.0), mu = test::uniform(rng, 0.0, 2.0);
    const Matrix kinv = combine(d, th).matrix.inverse();
    double avg = 0.0;
    for (const Vector& v : hist) avg += v.dot(kinv * v);
    avg /= static_cast<double>(hist.size());
    const double expect = avg + mu / lambda2 * th.squaredNorm();
    const double got = km_objective(th, project_correlation(b, acc.correlation_nu()), d, mu / lambda2);
    CHECK(std::abs(got - expect) <= 1e-9 * std::max(1.0, expect));
  }
}

TEST_CASE("online kernel matching") {
  const PgdParams pgd;
  const ProjectedCorrelation id{Matrix::Identity(2, 2)};
  const KernelDictionary one = raw_dictionary(Matrix::Ones(1, 2));
  CHECK(okm_solve(Vector::Constant(1, 3.0), id, one, 1.0, pgd)(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(okm_solve(Vector::Constant(1, 0.2), id, one, 1.0, pgd)(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(okm_solve(Vector::Constant(1, 0.5), ProjectedCorrelation{Matrix::Zero(2, 2)}, one, 1.0, pgd).norm() <= 1e-8);
  CHECK(code_of([&] { okm_solve(Vector::Constant(1, -1.0), id, one, 1.0, pgd); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([&] { okm_solve(Vector::Zero(1), id, one, 1.0, pgd); }) == ErrorCode::NoFeasibleDescent);

  Rng rng(56);
  for (int rep = 0; rep < 5; ++rep) {
    Matrix spectra(2, 4);
    for (Eigen::Index i = 0; i < spectra.size(); ++i) spectra.data()[i] = test::uniform(rng, 0.1, 3.0);
    const KernelDictionary d = raw_dictionary(spectra);
    const ProjectedCorrelation r{test::random_spd(4, rng)};
    const double mu = test::uniform(rng, 0.2, 2.0);
    const OkmResult res = okm_solve_traced(Vector::Ones(2), r, d, mu, pgd);
    CHECK(res.converged);
    for (std::size_t i = 1; i < res.objective_trace.size(); ++i) {
      CHECK(res.objective_trace[i] <= res.objective_trace[i - 1]);
    }
    // F grows at least like mu*|theta|^2, so the minimizer sits inside this box.
    const double theta_max = std::sqrt(km_objective(Vector::Ones(2), r, d, mu) / mu);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 400; ++i) {
      for (int j = 0; j <= 400; ++j) {
        const Vector th = Eigen::Vector2d(theta_max * i / 400.0, theta_max * j / 400.0);
        best = std::min(best, km_objective(th, r, d, mu));
      }
    }
    CHECK(km_objective(res.theta, r, d, mu) <= best * (1 + 1e-3));
    // Converged theta is a fixed point.
    CHECK((okm_solve(res.theta, r, d, mu, pgd) - res.theta).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("mkrikf step") {
  Rng rng(57);
  const Eigen::Index n = 6;
  const EigenBasis b = test::random_basis(n, rng);
  const KernelDictionary dn = make_dictionary(b, family_dictionary());
  const KernelDictionary de = make_dictionary(b, {KernelSpec::diffusion(1.0), KernelSpec::regularized(0.5)});
  const double l1 = 0.7, l2 = 1.3;
  const Matrix tr = test::random_transition(n, rng);
  const MKLConfig mkl;
  const std::vector<Observation> obs = test::random_observations(n, 6, rng);

  ThetaPair th = initial_thetas(dn, de);
  CHECK(th.nu(0) == 1.0);
  CHECK(th.nu.sum() == 1.0);
  FilterState s = mkrikf_initial_state(de, l1);
  auto acc = CorrelationAccumulator::make(n, mkl.accumulator_mode);

  const FilterConfig first = make_filter_config(l1, l2, combine(dn, th.nu), combine(de, th.eta), tr);
  CHECK(s.error_cov == initial_state(first).error_cov);
  const auto [ref_state, ref_est] = kekrikf_step(s, obs[0], first);
  const MkrikfStep step = mkrikf_step(s, acc, th, obs[0], dn, de, l1, l2, tr, mkl);
  CHECK(step.estimate.f == ref_est.f);
  CHECK(step.state.error_cov == ref_state.error_cov);

  for (const Observation& o : obs) {
    const MkrikfStep got = mkrikf_step(s, acc, th, o, dn, de, l1, l2, tr, mkl);
    // Manual chain.
    const FilterConfig c = make_filter_config(l1, l2, combine_or_zero(dn, th.nu), combine(de, th.eta), tr);
    const auto [ms, me] = kekrikf_step(s, o, c);
    const auto macc = accumulate(acc, me.nu, ms.chi - tr * s.chi, mkl);
    const Vector tn = okm_solve(th.nu, project_correlation(b, macc.correlation_nu()), dn, mkl.mu_theta_nu / l2, mkl.pgd);
    const Vector te =
        okm_solve(th.eta, project_correlation(b, macc.correlation_eta()), de, mkl.mu_theta_eta / l1, mkl.pgd);
    CHECK(got.estimate.f == me.f);
    CHECK(got.state.chi == ms.chi);
    CHECK(got.acc.sigma_nu == macc.sigma_nu);
    CHECK(got.thetas.nu == tn);
    if (!got.eta_fallback) CHECK(got.thetas.eta == te);
    CHECK((got.thetas.nu.array() >= 0.0).all());
    s = got.state;
    acc = got.acc;
    th = got.thetas;
  }
}

TEST_CASE("zero coefficients") {
  Rng rng(58);
  const Eigen::Index n = 4;
  const EigenBasis b = test::random_basis(n, rng);
  const KernelDictionary d = make_dictionary(b, {KernelSpec::diffusion(1.0)});
  CHECK(combine_or_zero(d, Vector::Zero(1)).matrix.isZero());

  // With nothing to match, a large regularizer projects theta_eta to exactly
  // zero; the previous value is kept.
  MKLConfig mkl;
  mkl.accumulator_mode = AccumulatorMode::SampleMean;
  mkl.mu_theta_nu = mkl.mu_theta_eta = 10.0;
  const ThetaPair th = initial_thetas(d, d);
  const auto acc0 = CorrelationAccumulator::make(n, mkl.accumulator_mode);
  const MkrikfStep st = mkrikf_step(mkrikf_initial_state(d, 1.0), acc0, th, Observation{1, {0, 2}, Vector::Zero(2)}, d,
                                    d, 1.0, 1.0, Matrix::Identity(n, n), mkl);
  CHECK(st.eta_fallback);
  CHECK(st.thetas.eta == th.eta);
  CHECK(st.thetas.nu.isZero());

  // theta_nu = 0 turns kriging off, and with no kriged mass it stays there.
  const MkrikfStep z = mkrikf_step(st.state, st.acc, st.thetas, Observation{2, {1}, Vector::Ones(1)}, d, d, 1.0, 1.0,
                                   Matrix::Identity(n, n), mkl);
  CHECK(z.estimate.nu.isZero());
  CHECK(z.thetas.nu.isZero());
}

TEST_CASE("config validation") {
  MKLConfig c;
  c.gamma_nu = 0.0;
  CHECK(code_of([&] { validate(c); }) == ErrorCode::InvalidParameter);
  c = MKLConfig{};
  c.mu_theta_eta = -1;
  CHECK(code_of([&] { validate(c); }) == ErrorCode::InvalidParameter);
  c = MKLConfig{};
  c.pgd.armijo_beta = 1.0;
  CHECK(code_of([&] { validate(c); }) == ErrorCode::InvalidParameter);
  CHECK_NOTHROW(validate(MKLConfig{}));
}
