#include <cmath>
#include <utility>
#include <vector>

#include "doctest.h"
#include "leki/diagnostics.hpp"
#include "leki/models.hpp"
#include "leki/rng.hpp"

using namespace leki;

TEST_CASE("residual summaries match hand values") {
  Vector y(2), yhat(2);
  y << 0.0, 0.0;
  yhat << 3.0, 4.0;
  CHECK(misfit(y, yhat) == doctest::Approx(std::sqrt(12.5)));
  CHECK(max_error(y, yhat) == doctest::Approx(4.0));

  Vector truth(3), mean(3);
  truth << 1.0, 2.0, 3.0;
  mean << 2.0, 2.0, 1.0;
  CHECK(rmse(truth, mean) == doctest::Approx(std::sqrt(5.0 / 3.0)));

  Vector stds(2);
  stds << 3.0, 4.0;
  CHECK(scaled_misfit(y, yhat, stds) == doctest::Approx(1.0));

  CHECK_THROWS_AS((void)misfit(y, Vector::Zero(3)), UsageError);
  CHECK_THROWS_AS((void)misfit(Vector::Zero(0), Vector::Zero(0)), UsageError);
  Vector bad_stds(2);
  bad_stds << 1.0, 0.0;
  CHECK_THROWS_AS((void)scaled_misfit(y, yhat, bad_stds), ConfigError);
  CHECK_THROWS_AS((void)scaled_misfit(y, yhat, Vector::Ones(3)), UsageError);
}

TEST_CASE("localization error matrix vanishes for a matched linearized scheme") {
  RngStream rng(80, 0, StreamRole::Init);
  const Matrix h = rng.normal_matrix(3, 5);
  const LinearModel model(h);
  const Ensemble ens(rng.normal_matrix(5, 8));
  const EnsembleStats st =
      compute_stats(ens, model.evaluate_members(ens.members()));

  LocalizationScheme scheme;
  scheme.kind = SchemeKind::Linearized;
  scheme.psi = build_psi(DistanceMetric::lattice(), Kernel::Gaussian, 2.0, 5);
  scheme.jacobian_at = [&h](const Vector&) { return h; };

  const Matrix r = error_matrix_R(st, scheme, h);
  REQUIRE(r.rows() == 3);
  REQUIRE(r.cols() == 3);
  CHECK(r.cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS((void)error_matrix_R(st, scheme, Matrix::Zero(3, 4)),
                  UsageError);
}

TEST_CASE("error matrix is nonzero when the taper distorts the update") {
  RngStream rng(81, 0, StreamRole::Init);
  const Matrix h = rng.normal_matrix(4, 4);
  const LinearModel model(h);
  const Ensemble ens(rng.normal_matrix(4, 10));
  const EnsembleStats st =
      compute_stats(ens, model.evaluate_members(ens.members()));

  LocalizationScheme scheme;
  scheme.kind = SchemeKind::ParamOnly;
  scheme.psi = build_psi(DistanceMetric::lattice(), Kernel::Gaussian, 1.0, 4);
  // raw cross-covariance against a tapered covariance: generically nonzero
  CHECK(error_matrix_R(st, scheme, h).cwiseAbs().maxCoeff() > 1e-8);
}

TEST_CASE("observability and regularity ratios behave at the extremes") {
  RngStream rng(82, 0, StreamRole::Init);
  const Ensemble ens(rng.normal_matrix(4, 12));
  // identity forward map: outputs are the members themselves
  const EnsembleStats st = compute_stats(ens, ens.members());

  // unlocalized cross-covariance: the diagonal term alone already gives 1
  CHECK(obs_ratio(st, st.cup) >= 1.0);
  CHECK(reg_ratio(st, st.cup) > 0.0);

  // collapsed ensemble: degenerate denominator reports 0
  Matrix flat(3, 4);
  flat << 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3;
  const Ensemble collapsed(flat);
  const EnsembleStats cst = compute_stats(collapsed, collapsed.members());
  CHECK(obs_ratio(cst, cst.cup) == 0.0);
  CHECK(reg_ratio(cst, cst.cup) == 0.0);

  CHECK_THROWS_AS((void)obs_ratio(st, Matrix::Zero(3, 3)), UsageError);
  CHECK_THROWS_AS((void)reg_ratio(st, Matrix::Zero(3, 3)), UsageError);
}

TEST_CASE("collapse rate recovers known decay exponents") {
  std::vector<std::pair<double, double>> inv, flat, sq;
  for (int i = 0; i <= 400; ++i) {
    const double t = 0.25 * i;
    inv.emplace_back(t, 3.0 / (1.0 + t));
    flat.emplace_back(t, 0.7);
    sq.emplace_back(t, 5.0 / ((1.0 + t) * (1.0 + t)));
  }
  CHECK(collapse_rate(inv, 10.0, 50.0) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(collapse_rate(flat, 10.0, 50.0) == doctest::Approx(0.0));
  CHECK(collapse_rate(sq, 10.0, 50.0) == doctest::Approx(-2.0).epsilon(1e-10));

  std::vector<std::pair<double, double>> few = {
      {10.0, 1.0}, {20.0, 0.5}, {30.0, 0.3}, {40.0, 0.2}};
  CHECK_THROWS_AS((void)collapse_rate(few, 0.0, 100.0), DomainError);
  // nonpositive values inside the window do not count toward the five
  std::vector<std::pair<double, double>> zeros;
  for (int i = 0; i < 10; ++i) zeros.emplace_back(10.0 + i, 0.0);
  CHECK_THROWS_AS((void)collapse_rate(zeros, 0.0, 100.0), DomainError);
}

TEST_CASE("comparison ODE solution: exact decay and long-time asymptote") {
  RiccatiParams clean;
  clean.a = 2.0;
  clean.b = 0.0;
  clean.sigma = 0.0;
  clean.y0 = 3.0;
  for (double t : {0.0, 0.5, 1.0, 10.0, 100.0})
    CHECK(riccati_solution(clean, t) ==
          doctest::Approx(3.0 / (1.0 + 2.0 * 3.0 * t)).epsilon(1e-12));

  RiccatiParams inflated;
  inflated.a = 1.0;
  inflated.b = 0.0;
  inflated.sigma = 1.0;
  inflated.y0 = 1.0;
  const double t = 1e6;
  const double golden = 0.5 * (1.0 + std::sqrt(5.0));
  CHECK(riccati_solution(inflated, t) * (t + 1.0) ==
        doctest::Approx(golden).epsilon(1e-3));
  CHECK(riccati_solution(inflated, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("comparison ODE solves its own equation numerically") {
  RiccatiParams p;
  p.a = 1.5;
  p.b = 0.5;
  p.sigma = 0.8;
  p.y0 = 2.0;
  const double h = 1e-5;
  for (double t : {0.5, 1.0, 3.0, 10.0, 40.0}) {
    const double y = riccati_solution(p, t);
    const double dydt =
        (riccati_solution(p, t + h) - riccati_solution(p, t - h)) / (2.0 * h);
    const double rhs = -p.a * y * y - p.b * y / (t + 1.0) +
                       p.sigma / ((t + 1.0) * (t + 1.0));
    CHECK(dydt == doctest::Approx(rhs).epsilon(1e-5));
  }
}

TEST_CASE("comparison ODE parameter validation") {
  RiccatiParams p;
  p.a = 0.0;
  CHECK_THROWS_AS((void)riccati_solution(p, 1.0), DomainError);
  p = RiccatiParams{};
  p.sigma = -1.0;
  CHECK_THROWS_AS((void)riccati_solution(p, 1.0), DomainError);
  p = RiccatiParams{};
  p.y0 = -0.5;
  CHECK_THROWS_AS((void)riccati_solution(p, 1.0), DomainError);
  p = RiccatiParams{};
  CHECK_THROWS_AS((void)riccati_solution(p, -1.0), DomainError);
}

TEST_CASE("first-visit values match the hand-solved two-state chain") {
  Matrix phi(2, 2);
  phi << 0.0, 0.2, 0.2, 0.0;
  const Vector v = v_vector(phi, 0.5, 0);
  REQUIRE(v.size() == 2);
  CHECK(v(0) == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
  CHECK(v(1) == doctest::Approx(2.0 / 9.0).epsilon(1e-12));

  const Vector single = v_vector(Matrix::Zero(1, 1), 1.0, 0);
  REQUIRE(single.size() == 1);
  CHECK(single(0) == doctest::Approx(1.0));
}

TEST_CASE("first-visit values satisfy the certificate inequalities") {
  RngStream rng(83, 0, StreamRole::Init);
  for (int k = 0; k < 100; ++k) {
    const int d = 2 + int(rng.uniform() * 6);
    Matrix phi = Matrix::Zero(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = r + 1; c < d; ++c)
        phi(r, c) = phi(c, r) = rng.uniform(0.0, 0.8 / d);
    const double max_row = phi.rowwise().sum().maxCoeff();
    const double phi0 = (1.0 - max_row) * rng.uniform(0.2, 1.0);
    const int i = int(rng.uniform() * d);
    const Vector v = v_vector(phi, phi0, i);
    CHECK(v.minCoeff() >= -1e-12);
    CHECK(v(i) >= phi0 - 1e-12);
    for (int r = 0; r < d; ++r)
      CHECK(phi.row(r).dot(v) <= v(r) + 1e-12);
    CHECK(v.sum() <= 1.0 + 1e-12);
  }
}

TEST_CASE("first-visit argument validation") {
  Matrix phi(2, 2);
  phi << 0.0, 0.6, 0.6, 0.0;
  CHECK_THROWS_AS((void)v_vector(phi, 0.5, 0), DomainError);  // 0.5 > 1 - 0.6
  CHECK_THROWS_AS((void)v_vector(phi, 0.0, 0), DomainError);
  CHECK_THROWS_AS((void)v_vector(phi, 1.5, 0), DomainError);
  Matrix asym(2, 2);
  asym << 0.0, 0.2, 0.1, 0.0;
  CHECK_THROWS_AS((void)v_vector(asym, 0.1, 0), UsageError);
  Matrix diag(2, 2);
  diag << 0.1, 0.0, 0.0, 0.0;
  CHECK_THROWS_AS((void)v_vector(diag, 0.1, 0), UsageError);
  Matrix neg(2, 2);
  neg << 0.0, -0.1, -0.1, 0.0;
  CHECK_THROWS_AS((void)v_vector(neg, 0.1, 0), UsageError);
  CHECK_THROWS_AS((void)v_vector(phi, 0.1, 5), UsageError);
}
