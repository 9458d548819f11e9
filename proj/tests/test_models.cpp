#include <cmath>
#include <memory>

#include "doctest.h"
#include "leki/models.hpp"
#include "leki/rng.hpp"

using namespace leki;

namespace {

struct NoJacobianModel final : ForwardModel {
  int param_dim() const override { return 2; }
  int output_dim() const override { return 1; }
  Vector evaluate(const Vector& u) const override {
    check_param_dim(u);
    Vector y(1);
    y << u(0) * u(1);
    return y;
  }
};

double max_rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("linear model applies its matrix") {
  RngStream rng(50, 0, StreamRole::Init);
  const Matrix h = rng.normal_matrix(3, 5);
  const LinearModel model(h);
  CHECK(model.param_dim() == 5);
  CHECK(model.output_dim() == 3);

  const Vector u = rng.normal_vector(5);
  CHECK(((model.evaluate(u) - h * u).cwiseAbs().maxCoeff()) < 1e-14);
  CHECK(model.has_jacobian());
  CHECK((model.jacobian(u) - h).cwiseAbs().maxCoeff() == 0.0);

  const Matrix members = rng.normal_matrix(5, 7);
  CHECK(((model.evaluate_members(members) - h * members).cwiseAbs()
             .maxCoeff()) < 1e-14);
  CHECK(!model.locality().has_value());

  CHECK_THROWS_AS((void)model.evaluate(rng.normal_vector(4)), ConfigError);
}

TEST_CASE("identity linear model short-circuits and reports locality") {
  const LinearModel model = LinearModel::identity(4);
  RngStream rng(51, 0, StreamRole::Init);
  const Vector u = rng.normal_vector(4);
  CHECK((model.evaluate(u) - u).cwiseAbs().maxCoeff() == 0.0);
  CHECK((model.h() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);

  const auto loc = model.locality();
  REQUIRE(loc.has_value());
  REQUIRE(loc->centers.size() == 4);
  REQUIRE(loc->footprints.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(loc->centers[i] == i);
    REQUIRE(loc->footprints[i].size() == 1);
    CHECK(loc->footprints[i][0] == i);
  }
}

TEST_CASE("local cubic matches the hand-computed unit-vector response") {
  const LocalCubicModel model(11);
  Vector u = Vector::Zero(11);
  u(5) = 1.0;
  const Vector y = model.evaluate(u);
  // every output sees the spike, m_i = 0.1 everywhere
  for (int i = 0; i < 11; ++i) {
    const double expect =
        (i == 5 ? 0.9836794919243112 : -0.016320508075688772);
    CHECK(y(i) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("local cubic keeps divisor 10 at the boundary") {
  const LocalCubicModel model(6);
  const Vector u = Vector::Ones(6);
  const Vector y = model.evaluate(u);
  // output 0 averages entries 0..5 only: m = 6/10
  const double m = 0.6;
  CHECK(y(0) == doctest::Approx(1.0 - std::sqrt(3.0) * m * m + m * m * m)
                    .epsilon(1e-12));
  // interior-most output still misses indices beyond the edge: entries 0..5
  // for outputs 0..5 all give the same truncated sum here
  CHECK(y(5) == doctest::Approx(y(0)).epsilon(1e-12));
}

TEST_CASE("local cubic jacobian agrees with finite differences") {
  const LocalCubicModel model(13);
  RngStream rng(52, 0, StreamRole::Init);
  for (int k = 0; k < 5; ++k) {
    const Vector u = rng.normal_vector(13);
    const Matrix fd = finite_difference_jacobian(model, u);
    CHECK(max_rel_diff(model.jacobian(u), fd) < 1e-6);
  }
}

TEST_CASE("local cubic locality clips the footprint at the edges") {
  const LocalCubicModel model(12);
  const auto loc = model.locality();
  REQUIRE(loc.has_value());
  REQUIRE(loc->centers.size() == 12);
  REQUIRE(loc->footprints.size() == 12);
  CHECK(loc->centers[3] == 3);
  CHECK(loc->footprints[0] == std::vector<int>({0, 1, 2, 3, 4, 5}));
  CHECK(loc->footprints[6] ==
        std::vector<int>({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}));
  CHECK(loc->footprints[11] == std::vector<int>({6, 7, 8, 9, 10, 11}));
}

TEST_CASE("lorenz96 right-hand side matches the cyclic formula") {
  Vector x(4);
  x << 1, 2, 3, 4;
  const Vector r = l96_rhs(x, 0.0);
  CHECK(r(0) == doctest::Approx(-5.0));
  CHECK(r(1) == doctest::Approx(-3.0));
  CHECK(r(2) == doctest::Approx(3.0));
  CHECK(r(3) == doctest::Approx(-7.0));

  const Vector rf = l96_rhs(x, 8.0);
  for (int i = 0; i < 4; ++i) CHECK(rf(i) == doctest::Approx(r(i) + 8.0));
}

TEST_CASE("constant forcing state is a fixed point") {
  const double f = 8.0;
  const Vector x = Vector::Constant(6, f);
  CHECK(l96_rhs(x, f).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  const Vector after = l96_integrate(x, 1.0, 0.05, f);
  CHECK((after - x).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  const Vector after4 = l96_integrate_rk4(x, 1.0, 0.05, f);
  CHECK((after4 - x).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("euler integration takes round(duration/dt) explicit steps") {
  RngStream rng(53, 0, StreamRole::Init);
  Vector x = rng.normal_vector(5);
  const double dt = 0.05, forcing = 8.0;
  Vector manual = x;
  for (int s = 0; s < 4; ++s) manual += dt * l96_rhs(manual, forcing);
  const Vector lib = l96_integrate(x, 0.2, dt, forcing);
  CHECK((lib - manual).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("integrators agree at small steps and rk4 stays on the attractor") {
  RngStream rng(54, 0, StreamRole::Init);
  const Vector x0 = Vector::Constant(8, 8.0) + rng.normal_vector(8);
  const Vector fine = l96_integrate(x0, 0.1, 1e-5, 8.0);
  const Vector rk = l96_integrate_rk4(x0, 0.1, 0.01, 8.0);
  CHECK((fine - rk).cwiseAbs().maxCoeff() < 5e-4);

  Vector far = l96_integrate_rk4(x0, 200.0, 0.05, 8.0);
  CHECK(far.allFinite());
  CHECK(far.cwiseAbs().maxCoeff() < 30.0);
}

TEST_CASE("lorenz96 forward map is the euler flow observed fully") {
  const Lorenz96Model model(7, 8.0, 0.2, 0.05);
  CHECK(model.param_dim() == 7);
  CHECK(model.output_dim() == 7);
  CHECK(model.forcing() == 8.0);
  CHECK(model.dt() == 0.05);

  RngStream rng(55, 0, StreamRole::Init);
  const Vector u = rng.normal_vector(7);
  const Vector ref = l96_integrate(u, 0.2, 0.05, 8.0);
  CHECK((model.evaluate(u) - ref).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS((void)model.evaluate(rng.normal_vector(6)), ConfigError);

  const auto loc = model.locality();
  REQUIRE(loc.has_value());
  REQUIRE(loc->centers.size() == 7);
  for (int i = 0; i < 7; ++i) CHECK(loc->centers[i] == i);
}

TEST_CASE("lorenz96 jacobian differentiates through the integration") {
  const Lorenz96Model model(6, 8.0, 0.2, 0.05);
  RngStream rng(56, 0, StreamRole::Init);
  for (int k = 0; k < 3; ++k) {
    const Vector u = Vector::Constant(6, 2.0) + rng.normal_vector(6);
    const Matrix fd = finite_difference_jacobian(model, u);
    CHECK(max_rel_diff(model.jacobian(u), fd) < 1e-5);
  }
}

TEST_CASE("finite differences recover a linear map exactly") {
  RngStream rng(57, 0, StreamRole::Init);
  const Matrix h = rng.normal_matrix(4, 3);
  const LinearModel model(h);
  const Matrix fd = finite_difference_jacobian(model, rng.normal_vector(3));
  CHECK((fd - h).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("default virtuals loop and refuse jacobians") {
  const NoJacobianModel model;
  CHECK(!model.has_jacobian());
  CHECK_THROWS_AS((void)model.jacobian(Vector::Zero(2)), UsageError);

  RngStream rng(58, 0, StreamRole::Init);
  const Matrix members = rng.normal_matrix(2, 5);
  const Matrix out = model.evaluate_members(members);
  REQUIRE(out.rows() == 1);
  REQUIRE(out.cols() == 5);
  for (int j = 0; j < 5; ++j)
    CHECK(out(0, j) == doctest::Approx(members(0, j) * members(1, j)));
}
