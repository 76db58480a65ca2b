#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "wpmp/fields.hpp"

using namespace wpmp;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

BasisPtr basis_of(int dim, std::vector<BasisFieldPtr> f) { return std::make_shared<const ControlBasis>(dim, std::move(f)); }

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h) {
  Matrix j(f(x).size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vector e = Vector::Zero(x.size());
    e(k) = h;
    j.col(k) = (f(x + e) - f(x - e)) / (2.0 * h);
  }
  return j;
}

double rel_err(const Matrix& fd, const Matrix& an) {
  return (fd - an).cwiseAbs().maxCoeff() / (1.0 + an.cwiseAbs().maxCoeff());
}

std::vector<KernelPtr> catalog(int d) {
  Params cs;
  cs.set("strength", 0.7).set("beta", 0.8);
  Params la;
  la.set("strength", 1.3);
  return {make_kernel("linear_attraction", d, la), make_kernel("cucker_smale", d, cs),
          make_kernel("cucker_smale", d), make_kernel("zero", d)};
}

}  // namespace

TEST_CASE("velocity examples") {
  const KernelPtr lin = make_kernel("linear_attraction", 1);
  const KernelPtr cs = make_kernel("cucker_smale", 1);
  const KernelPtr zero = make_kernel("zero", 1);
  Matrix p(2, 1);
  p << 0, 2;
  const DiscreteMeasure mu = DiscreteMeasure::uniform(p);
  CHECK(eval_velocity(*lin, mu, 0.0, v1(0.0))(0) == doctest::Approx(1.0));
  CHECK(eval_velocity(*zero, mu, 0.0, v1(0.3))(0) == 0.0);
  CHECK(eval_velocity(*cs, DiscreteMeasure::dirac(v1(1.0)), 0.0, v1(0.0))(0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(eval_velocity(*lin, mu, 0.0, v2(0, 0)), DimensionError);
}

TEST_CASE("velocity jacobian and gamma examples") {
  const KernelPtr lin = make_kernel("linear_attraction", 2);
  const KernelPtr zero = make_kernel("zero", 2);
  std::mt19937_64 rng(3);
  const DiscreteMeasure mu = oracle::random_measure(rng, 4, 2);
  CHECK((eval_velocity_jacobian(*lin, mu, 0.0, v2(0.1, 0.2)) + Matrix::Identity(2, 2)).norm() < 1e-15);
  CHECK(eval_velocity_jacobian(*zero, mu, 0.0, v2(0.1, 0.2)).norm() == 0.0);
  CHECK((eval_gamma(*lin, 0.0, v2(1, 2), v2(3, 4)) - Matrix::Identity(2, 2)).norm() < 1e-15);
  CHECK(eval_gamma(*zero, 0.0, v2(1, 2), v2(3, 4)).norm() == 0.0);

  // 1D bounded-confidence kernel f(z) = z / (1 + z^2) has f'(1) = 0.
  const KernelPtr cs = make_kernel("cucker_smale", 1);
  const DiscreteMeasure d1 = DiscreteMeasure::dirac(v1(1.0));
  const double fd_x = (eval_velocity(*cs, d1, 0.0, v1(1e-5))(0) - eval_velocity(*cs, d1, 0.0, v1(-1e-5))(0)) / 2e-5;
  CHECK(std::abs(fd_x) < 1e-9);
  CHECK(std::abs(eval_velocity_jacobian(*cs, d1, 0.0, v1(0.0))(0, 0)) < 1e-12);
  const double fd_y = (cs->eval(0.0, v1(0.0), v1(1.0 + 1e-5))(0) - cs->eval(0.0, v1(0.0), v1(1.0 - 1e-5))(0)) / 2e-5;
  CHECK(std::abs(fd_y) < 1e-9);
  CHECK(std::abs(eval_gamma(*cs, 0.0, v1(0.0), v1(1.0))(0, 0)) < 1e-12);
}

TEST_CASE("kernel jacobians agree with central differences") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  for (int d : {1, 2, 3}) {
    for (const KernelPtr& k : catalog(d)) {
      double worst = 0.0;
      for (int s = 0; s < 100; ++s) {
        const double t = ut(rng);
        const Vector x = oracle::random_points(rng, 1, d, 2.0).row(0).transpose();
        const Vector y = oracle::random_points(rng, 1, d, 2.0).row(0).transpose();
        worst = std::max(worst, rel_err(fd_jacobian([&](const Vector& p) { return k->eval(t, p, y); }, x, 1e-4),
                                        k->jac_x(t, x, y)));
        worst = std::max(worst, rel_err(fd_jacobian([&](const Vector& p) { return k->eval(t, x, p); }, y, 1e-4),
                                        k->jac_y(t, x, y)));
      }
      INFO(k->id() << " d=" << d);
      CHECK(worst <= 1e-5);
    }
  }
}

TEST_CASE("velocity is Lipschitz in the measure with the declared constant") {
  std::mt19937_64 rng(5);
  for (int d : {1, 2}) {
    for (const KernelPtr& k : catalog(d)) {
      const double l2 = k->bounds().lipschitz_measure;
      for (int trial = 0; trial < 20; ++trial) {
        const DiscreteMeasure mu = oracle::random_measure(rng, 6, d);
        const DiscreteMeasure nu = oracle::random_measure(rng, 5, d);
        const Vector x = oracle::random_points(rng, 1, d).row(0).transpose();
        const double lhs = (eval_velocity(*k, mu, 0.0, x) - eval_velocity(*k, nu, 0.0, x)).norm();
        CHECK(lhs <= l2 * wasserstein(1, mu, nu) + 1e-12);
      }
    }
  }
}

TEST_CASE("batch velocities match pointwise sums") {
  std::mt19937_64 rng(6);
  for (const KernelPtr& k : catalog(2)) {
    const DiscreteMeasure mu = oracle::random_measure(rng, 7, 2);
    const Matrix at = oracle::random_points(rng, 4, 2);
    const Matrix v = k->velocities(0.3, mu.points(), mu.weights(), at);
    for (int i = 0; i < 4; ++i) {
      CHECK((v.row(i).transpose() - eval_velocity(*k, mu, 0.3, at.row(i).transpose())).norm() < 1e-14);
    }
  }
}

TEST_CASE("kernel catalog errors") {
  CHECK_THROWS_AS(make_kernel("nope", 2), InvalidArgument);
  Params p;
  p.set("beta", -1.0);
  CHECK_THROWS_AS(make_kernel("cucker_smale", 2, p), InvalidArgument);
}

TEST_CASE("function kernel falls back to finite differences") {
  const FunctionKernel k(
      1, "cubic", [](double, const Vector& x, const Vector& y) -> Vector { return (y - x).array().cube(); },
      KernelBounds{1.0, 1.0, 1.0});
  CHECK(k.jac_x(0.0, v1(0.0), v1(1.0))(0, 0) == doctest::Approx(-3.0).epsilon(1e-8));
  CHECK(k.jac_y(0.0, v1(0.0), v1(1.0))(0, 0) == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("control evaluation examples") {
  const BasisPtr cst = basis_of(2, {make_basis_field("constant", 2, Params().set("direction", {1.0, 0.0}))});
  const ControlLaw zero = ControlLaw::constant(cst, 1.0, Vector::Zero(1), 1.0);
  CHECK(eval_control(zero, 0.5, v2(3, 4)).norm() == 0.0);
  CHECK(eval_control_jacobian(zero, 0.5, v2(3, 4)).norm() == 0.0);
  const ControlLaw three = ControlLaw::constant(cst, 1.0, Vector::Constant(1, 3.0), 5.0);
  CHECK(eval_control(three, 0.2, v2(-7, 1)) == v2(3, 0));
  CHECK(eval_control_jacobian(three, 0.2, v2(-7, 1)).norm() == 0.0);
  const BasisPtr id = basis_of(1, {make_basis_field("identity", 1)});
  const ControlLaw lin = ControlLaw::constant(id, 1.0, Vector::Constant(1, 2.0), 100.0);
  CHECK(eval_control(lin, 0.7, v1(5.0))(0) == 10.0);
  CHECK(eval_control_jacobian(lin, 0.7, v1(5.0))(0, 0) == 2.0);
  CHECK_THROWS_AS(eval_control(lin, 1.5, v1(5.0)), InvalidArgument);
  CHECK_THROWS_AS(eval_control(lin, -0.1, v1(5.0)), InvalidArgument);
}

TEST_CASE("control cells use the left cell on boundaries") {
  const BasisPtr id = basis_of(1, {make_basis_field("identity", 1)});
  Matrix c(4, 1);
  c << 1, 2, 3, 4;
  const ControlLaw law(id, 1.0, c, 10.0);
  CHECK(law.cell_at(0.0) == 0);
  CHECK(law.cell_at(0.1) == 0);
  CHECK(law.cell_at(0.25) == 0);
  CHECK(law.cell_at(0.25 + 1e-6) == 1);
  CHECK(law.cell_at(0.5) == 1);
  CHECK(law.cell_at(1.0) == 3);
  CHECK(eval_control(law, 0.75, v1(1.0))(0) == 3.0);
  const ControlLaw fine = law.refined(8);
  for (double t : {0.0, 0.1, 0.3, 0.6, 0.9, 1.0}) CHECK(eval_control(fine, t, v1(1.0)) == eval_control(law, t, v1(1.0)));
  CHECK_THROWS_AS(law.refined(6), InvalidArgument);
}

TEST_CASE("control is linear in coefficients") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  const BasisPtr b = basis_of(2, {make_basis_field("constant", 2), make_basis_field("identity", 2),
                                  make_basis_field("rotation", 2), make_basis_field("tanh", 2)});
  for (int trial = 0; trial < 20; ++trial) {
    Matrix c1(3, 4), c2(3, 4);
    for (Eigen::Index i = 0; i < c1.size(); ++i) {
      c1(i) = std::ldexp(std::round(g(rng) * 64), -6);
      c2(i) = std::ldexp(std::round(g(rng) * 64), -6);
    }
    const ControlLaw a(b, 1.0, c1, 100.0), bb(b, 1.0, c2, 100.0), sum(b, 1.0, c1 + c2, 100.0);
    const Vector x = oracle::random_points(rng, 1, 2).row(0).transpose();
    const double t = 0.9 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    CHECK((eval_control(sum, t, x) - eval_control(a, t, x) - eval_control(bb, t, x)).norm() <= 1e-15);
    CHECK((eval_control_jacobian(sum, t, x) - eval_control_jacobian(a, t, x) - eval_control_jacobian(bb, t, x))
              .norm() <= 1e-15);
  }
}

TEST_CASE("basis field jacobians agree with central differences") {
  std::mt19937_64 rng(8);
  for (const char* id : {"constant", "identity", "rotation", "tanh"}) {
    const BasisFieldPtr f = make_basis_field(id, 2);
    for (int s = 0; s < 20; ++s) {
      const Vector x = oracle::random_points(rng, 1, 2, 2.0).row(0).transpose();
      CHECK(rel_err(fd_jacobian([&](const Vector& p) { return f->value(p); }, x, 1e-5), f->jacobian(x)) < 1e-8);
    }
  }
  CHECK_THROWS_AS(make_basis_field("rotation", 3), InvalidArgument);
  CHECK_THROWS_AS(make_basis_field("nope", 2), InvalidArgument);
}

TEST_CASE("hypothesis report for linear attraction") {
  const KernelPtr lin = make_kernel("linear_attraction", 2);
  const BasisPtr b = basis_of(2, {make_basis_field("constant", 2)});
  const ControlLaw law = ControlLaw::constant(b, 1.0, Vector::Constant(1, 0.5), 1.0);
  const HypothesisReport rep = check_hypotheses(*lin, law, 1.0, 500, 9);
  CHECK(rep.ok());
  CHECK(rep.estimated_lipschitz_space == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.declared_sublinearity == doctest::Approx(2.0));
  CHECK(rep.estimated_sublinearity <= rep.declared_sublinearity);
  // Exhaustive polar grid: sup |H(x, y)| over the unit ball pair is 2.
  double sup = 0.0;
  for (int a = 0; a < 64; ++a)
    for (int bb = 0; bb < 64; ++bb) {
      const double ta = 2 * M_PI * a / 64, tb = 2 * M_PI * bb / 64;
      sup = std::max(sup, lin->eval(0.0, v2(std::cos(ta), std::sin(ta)), v2(std::cos(tb), std::sin(tb))).norm());
    }
  CHECK(sup == doctest::Approx(rep.declared_sublinearity));
  CHECK(!rep.limitation.empty());
}

TEST_CASE("hypothesis report edge cases") {
  const BasisPtr b = basis_of(1, {make_basis_field("constant", 1)});
  const ControlLaw law = ControlLaw::constant(b, 1.0, Vector::Constant(1, 0.0), 1.0);
  const HypothesisReport z = check_hypotheses(*make_kernel("zero", 1), law, 1.0, 50);
  CHECK(z.estimated_sublinearity == 0.0);
  CHECK(z.estimated_lipschitz_space == 0.0);
  CHECK(z.estimated_lipschitz_measure == 0.0);
  CHECK(z.ok());

  const ControlLaw big = ControlLaw::constant(b, 1.0, Vector::Constant(1, 3.0), 1.0);
  const HypothesisReport over = check_hypotheses(*make_kernel("zero", 1), big, 1.0, 50);
  CHECK_FALSE(over.control_ok);
  CHECK_FALSE(over.ok());
  CHECK(!over.violations.empty());

  const FunctionKernel wrong(
      1, "wrong", [](double, const Vector& x, const Vector& y) -> Vector { return y - x; }, KernelBounds{1, 1, 1},
      [](double, const Vector&, const Vector&) -> Matrix { return Matrix::Constant(1, 1, -2.0); });
  CHECK_FALSE(check_hypotheses(wrong, law, 1.0, 20).jacobians_ok);
  CHECK_THROWS_AS(check_hypotheses(wrong, law, 0.0, 20), InvalidArgument);
}
