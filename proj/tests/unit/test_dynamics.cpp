#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "wpmp/dynamics.hpp"

using namespace wpmp;

namespace {

BasisPtr constant_basis(int d) {
  std::vector<BasisFieldPtr> fields;
  for (int k = 0; k < d; ++k) {
    std::vector<double> dir(static_cast<std::size_t>(d), 0.0);
    dir[static_cast<std::size_t>(k)] = 1.0;
    fields.push_back(make_basis_field("constant", d, Params().set("direction", dir)));
  }
  return std::make_shared<const ControlBasis>(d, fields);
}

BasisPtr rich_basis_2d() {
  std::vector<BasisFieldPtr> fields{make_basis_field("constant", 2, Params().set("direction", {1.0, 0.0})),
                                    make_basis_field("constant", 2, Params().set("direction", {0.0, 1.0})),
                                    make_basis_field("rotation", 2), make_basis_field("tanh", 2)};
  return std::make_shared<const ControlBasis>(2, fields);
}

DiscreteMeasure symmetric_pair() {
  Matrix pts(2, 1);
  pts << -1.0, 1.0;
  return DiscreteMeasure::uniform(pts);
}

double collapse_error(int steps) {
  const KernelPtr k = make_kernel("linear_attraction", 1);
  const BasisPtr b = constant_basis(1);
  const ControlLaw law = ControlLaw::constant(b, 1.0, Vector::Zero(1), 1.0);
  const TrajectorySolution traj = solve_forward(symmetric_pair(), *k, law, TimeGrid(1.0, steps));
  double err = 0.0;
  for (int n = 0; n <= steps; ++n) {
    const double e = std::exp(-traj.grid.time(n));
    err = std::max(err, std::abs(traj.nodes[n](0, 0) + e));
    err = std::max(err, std::abs(traj.nodes[n](1, 0) - e));
  }
  return err;
}

// A small interacting 2D problem with a time-varying control.
struct Interacting {
  KernelPtr kernel = make_kernel("cucker_smale", 2, Params().set("beta", 0.5));
  BasisPtr basis = rich_basis_2d();
  ControlLaw law;
  DiscreteMeasure mu0;
  TimeGrid grid{1.0, 40};

  explicit Interacting(unsigned seed) : law(make_law()), mu0(make_mu(seed)) {}

  ControlLaw make_law() const {
    Matrix c(4, 4);
    c << 0.3, -0.2, 0.5, 0.1, -0.1, 0.4, -0.3, 0.2, 0.2, 0.2, 0.1, -0.4, 0.0, -0.3, 0.4, 0.3;
    return ControlLaw(basis, 1.0, c, 2.0);
  }
  static DiscreteMeasure make_mu(unsigned seed) {
    std::mt19937_64 rng(seed);
    return oracle::random_measure(rng, 5, 2);
  }
};

}  // namespace

TEST_CASE("time grid") {
  const TimeGrid g(2.0, 8);
  CHECK(g.dt() == doctest::Approx(0.25));
  CHECK(g.time(8) == doctest::Approx(2.0));
  CHECK(g.node_at(0.75) == 3);
  CHECK_THROWS_AS(g.node_at(0.3), InvalidArgument);
  CHECK_THROWS_AS(TimeGrid(0.0, 4), InvalidArgument);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), InvalidArgument);
}

TEST_CASE("zero kernel with constant control translates") {
  const KernelPtr k = make_kernel("zero", 2);
  const BasisPtr b = constant_basis(2);
  Vector c(2);
  c << 0.5, -1.0;
  const ControlLaw law = ControlLaw::constant(b, 2.0, c, 5.0);
  std::mt19937_64 rng(31);
  const DiscreteMeasure mu0 = oracle::random_measure(rng, 4, 2);
  const TrajectorySolution traj = solve_forward(mu0, *k, law, TimeGrid(2.0, 10));
  for (int n = 0; n <= 10; ++n) {
    const Matrix expect = mu0.points().rowwise() + traj.grid.time(n) * c.transpose();
    CHECK((traj.nodes[n] - expect).cwiseAbs().maxCoeff() < 1e-13);
  }
  CHECK(traj.weights == mu0.weights());
  CHECK(traj.cloud(10).weights() == mu0.weights());
}

TEST_CASE("linear attraction collapses symmetrically") {
  CHECK(collapse_error(1000) <= 1e-6);
}

TEST_CASE("observed RK4 order") {
  const double e1 = collapse_error(10);
  const double e2 = collapse_error(20);
  const double e3 = collapse_error(40);
  CHECK(std::log2(e1 / e2) >= 3.5);
  CHECK(std::log2(e2 / e3) >= 3.5);
}

TEST_CASE("forward solver rejects mismatched control layouts") {
  const KernelPtr k = make_kernel("zero", 1);
  const BasisPtr b = constant_basis(1);
  const ControlLaw law(b, 1.0, Matrix::Zero(3, 1), 1.0);
  CHECK_THROWS_AS(solve_forward(symmetric_pair(), *k, law, TimeGrid(1.0, 10)), InvalidArgument);
  const ControlLaw other(b, 2.0, Matrix::Zero(1, 1), 1.0);
  CHECK_THROWS_AS(solve_forward(symmetric_pair(), *k, other, TimeGrid(1.0, 10)), InvalidArgument);
}

TEST_CASE("stiff attraction blows up with the offending step") {
  const KernelPtr k = make_kernel("linear_attraction", 1, Params().set("strength", 1000.0));
  const BasisPtr b = constant_basis(1);
  const ControlLaw law = ControlLaw::constant(b, 10.0, Vector::Zero(1), 1.0);
  try {
    solve_forward(symmetric_pair(), *k, law, TimeGrid(10.0, 100));
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(e.step() >= 0);
    CHECK(e.step() < 100);
    CHECK(std::string(e.what()).find("step " + std::to_string(e.step())) != std::string::npos);
  }
}

TEST_CASE("flow map is consistent with atom trajectories and composes") {
  const Interacting p(32);
  const TrajectorySolution traj = solve_forward(p.mu0, *p.kernel, p.law, p.grid);
  for (int i = 0; i < p.mu0.size(); ++i) {
    for (int t : {7, 20, 40}) {
      const Vector x = flow_map(traj, *p.kernel, p.law, 0, t, p.mu0.point(i));
      CHECK((x - traj.nodes[t].row(i).transpose()).norm() <= 1e-8);
    }
  }
  const Vector x(Vector::Constant(2, 0.3));
  for (auto [r, s, t] : {std::array<int, 3>{0, 10, 40}, {5, 17, 33}, {12, 12, 30}}) {
    const Vector direct = flow_map(traj, *p.kernel, p.law, r, t, x);
    const Vector composed = flow_map(traj, *p.kernel, p.law, s, t, flow_map(traj, *p.kernel, p.law, r, s, x));
    CHECK((direct - composed).norm() <= 1e-8);
  }
  // Backward flow approximately inverts the forward flow.
  const Vector y = flow_map(traj, *p.kernel, p.law, 4, 36, x);
  CHECK((flow_map(traj, *p.kernel, p.law, 36, 4, y) - x).norm() <= 1e-4);
  CHECK_THROWS_AS(flow_map(traj, *p.kernel, p.law, 0, 41, x), InvalidArgument);
}

TEST_CASE("classical linearization matches finite differences of the flow") {
  const Interacting p(33);
  const TrajectorySolution traj = solve_forward(p.mu0, *p.kernel, p.law, p.grid);
  const Vector x = p.mu0.point(1) + Vector::Constant(2, 0.05);
  Vector h(2);
  h << 0.6, -0.8;
  const int s = 8;
  const NodePath w = solve_linearized_classical(traj, *p.kernel, p.law, s, x, h);
  const double eps = 1e-5;
  for (int t : {s, 20, 40}) {
    const Vector fd = (flow_map(traj, *p.kernel, p.law, s, t, x + eps * h) -
                       flow_map(traj, *p.kernel, p.law, s, t, x - eps * h)) / (2 * eps);
    CHECK((fd - w.at(t)).norm() <= 1e-7);
  }
}

TEST_CASE("nonlocal linearization matches perturbed forward solves") {
  const Interacting p(34);
  const TrajectorySolution traj = solve_forward(p.mu0, *p.kernel, p.law, p.grid);
  std::mt19937_64 rng(35);
  std::normal_distribution<double> g;
  Matrix V(p.mu0.size(), 2);
  for (Eigen::Index i = 0; i < V.size(); ++i) V(i) = g(rng);
  const NonlocalLinearization lin = solve_linearized_nonlocal(traj, *p.kernel, p.law, 0, V);
  CHECK(lin.nonlocal.at(0).norm() == 0.0);
  const double eps = 1e-5;
  const TrajectorySolution plus = solve_forward(p.mu0.with_points(p.mu0.points() + eps * V), *p.kernel, p.law, p.grid);
  const TrajectorySolution minus = solve_forward(p.mu0.with_points(p.mu0.points() - eps * V), *p.kernel, p.law, p.grid);
  for (int t : {10, 25, 40}) {
    const Matrix fd = (plus.nodes[t] - minus.nodes[t]) / (2 * eps);
    CHECK((fd - lin.classical.at(t) - lin.nonlocal.at(t)).cwiseAbs().maxCoeff() <= 1e-6);
  }
  // The interaction actually matters here.
  CHECK(lin.nonlocal.at(40).norm() > 1e-3);
}

TEST_CASE("needle validation and application") {
  const TimeGrid grid(1.0, 10);
  const BasisPtr b = constant_basis(1);
  const ControlLaw law = ControlLaw::constant(b, 1.0, Vector::Constant(1, 0.2), 2.0);
  const ControlField omega(b, Vector::Constant(1, -1.0));
  const NeedlePackage pkg{{{omega, 5, 0.2}, {omega, 9, 0.1}}};
  const ControlLaw needled = apply_needle(law, pkg, grid);
  CHECK(needled.cells() == 10);
  CHECK(needled.eval(0.3, Vector::Zero(1))(0) == doctest::Approx(0.2));
  CHECK(needled.eval(0.35, Vector::Zero(1))(0) == doctest::Approx(-1.0));
  // Boundaries follow the left-cell convention: tau is inside, tau - e is not.
  CHECK(needled.eval(0.5, Vector::Zero(1))(0) == doctest::Approx(-1.0));
  CHECK(needled.eval(0.55, Vector::Zero(1))(0) == doctest::Approx(0.2));
  CHECK(needled.eval(0.85, Vector::Zero(1))(0) == doctest::Approx(-1.0));
  CHECK(needled.eval(0.95, Vector::Zero(1))(0) == doctest::Approx(0.2));
  CHECK(apply_needle(law, NeedlePackage{{{omega, 5, 0.0}}}, grid).coefficients() == law.refined(10).coefficients());

  CHECK_THROWS_AS(validate_needles(NeedlePackage{{{omega, 5, 0.15}}}, grid), InvalidArgument);
  CHECK_THROWS_AS(validate_needles(NeedlePackage{{{omega, 1, 0.2}}}, grid), InvalidArgument);
  CHECK_THROWS_AS(validate_needles(NeedlePackage{{{omega, 11, 0.1}}}, grid), InvalidArgument);
  CHECK_THROWS_AS(validate_needles(NeedlePackage{{{omega, 5, -0.1}}}, grid), InvalidArgument);
  // Closed windows sharing an endpoint overlap.
  CHECK_THROWS_AS(validate_needles(NeedlePackage{{{omega, 5, 0.2}, {omega, 7, 0.2}}}, grid), InvalidArgument);
  CHECK_NOTHROW(validate_needles(NeedlePackage{{{omega, 5, 0.2}, {omega, 8, 0.2}}}, grid));
  CHECK_THROWS_AS(apply_needle(law, NeedlePackage{{{ControlField(rich_basis_2d(), Vector::Zero(4)), 5, 0.1}}}, grid),
                  InvalidArgument);
}

TEST_CASE("needle linearization starts at omega minus u and matches finite differences") {
  const Interacting p(36);
  const TrajectorySolution traj = solve_forward(p.mu0, *p.kernel, p.law, p.grid);
  Vector c(4);
  c << -0.5, 0.3, 0.2, 0.6;
  const ControlField omega(p.basis, c);
  const int tau = 20;
  const AtomPaths F = solve_needle_linearization(traj, *p.kernel, p.law, omega, tau);
  for (int i = 0; i < p.mu0.size(); ++i) {
    const Vector x = traj.nodes[tau].row(i).transpose();
    CHECK((F.at(tau).row(i).transpose() - (omega.value(x) - p.law.eval(p.grid.time(tau), x))).norm() < 1e-14);
  }
  // One-step needle on a fine grid: (x^e - x) / e approaches F.
  const TimeGrid fine(1.0, 640);
  const TrajectorySolution ft = solve_forward(p.mu0, *p.kernel, p.law, fine);
  const int ftau = 320;
  const AtomPaths FF = solve_needle_linearization(ft, *p.kernel, p.law, omega, ftau);
  const double e = fine.dt();
  const TrajectorySolution pert =
      solve_forward(p.mu0, *p.kernel, apply_needle(p.law, NeedlePackage{{{omega, ftau, e}}}, fine), fine);
  const Matrix quotient = (pert.nodes[640] - ft.nodes[640]) / e;
  CHECK((quotient - FF.at(640)).cwiseAbs().maxCoeff() <= 1e-2 * (1 + FF.at(640).cwiseAbs().maxCoeff()));
}

TEST_CASE("first-order needle residual") {
  SUBCASE("no dynamics gives zero residual") {
    const KernelPtr k = make_kernel("zero", 1);
    const BasisPtr b = constant_basis(1);
    const ControlLaw law = ControlLaw::constant(b, 1.0, Vector::Zero(1), 2.0);
    const TimeGrid grid(1.0, 16);
    const TrajectorySolution traj = solve_forward(symmetric_pair(), *k, law, grid);
    const ControlField omega(b, Vector::Constant(1, 1.5));
    const NeedleTable table = verify_first_order(traj, *k, law, NeedlePackage{{{omega, 8, 0.25}}}, 2);
    CHECK(table.rows.size() == 3);
    CHECK(table.max_residual <= 1e-9);
    CHECK(table.ratio_decreasing);
  }
  SUBCASE("interacting two-needle package") {
    const Interacting p(37);
    const TimeGrid grid(1.0, 64);
    const TrajectorySolution traj = solve_forward(p.mu0, *p.kernel, p.law, grid);
    Vector c1(4), c2(4);
    c1 << 1.0, 0.0, 0.5, 0.0;
    c2 << 0.0, -1.0, 0.0, 0.5;
    const NeedlePackage pkg{{{ControlField(p.basis, c1), 24, 0.125}, {ControlField(p.basis, c2), 56, 0.125}}};
    const NeedleTable table = verify_first_order(traj, *p.kernel, p.law, pkg, 3);
    REQUIRE(table.rows.size() == 4);
    CHECK(table.ratio_decreasing);
    for (std::size_t k = 1; k < table.rows.size(); ++k) {
      CHECK(table.rows[k].norm_e == doctest::Approx(0.5 * table.rows[k - 1].norm_e));
      CHECK(table.rows[k].ratio < table.rows[k - 1].ratio);
    }
  }
  CHECK_THROWS_AS(verify_first_order(solve_forward(symmetric_pair(), *make_kernel("zero", 1),
                                                   ControlLaw::constant(constant_basis(1), 1.0, Vector::Zero(1), 1.0),
                                                   TimeGrid(1.0, 4)),
                                     *make_kernel("zero", 1),
                                     ControlLaw::constant(constant_basis(1), 1.0, Vector::Zero(1), 1.0), {}, -1),
                  InvalidArgument);
}

TEST_CASE("W1 stability of the flow over sampled pairs") {
  const KernelPtr k = make_kernel("cucker_smale", 2);
  const BasisPtr b = rich_basis_2d();
  Vector c(4);
  c << 0.2, -0.1, 0.3, 0.4;
  const ControlLaw law = ControlLaw::constant(b, 1.0, c, 2.0);
  const TimeGrid grid(1.0, 20);
  const KernelBounds kb = k->bounds();
  const double lu = 0.3 + 0.4;  // rotation and tanh Jacobians have norm at most 1
  const double C = std::exp((kb.lipschitz_space + kb.lipschitz_measure + lu) * grid.horizon);
  std::mt19937_64 rng(38);
  for (int trial = 0; trial < 20; ++trial) {
    const DiscreteMeasure mu = oracle::random_measure(rng, 6, 2);
    const DiscreteMeasure nu = oracle::random_measure(rng, 5, 2);
    const double w0 = wasserstein(1, mu, nu);
    const TrajectorySolution a = solve_forward(mu, *k, law, grid);
    const TrajectorySolution bb = solve_forward(nu, *k, law, grid);
    CHECK(wasserstein(1, a.cloud(20), bb.cloud(20)) <= C * w0);
  }
}

TEST_CASE("support stays inside the Gronwall radius") {
  const Interacting p(39);
  const TrajectorySolution traj = solve_forward(p.mu0, *p.kernel, p.law, p.grid);
  CHECK(traj.gronwall_radius >= support_radius(p.mu0));
  for (int n = 0; n <= p.grid.steps; ++n) CHECK(support_radius(traj.cloud(n)) <= traj.radius_bound);
  CHECK(traj.radius_bound >= traj.gronwall_radius);
}

TEST_CASE("trajectory CSV layout") {
  const Interacting p(40);
  const TrajectorySolution traj = solve_forward(p.mu0, *p.kernel, p.law, TimeGrid(1.0, 4));
  std::ostringstream out;
  write_trajectory_csv(out, traj);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,atom_id,w,x1,x2");
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(rows == 5 * p.mu0.size());
}
