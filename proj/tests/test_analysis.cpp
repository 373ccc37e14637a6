#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "sbpsat/assembly.hpp"
#include "sbpsat/diffusion.hpp"
#include "sbpsat/mesh.hpp"
#include "sbpsat/operators.hpp"
#include "sbpsat/rates.hpp"
#include "sbpsat/solvers.hpp"
#include "sbpsat/time_stepping.hpp"

using namespace sbpsat;

namespace {

Eigen::SparseMatrix<double> diagonal_matrix(const std::vector<double>& d) {
  const auto n = static_cast<Eigen::Index>(d.size());
  Eigen::SparseMatrix<double> a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    a.insert(i, i) = d[static_cast<size_t>(i)];
  a.makeCompressed();
  return a;
}

/// 1x1 system H du/dt = -(a u - b): the scalar ODE u' = (b - a u) / h.
GlobalSystem scalar_system(double a, double b, double h) {
  GlobalSystem sys;
  sys.n_elem = 1;
  sys.nodes_per_elem = 1;
  sys.a = diagonal_matrix({a});
  sys.b = Vector::Constant(1, b);
  sys.h = Vector::Constant(1, h);
  sys.nodes = Points::Zero(1, 2);
  return sys;
}

GlobalSystem assemble_case(const TriangleMesh& mesh, Family fam, int p,
                           const DiffusionField& field, DiscreteProblem* out,
                           const SbpOperator** op_out = nullptr) {
  static std::map<std::pair<int, int>, SbpOperator> cache;
  const auto key = std::make_pair(static_cast<int>(fam), p);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_sbp_operator(fam, p)).first;
  if (op_out) *op_out = &it->second;
  const BoundaryData data = field.has_exact ? manufactured_boundary_data(field)
                                            : zero_boundary_data();
  *out = build_problem(mesh, it->second, field, SatOptions{}, BoundaryConfig{},
                       data);
  return assemble_steady(*out);
}

}  // namespace

TEST_CASE("steady solve") {
  TriangleMesh mesh = structured_mesh(2);
  perturb_mesh(mesh, 0.25, 7913);

  SUBCASE("zero data gives the zero solution") {
    const DiffusionField& field = diffusion_field("identity");
    DiscreteProblem prob;
    const GlobalSystem sys = assemble_case(mesh, Family::Gamma, 2, field, &prob);
    CHECK(sys.b.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(solve_steady(sys).lpNorm<Eigen::Infinity>() == 0.0);
  }

  SUBCASE("affine exact solutions are recovered to roundoff") {
    DiffusionField field;
    field.name = "affine";
    field.tensor = [](double, double) {
      return Eigen::Matrix2d::Identity().eval();
    };
    field.forcing = [](double, double) { return 0.0; };
    field.exact = [](double x, double y) { return 1.0 + 2.0 * x - 3.0 * y; };
    field.exact_grad = [](double, double) {
      return Eigen::Vector2d(2.0, -3.0);
    };
    field.has_exact = true;
    for (Family fam : {Family::Omega, Family::Gamma}) {
      DiscreteProblem prob;
      const GlobalSystem sys = assemble_case(mesh, fam, 1, field, &prob);
      const Vector u = solve_steady(sys);
      double err = 0.0;
      for (int i = 0; i < sys.size(); ++i)
        err = std::max(err,
                       std::abs(u(i) - field.exact(sys.nodes(i, 0),
                                                   sys.nodes(i, 1))));
      CHECK(err < 1e-10);
    }
  }

  SUBCASE("indefinite systems are rejected") {
    GlobalSystem sys;
    sys.n_elem = 2;
    sys.nodes_per_elem = 1;
    sys.a = diagonal_matrix({1.0, -1.0});
    sys.b = Vector::Ones(2);
    sys.h = Vector::Ones(2);
    sys.nodes = Points::Zero(2, 2);
    CHECK_THROWS_AS(solve_steady(sys), Error);
  }
}

TEST_CASE("extreme eigenvalues and conditioning on diagonal matrices") {
  const auto a = diagonal_matrix({1.0, 4.0, 10.0, 2.5, 7.0});
  CHECK(largest_eigenvalue(a) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(smallest_eigenvalue(a) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(condition_number(a) == doctest::Approx(10.0).epsilon(1e-8));
  CHECK(condition_number(diagonal_matrix({3.0, 3.0, 3.0})) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("conditioning cross-check against a dense eigensolver") {
  TriangleMesh mesh = structured_mesh(2);
  perturb_mesh(mesh, 0.25, 7913);
  const DiffusionField& field = diffusion_field("manufactured-trig");
  DiscreteProblem prob;
  const GlobalSystem sys = assemble_case(mesh, Family::Gamma, 2, field, &prob);
  const Matrix dense(sys.a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(dense);
  const double want = es.eigenvalues()(dense.rows() - 1) / es.eigenvalues()(0);
  CHECK(condition_number(sys.a) == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("eigenvalue nearest zero") {
  SUBCASE("signed results for system and bilinear conventions") {
    const auto a = diagonal_matrix({-3.0, -1.0, 2.0});
    const MinEigReport rep = min_magnitude_eigenvalue(a);
    CHECK_FALSE(rep.singular);
    CHECK(rep.system_eig == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(rep.bilinear_eig == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("numerically singular matrices are flagged") {
    const auto a = diagonal_matrix({1e-15, 1.0, 2.0});
    CHECK(min_magnitude_eigenvalue(a).singular);
  }
}

TEST_CASE("bdf2 time integration") {
  SUBCASE("second order on a scalar decay problem") {
    const double a = 2.0, b = 1.5, u0 = 3.0, tf = 1.0;
    auto exact = [&](double t) {
      return b / a + (u0 - b / a) * std::exp(-a * t);
    };
    const GlobalSystem sys = scalar_system(a, b, 1.0);
    std::vector<double> errors, dts;
    for (int steps : {50, 100, 200}) {
      const double dt = tf / steps;
      const EnergyHistory hist =
          bdf2_advance(sys, Vector::Constant(1, u0), dt, steps);
      REQUIRE_FALSE(hist.diverged);
      // Recover u(tf) from the recorded energy u^2 (u stays positive here).
      const double u_end = std::sqrt(hist.energy.back());
      errors.push_back(std::abs(u_end - exact(tf)));
      dts.push_back(dt);
    }
    const double rate = convergence_rate(errors, dts);
    CHECK(rate == doctest::Approx(2.0).epsilon(0.05));
  }

  SUBCASE("growth trips the divergence guard") {
    const GlobalSystem sys = scalar_system(-5.0, 0.0, 1.0);
    const EnergyHistory hist =
        bdf2_advance(sys, Vector::Constant(1, 1.0), 0.1, 400);
    CHECK(hist.diverged);
    CHECK(hist.divergence_step > 0);
    CHECK(hist.energy.size() < 401);
    CHECK(hist.energy.back() > 1e3 * hist.energy.front());
  }

  SUBCASE("energy decays monotonically on a dissipative discretization") {
    TriangleMesh mesh = structured_mesh(2);
    perturb_mesh(mesh, 0.25, 7913);
    const DiffusionField& field = diffusion_field("identity");
    DiscreteProblem prob;
    const GlobalSystem sys =
        assemble_case(mesh, Family::Gamma, 2, field, &prob);
    const Vector u0 = random_smooth_field(sys.nodes, 42);
    const EnergyHistory hist = bdf2_advance(sys, u0, 1e-3, 100);
    REQUIRE_FALSE(hist.diverged);
    REQUIRE(hist.energy.size() == 101);
    for (size_t i = 1; i < hist.energy.size(); ++i)
      CHECK(hist.energy[i] <= hist.energy[i - 1] * (1.0 + 1e-12));
  }
}

TEST_CASE("least-squares convergence rates") {
  CHECK(convergence_rate({1.0, 0.25, 0.0625}, {1.0, 0.5, 0.25}) ==
        doctest::Approx(2.0).epsilon(1e-12));
  const auto rates = pairwise_rates({1.0, 0.125, 1.0 / 64}, {1.0, 0.5, 0.25});
  REQUIRE(rates.size() == 2);
  CHECK(rates[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(rates[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(convergence_rate({1.0, 0.5}, {1.0, 0.5}), Error);
  CHECK_THROWS_AS(convergence_rate({1.0, 0.0, 1.0}, {1.0, 0.5, 0.25}), Error);
}

TEST_CASE("weighted error norms") {
  TriangleMesh mesh = structured_mesh(8);
  const DiffusionField& field = diffusion_field("manufactured-trig");
  DiscreteProblem prob;
  const GlobalSystem sys = assemble_case(mesh, Family::Omega, 3, field, &prob);

  // The norm weights integrate: |1|_H = sqrt(domain area).
  CHECK(l2_norm(sys, Vector::Ones(sys.size())) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // |sin(2 pi x) sin(2 pi y)|_L2 = 1/2, resolved by the volume cubature.
  CHECK(l2_error(sys, Vector::Zero(sys.size()), field.exact) ==
        doctest::Approx(0.5).epsilon(1e-5));
  // Exact nodal samples have zero error.
  Vector u(sys.size());
  for (int i = 0; i < sys.size(); ++i)
    u(i) = field.exact(sys.nodes(i, 0), sys.nodes(i, 1));
  CHECK(l2_error(sys, u, field.exact) == 0.0);
}

TEST_CASE("random smooth initial fields") {
  TriangleMesh mesh = structured_mesh(3);
  const DiffusionField& field = diffusion_field("identity");
  DiscreteProblem prob_a, prob_b;
  const SbpOperator* op_omega = nullptr;
  const SbpOperator* op_gamma = nullptr;
  const GlobalSystem sys_a =
      assemble_case(mesh, Family::Omega, 2, field, &prob_a, &op_omega);
  const GlobalSystem sys_b =
      assemble_case(mesh, Family::Gamma, 2, field, &prob_b, &op_gamma);

  const Vector f1 = random_smooth_field(sys_a.nodes, 7);
  const Vector f2 = random_smooth_field(sys_a.nodes, 7);
  CHECK((f1 - f2).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((f1 - random_smooth_field(sys_a.nodes, 8)).lpNorm<Eigen::Infinity>() >
        0.0);
  CHECK(f1.lpNorm<Eigen::Infinity>() <= 1.0);

  // Same underlying function regardless of the node layout: evaluate both
  // discretizations' node sets and compare at a shared point via the field
  // definition itself (first node of each set evaluated through the other
  // call must agree wherever coordinates coincide).
  Points probe(2, 2);
  probe << 0.25, 0.5, 0.75, 0.125;
  const Vector pa = random_smooth_field(probe, 7);
  const Vector pb = random_smooth_field(probe, 7);
  CHECK((pa - pb).lpNorm<Eigen::Infinity>() == 0.0);
}
