#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include <Eigen/SparseCholesky>

#include "sbpsat/mesh.hpp"
#include "sbpsat/operators.hpp"
#include "sbpsat/studies.hpp"

using namespace sbpsat;

namespace {

StudyConfig small_config() {
  StudyConfig c;
  c.degrees = {1, 2};
  c.mesh_sizes = {2, 4, 8};
  c.mesh_n = 4;
  c.relaxation_mesh_n = 4;
  c.t_final = 0.05;
  return c;
}

}  // namespace

TEST_CASE("config overrides from json") {
  const StudyConfig base = small_config();
  nlohmann::json j;
  j["degrees"] = {3};
  j["schemes"] = {"sipg"};
  j["families"] = {"gamma"};
  j["mesh_n"] = 6;
  j["perturbation"] = 0.1;
  j["seed"] = 99;
  j["alpha_relax"] = 0.5;
  j["dt"] = 0.01;
  j["field"] = "identity-trig";
  const StudyConfig c = apply_config_json(base, j);
  REQUIRE(c.degrees.size() == 1);
  CHECK(c.degrees[0] == 3);
  REQUIRE(c.schemes.size() == 1);
  CHECK(c.schemes[0] == Scheme::Sipg);
  REQUIRE(c.families.size() == 1);
  CHECK(c.families[0] == Family::Gamma);
  CHECK(c.mesh_n == 6);
  CHECK(c.perturbation == 0.1);
  CHECK(c.seed == 99);
  CHECK(c.alpha_relax == 0.5);
  CHECK(c.dt == 0.01);
  CHECK(c.field == "identity-trig");
  // Untouched keys keep the base values.
  CHECK(c.mesh_sizes == base.mesh_sizes);
  CHECK(c.t_final == base.t_final);

  nlohmann::json bad;
  bad["schemes"] = {"unknown-scheme"};
  CHECK_THROWS_AS(apply_config_json(base, bad), Error);
}

TEST_CASE("verify study passes and reports every case") {
  const StudyConfig c = small_config();
  const StudyReport rep = run_verify(c);
  CHECK(rep.pass);
  REQUIRE(rep.summary.contains("cases"));
  // One entry per (family, degree); schemes nest inside.
  CHECK(rep.summary["cases"].size() == 2 * 2);
  for (const auto& item : rep.summary["cases"]) {
    CHECK(item["operator"]["pass"].get<bool>());
    for (const char* scheme : {"br2", "sipg"}) {
      CHECK(item[scheme]["adjoint_pass"].get<bool>());
      CHECK(item[scheme]["stability_pass"].get<bool>());
    }
  }
}

TEST_CASE("study outputs are deterministic") {
  StudyConfig c = small_config();
  c.degrees = {2};
  c.schemes = {Scheme::Br2};
  SUBCASE("conditioning") {
    const StudyReport a = run_conditioning(c);
    const StudyReport b = run_conditioning(c);
    REQUIRE(!a.csv_files.empty());
    CHECK(a.csv_files == b.csv_files);
    CHECK(a.summary == b.summary);
  }
  SUBCASE("unsteady") {
    c.families = {Family::Gamma};
    c.unsteady_alphas = {1.0};
    const StudyReport a = run_unsteady(c);
    const StudyReport b = run_unsteady(c);
    REQUIRE(!a.csv_files.empty());
    CHECK(a.csv_files == b.csv_files);
    for (const auto& [name, payload] : a.csv_files) {
      CAPTURE(name);
      CHECK(payload.find("nan") == std::string::npos);
    }
  }
}

TEST_CASE("relaxation crossing brackets the definiteness flip") {
  TriangleMesh mesh = structured_mesh(4);
  perturb_mesh(mesh, 0.28, 7913);
  const DiffusionField& field = diffusion_field("manufactured-trig");

  auto definite_at = [&](const SbpOperator& op, Scheme scheme, double alpha) {
    SatOptions options;
    options.scheme = scheme;
    options.alpha_relax = alpha;
    const DiscreteProblem prob = build_problem(
        mesh, op, field, options, BoundaryConfig{}, zero_boundary_data());
    const GlobalSystem sys = assemble_steady(prob);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys.a);
    REQUIRE(ldlt.info() == Eigen::Success);
    return ldlt.vectorD().minCoeff() > 0.0;
  };

  for (Family family : {Family::Omega, Family::Gamma}) {
    const SbpOperator op = build_sbp_operator(family, 2);
    double cross[2];
    for (Scheme scheme : {Scheme::Br2, Scheme::Sipg}) {
      const double c = relaxation_crossing(mesh, op, field, scheme);
      CAPTURE(to_string(family));
      CAPTURE(to_string(scheme));
      CHECK(c > 0.0);
      CHECK(c < 1.0);
      CHECK(definite_at(op, scheme, c + 5e-3));
      CHECK(!definite_at(op, scheme, c - 5e-3));
      cross[scheme == Scheme::Sipg] = c;
    }
    CHECK(cross[0] >= cross[1] - 1e-12);  // br2 tolerates more relaxation
  }
}

TEST_CASE("unknown study names are rejected") {
  CHECK_THROWS_AS(run_study("nonsense", small_config()), Error);
}
