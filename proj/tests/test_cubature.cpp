#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "sbpsat/reference.hpp"

using namespace sbpsat;

namespace {

double monomial_quadrature(const VolumeCubature& cub, int i, int j) {
  double acc = 0.0;
  for (int q = 0; q < cub.size(); ++q)
    acc += cub.weights(q) * std::pow(cub.nodes(q, 0), i) *
           std::pow(cub.nodes(q, 1), j);
  return acc;
}

}  // namespace

TEST_CASE("monomial moments on the reference triangle") {
  // int x^i y^j over the unit right triangle = i! j! / (i + j + 2)!.
  CHECK(monomial_moment(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(monomial_moment(1, 0) == doctest::Approx(1.0 / 6).epsilon(1e-15));
  CHECK(monomial_moment(0, 1) == doctest::Approx(1.0 / 6).epsilon(1e-15));
  CHECK(monomial_moment(1, 1) == doctest::Approx(1.0 / 24).epsilon(1e-15));
  CHECK(monomial_moment(2, 0) == doctest::Approx(1.0 / 12).epsilon(1e-15));
  CHECK(monomial_moment(3, 2) == doctest::Approx(6.0 * 2.0 / 5040.0).epsilon(1e-15));
}

TEST_CASE("volume cubature integrates its design degree exactly") {
  for (Family family : {Family::Omega, Family::Gamma}) {
    for (int p = 1; p <= 4; ++p) {
      CAPTURE(to_string(family));
      CAPTURE(p);
      const VolumeCubature cub = volume_cubature(family, p);
      const int expected_degree =
          family == Family::Omega && p <= 2 ? 2 * p : 2 * p - 1;
      CHECK(cub.degree >= expected_degree);
      for (int d = 0; d <= cub.degree; ++d)
        for (int i = 0; i + 0 <= d; ++i) {
          const int j = d - i;
          CHECK(monomial_quadrature(cub, i, j) ==
                doctest::Approx(monomial_moment(i, j)).epsilon(1e-13));
        }
      CHECK((cub.weights.array() > 0.0).all());
    }
  }
}

TEST_CASE("node counts match the family pattern") {
  const int omega_counts[4] = {3, 6, 10, 15};
  const int gamma_counts[4] = {3, 7, 12, 18};
  for (int p = 1; p <= 4; ++p) {
    CHECK(volume_cubature(Family::Omega, p).size() == omega_counts[p - 1]);
    CHECK(volume_cubature(Family::Gamma, p).size() == gamma_counts[p - 1]);
  }
}

TEST_CASE("omega nodes are strictly interior") {
  for (int p = 1; p <= 4; ++p) {
    const VolumeCubature cub = volume_cubature(Family::Omega, p);
    for (int q = 0; q < cub.size(); ++q) {
      const double x = cub.nodes(q, 0), y = cub.nodes(q, 1);
      CHECK(x > 1e-6);
      CHECK(y > 1e-6);
      CHECK(1.0 - x - y > 1e-6);
    }
  }
}

TEST_CASE("gamma places p+1 nodes on every face") {
  for (int p = 1; p <= 4; ++p) {
    const VolumeCubature cub = volume_cubature(Family::Gamma, p);
    int on_face[3] = {0, 0, 0};
    for (int q = 0; q < cub.size(); ++q) {
      const double x = cub.nodes(q, 0), y = cub.nodes(q, 1);
      if (std::abs(y) < 1e-12) ++on_face[0];
      if (std::abs(1.0 - x - y) < 1e-12) ++on_face[1];
      if (std::abs(x) < 1e-12) ++on_face[2];
    }
    for (int f = 0; f < 3; ++f) CHECK(on_face[f] == p + 1);
  }
}

TEST_CASE("face cubature is Legendre-Gauss on [0,1]") {
  for (int p = 1; p <= 4; ++p) {
    const FaceCubature fc = face_cubature(p);
    REQUIRE(fc.size() == p + 1);
    CHECK(fc.weights.sum() == doctest::Approx(1.0).epsilon(1e-15));
    // Exact for polynomials through degree 2p+1.
    for (int d = 0; d <= 2 * p + 1; ++d) {
      double acc = 0.0;
      for (int q = 0; q < fc.size(); ++q)
        acc += fc.weights(q) * std::pow(fc.t(q), d);
      CHECK(acc == doctest::Approx(1.0 / (d + 1)).epsilon(1e-14));
    }
    // Symmetric about the midpoint.
    for (int q = 0; q < fc.size(); ++q) {
      CHECK(fc.t(q) == doctest::Approx(1.0 - fc.t(fc.size() - 1 - q)).epsilon(1e-15));
      CHECK(fc.weights(q) ==
            doctest::Approx(fc.weights(fc.size() - 1 - q)).epsilon(1e-15));
    }
  }
}

TEST_CASE("embedded tables equal the data files") {
  for (Family family : {Family::Omega, Family::Gamma}) {
    for (int p = 1; p <= 4; ++p) {
      const std::string path = std::string(SBPSAT_SOURCE_DIR) +
                               "/data/cubature/tri_" + to_string(family) +
                               "_p" + std::to_string(p) + ".txt";
      std::ifstream in(path);
      REQUIRE_MESSAGE(in.good(), path);
      const VolumeCubature from_file = read_cubature_table(in);
      const VolumeCubature embedded = volume_cubature(family, p);
      REQUIRE(from_file.size() == embedded.size());
      CHECK((from_file.nodes - embedded.nodes).lpNorm<Eigen::Infinity>() == 0.0);
      CHECK((from_file.weights - embedded.weights).lpNorm<Eigen::Infinity>() ==
            0.0);
    }
  }
}

TEST_CASE("cubature table io round-trips") {
  const VolumeCubature cub = volume_cubature(Family::Gamma, 3);
  std::ostringstream out;
  write_cubature_table(out, cub);
  std::istringstream in(out.str());
  const VolumeCubature back = read_cubature_table(in);
  CHECK(back.family == cub.family);
  CHECK(back.p == cub.p);
  CHECK(back.degree == cub.degree);
  CHECK((back.nodes - cub.nodes).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((back.weights - cub.weights).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("collapsed cubature integrates high degree exactly") {
  for (int d : {4, 9, 14}) {
    const VolumeCubature cub = collapsed_cubature(d);
    for (int i = 0; i + 0 <= d; ++i)
      for (int j = 0; i + j <= d; ++j)
        CHECK(monomial_quadrature(cub, i, j) ==
              doctest::Approx(monomial_moment(i, j)).epsilon(1e-13));
  }
}
