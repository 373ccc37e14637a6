#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "sbpsat/operators.hpp"
#include "sbpsat/reference.hpp"

using namespace sbpsat;

namespace {

const std::vector<std::pair<Family, int>>& all_cases() {
  static const std::vector<std::pair<Family, int>> cases = [] {
    std::vector<std::pair<Family, int>> v;
    for (Family f : {Family::Omega, Family::Gamma})
      for (int p = 1; p <= 4; ++p) v.emplace_back(f, p);
    return v;
  }();
  return cases;
}

const SbpOperator& cached_operator(Family f, int p) {
  static std::map<std::pair<int, int>, SbpOperator> cache;
  auto key = std::make_pair(static_cast<int>(f), p);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, build_sbp_operator(f, p)).first;
  return it->second;
}

}  // namespace

TEST_CASE("all eight operators satisfy the defining properties") {
  for (auto [family, p] : all_cases()) {
    CAPTURE(to_string(family));
    CAPTURE(p);
    const SbpOperator& op = cached_operator(family, p);
    const SbpDiagnostics d = verify_sbp(op);
    CHECK(d.pass);
    CHECK(d.accuracy < 1e-10);
    CHECK(d.skew < 1e-14);
    CHECK(d.decomposition < 1e-13);
    CHECK(d.boundary < 1e-10);
    CHECK(d.min_h > 0.0);
  }
}

TEST_CASE("building from an explicit cubature matches the table path") {
  for (auto [family, p] : all_cases()) {
    CAPTURE(to_string(family));
    CAPTURE(p);
    const SbpOperator& tabled = cached_operator(family, p);
    const SbpOperator direct = build_sbp_operator(volume_cubature(family, p));
    CHECK((direct.Qx - tabled.Qx).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((direct.Qy - tabled.Qy).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((direct.Ex - tabled.Ex).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((direct.h - tabled.h).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("derivatives annihilate constants and reproduce gradients") {
  for (auto [family, p] : all_cases()) {
    const SbpOperator& op = cached_operator(family, p);
    const Vector ones = Vector::Ones(op.n);
    CHECK((op.Dx * ones).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((op.Dy * ones).lpNorm<Eigen::Infinity>() < 1e-12);
    Vector xy(op.n), x(op.n);
    for (int i = 0; i < op.n; ++i) {
      x(i) = op.cubature.nodes(i, 0);
      xy(i) = op.cubature.nodes(i, 0) * op.cubature.nodes(i, 1);
    }
    if (p >= 2) {
      const Vector dxy = op.Dx * xy;
      for (int i = 0; i < op.n; ++i)
        CHECK(dxy(i) == doctest::Approx(op.cubature.nodes(i, 1)).epsilon(1e-11));
    }
    CHECK((op.Dx * x - ones).lpNorm<Eigen::Infinity>() < 1e-11);
  }
}

TEST_CASE("face extrapolation is exact for degree p") {
  for (auto [family, p] : all_cases()) {
    CAPTURE(to_string(family));
    CAPTURE(p);
    const SbpOperator& op = cached_operator(family, p);
    const FaceCubature fc = face_cubature(p);
    for (int f = 0; f < 3; ++f) {
      const Matrix& R = op.face[static_cast<size_t>(f)].R;
      for (int i = 0; i <= p; ++i)
        for (int j = 0; i + j <= p; ++j) {
          Vector mono(op.n);
          for (int q = 0; q < op.n; ++q)
            mono(q) = std::pow(op.cubature.nodes(q, 0), i) *
                      std::pow(op.cubature.nodes(q, 1), j);
          const Vector trace = R * mono;
          for (int q = 0; q < fc.size(); ++q) {
            const auto pt = ReferenceTriangle::face_point(f, fc.t(q));
            const double exact = std::pow(pt[0], i) * std::pow(pt[1], j);
            CHECK(trace(q) == doctest::Approx(exact).epsilon(1e-10));
          }
        }
    }
  }
}

TEST_CASE("gamma extrapolation touches only the p+1 face nodes") {
  for (int p = 1; p <= 4; ++p) {
    const SbpOperator& op = cached_operator(Family::Gamma, p);
    for (int f = 0; f < 3; ++f) {
      const Matrix& R = op.face[static_cast<size_t>(f)].R;
      int nonzero_cols = 0;
      for (int c = 0; c < R.cols(); ++c)
        if (R.col(c).lpNorm<Eigen::Infinity>() > 0.0) ++nonzero_cols;
      CHECK(nonzero_cols == p + 1);
    }
  }
}

TEST_CASE("compatibility: quadratic forms against the boundary matrices") {
  // p' Ex q equals the x-weighted boundary integral of the product for
  // polynomials of degree <= p, tested on random polynomial pairs.
  std::mt19937_64 eng(99);
  auto unit = [&eng] {
    return 2.0 * (static_cast<double>(eng() >> 11) * 0x1.0p-53) - 1.0;
  };
  for (auto [family, p] : all_cases()) {
    const SbpOperator& op = cached_operator(family, p);
    const int nb = (p + 1) * (p + 2) / 2;
    const Matrix v = evaluate_basis(op.cubature.nodes, p);
    // High-order quadrature over the three faces for the exact value.
    const FaceCubature fine = face_cubature(4);
    for (int rep = 0; rep < 4; ++rep) {
      Vector ca(nb), cb(nb);
      for (int i = 0; i < nb; ++i) {
        ca(i) = unit();
        cb(i) = unit();
      }
      const Vector pa = v * ca, pb = v * cb;
      double exact_x = 0.0, exact_y = 0.0;
      for (int f = 0; f < 3; ++f) {
        const auto nrm = ReferenceTriangle::face_normal(f);
        const double len = ReferenceTriangle::face_length(f);
        Points fpts(fine.size(), 2);
        for (int q = 0; q < fine.size(); ++q) {
          const auto pt = ReferenceTriangle::face_point(f, fine.t(q));
          fpts(q, 0) = pt[0];
          fpts(q, 1) = pt[1];
        }
        const Matrix vf = evaluate_basis(fpts, p);
        const Vector fa = vf * ca, fb = vf * cb;
        for (int q = 0; q < fine.size(); ++q) {
          const double w = fine.weights(q) * len;
          exact_x += w * nrm[0] * fa(q) * fb(q);
          exact_y += w * nrm[1] * fa(q) * fb(q);
        }
      }
      CHECK(pa.dot(op.Ex * pb) == doctest::Approx(exact_x).epsilon(1e-10));
      CHECK(pa.dot(op.Ey * pb) == doctest::Approx(exact_y).epsilon(1e-10));
    }
  }
}

TEST_CASE("injected defects are caught") {
  SbpOperator op = build_sbp_operator(Family::Gamma, 2);
  SUBCASE("broken skew part") {
    op.Qx(0, 1) += 1e-6;
    op.Dx = op.h.cwiseInverse().asDiagonal() * op.Qx;
    CHECK_FALSE(verify_sbp(op).pass);
  }
  SUBCASE("broken boundary matrix") {
    op.Ex(0, 0) += 1e-6;
    CHECK_FALSE(verify_sbp(op).pass);
  }
}

TEST_CASE("operator archive round-trips and detects tampering") {
  const SbpOperator op = build_sbp_operator(Family::Omega, 3);
  std::ostringstream out;
  dump_operator(out, op);
  SUBCASE("round trip") {
    std::istringstream in(out.str());
    const SbpOperator back = load_operator(in);
    CHECK(back.family == op.family);
    CHECK(back.p == op.p);
    CHECK((back.Qx - op.Qx).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.h - op.h).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.face[1].R - op.face[1].R).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("tampered payload fails the checksum") {
    std::string text = out.str();
    const auto pos = text.find("0.");
    REQUIRE(pos != std::string::npos);
    text[pos + 2] = text[pos + 2] == '1' ? '2' : '1';
    std::istringstream in(text);
    CHECK_THROWS_AS(load_operator(in), Error);
  }
}
