// Microbenchmarks: operator construction, face penalty application for the
// two node families (the Gamma extrapolation touches only face-adjacent
// columns, so its per-face cost is much lower), and steady assembly.

#include <benchmark/benchmark.h>

#include "sbpsat/assembly.hpp"
#include "sbpsat/mesh.hpp"
#include "sbpsat/operators.hpp"
#include "sbpsat/studies.hpp"

namespace {

using namespace sbpsat;

void bm_build_operator(benchmark::State& state) {
  const Family family = state.range(0) == 0 ? Family::Omega : Family::Gamma;
  const int p = static_cast<int>(state.range(1));
  for (auto _ : state) {
    SbpOperator op = build_sbp_operator(family, p);
    benchmark::DoNotOptimize(op.Dx.data());
  }
}
BENCHMARK(bm_build_operator)
    ->ArgsProduct({{0, 1}, {1, 2, 3, 4}})
    ->Unit(benchmark::kMillisecond);

void bm_face_penalty_apply(benchmark::State& state) {
  const Family family = state.range(0) == 0 ? Family::Omega : Family::Gamma;
  const int p = static_cast<int>(state.range(1));
  const SbpOperator op = build_sbp_operator(family, p);
  const TriangleMesh mesh = structured_mesh(2);
  const DiffusionField& field = diffusion_field("manufactured-trig");
  const DiscreteProblem prob =
      build_problem(mesh, op, field, SatOptions{}, BoundaryConfig{},
                    manufactured_boundary_data(field));
  const InteriorFace& face = prob.conn.interior.front();
  Vector uk = Vector::Random(op.n), un = Vector::Random(op.n);
  for (auto _ : state) {
    auto [sk, sn] = interface_sat(
        op, prob.elems[static_cast<size_t>(face.elem_k)],
        prob.elems[static_cast<size_t>(face.elem_n)], face,
        prob.coeffs.sigma1.front(), uk, un);
    benchmark::DoNotOptimize(sk.data());
    benchmark::DoNotOptimize(sn.data());
  }
}
BENCHMARK(bm_face_penalty_apply)
    ->ArgsProduct({{0, 1}, {1, 2, 3, 4}})
    ->Unit(benchmark::kMicrosecond);

void bm_assemble_steady(benchmark::State& state) {
  const Family family = state.range(0) == 0 ? Family::Omega : Family::Gamma;
  const int p = static_cast<int>(state.range(1));
  const SbpOperator op = build_sbp_operator(family, p);
  const TriangleMesh mesh = structured_mesh(8);
  const DiffusionField& field = diffusion_field("manufactured-trig");
  const DiscreteProblem prob =
      build_problem(mesh, op, field, SatOptions{}, BoundaryConfig{},
                    manufactured_boundary_data(field));
  for (auto _ : state) {
    GlobalSystem sys = assemble_steady(prob);
    benchmark::DoNotOptimize(sys.a.valuePtr());
  }
}
BENCHMARK(bm_assemble_steady)
    ->ArgsProduct({{0, 1}, {2, 4}})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
