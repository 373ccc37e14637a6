#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbpsat/assembly.hpp"
#include "sbpsat/common.hpp"

namespace sbpsat {

/// Shared configuration for the experiment drivers. Vectors select the
/// (family, degree, scheme) cases a study sweeps over.
struct StudyConfig {
  std::vector<Family> families{Family::Omega, Family::Gamma};
  std::vector<int> degrees{1, 2, 3, 4};
  std::vector<Scheme> schemes{Scheme::Br2, Scheme::Sipg};

  // Convergence levels by effective resolution n (h = 1/n).  The coarsest
  // level is a perturbed structured mesh; finer levels are nested midpoint
  // subdivisions, so entries must double.
  std::vector<int> mesh_sizes{8, 16, 32, 64};
  int mesh_n = 16;                             // conditioning / unsteady mesh
  int relaxation_mesh_n = 8;
  double perturbation = 0.28;
  uint64_t seed = 7913;

  double alpha_relax = 1.0;
  std::vector<double> alpha_scan;              // default 0.05 .. 1.00
  std::vector<double> unsteady_alphas{1.0, 0.3};
  double dt = 1e-3;
  double t_final = 1.0;

  std::string field = "manufactured-trig";
};

/// Machine-readable result: a JSON verdict document plus named CSV payloads
/// (written to disk by the CLI). Identical configs produce byte-identical
/// payloads.
struct StudyReport {
  bool pass = true;
  nlohmann::json summary;
  std::map<std::string, std::string> csv_files;
};

StudyReport run_verify(const StudyConfig& config);
StudyReport run_convergence(const StudyConfig& config);
StudyReport run_conditioning(const StudyConfig& config);
StudyReport run_relaxation(const StudyConfig& config);
StudyReport run_unsteady(const StudyConfig& config);

/// Dispatch by study name.
StudyReport run_study(const std::string& study, const StudyConfig& config);

/// Relaxation factor where the assembled system loses positive definiteness,
/// located by bisection on the Cholesky inertia. The penalized part of A is
/// PSD and scales linearly with alpha, so the transition is unique. Returns
/// 0 when the system is still definite at `lo` and 1 when it is indefinite
/// at alpha = 1.
double relaxation_crossing(const TriangleMesh& mesh, const SbpOperator& op,
                           const DiffusionField& field, Scheme scheme,
                           double lo = 1e-3, double tol = 2e-4);

/// Config-file layer: JSON keys override the given base config (flags).
StudyConfig apply_config_json(const StudyConfig& base,
                              const nlohmann::json& overrides);

/// Tensor of `field` with zero forcing and no exact solution, for the
/// homogeneous unsteady runs.
DiffusionField homogeneous_variant(const DiffusionField& field);

}  // namespace sbpsat
