#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "zigzag/basis.hpp"
#include "zigzag/diagnostics.hpp"
#include "zigzag/models.hpp"
#include "zigzag/samplers.hpp"

namespace zz {

// One sampler run as configured on the command line or in a JSON sidecar.
// Endpoints u, v are given in the model's natural space; for the logistic model
// they are mapped through the Lamperti transform on ingestion unless
// `transformed` is set.
struct RunConfig {
  std::string model = "linear";        // linear | sine | logistic
  double alpha = 0.0;                  // linear intercept / sine amplitude
  double beta = 0.0;                   // linear slope
  double growth = 0.0;                 // logistic r
  double capacity = 0.0;               // logistic K
  double noise = 0.0;                  // logistic beta
  bool transformed = false;            // logistic endpoints already transformed

  int levels = 6;
  double horizon = 1.0;
  double u = 0.0;
  double v = 0.0;

  std::string algorithm = "fully-local";  // standard | subsampled | local | fully-local
  std::string estimator = "single";       // single | v1 | v2
  int replication_cap = 32;
  double tau_final = 0.0;
  double tau_burnin = 0.0;
  double delta_tau = 1.0;
  double velocity = 1.0;
  double velocity_decay = 1.0;
  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument on unusable configs
  bool needs_exact_rates() const { return algorithm == "standard" || algorithm == "local"; }
  double u_transformed() const;
  double v_transformed() const;
  EstimatorConfig estimator_config() const;
};

BasisContext build_context(const RunConfig& config);

struct RunResult {
  RunConfig config;
  Skeleton skeleton;
  double wall_seconds = 0.0;
};

RunResult run_sampler(const RunConfig& config);

// persistence: skeleton CSV plus JSON sidecar carrying the config and the
// start/end snapshots needed to reconstruct reflection-tuple runs
void write_skeleton_csv(const std::filesystem::path& file, const Skeleton& skeleton);
void write_metadata_json(const std::filesystem::path& file, const RunConfig& config,
                         const Skeleton& skeleton, double wall_seconds);

struct LoadedRun {
  RunConfig config;
  Skeleton skeleton;
  double wall_seconds = 0.0;
};

LoadedRun load_run(const std::filesystem::path& csv_file, const std::filesystem::path& json_file);

// sample paths on the dyadic grid; the header row carries the grid times
void write_paths_csv(const std::filesystem::path& file, const Eigen::VectorXd& grid_times,
                     const Eigen::MatrixXd& paths);

void write_ess_csv(const std::filesystem::path& file, const EssReport& report);
void write_qq_csv(const std::filesystem::path& file, const QqData& data);

// comparison harness: fully local Zig-Zag (single / v1 / v2 estimators) and a
// MALA baseline on the sine bridge, one row per (alpha, method) cell
struct CompareCell {
  double alpha = 0.0;
  std::string method;
  bool failed = false;
  double ess_mid = 0.0;     // coefficient xi_{0,0}
  double ess_median = 0.0;
  double ess_min = 0.0;
  double seconds = 0.0;
  Eigen::VectorXd midpoint_chain;  // X_{T/2} samples, for cross-method checks
};

struct CompareConfig {
  std::vector<double> alphas;
  double horizon = 50.0;
  int levels = 6;
  double zz_clock = 25000.0;
  double zz_burnin = 10.0;
  double delta_tau = 1.0;
  long mala_iterations = 250000;
  std::uint64_t seed = 1;
};

std::vector<CompareCell> run_comparison(const CompareConfig& config);
void write_compare_csv(const std::filesystem::path& file, const std::vector<CompareCell>& cells);

}  // namespace zz
