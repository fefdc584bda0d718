// zzbridge: Zig-Zag samplers for one-dimensional diffusion bridges expanded in
// a truncated Faber-Schauder basis. Subcommands: sample, paths, diagnose,
// compare.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>

#include "zigzag/diagnostics.hpp"
#include "zigzag/io.hpp"

namespace fs = std::filesystem;

namespace {

fs::path output_path(const std::string& name) {
  fs::path p(name);
  if (p.is_absolute()) return p;
  if (const char* dir = std::getenv("ZZBRIDGE_OUT_DIR")) return fs::path(dir) / p;
  return p;
}

struct SampleArgs {
  zz::RunConfig config;
  std::string out = "run";
};

void add_sample(CLI::App& app, SampleArgs& args) {
  CLI::App* cmd = app.add_subcommand("sample", "run a sampler and write the skeleton");
  cmd->add_option("--model", args.config.model, "linear | sine | logistic")->required();
  cmd->add_option("--alpha", args.config.alpha, "linear drift intercept / sine amplitude");
  cmd->add_option("--beta", args.config.beta, "linear drift slope");
  cmd->add_option("--r", args.config.growth, "logistic growth rate");
  cmd->add_option("--K", args.config.capacity, "logistic carrying capacity");
  cmd->add_option("--beta-noise", args.config.noise, "logistic noise scale");
  cmd->add_flag("--transformed", args.config.transformed,
                "logistic endpoints are already Lamperti-transformed");
  cmd->add_option("--u", args.config.u, "initial value")->required();
  cmd->add_option("--v", args.config.v, "terminal value")->required();
  cmd->add_option("--T", args.config.horizon, "time horizon")->required();
  cmd->add_option("--levels", args.config.levels, "truncation level N")->required();
  cmd->add_option("--algorithm", args.config.algorithm,
                  "standard | subsampled | local | fully-local")
      ->required();
  cmd->add_option("--estimator", args.config.estimator, "single | v1 | v2");
  cmd->add_option("--replication-cap", args.config.replication_cap, "v1/v2 replication cap");
  cmd->add_option("--clock", args.config.tau_final, "final Zig-Zag clock")->required();
  cmd->add_option("--burnin", args.config.tau_burnin, "burn-in clock");
  cmd->add_option("--delta-tau", args.config.delta_tau, "sample spacing");
  cmd->add_option("--velocity", args.config.velocity, "velocity magnitude");
  cmd->add_option("--velocity-decay", args.config.velocity_decay, "per-level velocity decay");
  cmd->add_option("--seed", args.config.seed, "RNG seed");
  cmd->add_option("--out", args.out, "output prefix (writes <out>.csv and <out>.json)");
  cmd->callback([&args] {
    const zz::RunResult result = zz::run_sampler(args.config);
    const fs::path prefix = output_path(args.out);
    zz::write_skeleton_csv(prefix.string() + ".csv", result.skeleton);
    zz::write_metadata_json(prefix.string() + ".json", result.config, result.skeleton,
                            result.wall_seconds);
    std::cout << "wrote " << prefix.string() << ".csv (" << result.skeleton.events << " events, "
              << result.skeleton.proposals << " proposals, " << std::setprecision(4)
              << result.wall_seconds << " s)\n";
    if (result.skeleton.all_rates_vanished)
      std::cout << "warning: all event rates vanished before the final clock\n";
  });
}

struct PathsArgs {
  std::string skeleton, meta, out = "paths.csv";
  long every = 1;
};

void add_paths(CLI::App& app, PathsArgs& args) {
  CLI::App* cmd = app.add_subcommand("paths", "expand discretized samples on the dyadic grid");
  cmd->add_option("--skeleton", args.skeleton, "skeleton CSV")->required();
  cmd->add_option("--meta", args.meta, "metadata JSON sidecar")->required();
  cmd->add_option("--every", args.every, "keep every n-th sample")->check(CLI::PositiveNumber);
  cmd->add_option("--out", args.out, "output CSV");
  cmd->callback([&args] {
    const zz::LoadedRun run = zz::load_run(args.skeleton, args.meta);
    const zz::BasisContext ctx = zz::build_context(run.config);
    const Eigen::MatrixXd samples =
        zz::discretize(run.skeleton, run.config.tau_burnin, run.config.delta_tau);
    const auto kept = (samples.cols() + args.every - 1) / args.every;
    Eigen::MatrixXd paths(ctx.grid_size(), kept);
    for (Eigen::Index p = 0; p < kept; ++p)
      paths.col(p) = ctx.expand_grid(samples.col(p * args.every));
    Eigen::VectorXd times(ctx.grid_size());
    for (int m = 0; m < ctx.grid_size(); ++m) times[m] = ctx.grid_time(m);
    zz::write_paths_csv(output_path(args.out), times, paths);
    std::cout << "wrote " << output_path(args.out).string() << " (" << kept << " paths)\n";
  });
}

struct DiagnoseArgs {
  std::string skeleton, meta, out = "diagnose";
  std::vector<std::string> stats;
  int coefficient = 1;
  std::string against = "exact-linear";
  double t = 0.0;
};

void add_diagnose(CLI::App& app, DiagnoseArgs& args) {
  CLI::App* cmd = app.add_subcommand("diagnose", "ESS / QQ / KS reports for a run");
  cmd->add_option("--skeleton", args.skeleton, "skeleton CSV")->required();
  cmd->add_option("--meta", args.meta, "metadata JSON sidecar")->required();
  cmd->add_option("--stat", args.stats, "ess | qq | ks")->required();
  cmd->add_option("--coefficient", args.coefficient, "1-based coefficient for qq");
  cmd->add_option("--against", args.against, "ks reference (exact-linear)");
  cmd->add_option("--t", args.t, "diffusion time for the ks marginal");
  cmd->add_option("--out", args.out, "output prefix");
  cmd->callback([&args] {
    for (const std::string& stat : args.stats)
      if (stat != "ess" && stat != "qq" && stat != "ks")
        throw CLI::ValidationError("--stat", "unknown stat '" + stat + "'");
    const zz::LoadedRun run = zz::load_run(args.skeleton, args.meta);
    const zz::BasisContext ctx = zz::build_context(run.config);
    const Eigen::MatrixXd samples =
        zz::discretize(run.skeleton, run.config.tau_burnin, run.config.delta_tau);
    const fs::path prefix = output_path(args.out);
    nlohmann::json summary;
    for (const std::string& stat : args.stats) {
      if (stat == "ess") {
        const zz::EssReport report = zz::ess_report(samples, run.wall_seconds);
        zz::write_ess_csv(prefix.string() + ".ess.csv", report);
        summary["ess"] = {{"mean", report.mean},
                          {"median", report.median},
                          {"min", report.min},
                          {"wall_seconds", report.wall_seconds}};
      } else if (stat == "qq") {
        const Eigen::VectorXd row = samples.row(args.coefficient - 1);
        const zz::QqData qq = zz::qq_data(std::span(row.data(), row.size()));
        zz::write_qq_csv(prefix.string() + ".qq.csv", qq);
        summary["qq"] = {{"coefficient", args.coefficient}, {"correlation", qq.correlation}};
      } else {
        if (args.against != "exact-linear")
          throw CLI::ValidationError("--against", "unknown reference '" + args.against + "'");
        if (run.config.model != "linear")
          throw CLI::ValidationError("--against", "exact-linear needs a linear-model run");
        const zz::GaussianMarginal marginal = zz::gaussian_bridge_marginal(
            zz::LinearModel{run.config.alpha, run.config.beta}, run.config.u, run.config.v,
            run.config.horizon, args.t);
        Eigen::VectorXd values(samples.cols());
        for (Eigen::Index i = 0; i < samples.cols(); ++i)
          values[i] = ctx.expand(samples.col(i), args.t);
        const double sd = std::sqrt(marginal.variance);
        const double d = zz::ks_statistic(
            std::span(values.data(), values.size()),
            [&](double x) { return zz::normal_cdf((x - marginal.mean) / sd); });
        summary["ks"] = {{"t", args.t},
                         {"statistic", d},
                         {"mean", marginal.mean},
                         {"variance", marginal.variance}};
      }
    }
    std::ofstream out(prefix.string() + ".json");
    out << summary.dump(2) << '\n';
    std::cout << summary.dump(2) << '\n';
  });
}

struct CompareArgs {
  zz::CompareConfig config;
  std::vector<std::string> baselines{"mala"};
  std::string out = "compare.csv";
};

void add_compare(CLI::App& app, CompareArgs& args) {
  CLI::App* cmd = app.add_subcommand("compare", "ESS/sec table: fully local Zig-Zag vs MALA");
  cmd->add_option("--alphas", args.config.alphas, "sine amplitudes");
  cmd->add_option("--T", args.config.horizon, "time horizon");
  cmd->add_option("--levels", args.config.levels, "truncation level");
  cmd->add_option("--clock", args.config.zz_clock, "Zig-Zag final clock");
  cmd->add_option("--burnin", args.config.zz_burnin, "Zig-Zag burn-in");
  cmd->add_option("--delta-tau", args.config.delta_tau, "Zig-Zag sample spacing");
  cmd->add_option("--mala-iterations", args.config.mala_iterations, "MALA iterations");
  cmd->add_option("--baselines", args.baselines, "baseline methods (mala)");
  cmd->add_option("--seed", args.config.seed, "master seed");
  cmd->add_option("--out", args.out, "output CSV");
  cmd->callback([&args] {
    for (const std::string& b : args.baselines)
      if (b != "mala") throw CLI::ValidationError("--baselines", "unknown baseline '" + b + "'");
    const std::vector<zz::CompareCell> cells = zz::run_comparison(args.config);
    zz::write_compare_csv(output_path(args.out), cells);
    std::cout << "wrote " << output_path(args.out).string() << " (" << cells.size() << " cells)\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zig-Zag diffusion bridge sampler"};
  app.require_subcommand(1);
  SampleArgs sample_args;
  PathsArgs paths_args;
  DiagnoseArgs diagnose_args;
  CompareArgs compare_args;
  add_sample(app, sample_args);
  add_paths(app, paths_args);
  add_diagnose(app, diagnose_args);
  add_compare(app, compare_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
