#include "zigzag/io.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace zz {

using nlohmann::json;

namespace {

const char* mode_name(Skeleton::Mode mode) {
  return mode == Skeleton::Mode::kFullState ? "full-state" : "reflection-tuples";
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

[[noreturn]] void parse_fail(const std::filesystem::path& file, long line, const std::string& why) {
  throw std::runtime_error(file.string() + ": line " + std::to_string(line) + ": " + why);
}

std::vector<double> parse_row(const std::filesystem::path& file, long line, const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string field = text.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      parse_fail(file, line, "cannot parse numeric field '" + field + "'");
    }
    pos = comma + 1;
    if (comma == text.size()) break;
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << std::setprecision(17);
  return out;
}

}  // namespace

void RunConfig::validate() const {
  auto usage = [](const std::string& why) { throw std::invalid_argument(why); };
  if (model != "linear" && model != "sine" && model != "logistic")
    usage("unknown model '" + model + "'");
  if (algorithm != "standard" && algorithm != "subsampled" && algorithm != "local" &&
      algorithm != "fully-local")
    usage("unknown algorithm '" + algorithm + "'");
  if (estimator != "single" && estimator != "v1" && estimator != "v2")
    usage("unknown estimator '" + estimator + "'");
  if (needs_exact_rates() && model != "linear")
    usage("algorithm '" + algorithm + "' needs exactly samplable rates: only the linear model");
  if (levels < 0) usage("levels must be >= 0");
  if (!(horizon > 0.0)) usage("T must be positive");
  if (!(tau_final > 0.0)) usage("clock must be positive");
  if (!(tau_burnin >= 0.0 && tau_burnin < tau_final)) usage("burnin must lie in [0, clock)");
  if (!(delta_tau > 0.0)) usage("delta-tau must be positive");
  if (!(velocity > 0.0) || !(velocity_decay > 0.0)) usage("velocities must be positive");
  if (model == "sine" && alpha < 0.0) usage("sine amplitude must be >= 0");
  if (model == "logistic") {
    if (!(growth > 0.0 && capacity > 0.0 && noise > 0.0))
      usage("logistic model needs r, K, beta-noise > 0");
    if (!transformed && !(u > 0.0 && v > 0.0))
      usage("logistic endpoints in natural space must be positive");
  }
}

double RunConfig::u_transformed() const {
  if (model == "logistic" && !transformed)
    return LogisticModel(growth, capacity, noise).lamperti(u);
  return u;
}

double RunConfig::v_transformed() const {
  if (model == "logistic" && !transformed)
    return LogisticModel(growth, capacity, noise).lamperti(v);
  return v;
}

EstimatorConfig RunConfig::estimator_config() const {
  EstimatorConfig cfg;
  cfg.replication_cap = replication_cap;
  cfg.variant = estimator == "v1"   ? EstimatorVariant::kAveraged
                : estimator == "v2" ? EstimatorVariant::kStratified
                                    : EstimatorVariant::kSingle;
  return cfg;
}

BasisContext build_context(const RunConfig& config) {
  return BasisContext(config.levels, config.horizon, config.u_transformed(),
                      config.v_transformed());
}

RunResult run_sampler(const RunConfig& config) {
  config.validate();
  const BasisContext ctx = build_context(config);
  const Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(ctx.size());
  const Eigen::VectorXd theta0 = level_velocities(ctx, config.velocity, config.velocity_decay);
  RunRng rng(config.seed);

  std::unique_ptr<ExactRateProvider> exact;
  std::unique_ptr<ThinnedRateProvider> thinned;
  if (config.model == "linear") {
    const LinearModel model{config.alpha, config.beta};
    if (config.needs_exact_rates())
      exact = std::make_unique<LinearExactProvider>(ctx, model);
    else
      thinned = std::make_unique<LinearSubsamplingProvider>(ctx, model, config.estimator_config());
  } else if (config.model == "sine") {
    thinned = std::make_unique<SineSubsamplingProvider>(ctx, SineModel{config.alpha},
                                                        config.estimator_config());
  } else {
    thinned = std::make_unique<LogisticSubsamplingProvider>(
        ctx, LogisticModel(config.growth, config.capacity, config.noise),
        config.estimator_config());
  }

  RunResult result;
  result.config = config;
  const auto t0 = std::chrono::steady_clock::now();
  if (config.algorithm == "standard")
    result.skeleton = zigzag_standard(*exact, config.tau_final, xi0, theta0, rng);
  else if (config.algorithm == "local")
    result.skeleton = zigzag_local(*exact, config.tau_final, xi0, theta0, rng);
  else if (config.algorithm == "subsampled")
    result.skeleton = zigzag_subsampled(*thinned, config.tau_final, xi0, theta0, rng);
  else
    result.skeleton = zigzag_fully_local(*thinned, config.tau_final, xi0, theta0, rng);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

void write_skeleton_csv(const std::filesystem::path& file, const Skeleton& skeleton) {
  auto out = open_out(file);
  if (skeleton.mode == Skeleton::Mode::kFullState) {
    out << 't';
    for (int k = 1; k <= skeleton.dim(); ++k) out << ",xi_" << k;
    out << '\n';
    for (Eigen::Index r = 0; r < skeleton.times.size(); ++r) {
      out << skeleton.times[r];
      for (int k = 0; k < skeleton.dim(); ++k) out << ',' << skeleton.states(k, r);
      out << '\n';
    }
  } else {
    out << "event,index,time,value\n";
    long event = 0;
    for (const ReflectionEvent& e : skeleton.reflections)
      out << ++event << ',' << e.coordinate + 1 << ',' << e.time << ',' << e.value << '\n';
  }
}

void write_metadata_json(const std::filesystem::path& file, const RunConfig& config,
                         const Skeleton& skeleton, double wall_seconds) {
  json j;
  j["config"] = {{"model", config.model},
                 {"alpha", config.alpha},
                 {"beta", config.beta},
                 {"growth", config.growth},
                 {"capacity", config.capacity},
                 {"noise", config.noise},
                 {"transformed", config.transformed},
                 {"levels", config.levels},
                 {"horizon", config.horizon},
                 {"u", config.u},
                 {"v", config.v},
                 {"algorithm", config.algorithm},
                 {"estimator", config.estimator},
                 {"replication_cap", config.replication_cap},
                 {"tau_final", config.tau_final},
                 {"tau_burnin", config.tau_burnin},
                 {"delta_tau", config.delta_tau},
                 {"velocity", config.velocity},
                 {"velocity_decay", config.velocity_decay},
                 {"seed", config.seed}};
  j["skeleton"] = {{"mode", mode_name(skeleton.mode)},
                   {"tau_final", skeleton.tau_final},
                   {"events", skeleton.events},
                   {"proposals", skeleton.proposals},
                   {"all_rates_vanished", skeleton.all_rates_vanished},
                   {"initial_state", to_vector(skeleton.initial_state)},
                   {"initial_velocity", to_vector(skeleton.initial_velocity)},
                   {"final_state", to_vector(skeleton.final_state)}};
  j["wall_seconds"] = wall_seconds;
  auto out = open_out(file);
  out << j.dump(2) << '\n';
}

LoadedRun load_run(const std::filesystem::path& csv_file, const std::filesystem::path& json_file) {
  std::ifstream meta_in(json_file);
  if (!meta_in) throw std::runtime_error("cannot open " + json_file.string());
  json j = json::parse(meta_in);
  const json& c = j.at("config");

  LoadedRun run;
  RunConfig& config = run.config;
  config.model = c.at("model");
  config.alpha = c.at("alpha");
  config.beta = c.at("beta");
  config.growth = c.at("growth");
  config.capacity = c.at("capacity");
  config.noise = c.at("noise");
  config.transformed = c.at("transformed");
  config.levels = c.at("levels");
  config.horizon = c.at("horizon");
  config.u = c.at("u");
  config.v = c.at("v");
  config.algorithm = c.at("algorithm");
  config.estimator = c.at("estimator");
  config.replication_cap = c.at("replication_cap");
  config.tau_final = c.at("tau_final");
  config.tau_burnin = c.at("tau_burnin");
  config.delta_tau = c.at("delta_tau");
  config.velocity = c.at("velocity");
  config.velocity_decay = c.at("velocity_decay");
  config.seed = c.at("seed");

  const json& s = j.at("skeleton");
  Skeleton& skeleton = run.skeleton;
  skeleton.mode = s.at("mode") == "full-state" ? Skeleton::Mode::kFullState
                                               : Skeleton::Mode::kReflectionTuples;
  skeleton.tau_final = s.at("tau_final");
  skeleton.events = s.at("events");
  skeleton.proposals = s.at("proposals");
  skeleton.all_rates_vanished = s.at("all_rates_vanished");
  skeleton.initial_state = from_vector(s.at("initial_state").get<std::vector<double>>());
  skeleton.initial_velocity = from_vector(s.at("initial_velocity").get<std::vector<double>>());
  skeleton.final_state = from_vector(s.at("final_state").get<std::vector<double>>());
  run.wall_seconds = j.value("wall_seconds", 0.0);

  std::ifstream in(csv_file);
  if (!in) throw std::runtime_error("cannot open " + csv_file.string());
  std::string line;
  long line_number = 1;
  if (!std::getline(in, line)) parse_fail(csv_file, 1, "missing header");

  if (skeleton.mode == Skeleton::Mode::kFullState) {
    const int d = skeleton.dim();
    std::vector<double> times, flat;
    while (std::getline(in, line)) {
      ++line_number;
      if (line.empty()) continue;
      const std::vector<double> row = parse_row(csv_file, line_number, line);
      if (static_cast<int>(row.size()) != d + 1)
        parse_fail(csv_file, line_number, "expected " + std::to_string(d + 1) + " fields");
      times.push_back(row[0]);
      flat.insert(flat.end(), row.begin() + 1, row.end());
    }
    skeleton.times = from_vector(times);
    skeleton.states =
        Eigen::Map<const Eigen::MatrixXd>(flat.data(), d, static_cast<Eigen::Index>(times.size()));
  } else {
    while (std::getline(in, line)) {
      ++line_number;
      if (line.empty()) continue;
      const std::vector<double> row = parse_row(csv_file, line_number, line);
      if (row.size() != 4) parse_fail(csv_file, line_number, "expected 4 fields");
      const int coordinate = static_cast<int>(row[1]) - 1;
      if (coordinate < 0 || coordinate >= skeleton.dim())
        parse_fail(csv_file, line_number, "coordinate index out of range");
      skeleton.reflections.push_back(ReflectionEvent{coordinate, row[2], row[3]});
    }
  }
  return run;
}

void write_paths_csv(const std::filesystem::path& file, const Eigen::VectorXd& grid_times,
                     const Eigen::MatrixXd& paths) {
  auto out = open_out(file);
  for (Eigen::Index m = 0; m < grid_times.size(); ++m)
    out << (m ? "," : "") << grid_times[m];
  out << '\n';
  for (Eigen::Index p = 0; p < paths.cols(); ++p) {
    for (Eigen::Index m = 0; m < paths.rows(); ++m) out << (m ? "," : "") << paths(m, p);
    out << '\n';
  }
}

void write_ess_csv(const std::filesystem::path& file, const EssReport& report) {
  auto out = open_out(file);
  out << "coefficient,level,position,ess,ess_per_sec\n";
  for (Eigen::Index k = 0; k < report.per_coordinate.size(); ++k) {
    const DyadicIndex d = index_to_pair(static_cast<int>(k) + 1);
    out << k + 1 << ',' << d.level << ',' << d.position << ',' << report.per_coordinate[k] << ','
        << report.per_coordinate[k] / report.wall_seconds << '\n';
  }
}

void write_qq_csv(const std::filesystem::path& file, const QqData& data) {
  auto out = open_out(file);
  out << "normal_quantile,empirical_quantile\n";
  for (Eigen::Index i = 0; i < data.theoretical.size(); ++i)
    out << data.theoretical[i] << ',' << data.empirical[i] << '\n';
}

namespace {

Eigen::VectorXd midpoint_values(const BasisContext& ctx, const Eigen::MatrixXd& samples) {
  Eigen::VectorXd out(samples.cols());
  for (Eigen::Index i = 0; i < samples.cols(); ++i)
    out[i] = ctx.expand(samples.col(i), 0.5 * ctx.horizon());
  return out;
}

CompareCell zigzag_cell(const CompareConfig& config, double alpha, const std::string& estimator,
                        std::uint64_t seed) {
  CompareCell cell;
  cell.alpha = alpha;
  cell.method = estimator == "single" ? "zz" : "zz" + estimator;
  RunConfig run;
  run.model = "sine";
  run.alpha = alpha;
  run.levels = config.levels;
  run.horizon = config.horizon;
  run.u = 0.0;
  run.v = 0.0;
  run.algorithm = "fully-local";
  run.estimator = estimator;
  run.tau_final = config.zz_clock;
  run.tau_burnin = config.zz_burnin;
  run.delta_tau = config.delta_tau;
  run.seed = seed;
  const RunResult result = run_sampler(run);
  const Eigen::MatrixXd samples = discretize(result.skeleton, run.tau_burnin, run.delta_tau);
  const EssReport report = ess_report(samples, result.wall_seconds);
  cell.ess_mid = report.per_coordinate[0];
  cell.ess_median = report.median;
  cell.ess_min = report.min;
  cell.seconds = result.wall_seconds;
  cell.midpoint_chain = midpoint_values(build_context(run), samples);
  return cell;
}

CompareCell mala_cell(const CompareConfig& config, double alpha, std::uint64_t seed) {
  CompareCell cell;
  cell.alpha = alpha;
  cell.method = "mala";
  const BasisContext ctx(config.levels, config.horizon, 0.0, 0.0);
  MalaOptions options;
  options.iterations = config.mala_iterations;
  options.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  const MalaResult result = mala_bridge(ctx, SineModel{alpha}, options);
  cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const EssReport report = ess_report(result.chain, cell.seconds);
  cell.ess_mid = report.per_coordinate[0];
  cell.ess_median = report.median;
  cell.ess_min = report.min;
  cell.midpoint_chain = midpoint_values(ctx, result.chain);
  return cell;
}

}  // namespace

std::vector<CompareCell> run_comparison(const CompareConfig& config) {
  std::vector<CompareCell> cells;
  const std::vector<std::string> estimators{"single", "v1", "v2"};
  std::uint64_t cell_index = 0;
  for (double alpha : config.alphas) {
    for (const std::string& estimator : estimators) {
      const std::uint64_t seed = config.seed + 1000003 * ++cell_index;
      try {
        cells.push_back(zigzag_cell(config, alpha, estimator, seed));
      } catch (const std::exception&) {
        cells.push_back(CompareCell{alpha, estimator == "single" ? "zz" : "zz" + estimator, true});
      }
    }
    const std::uint64_t seed = config.seed + 1000003 * ++cell_index;
    try {
      cells.push_back(mala_cell(config, alpha, seed));
    } catch (const std::exception&) {
      cells.push_back(CompareCell{alpha, "mala", true});
    }
  }
  return cells;
}

void write_compare_csv(const std::filesystem::path& file, const std::vector<CompareCell>& cells) {
  auto out = open_out(file);
  out << "alpha,method,status,ess_mid,ess_median,ess_min,seconds,"
         "ess_mid_per_sec,ess_median_per_sec,ess_min_per_sec\n";
  for (const CompareCell& cell : cells) {
    out << cell.alpha << ',' << cell.method << ',' << (cell.failed ? "failed" : "ok");
    if (cell.failed) {
      out << ",,,,,,,\n";
      continue;
    }
    out << ',' << cell.ess_mid << ',' << cell.ess_median << ',' << cell.ess_min << ','
        << cell.seconds << ',' << cell.ess_mid / cell.seconds << ','
        << cell.ess_median / cell.seconds << ',' << cell.ess_min / cell.seconds << '\n';
  }
}

}  // namespace zz
