#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace gdl {

/// Experiment name, seed, output directory and namespaced `exp.key` values.
/// Getters record the effective value (explicit or default) for the manifest.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;
  ExperimentConfig(std::string name, std::uint64_t seed);

  const std::string& name() const noexcept { return name_; }
  std::uint64_t seed() const noexcept { return seed_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  /// Stores `key` (with or without the `name.` prefix).
  void set(std::string_view key, std::string value);
  /// Copies the keys of this experiment's namespace from `values`; throws
  /// std::invalid_argument on keys the experiment does not know.
  void merge(const std::map<std::string, std::string>& values);

  std::size_t get_size(std::string_view key, std::size_t fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::string get_string(std::string_view key, std::string_view fallback) const;
  std::vector<std::size_t> get_sizes(std::string_view key, std::vector<std::size_t> fallback) const;
  std::vector<double> get_doubles(std::string_view key, std::vector<double> fallback) const;

  /// Effective values of every key read so far, plus the seed.
  nlohmann::json echo() const;

 private:
  const std::string* find(std::string_view key) const;
  void note(std::string_view key, std::string value) const;

  std::string name_;
  std::uint64_t seed_ = 0;
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, std::string> used_;
};

/// Flat `key = value` text; `#` starts a comment. Keys are `experiment.key`.
std::map<std::string, std::string> parse_config(std::string_view text);

const std::vector<std::string>& experiment_names();
/// Keys understood by an experiment (without the namespace prefix).
const std::set<std::string>& experiment_keys(std::string_view name);

struct CsvTable {
  std::string name;    // file stem suffix
  std::string schema;  // one-line description for the `#` comment
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string render() const;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<CsvTable> tables;
  nlohmann::json summary;  // headline numbers, also echoed in the manifest
};

/// Writes `<experiment>_<table>.csv` for every table and
/// `<experiment>_manifest.json` into `out`. Returns the CSV paths.
std::vector<std::filesystem::path> write_report(const ExperimentReport& report,
                                                const ExperimentConfig& cfg,
                                                const std::filesystem::path& out,
                                                double wall_seconds);

// ---- mod 3 ---------------------------------------------------------------

struct Mod3Row {
  std::string model;  // "plain" or "symmetrized"
  std::size_t depth;
  std::uint64_t seed;
  double final_loss;
  double train_accuracy;
  double extrapolation_accuracy;
};

struct Mod3Result {
  std::vector<Mod3Row> rows;
  double mean(std::string_view model, std::size_t depth, double Mod3Row::*field) const;
  std::vector<std::size_t> depths() const;
};

Mod3Result run_mod3(const ExperimentConfig& cfg);
ExperimentReport report(const Mod3Result& result);

// ---- extrapolation ---------------------------------------------------------

struct RaySample {
  std::size_t model;  // index into the ray models
  std::size_t ray;
  double h;
  double value;
};

struct RayFit {
  std::size_t model;
  std::size_t ray;
  double direction_x;
  double direction_y;
  double slope;
  double intercept;
  double r_squared;
};

struct HistogramBin {
  double lo;
  double hi;
  std::size_t count;
};

struct ExtrapolationResult {
  std::vector<RaySample> samples;
  std::vector<RayFit> fits;
  std::vector<double> query_values;  // f(query) per seed, in trial order
  std::vector<HistogramBin> histogram;
  double median = 0.0;
  double within_decade = 0.0;  // fraction of values within a factor 10 of the median
  std::size_t modes = 0;       // histogram peaks with prominence > 2 sqrt(count)
  double control_value = 0.0;  // f(query) for the all-zero target task
  double min_r_squared = 1.0;
};

ExtrapolationResult run_extrapolation(const ExperimentConfig& cfg);
ExperimentReport report(const ExtrapolationResult& result);

// ---- Lipschitz versus depth ------------------------------------------------

struct LipschitzRow {
  std::size_t depth;
  std::uint64_t seed;
  double final_loss;
  double upper_bound;
  double empirical;
};

struct LipschitzDepthResult {
  std::vector<LipschitzRow> rows;
  std::vector<std::size_t> depths;
  std::vector<double> mean_empirical;  // per depth
  std::vector<double> mean_bound;      // per depth
  double spearman = 0.0;               // rank correlation of depth and mean_empirical
  double control_bound = 0.0;          // single identity layer
  double control_formula = 0.0;        // max_j sum_i |w_ji|
  bool bound_dominates = true;         // empirical <= bound on every row
};

LipschitzDepthResult run_lipschitz_depth(const ExperimentConfig& cfg);
ExperimentReport report(const LipschitzDepthResult& result);

// ---- L2 --------------------------------------------------------------------

struct L2Row {
  double lambda;
  std::uint64_t seed;
  double final_loss;
  double max_abs_weight;
  double upper_bound;
  double empirical;
};

struct L2Result {
  std::vector<L2Row> rows;
  std::vector<double> lambdas;
  std::vector<double> mean_bound;   // per lambda
  std::vector<double> mean_weight;  // per lambda
  double mean_bound_for(double lambda) const;
};

L2Result run_l2(const ExperimentConfig& cfg);
ExperimentReport report(const L2Result& result);

// ---- invariance suite --------------------------------------------------------

struct InvarianceResult {
  std::size_t deepset_cases = 0;
  double deepset_max_deviation = 0.0;
  std::size_t gnn_cases = 0;
  double gnn_max_deviation = 0.0;
  std::vector<double> plain_risks;        // empirical risk per Monte Carlo dataset
  std::vector<double> symmetrized_risks;  // same datasets, symmetrized estimator
  double plain_variance = 0.0;
  double symmetrized_variance = 0.0;
  double bootstrap_confidence = 0.0;  // fraction of resamples with Var[sym] <= Var[plain]
};

InvarianceResult run_invariance(const ExperimentConfig& cfg);
ExperimentReport report(const InvarianceResult& result);

// ---- helpers -----------------------------------------------------------------

/// Runs the named experiment and returns its report.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope;
  double intercept;
  double r_squared;  // 1 when y is constant
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Unbiased sample variance.
double sample_variance(std::span<const double> v);

}  // namespace gdl
