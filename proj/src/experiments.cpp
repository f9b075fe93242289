#include "gdl/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gdl/deepsets.hpp"
#include "gdl/gnn.hpp"
#include "gdl/graph.hpp"
#include "gdl/groups.hpp"
#include "gdl/nn.hpp"
#include "gdl/random.hpp"
#include "gdl/training.hpp"

namespace gdl {
namespace {

using Vec = std::vector<double>;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(s)};
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(std::string_view key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw std::invalid_argument("config key '" + std::string(key) + "': '" + text +
                                "' is not a number");
  }
  return v;
}

std::size_t parse_size(std::string_view key, const std::string& text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("config key '" + std::string(key) + "': '" + text +
                                "' is not a non-negative integer");
  }
  return v;
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, double>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }
std::string num(std::uint64_t v, int) { return std::to_string(v); }

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<std::size_t> layer_dims(std::size_t in, std::size_t width, std::size_t depth,
                                    std::size_t out) {
  if (depth == 0) throw std::invalid_argument("depth must be at least 1");
  std::vector<std::size_t> dims{in};
  for (std::size_t l = 0; l + 1 < depth; ++l) dims.push_back(width);
  dims.push_back(out);
  return dims;
}

// The two-dimensional task: 1 at the origin, 0 at the corners (+-4, +-4).
Dataset<Vec> center_corner_task(double center = 1.0) {
  return {{Vec{0, 0}, Vec{center}},
          {Vec{-4, -4}, Vec{0}},
          {Vec{-4, 4}, Vec{0}},
          {Vec{4, -4}, Vec{0}},
          {Vec{4, 4}, Vec{0}}};
}

TrainConfig regression_config(const ExperimentConfig& cfg, double default_rate,
                              std::size_t default_epochs) {
  TrainConfig tc;
  tc.learning_rate = cfg.get_double("learning_rate", default_rate);
  tc.epochs = cfg.get_size("epochs", default_epochs);
  tc.loss = LossKind::mse;
  return tc;
}

Activation random_activation(Rng& rng) {
  constexpr Activation kinds[] = {Activation::relu, Activation::sigmoid, Activation::tanh};
  return kinds[rng.index(3)];
}

void jitter_biases(MLP& net, Rng& rng) {
  for (auto& layer : net.layers) {
    for (double& b : layer.biases) b = rng.uniform(-0.5, 0.5);
  }
}

}  // namespace

// ---- config ------------------------------------------------------------------

ExperimentConfig::ExperimentConfig(std::string name, std::uint64_t seed)
    : name_(std::move(name)), seed_(seed) {
  experiment_keys(name_);  // validates the name
}

void ExperimentConfig::set(std::string_view key, std::string value) {
  const std::string prefix = name_ + ".";
  std::string bare(key);
  if (bare.starts_with(prefix)) bare = bare.substr(prefix.size());
  if (!experiment_keys(name_).contains(bare)) {
    throw std::invalid_argument("unknown config key '" + prefix + bare + "'");
  }
  values_[bare] = std::move(value);
}

void ExperimentConfig::merge(const std::map<std::string, std::string>& values) {
  const std::string prefix = name_ + ".";
  for (const auto& [key, value] : values) {
    if (key.starts_with(prefix)) set(key, value);
  }
}

const std::string* ExperimentConfig::find(std::string_view key) const {
  const auto it = values_.find(std::string(key));
  return it == values_.end() ? nullptr : &it->second;
}

void ExperimentConfig::note(std::string_view key, std::string value) const {
  used_[std::string(key)] = std::move(value);
}

std::size_t ExperimentConfig::get_size(std::string_view key, std::size_t fallback) const {
  const std::string* v = find(key);
  const std::size_t out = v ? parse_size(key, *v) : fallback;
  note(key, std::to_string(out));
  return out;
}

double ExperimentConfig::get_double(std::string_view key, double fallback) const {
  const std::string* v = find(key);
  const double out = v ? parse_double(key, *v) : fallback;
  note(key, format_double(out));
  return out;
}

std::string ExperimentConfig::get_string(std::string_view key, std::string_view fallback) const {
  const std::string* v = find(key);
  std::string out = v ? *v : std::string(fallback);
  note(key, out);
  return out;
}

std::vector<std::size_t> ExperimentConfig::get_sizes(std::string_view key,
                                                     std::vector<std::size_t> fallback) const {
  const std::string* v = find(key);
  if (v) {
    fallback.clear();
    for (const auto& item : split_list(*v)) fallback.push_back(parse_size(key, item));
    if (fallback.empty()) throw std::invalid_argument("config key '" + std::string(key) + "' is empty");
  }
  note(key, join(fallback));
  return fallback;
}

std::vector<double> ExperimentConfig::get_doubles(std::string_view key,
                                                  std::vector<double> fallback) const {
  const std::string* v = find(key);
  if (v) {
    fallback.clear();
    for (const auto& item : split_list(*v)) fallback.push_back(parse_double(key, item));
    if (fallback.empty()) throw std::invalid_argument("config key '" + std::string(key) + "' is empty");
  }
  note(key, join(fallback));
  return fallback;
}

nlohmann::json ExperimentConfig::echo() const {
  nlohmann::json j = nlohmann::json::object();
  j["seed"] = seed_;
  for (const auto& [k, v] : used_) j[name_ + "." + k] = v;
  return j;
}

std::map<std::string, std::string> parse_config(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.find('.') == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": key '" + key +
                                  "' is not namespaced (experiment.key)");
    }
    out[key] = value;
  }
  return out;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"extrapolation", "mod3", "lipschitz-depth", "l2",
                                              "invariance"};
  return names;
}

const std::set<std::string>& experiment_keys(std::string_view name) {
  static const std::map<std::string, std::set<std::string>, std::less<>> keys{
      {"extrapolation",
       {"hidden", "epochs", "learning_rate", "seeds", "ray_models", "rays", "h_min", "h_max",
        "h_points", "query_x", "query_y", "bins"}},
      {"mod3",
       {"depths", "width", "seeds", "train_points", "train_max", "extrap_max", "grid_step",
        "epochs", "learning_rate", "activation", "input_scale", "period"}},
      {"lipschitz-depth", {"depths", "width", "seeds", "epochs", "learning_rate", "samples", "box"}},
      {"l2", {"lambdas", "depth", "width", "seeds", "epochs", "learning_rate", "samples", "box"}},
      {"invariance",
       {"deepset_cases", "max_set_size", "gnn_cases", "max_nodes", "mc_datasets", "mc_samples",
        "mc_dim", "mc_train_points", "mc_train_epochs", "bootstrap"}},
  };
  const auto it = keys.find(name);
  if (it == keys.end()) throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
  return it->second;
}

// ---- CSV and manifest -------------------------------------------------------------

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw std::logic_error("CSV row width differs from header");
  rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::string out = "# " + schema + "\n";
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += '\n';
  }
  return out;
}

std::vector<std::filesystem::path> write_report(const ExperimentReport& report,
                                                const ExperimentConfig& cfg,
                                                const std::filesystem::path& out,
                                                double wall_seconds) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw std::filesystem::filesystem_error("cannot create output directory", out, ec);
  std::vector<std::filesystem::path> written;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& table : report.tables) {
    const auto path = out / (report.experiment + "_" + table.name + ".csv");
    std::ofstream f(path, std::ios::binary);
    f << table.render();
    if (!f) throw std::filesystem::filesystem_error("cannot write", path, std::make_error_code(std::errc::io_error));
    written.push_back(path);
    files.push_back(path.filename().string());
  }
  nlohmann::json manifest{{"experiment", report.experiment},
                          {"seed", cfg.seed()},
                          {"config", cfg.echo()},
                          {"version", "gdl 0.1.0"},
                          {"compiler", __VERSION__},
                          {"json_library", NLOHMANN_JSON_VERSION_MAJOR * 10000 +
                                               NLOHMANN_JSON_VERSION_MINOR * 100 +
                                               NLOHMANN_JSON_VERSION_PATCH},
                          {"tables", files},
                          {"summary", report.summary},
                          {"wall_time_seconds", wall_seconds}};
  const auto path = out / (report.experiment + "_manifest.json");
  std::ofstream f(path, std::ios::binary);
  f << manifest.dump(2) << '\n';
  if (!f) throw std::filesystem::filesystem_error("cannot write", path, std::make_error_code(std::errc::io_error));
  return written;
}

// ---- statistics -----------------------------------------------------------------

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("spearman needs two equally long series of length >= 2");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("linear fit needs two equally long series of length >= 2");
  }
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear fit needs distinct x values");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  // A constant series is fitted exactly by a flat line.
  if (syy <= 1e-24 * std::max(1.0, my * my) * static_cast<double>(x.size())) {
    return {slope, intercept, 1.0};
  }
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (slope * x[i] + intercept);
    ss_res += r * r;
  }
  return {slope, intercept, 1.0 - ss_res / syy};
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) throw std::invalid_argument("variance needs at least two values");
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// ---- mod 3 -----------------------------------------------------------------------

double Mod3Result::mean(std::string_view model, std::size_t depth, double Mod3Row::*field) const {
  std::vector<double> v;
  for (const auto& r : rows) {
    if (r.model == model && r.depth == depth) v.push_back(r.*field);
  }
  return mean_of(v);
}

std::vector<std::size_t> Mod3Result::depths() const {
  std::vector<std::size_t> d;
  for (const auto& r : rows) {
    if (std::find(d.begin(), d.end(), r.depth) == d.end()) d.push_back(r.depth);
  }
  return d;
}

Mod3Result run_mod3(const ExperimentConfig& cfg) {
  const auto depths = cfg.get_sizes("depths", {1, 2, 4, 8});
  const std::size_t width = cfg.get_size("width", 8);
  const std::size_t seeds = cfg.get_size("seeds", 10);
  const std::size_t n_train = cfg.get_size("train_points", 300);
  const double train_max = cfg.get_double("train_max", 30.0);
  const double extrap_max = cfg.get_double("extrap_max", 300.0);
  const double step = cfg.get_double("grid_step", 0.1);
  const double scale = cfg.get_double("input_scale", 0.1);
  const double period = cfg.get_double("period", 3.0);
  const Activation act = parse_activation(cfg.get_string("activation", "relu"));
  TrainConfig tc;
  tc.loss = LossKind::softmax_cross_entropy;
  tc.learning_rate = cfg.get_double("learning_rate", 0.1);
  tc.epochs = cfg.get_size("epochs", 600);
  if (!(step > 0.0) || !(extrap_max > train_max) || !(period > 0.0)) {
    throw std::invalid_argument("mod3: need grid_step > 0, extrap_max > train_max, period > 0");
  }

  // Orbit representative under translation by multiples of the period.
  auto representative = [period](double x) { return x - period * std::floor(x / period); };
  auto label = [&](double x) -> std::size_t { return representative(x) > 1.0 ? 1 : 0; };
  auto plain_input = [scale](double x) { return Vec{x * scale}; };
  auto sym_input = [&](double x) { return Vec{representative(x)}; };

  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double x = train_max + (static_cast<double>(i) + 0.5) * step;
    if (x >= extrap_max) break;
    grid.push_back(x);
  }

  Mod3Result result;
  for (std::size_t trial = 0; trial < seeds; ++trial) {
    const std::uint64_t seed = cfg.seed() + trial;
    Rng rng(seed);
    std::vector<double> xs(n_train);
    for (double& x : xs) x = rng.uniform(0.0, train_max);
    for (std::size_t depth : depths) {
      const auto dims = layer_dims(1, width, depth, 2);
      for (const std::string model : {"plain", "symmetrized"}) {
        const bool sym = model == "symmetrized";
        auto input = [&](double x) { return sym ? sym_input(x) : plain_input(x); };
        Dataset<Vec> data;
        data.reserve(xs.size());
        for (double x : xs) data.push_back({input(x), label(x)});
        const auto trained = train(mlp_init(dims, act, seed), data, tc);
        auto accuracy = [&](std::span<const double> points) {
          std::size_t hits = 0;
          for (double x : points) {
            const Vec out = mlp_eval(trained.model, input(x));
            hits += (out[1] > out[0] ? 1u : 0u) == label(x);
          }
          return static_cast<double>(hits) / static_cast<double>(points.size());
        };
        result.rows.push_back(
            {model, depth, seed, trained.final_loss, accuracy(xs), accuracy(grid)});
      }
    }
  }
  return result;
}

ExperimentReport report(const Mod3Result& result) {
  ExperimentReport rep{"mod3", {}, nlohmann::json::object()};
  CsvTable runs{"runs",
                "one row per (model, depth, seed): model in {plain, symmetrized}; accuracies at "
                "threshold 0.5 on the training points and the extrapolation grid",
                {"model", "depth", "seed", "final_loss", "train_accuracy", "extrapolation_accuracy"},
                {}};
  for (const auto& r : result.rows) {
    runs.add({r.model, num(r.depth), num(r.seed, 0), num(r.final_loss), num(r.train_accuracy),
              num(r.extrapolation_accuracy)});
  }
  CsvTable summary{"summary", "accuracies averaged over seeds per (model, depth)",
                   {"model", "depth", "mean_train_accuracy", "mean_extrapolation_accuracy"}, {}};
  for (const std::string model : {"plain", "symmetrized"}) {
    for (std::size_t d : result.depths()) {
      const double tr = result.mean(model, d, &Mod3Row::train_accuracy);
      const double ex = result.mean(model, d, &Mod3Row::extrapolation_accuracy);
      summary.add({model, num(d), num(tr), num(ex)});
      rep.summary[model + "_depth_" + std::to_string(d)] = {{"train", tr}, {"extrapolation", ex}};
    }
  }
  rep.tables = {runs, summary};
  return rep;
}

// ---- extrapolation -------------------------------------------------------------------

ExtrapolationResult run_extrapolation(const ExperimentConfig& cfg) {
  const std::size_t hidden = cfg.get_size("hidden", 16);
  const std::size_t seeds = cfg.get_size("seeds", 200);
  const std::size_t ray_models = cfg.get_size("ray_models", 5);
  const std::size_t rays = cfg.get_size("rays", 8);
  const double h_min = cfg.get_double("h_min", 10.0);
  const double h_max = cfg.get_double("h_max", 100.0);
  const std::size_t h_points = cfg.get_size("h_points", 91);
  const double qx = cfg.get_double("query_x", 50.0);
  const double qy = cfg.get_double("query_y", 50.0);
  const std::size_t bins = cfg.get_size("bins", 0);
  const TrainConfig tc = regression_config(cfg, 0.05, 2000);
  if (h_points < 2 || !(h_max > h_min) || rays == 0) {
    throw std::invalid_argument("extrapolation: need h_points >= 2, h_max > h_min, rays > 0");
  }
  const std::size_t dims[] = {2, hidden, 1};
  const Dataset<Vec> task = center_corner_task();
  const Vec query{qx, qy};

  ExtrapolationResult res;
  const std::size_t trials = std::max(seeds, ray_models);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::uint64_t seed = cfg.seed() + trial;
    const MLP net = train(mlp_init(dims, Activation::relu, seed), task, tc).model;
    if (trial < seeds) res.query_values.push_back(mlp_eval(net, query)[0]);
    if (trial >= ray_models) continue;
    for (std::size_t r = 0; r < rays; ++r) {
      const double angle = 2.0 * M_PI * static_cast<double>(r) / static_cast<double>(rays);
      const double dx = std::cos(angle);
      const double dy = std::sin(angle);
      std::vector<double> hs, fs;
      for (std::size_t k = 0; k < h_points; ++k) {
        const double h = h_min + (h_max - h_min) * static_cast<double>(k) /
                                     static_cast<double>(h_points - 1);
        const double value = mlp_eval(net, Vec{h * dx, h * dy})[0];
        hs.push_back(h);
        fs.push_back(value);
        res.samples.push_back({trial, r, h, value});
      }
      const LinearFit fit = linear_fit(hs, fs);
      res.fits.push_back({trial, r, dx, dy, fit.slope, fit.intercept, fit.r_squared});
      res.min_r_squared = std::min(res.min_r_squared, fit.r_squared);
    }
  }

  if (!res.query_values.empty()) {
    std::vector<double> sorted = res.query_values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    res.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    const double lo = sorted.front();
    const double hi = sorted.back();
    // Sturges' rule unless the bin count is configured.
    const std::size_t nbins =
        bins ? bins : static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(m)))) + 1;
    const double width = hi > lo ? (hi - lo) / static_cast<double>(nbins) : 1.0;
    std::vector<std::size_t> counts(nbins, 0);
    for (double v : sorted) {
      const auto b = std::min(nbins - 1, static_cast<std::size_t>((v - lo) / width));
      ++counts[b];
    }
    for (std::size_t b = 0; b < nbins; ++b) {
      res.histogram.push_back({lo + width * static_cast<double>(b),
                               lo + width * static_cast<double>(b + 1), counts[b]});
    }
    // Same-sign values within a factor of 10 of the median.
    std::size_t near = 0;
    const double a = std::abs(res.median);
    for (double v : sorted) {
      if (v * res.median > 0.0 && std::abs(v) >= a / 10.0 && std::abs(v) <= a * 10.0) ++near;
    }
    res.within_decade = static_cast<double>(near) / static_cast<double>(m);
    // A local maximum counts as a mode when it rises above the valley
    // separating it from any higher bin by more than twice its Poisson sd.
    std::size_t modes = 0;
    for (std::size_t b = 0; b < nbins;) {
      std::size_t e = b;
      while (e + 1 < nbins && counts[e + 1] == counts[b]) ++e;
      const double h = static_cast<double>(counts[b]);
      const bool peak = (b == 0 || counts[b - 1] < counts[b]) && (e + 1 == nbins || counts[e + 1] < counts[b]);
      if (peak && h > 0.0) {
        double col = -1.0;  // highest valley towards a higher bin
        double low = h;
        for (std::size_t j = b; j-- > 0;) {
          low = std::min(low, static_cast<double>(counts[j]));
          if (static_cast<double>(counts[j]) > h) {
            col = std::max(col, low);
            break;
          }
        }
        low = h;
        for (std::size_t j = e + 1; j < nbins; ++j) {
          low = std::min(low, static_cast<double>(counts[j]));
          if (static_cast<double>(counts[j]) > h) {
            col = std::max(col, low);
            break;
          }
        }
        const double prominence = col < 0.0 ? h : h - col;
        if (prominence > 2.0 * std::sqrt(h)) ++modes;
      }
      b = e + 1;
    }
    res.modes = modes;
  }

  const Dataset<Vec> zeros = center_corner_task(0.0);
  const MLP control = train(mlp_init(dims, Activation::relu, cfg.seed()), zeros, tc).model;
  res.control_value = mlp_eval(control, query)[0];
  return res;
}

ExperimentReport report(const ExtrapolationResult& res) {
  ExperimentReport rep{"extrapolation", {}, nlohmann::json::object()};
  CsvTable rays{"rays", "network value f(h*v) along rays v from the origin, per trained model",
                {"model", "ray", "h", "value"}, {}};
  for (const auto& s : res.samples) rays.add({num(s.model), num(s.ray), num(s.h), num(s.value)});
  CsvTable fits{"fits", "least-squares line through each ray's samples and its R^2",
                {"model", "ray", "direction_x", "direction_y", "slope", "intercept", "r_squared"},
                {}};
  for (const auto& f : res.fits) {
    fits.add({num(f.model), num(f.ray), num(f.direction_x), num(f.direction_y), num(f.slope),
              num(f.intercept), num(f.r_squared)});
  }
  CsvTable query{"query", "value at the query point for each seeded training run",
                 {"trial", "value"}, {}};
  for (std::size_t i = 0; i < res.query_values.size(); ++i) {
    query.add({num(i), num(res.query_values[i])});
  }
  CsvTable hist{"histogram", "histogram of the query values over equal-width bins",
                {"bin_lo", "bin_hi", "count"}, {}};
  for (const auto& b : res.histogram) hist.add({num(b.lo), num(b.hi), num(b.count)});
  rep.tables = {rays, fits, query, hist};
  rep.summary = {{"min_r_squared", res.min_r_squared},
                 {"median", res.median},
                 {"within_decade", res.within_decade},
                 {"modes", res.modes},
                 {"control_value", res.control_value}};
  return rep;
}

// ---- Lipschitz versus depth ------------------------------------------------------------

LipschitzDepthResult run_lipschitz_depth(const ExperimentConfig& cfg) {
  std::vector<std::size_t> default_depths;
  for (std::size_t d = 2; d <= 15; ++d) default_depths.push_back(d);
  const auto depths = cfg.get_sizes("depths", default_depths);
  const std::size_t width = cfg.get_size("width", 8);
  const std::size_t seeds = cfg.get_size("seeds", 5);
  const std::size_t samples = cfg.get_size("samples", 1000);
  const double half = cfg.get_double("box", 4.0);
  const TrainConfig tc = regression_config(cfg, 0.02, 2000);
  const Interval box[] = {{-half, half}, {-half, half}};
  const Dataset<Vec> task = center_corner_task();

  LipschitzDepthResult res;
  res.depths = depths;
  for (std::size_t d : depths) {
    std::vector<double> emp, bound;
    for (std::size_t trial = 0; trial < seeds; ++trial) {
      const std::uint64_t seed = cfg.seed() + trial;
      const auto trained = train(mlp_init(layer_dims(2, width, d, 1), Activation::relu, seed), task, tc);
      const double b = lipschitz_upper_bound(trained.model);
      const double e = empirical_lipschitz(trained.model, box, samples, seed);
      res.bound_dominates = res.bound_dominates && e <= b + 1e-9;
      res.rows.push_back({d, seed, trained.final_loss, b, e});
      emp.push_back(e);
      bound.push_back(b);
    }
    res.mean_empirical.push_back(mean_of(emp));
    res.mean_bound.push_back(mean_of(bound));
  }
  if (depths.size() >= 2) {
    std::vector<double> dd(depths.begin(), depths.end());
    res.spearman = spearman(dd, res.mean_empirical);
  }

  // Single identity layer: the recursion reduces to the largest absolute row sum.
  const std::size_t control_dims[] = {2, 3};
  const MLP control = mlp_init(control_dims, Activation::identity, cfg.seed());
  res.control_bound = lipschitz_upper_bound(control);
  for (std::size_t j = 0; j < 3; ++j) {
    res.control_formula = std::max(res.control_formula, std::abs(control.layers[0].weight(j, 0)) +
                                                            std::abs(control.layers[0].weight(j, 1)));
  }
  return res;
}

ExperimentReport report(const LipschitzDepthResult& res) {
  ExperimentReport rep{"lipschitz-depth", {}, nlohmann::json::object()};
  CsvTable runs{"runs", "per (depth, seed): recursion bound and max sampled input-gradient norm",
                {"depth", "seed", "final_loss", "upper_bound", "empirical"}, {}};
  for (const auto& r : res.rows) {
    runs.add({num(r.depth), num(r.seed, 0), num(r.final_loss), num(r.upper_bound), num(r.empirical)});
  }
  CsvTable summary{"summary", "means over seeds per depth", {"depth", "mean_upper_bound", "mean_empirical"},
                   {}};
  for (std::size_t i = 0; i < res.depths.size(); ++i) {
    summary.add({num(res.depths[i]), num(res.mean_bound[i]), num(res.mean_empirical[i])});
  }
  CsvTable control{"control", "single identity layer: recursion bound versus max absolute row sum",
                   {"upper_bound", "row_sum_formula"}, {}};
  control.add({num(res.control_bound), num(res.control_formula)});
  rep.tables = {runs, summary, control};
  rep.summary = {{"spearman", res.spearman},
                 {"bound_dominates", res.bound_dominates},
                 {"control_exact", res.control_bound == res.control_formula}};
  return rep;
}

// ---- L2 -----------------------------------------------------------------------------------

double L2Result::mean_bound_for(double lambda) const {
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] == lambda) return mean_bound[i];
  }
  throw std::out_of_range("lambda " + format_double(lambda) + " was not run");
}

L2Result run_l2(const ExperimentConfig& cfg) {
  const auto lambdas = cfg.get_doubles("lambdas", {0.0, 0.001, 0.002, 10.0});
  const std::size_t depth = cfg.get_size("depth", 4);
  const std::size_t width = cfg.get_size("width", 8);
  const std::size_t seeds = cfg.get_size("seeds", 20);
  const std::size_t samples = cfg.get_size("samples", 500);
  const double half = cfg.get_double("box", 4.0);
  TrainConfig tc = regression_config(cfg, 0.02, 2000);
  const Interval box[] = {{-half, half}, {-half, half}};
  const Dataset<Vec> task = center_corner_task();

  L2Result res;
  res.lambdas = lambdas;
  for (double lambda : lambdas) {
    tc.l2_lambda = lambda;
    std::vector<double> bounds, weights;
    for (std::size_t trial = 0; trial < seeds; ++trial) {
      const std::uint64_t seed = cfg.seed() + trial;
      const auto trained =
          train(mlp_init(layer_dims(2, width, depth, 1), Activation::relu, seed), task, tc);
      const double b = lipschitz_upper_bound(trained.model);
      const double w = max_abs_weight(trained.model);
      res.rows.push_back({lambda, seed, trained.final_loss, w, b,
                          empirical_lipschitz(trained.model, box, samples, seed)});
      bounds.push_back(b);
      weights.push_back(w);
    }
    res.mean_bound.push_back(mean_of(bounds));
    res.mean_weight.push_back(mean_of(weights));
  }
  return res;
}

ExperimentReport report(const L2Result& res) {
  ExperimentReport rep{"l2", {}, nlohmann::json::object()};
  CsvTable runs{"runs", "per (lambda, seed): largest absolute weight, recursion bound, sampled gradient norm",
                {"lambda", "seed", "final_loss", "max_abs_weight", "upper_bound", "empirical"}, {}};
  for (const auto& r : res.rows) {
    runs.add({num(r.lambda), num(r.seed, 0), num(r.final_loss), num(r.max_abs_weight),
              num(r.upper_bound), num(r.empirical)});
  }
  CsvTable summary{"summary", "means over seeds per lambda",
                   {"lambda", "mean_max_abs_weight", "mean_upper_bound"}, {}};
  for (std::size_t i = 0; i < res.lambdas.size(); ++i) {
    summary.add({num(res.lambdas[i]), num(res.mean_weight[i]), num(res.mean_bound[i])});
    rep.summary["lambda_" + format_double(res.lambdas[i])] = res.mean_bound[i];
  }
  rep.tables = {runs, summary};
  return rep;
}

// ---- invariance suite ---------------------------------------------------------------------

InvarianceResult run_invariance(const ExperimentConfig& cfg) {
  const std::size_t ds_cases = cfg.get_size("deepset_cases", 1000);
  const std::size_t max_set = cfg.get_size("max_set_size", 5);
  const std::size_t gnn_cases = cfg.get_size("gnn_cases", 500);
  const std::size_t max_nodes = cfg.get_size("max_nodes", 5);
  const std::size_t datasets = cfg.get_size("mc_datasets", 400);
  const std::size_t n_samples = cfg.get_size("mc_samples", 20);
  const std::size_t dim = cfg.get_size("mc_dim", 3);
  const std::size_t n_fit = cfg.get_size("mc_train_points", 30);
  const std::size_t fit_epochs = cfg.get_size("mc_train_epochs", 300);
  const std::size_t bootstrap = cfg.get_size("bootstrap", 1000);
  if (max_set == 0 || max_set > kMaxEnumeratedPermutation || max_nodes == 0 ||
      max_nodes > kMaxEnumeratedPermutation || dim == 0 || dim > kMaxEnumeratedPermutation ||
      datasets < 2 || n_samples == 0 || n_fit == 0) {
    throw std::invalid_argument("invariance: set and graph sizes must lie in 1..8, mc sizes >= 1");
  }

  InvarianceResult res;
  Rng rng(cfg.seed());

  // Deep Sets over scalar elements, checked against every permutation of the set.
  for (std::size_t c = 0; c < ds_cases; ++c) {
    const std::size_t n = 1 + rng.index(max_set);
    DeepSetShape shape;
    shape.latent_dim = 2 + rng.index(6);
    shape.phi_hidden = {2 + rng.index(6)};
    shape.rho_hidden = {2 + rng.index(6)};
    shape.activation = random_activation(rng);
    DeepSet ds = deepset_init(shape, rng.next());
    jitter_biases(ds.phi, rng);
    jitter_biases(ds.rho, rng);
    const ScalarFunction f = [&ds](std::span<const double> x) {
      ElementSet set;
      for (double v : x) set.push_back({v});
      return deepset_eval(ds, set)[0];
    };
    Vec x(n);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    const std::vector<Vec> samples{x};
    const auto rep = check_invariance(f, GroupAction::full_permutation(n), samples, 1e-9);
    res.deepset_max_deviation = std::max(res.deepset_max_deviation, rep.max_deviation);
    ++res.deepset_cases;
  }

  // GNNs on flattened labelled graphs under every node relabelling.
  constexpr std::size_t label_dim = 2;
  for (std::size_t c = 0; c < gnn_cases; ++c) {
    const std::size_t n = 1 + rng.index(max_nodes);
    GnnShape shape;
    shape.color_dim = 3;
    shape.vote_dim = 2 + rng.index(3);
    shape.hidden = {2 + rng.index(3)};
    shape.rounds = rng.index(4);
    shape.activation = random_activation(rng);
    GNN net = gnn_init(shape, rng.next());
    for (MLP* m : {&net.encode, &net.update, &net.vote, &net.readout}) jitter_biases(*m, rng);
    LabeledGraph g = random_graph(n, rng.uniform(), rng.next());
    std::vector<Vec> labels(n, Vec(label_dim));
    for (auto& row : labels) {
      for (double& v : row) v = rng.uniform(-1.0, 1.0);
    }
    g.set_labels(labels);
    const ScalarFunction f = [&net, n](std::span<const double> v) {
      return gnn_eval(net, unflatten_graph(v, n, label_dim))[0];
    };
    const std::vector<Vec> samples{flatten_graph(g)};
    const auto rep = check_invariance(f, GroupAction::node_permutation(n, label_dim), samples, 1e-9);
    res.gnn_max_deviation = std::max(res.gnn_max_deviation, rep.max_deviation);
    ++res.gnn_cases;
  }

  // Monte Carlo: an estimator fitted without regard to symmetry versus its
  // orbit average, on a permutation-invariant target with an invariant input law.
  auto target = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  auto draw = [&](Rng& r) {
    Vec x(dim);
    for (double& v : x) v = r.uniform(-1.0, 1.0);
    return x;
  };
  Dataset<Vec> fit_data;
  for (std::size_t i = 0; i < n_fit; ++i) {
    Vec x = draw(rng);
    fit_data.push_back({x, Vec{target(x)}});
  }
  const std::vector<std::size_t> dims{dim, 8, 1};
  TrainConfig tc;
  tc.learning_rate = 0.05;
  tc.epochs = fit_epochs;
  const MLP plain = train(mlp_init(dims, Activation::tanh, rng.next()), fit_data, tc).model;
  const ScalarFunction f = [&plain](std::span<const double> x) { return mlp_eval(plain, x)[0]; };
  const ScalarFunction f_sym = symmetrize(f, GroupAction::full_permutation(dim));
  for (std::size_t m = 0; m < datasets; ++m) {
    double rp = 0.0, rs = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
      const Vec x = draw(rng);
      const double y = target(x);
      rp += (f(x) - y) * (f(x) - y);
      rs += (f_sym(x) - y) * (f_sym(x) - y);
    }
    res.plain_risks.push_back(rp / static_cast<double>(n_samples));
    res.symmetrized_risks.push_back(rs / static_cast<double>(n_samples));
  }
  res.plain_variance = sample_variance(res.plain_risks);
  res.symmetrized_variance = sample_variance(res.symmetrized_risks);
  std::size_t wins = 0;
  Vec bp(datasets), bs(datasets);
  for (std::size_t b = 0; b < bootstrap; ++b) {
    for (std::size_t i = 0; i < datasets; ++i) {
      const std::size_t k = rng.index(datasets);
      bp[i] = res.plain_risks[k];
      bs[i] = res.symmetrized_risks[k];
    }
    wins += sample_variance(bs) <= sample_variance(bp) ? 1 : 0;
  }
  res.bootstrap_confidence =
      bootstrap ? static_cast<double>(wins) / static_cast<double>(bootstrap) : 0.0;
  return res;
}

ExperimentReport report(const InvarianceResult& res) {
  ExperimentReport rep{"invariance", {}, nlohmann::json::object()};
  CsvTable checks{"checks", "max |f(gx) - f(x)| over random models, inputs and all group elements",
                  {"model", "cases", "max_deviation"}, {}};
  checks.add({"deepset", num(res.deepset_cases), num(res.deepset_max_deviation)});
  checks.add({"gnn", num(res.gnn_cases), num(res.gnn_max_deviation)});
  CsvTable risks{"risk", "empirical risk of the plain and orbit-averaged estimator per Monte Carlo dataset",
                 {"dataset", "plain_risk", "symmetrized_risk"}, {}};
  for (std::size_t i = 0; i < res.plain_risks.size(); ++i) {
    risks.add({num(i), num(res.plain_risks[i]), num(res.symmetrized_risks[i])});
  }
  CsvTable variance{"variance", "variance of the empirical risk across datasets and bootstrap support",
                    {"plain_variance", "symmetrized_variance", "bootstrap_confidence"}, {}};
  variance.add({num(res.plain_variance), num(res.symmetrized_variance), num(res.bootstrap_confidence)});
  rep.tables = {checks, risks, variance};
  rep.summary = {{"deepset_max_deviation", res.deepset_max_deviation},
                 {"gnn_max_deviation", res.gnn_max_deviation},
                 {"plain_variance", res.plain_variance},
                 {"symmetrized_variance", res.symmetrized_variance},
                 {"bootstrap_confidence", res.bootstrap_confidence}};
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const std::string& name = cfg.name();
  if (name == "mod3") return report(run_mod3(cfg));
  if (name == "extrapolation") return report(run_extrapolation(cfg));
  if (name == "lipschitz-depth") return report(run_lipschitz_depth(cfg));
  if (name == "l2") return report(run_l2(cfg));
  if (name == "invariance") return report(run_invariance(cfg));
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

}  // namespace gdl
