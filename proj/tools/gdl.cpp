// gdl: command line for training, graph tests, bounds and experiments.
// Exit codes: 0 ok, 1 usage, 2 divergence, 3 I/O.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gdl/analysis.hpp"
#include "gdl/deepsets.hpp"
#include "gdl/experiments.hpp"
#include "gdl/gnn.hpp"
#include "gdl/graph.hpp"
#include "gdl/nn.hpp"
#include "gdl/training.hpp"
#include "gdl/wl.hpp"

using namespace gdl;
namespace fs = std::filesystem;
using Vec = std::vector<double>;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

Vec parse_numbers(std::string_view text, char sep) {
  Vec out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, sep)) {
    if (item.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (item.find_first_not_of(" \t\r", used) != std::string::npos) {
      throw std::invalid_argument("not a number: '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

Target make_target(const Vec& values, LossKind loss) {
  if (loss == LossKind::softmax_cross_entropy) {
    if (values.size() != 1 || values[0] < 0 || values[0] != static_cast<double>(static_cast<std::size_t>(values[0]))) {
      throw std::invalid_argument("cross-entropy targets must be one class index");
    }
    return static_cast<std::size_t>(values[0]);
  }
  return values;
}

struct TrainFlags {
  double learning_rate = 0.01;
  double lambda = 0.0;
  std::size_t epochs = 1000;
  std::string loss = "mse";
  std::string activation = "relu";
  std::vector<std::size_t> hidden;

  void attach(CLI::App* app) {
    app->add_option("--lr", learning_rate, "learning rate")->capture_default_str();
    app->add_option("--lambda", lambda, "L2 coefficient")->capture_default_str();
    app->add_option("--epochs", epochs, "full-batch epochs")->capture_default_str();
    app->add_option("--loss", loss, "mse or ce")->capture_default_str();
    app->add_option("--activation", activation, "relu, sigmoid, tanh or identity")->capture_default_str();
    app->add_option("--hidden", hidden, "hidden widths")->delimiter(',');
  }
  TrainConfig config(std::uint64_t seed) const {
    TrainConfig c;
    c.learning_rate = learning_rate;
    c.l2_lambda = lambda;
    c.epochs = epochs;
    c.seed = seed;
    c.loss = loss == "ce" ? LossKind::softmax_cross_entropy : parse_loss(loss);
    return c;
  }
};

template <class Model>
void save_training(const fs::path& out, const std::string& stem, const TrainResult<Model>& result) {
  write_file(out / (stem + "_checkpoint.json"), write_checkpoint(result.model));
  std::ostringstream trace;
  write_loss_trace(trace, result.loss_trace);
  write_file(out / (stem + "_loss.csv"), trace.str());
  std::cout << "final loss: " << format_double(result.final_loss) << "\n"
            << "checkpoint: " << (out / (stem + "_checkpoint.json")).string() << "\n";
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gdl: invariant networks, WL refinement and generalization bounds"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string config_path;
  app.add_option("--seed", seed, "random seed")->capture_default_str();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--config", config_path, "key = value file, keys namespaced by experiment");
  std::vector<std::string> positional;

  // train-mlp: CSV rows, the last --outputs columns (or one class index) are targets.
  auto* mlp_cmd = app.add_subcommand("train-mlp", "train an MLP on a CSV dataset");
  std::string mlp_data;
  std::size_t mlp_outputs = 1;
  std::size_t mlp_classes = 0;
  TrainFlags mlp_flags;
  mlp_cmd->add_option("--data", mlp_data, "CSV file, one sample per row")->required();
  mlp_cmd->add_option("--outputs", mlp_outputs, "target columns (mse)")->capture_default_str();
  mlp_cmd->add_option("--classes", mlp_classes, "number of classes (ce)");
  mlp_flags.attach(mlp_cmd);

  // deepset: lines `target: e1 e2 ...`, elements comma-separated vectors.
  auto* ds_cmd = app.add_subcommand("deepset", "train a Deep Set on a set dataset");
  std::string ds_data;
  std::size_t ds_latent = 16;
  std::vector<std::size_t> ds_rho_hidden;
  TrainFlags ds_flags;
  ds_cmd->add_option("--data", ds_data, "lines 'target: e1 e2 ...'")->required();
  ds_cmd->add_option("--latent", ds_latent, "latent width")->capture_default_str();
  ds_cmd->add_option("--rho-hidden", ds_rho_hidden, "hidden widths of rho")->delimiter(',');
  ds_flags.attach(ds_cmd);

  // gnn: lines `target graph-file`, paths relative to the list file.
  auto* gnn_cmd = app.add_subcommand("gnn", "train a message-passing GNN on graph files");
  std::string gnn_data;
  GnnShape gnn_shape;
  TrainFlags gnn_flags;
  gnn_cmd->add_option("--data", gnn_data, "lines 'target graph-file'")->required();
  gnn_cmd->add_option("--rounds", gnn_shape.rounds, "message-passing rounds")->capture_default_str();
  gnn_cmd->add_option("--color-dim", gnn_shape.color_dim, "color width")->capture_default_str();
  gnn_cmd->add_option("--vote-dim", gnn_shape.vote_dim, "vote width")->capture_default_str();
  gnn_flags.attach(gnn_cmd);

  auto* wl_cmd = app.add_subcommand("wl", "Weisfeiler-Lehman refinement");
  wl_cmd->require_subcommand(1);
  auto* wl_sig = wl_cmd->add_subcommand("sig", "print the refinement signature of a graph");
  auto* wl_cmp = wl_cmd->add_subcommand("cmp", "compare two graphs by WL and the exact oracle");
  auto* wl_oracle = wl_cmd->add_subcommand("oracle", "exact isomorphism test (n <= 9)");
  wl_sig->add_option("graph", positional, "graph file")->required()->expected(1);
  wl_cmp->add_option("graphs", positional, "two graph files")->required()->expected(2);
  wl_oracle->add_option("graphs", positional, "two graph files")->required()->expected(2);

  auto* exp_cmd = app.add_subcommand("exp", "run an experiment and write CSV plus manifest");
  std::string exp_name;
  exp_cmd->add_option("name", exp_name, "experiment")
      ->required()
      ->check(CLI::IsMember(gdl::experiment_names()));

  auto* bound_cmd = app.add_subcommand("bound", "PAC-Bayes quantities");
  bound_cmd->require_subcommand(1);
  auto* catoni_cmd = bound_cmd->add_subcommand("catoni", "Catoni bound");
  double risk = 0, kl = 0, beta = 1, delta = 0.05;
  std::size_t n = 1;
  catoni_cmd->add_option("--risk", risk, "empirical risk in [0,1]")->required();
  catoni_cmd->add_option("--kl", kl, "KL(Q||P)")->required();
  catoni_cmd->add_option("--n", n, "sample count")->required();
  catoni_cmd->add_option("--beta", beta, "temperature")->required();
  catoni_cmd->add_option("--delta", delta, "confidence")->required();
  auto* gap_cmd = bound_cmd->add_subcommand("gap", "symmetrization gap");
  std::vector<double> gap_q, gap_p;
  std::vector<std::size_t> gap_map;
  gap_cmd->add_option("--q", gap_q, "posterior weights")->required()->delimiter(',');
  gap_cmd->add_option("--p", gap_p, "prior weights")->required()->delimiter(',');
  gap_cmd->add_option("--map", gap_map, "class representative per index")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const fs::path out(out_dir);
  try {
    if (*mlp_cmd) {
      const TrainConfig tc = mlp_flags.config(seed);
      const bool ce = tc.loss == LossKind::softmax_cross_entropy;
      if (ce && mlp_classes < 2) throw std::invalid_argument("--classes >= 2 is required with ce");
      const std::size_t target_cols = ce ? 1 : mlp_outputs;
      Dataset<Vec> data;
      for (const auto& line : data_lines(read_file(mlp_data))) {
        Vec row = parse_numbers(line, ',');
        if (row.size() <= target_cols) throw std::invalid_argument("row has no input columns: " + line);
        Vec target(row.end() - static_cast<std::ptrdiff_t>(target_cols), row.end());
        row.resize(row.size() - target_cols);
        if (!data.empty() && row.size() != data.front().input.size()) {
          throw std::invalid_argument("rows differ in width");
        }
        data.push_back({row, make_target(target, tc.loss)});
      }
      if (data.empty()) throw std::invalid_argument("empty dataset");
      std::vector<std::size_t> dims{data.front().input.size()};
      dims.insert(dims.end(), mlp_flags.hidden.begin(), mlp_flags.hidden.end());
      dims.push_back(ce ? mlp_classes : mlp_outputs);
      const MLP net = mlp_init(dims, parse_activation(mlp_flags.activation), seed);
      save_training(out, "mlp", train(net, data, tc));
      return 0;
    }
    if (*ds_cmd) {
      const TrainConfig tc = ds_flags.config(seed);
      Dataset<ElementSet> data;
      for (const auto& line : data_lines(read_file(ds_data))) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("expected 'target: elements': " + line);
        ElementSet set;
        std::istringstream elems(line.substr(colon + 1));
        std::string e;
        while (elems >> e) set.push_back(parse_numbers(e, ','));
        data.push_back({set, make_target(parse_numbers(line.substr(0, colon), ','), tc.loss)});
      }
      if (data.empty() || data.front().input.empty()) throw std::invalid_argument("empty dataset");
      DeepSetShape shape;
      shape.element_dim = data.front().input.front().size();
      shape.latent_dim = ds_latent;
      shape.phi_hidden = ds_flags.hidden;
      shape.rho_hidden = ds_rho_hidden;
      shape.activation = parse_activation(ds_flags.activation);
      if (tc.loss == LossKind::softmax_cross_entropy) {
        std::size_t classes = 2;
        for (const auto& ex : data) classes = std::max(classes, std::get<std::size_t>(ex.target) + 1);
        shape.output_dim = classes;
      } else {
        shape.output_dim = std::get<Vec>(data.front().target).size();
      }
      save_training(out, "deepset", deepset_train(deepset_init(shape, seed), data, tc));
      return 0;
    }
    if (*gnn_cmd) {
      const TrainConfig tc = gnn_flags.config(seed);
      const fs::path base = fs::path(gnn_data).parent_path();
      Dataset<LabeledGraph> data;
      for (const auto& line : data_lines(read_file(gnn_data))) {
        std::istringstream in(line);
        std::string target, file;
        if (!(in >> target >> file)) throw std::invalid_argument("expected 'target graph-file': " + line);
        data.push_back({parse_graph(read_file(base / file)), make_target(parse_numbers(target, ','), tc.loss)});
      }
      if (data.empty()) throw std::invalid_argument("empty dataset");
      gnn_shape.hidden = gnn_flags.hidden;
      gnn_shape.activation = parse_activation(gnn_flags.activation);
      if (tc.loss == LossKind::softmax_cross_entropy) {
        std::size_t classes = 2;
        for (const auto& ex : data) classes = std::max(classes, std::get<std::size_t>(ex.target) + 1);
        gnn_shape.output_dim = classes;
      } else {
        gnn_shape.output_dim = std::get<Vec>(data.front().target).size();
      }
      save_training(out, "gnn", gnn_train(gnn_init(gnn_shape, seed), data, tc));
      return 0;
    }
    if (*wl_sig) {
      const WLSignature sig = wl_signature(parse_graph(read_file(positional[0])));
      std::cout << "rounds: " << sig.partition_sizes.size() << "\n";
      for (std::size_t r = 0; r < sig.partition_sizes.size(); ++r) {
        std::cout << "partition " << r << ": " << join_sizes(sig.partition_sizes[r]) << "\n";
      }
      std::cout << "colors: " << join_sizes(sig.colors) << "\n";
      return 0;
    }
    if (*wl_cmp || *wl_oracle) {
      const LabeledGraph a = parse_graph(read_file(positional[0]));
      const LabeledGraph b = parse_graph(read_file(positional[1]));
      if (*wl_cmp) std::cout << "wl-equivalent: " << (wl_equivalent(a, b) ? "true" : "false") << "\n";
      std::cout << "isomorphic (oracle): " << (brute_force_isomorphic(a, b) ? "true" : "false") << "\n";
      return 0;
    }
    if (*exp_cmd) {
      ExperimentConfig cfg(exp_name, seed);
      if (!config_path.empty()) cfg.merge(parse_config(read_file(config_path)));
      const auto start = std::chrono::steady_clock::now();
      const ExperimentReport rep = run_experiment(cfg);
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (const auto& path : write_report(rep, cfg, out, wall)) std::cout << path.string() << "\n";
      std::cout << rep.summary.dump() << "\n";
      return 0;
    }
    if (*catoni_cmd) {
      std::cout << format_double(catoni_bound(risk, kl, n, beta, delta)) << "\n";
      return 0;
    }
    if (*gap_cmd) {
      const DiscreteDistribution q(gap_q), p(gap_p);
      std::cout << format_double(symmetrization_gap(q, p, SymmetrizationMap(gap_map))) << "\n";
      return 0;
    }
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
