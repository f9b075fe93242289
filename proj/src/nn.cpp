#include "gdl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gdl/random.hpp"

namespace gdl {

double lipschitz_constant(Activation a) {
  switch (a) {
    case Activation::sigmoid:
      return 0.25;
    case Activation::relu:
    case Activation::tanh:
    case Activation::identity:
      return 1.0;
  }
  return 1.0;
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::tanh:
      return "tanh";
    case Activation::identity:
      return "identity";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

double activate(Activation a, double x) {
  switch (a) {
    case Activation::relu:
      return evaluate_op(Op::relu, x, x);
    case Activation::sigmoid:
      return evaluate_op(Op::sigmoid, x, x);
    case Activation::tanh:
      return evaluate_op(Op::tanh, x, x);
    case Activation::identity:
      return x;
  }
  return x;
}

Var activate(Activation a, Var x) {
  switch (a) {
    case Activation::relu:
      return relu(x);
    case Activation::sigmoid:
      return sigmoid(x);
    case Activation::tanh:
      return tanh(x);
    case Activation::identity:
      return x;
  }
  return x;
}

std::vector<std::size_t> MLP::dims() const {
  std::vector<std::size_t> d;
  if (layers.empty()) return d;
  d.push_back(layers.front().in_dim);
  for (const auto& layer : layers) d.push_back(layer.out_dim);
  return d;
}

std::size_t MLP::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.parameter_count();
  return n;
}

std::vector<double> MLP::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& layer : layers) {
    out.insert(out.end(), layer.weights.begin(), layer.weights.end());
    out.insert(out.end(), layer.biases.begin(), layer.biases.end());
  }
  return out;
}

void MLP::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw std::invalid_argument("expected " + std::to_string(parameter_count()) +
                                " parameters, got " + std::to_string(values.size()));
  }
  auto it = values.begin();
  for (auto& layer : layers) {
    std::copy_n(it, layer.weights.size(), layer.weights.begin());
    it += static_cast<std::ptrdiff_t>(layer.weights.size());
    std::copy_n(it, layer.biases.size(), layer.biases.begin());
    it += static_cast<std::ptrdiff_t>(layer.biases.size());
  }
}

void MLP::validate() const {
  if (layers.empty()) throw std::invalid_argument("network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.in_dim == 0 || layer.out_dim == 0) {
      throw std::invalid_argument("layer " + std::to_string(l) + " has a zero dimension");
    }
    if (layer.weights.size() != layer.in_dim * layer.out_dim ||
        layer.biases.size() != layer.out_dim) {
      throw std::invalid_argument("layer " + std::to_string(l) + " has inconsistent shapes");
    }
    if (l > 0 && layers[l - 1].out_dim != layer.in_dim) {
      throw std::invalid_argument("layer " + std::to_string(l) + " does not chain");
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(layer.weights.begin(), layer.weights.end(), finite) ||
        !std::all_of(layer.biases.begin(), layer.biases.end(), finite)) {
      throw std::invalid_argument("layer " + std::to_string(l) + " has non-finite entries");
    }
  }
}

MLP mlp_init(std::span<const std::size_t> dims, Activation activation, std::uint64_t seed,
             Activation output_activation) {
  if (dims.size() < 2) throw std::invalid_argument("an MLP needs at least two dimensions");
  if (std::find(dims.begin(), dims.end(), std::size_t{0}) != dims.end()) {
    throw std::invalid_argument("MLP dimensions must be positive");
  }
  Rng rng(seed);
  MLP net;
  net.seed = seed;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    layer.in_dim = dims[l];
    layer.out_dim = dims[l + 1];
    layer.activation = l + 2 == dims.size() ? output_activation : activation;
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in_dim + layer.out_dim));
    layer.weights.resize(layer.in_dim * layer.out_dim);
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
    layer.biases.assign(layer.out_dim, 0.0);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::vector<Var> mlp_forward(const MLP& net, std::span<const Var> params, std::span<const Var> x) {
  if (net.layers.empty()) throw std::invalid_argument("network has no layers");
  if (params.size() != net.parameter_count()) {
    throw std::invalid_argument("parameter span does not match the network");
  }
  if (x.size() != net.input_dim()) {
    throw std::invalid_argument("input has dimension " + std::to_string(x.size()) +
                                ", network expects " + std::to_string(net.input_dim()));
  }
  std::vector<Var> current(x.begin(), x.end());
  std::vector<Var> next;
  std::size_t offset = 0;
  for (const auto& layer : net.layers) {
    const std::size_t bias_offset = offset + layer.weights.size();
    next.clear();
    next.reserve(layer.out_dim);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      Var pre = params[bias_offset + o];
      const std::size_t row = offset + o * layer.in_dim;
      for (std::size_t i = 0; i < layer.in_dim; ++i) pre = pre + params[row + i] * current[i];
      next.push_back(activate(layer.activation, pre));
    }
    offset = bias_offset + layer.biases.size();
    current.swap(next);
  }
  return current;
}

std::vector<Var> mlp_forward(const MLP& net, std::span<const double> x, Tape& tape) {
  const std::vector<double> theta = net.parameters();
  const std::vector<Var> params = bind_parameters(tape, theta);
  const std::vector<Var> inputs = bind_constants(tape, x);
  return mlp_forward(net, params, inputs);
}

std::vector<double> mlp_eval(const MLP& net, std::span<const double> x) {
  if (net.layers.empty()) throw std::invalid_argument("network has no layers");
  if (x.size() != net.input_dim()) {
    throw std::invalid_argument("input has dimension " + std::to_string(x.size()) +
                                ", network expects " + std::to_string(net.input_dim()));
  }
  std::vector<double> current(x.begin(), x.end());
  std::vector<double> next;
  for (const auto& layer : net.layers) {
    next.assign(layer.out_dim, 0.0);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      double pre = layer.biases[o];
      const double* row = layer.weights.data() + o * layer.in_dim;
      for (std::size_t i = 0; i < layer.in_dim; ++i) pre = pre + row[i] * current[i];
      next[o] = activate(layer.activation, pre);
    }
    current.swap(next);
  }
  return current;
}

double lipschitz_upper_bound(const MLP& net) {
  std::vector<double> bound(net.input_dim(), 1.0);
  for (const auto& layer : net.layers) {
    std::vector<double> next(layer.out_dim, 0.0);
    const double act = lipschitz_constant(layer.activation);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      double s = 0.0;
      for (std::size_t i = 0; i < layer.in_dim; ++i) s += std::abs(layer.weight(o, i)) * bound[i];
      next[o] = act * s;
    }
    bound.swap(next);
  }
  return *std::max_element(bound.begin(), bound.end());
}

double input_gradient_norm(const MLP& net, std::span<const double> x, std::size_t output) {
  if (output >= net.output_dim()) throw std::out_of_range("output index out of range");
  Tape tape;
  const std::vector<double> theta = net.parameters();
  const std::vector<Var> params = bind_constants(tape, theta);
  const std::vector<Var> inputs = bind_constants(tape, x);
  const std::vector<Var> out = mlp_forward(net, params, inputs);
  const std::vector<double> adj = tape.adjoints(out[output].id());
  double sq = 0.0;
  for (const Var& in : inputs) sq += adj[in.id().index] * adj[in.id().index];
  return std::sqrt(sq);
}

double empirical_lipschitz(const MLP& net, std::span<const Interval> box, std::size_t n_samples,
                           std::uint64_t seed) {
  if (n_samples == 0) throw std::invalid_argument("need at least one sample");
  if (box.size() != net.input_dim()) {
    throw std::invalid_argument("sample box dimension does not match the network input");
  }
  Rng rng(seed);
  const std::vector<double> theta = net.parameters();
  std::vector<double> x(box.size());
  double best = 0.0;
  Tape tape;
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (std::size_t d = 0; d < box.size(); ++d) x[d] = rng.uniform(box[d].lo, box[d].hi);
    tape.clear();
    const std::vector<Var> params = bind_constants(tape, theta);
    const std::vector<Var> inputs = bind_constants(tape, x);
    const std::vector<Var> out = mlp_forward(net, params, inputs);
    for (const Var& o : out) {
      const std::vector<double> adj = tape.adjoints(o.id());
      double sq = 0.0;
      for (const Var& in : inputs) sq += adj[in.id().index] * adj[in.id().index];
      best = std::max(best, std::sqrt(sq));
    }
  }
  return best;
}

double max_abs_weight(const MLP& net) {
  double m = 0.0;
  for (const auto& layer : net.layers) {
    for (double w : layer.weights) m = std::max(m, std::abs(w));
  }
  return m;
}

nlohmann::json to_json(const MLP& net) {
  nlohmann::json doc;
  doc["kind"] = "mlp";
  doc["dims"] = net.dims();
  doc["seed"] = net.seed;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      rows.push_back(std::vector<double>(layer.weights.begin() + static_cast<std::ptrdiff_t>(o * layer.in_dim),
                                         layer.weights.begin() + static_cast<std::ptrdiff_t>((o + 1) * layer.in_dim)));
    }
    layers.push_back({{"activation", to_string(layer.activation)},
                      {"weights", std::move(rows)},
                      {"biases", layer.biases}});
  }
  doc["layers"] = std::move(layers);
  return doc;
}

MLP mlp_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "mlp") {
      throw std::invalid_argument("checkpoint block is not an mlp");
    }
    const auto dims = doc.at("dims").get<std::vector<std::size_t>>();
    const auto& layers = doc.at("layers");
    if (dims.size() < 2 || layers.size() + 1 != dims.size()) {
      throw std::invalid_argument("checkpoint dims and layers disagree");
    }
    MLP net;
    net.seed = doc.at("seed").get<std::uint64_t>();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& block = layers[l];
      DenseLayer layer;
      layer.in_dim = dims[l];
      layer.out_dim = dims[l + 1];
      layer.activation = parse_activation(block.at("activation").get<std::string>());
      const auto rows = block.at("weights").get<std::vector<std::vector<double>>>();
      if (rows.size() != layer.out_dim) throw std::invalid_argument("weight row count mismatch");
      for (const auto& row : rows) {
        if (row.size() != layer.in_dim) throw std::invalid_argument("weight column count mismatch");
        layer.weights.insert(layer.weights.end(), row.begin(), row.end());
      }
      layer.biases = block.at("biases").get<std::vector<double>>();
      net.layers.push_back(std::move(layer));
    }
    net.validate();
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed mlp checkpoint: ") + e.what());
  }
}

std::string write_checkpoint(const MLP& net) { return to_json(net).dump(2) + "\n"; }

MLP read_mlp_checkpoint(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  return mlp_from_json(doc);
}

}  // namespace gdl
