#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gdl/autodiff.hpp"

namespace gdl {

enum class Activation { relu, sigmoid, tanh, identity };

/// Global Lipschitz constant of the activation: 1 for relu, tanh and
/// identity, 1/4 for the logistic sigmoid.
double lipschitz_constant(Activation a);
std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

double activate(Activation a, double x);
Var activate(Activation a, Var x);

/// y = activation(W x + b), W stored row-major as out_dim x in_dim.
struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weights;
  std::vector<double> biases;
  Activation activation = Activation::identity;

  double weight(std::size_t out, std::size_t in) const { return weights[out * in_dim + in]; }
  double& weight(std::size_t out, std::size_t in) { return weights[out * in_dim + in]; }
  std::size_t parameter_count() const { return weights.size() + biases.size(); }
};

/// Layered dense network. Parameters are ordered layer by layer, each layer
/// contributing its weights (row-major) followed by its biases.
struct MLP {
  std::vector<DenseLayer> layers;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return layers.front().in_dim; }
  std::size_t output_dim() const { return layers.back().out_dim; }
  std::vector<std::size_t> dims() const;
  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);

  /// Throws std::invalid_argument unless the layer chain is consistent and
  /// every entry is finite.
  void validate() const;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
/// Hidden layers use `activation`, the last layer `output_activation`.
MLP mlp_init(std::span<const std::size_t> dims, Activation activation, std::uint64_t seed,
             Activation output_activation = Activation::identity);

/// Forward pass over already-bound parameter and input nodes.
std::vector<Var> mlp_forward(const MLP& net, std::span<const Var> params, std::span<const Var> x);
/// Binds the network's parameters and `x` (as constants) on `tape`.
std::vector<Var> mlp_forward(const MLP& net, std::span<const double> x, Tape& tape);
/// Tape-free evaluation; same operation order as the recorded pass.
std::vector<double> mlp_eval(const MLP& net, std::span<const double> x);

/// Interval [lo, hi] for one input coordinate.
struct Interval {
  double lo;
  double hi;
};

/// Per-neuron recursion L(v') <= L(phi) * sum_i |w_i| L(v_i), seeded with 1
/// at the inputs; returns the maximum over output neurons.
double lipschitz_upper_bound(const MLP& net);
/// Max of the Euclidean input-gradient norm over uniform samples from the
/// box (and over output neurons).
double empirical_lipschitz(const MLP& net, std::span<const Interval> box, std::size_t n_samples,
                           std::uint64_t seed);
/// Euclidean norm of the input gradient of output `output` at `x`.
double input_gradient_norm(const MLP& net, std::span<const double> x, std::size_t output = 0);

/// Largest absolute weight (biases excluded).
double max_abs_weight(const MLP& net);

nlohmann::json to_json(const MLP& net);
MLP mlp_from_json(const nlohmann::json& doc);
std::string write_checkpoint(const MLP& net);
MLP read_mlp_checkpoint(std::string_view text);

// Model protocol used by the trainer.
inline std::vector<Var> forward(const MLP& net, Tape& tape, std::span<const Var> params,
                                const std::vector<double>& x) {
  const std::vector<Var> inputs = bind_constants(tape, x);
  return mlp_forward(net, params, inputs);
}

}  // namespace gdl
