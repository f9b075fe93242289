#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gdl/autodiff.hpp"

namespace gdl {

enum class LossKind { mse, softmax_cross_entropy };

std::string_view to_string(LossKind kind);
LossKind parse_loss(std::string_view name);

struct TrainConfig {
  double learning_rate = 0.01;
  double l2_lambda = 0.0;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::mse;

  void validate() const;
};

/// Regression targets are vectors, classification targets class indices.
using Target = std::variant<std::vector<double>, std::size_t>;

template <class Input>
struct Example {
  Input input;
  Target target;
};

template <class Input>
using Dataset = std::vector<Example<Input>>;

double mse_loss(std::span<const double> pred, std::span<const double> target);
Var mse_loss(std::span<const Var> pred, std::span<const double> target);

/// Softmax with max-subtraction.
std::vector<double> softmax(std::span<const double> logits);
/// -log softmax(logits)[label].
double cross_entropy(std::span<const double> logits, std::size_t label);
Var cross_entropy(std::span<const Var> logits, std::size_t label);

/// lambda * ||theta||^2.
double l2_penalty(std::span<const double> params, double lambda);
Var l2_penalty(std::span<const Var> params, double lambda);

/// theta - alpha * grad.
std::vector<double> gd_step(std::span<const double> params, std::span<const double> grads,
                            double alpha);

double sample_loss(LossKind kind, std::span<const double> output, const Target& target);
Var sample_loss(LossKind kind, std::span<const Var> output, const Target& target);

/// Training stopped because the objective became NaN or exceeded 1e12.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t epoch, double loss);
  std::size_t epoch() const noexcept { return epoch_; }
  double loss() const noexcept { return loss_; }

 private:
  std::size_t epoch_;
  double loss_;
};

inline constexpr double kDivergenceThreshold = 1e12;

/// Something the trainer can optimize: a flat parameter vector plus a
/// forward pass `forward(model, tape, params, input)` found by ADL.
template <class M, class Input>
concept TrainableModel = requires(M m, const M& cm, Tape& tape, std::span<const Var> params,
                                  const Input& input, std::span<const double> values) {
  { cm.parameters() } -> std::same_as<std::vector<double>>;
  m.set_parameters(values);
  { forward(cm, tape, params, input) } -> std::same_as<std::vector<Var>>;
};

/// Mean per-sample loss over `data` plus the L2 penalty on `params`.
template <class Model, class Input>
  requires TrainableModel<Model, Input>
Var training_objective(const Model& model, Tape& tape, std::span<const Var> params,
                       const Dataset<Input>& data, const TrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("dataset is empty");
  std::vector<Var> losses;
  losses.reserve(data.size());
  for (const auto& example : data) {
    const std::vector<Var> out = forward(model, tape, params, example.input);
    losses.push_back(sample_loss(cfg.loss, out, example.target));
  }
  Var total = sum(losses) * (1.0 / static_cast<double>(data.size()));
  if (cfg.l2_lambda > 0.0) total = total + l2_penalty(params, cfg.l2_lambda);
  return total;
}

template <class Model>
struct TrainResult {
  Model model;
  std::vector<double> loss_trace;  // objective at the start of each epoch
  double final_loss = 0.0;         // objective after the last step
};

inline void check_divergence(std::size_t epoch, double loss) {
  if (std::isnan(loss) || loss > kDivergenceThreshold) throw DivergenceError(epoch, loss);
}

/// Evaluates the training objective at the model's current parameters.
template <class Model, class Input>
  requires TrainableModel<Model, Input>
double evaluate_objective(const Model& model, const Dataset<Input>& data, const TrainConfig& cfg) {
  Tape tape;
  const std::vector<double> theta = model.parameters();
  const std::vector<Var> params = bind_parameters(tape, theta);
  return training_objective(model, tape, params, data, cfg).value();
}

/// Full-batch gradient descent on mean loss + lambda ||theta||^2.
template <class Model, class Input>
  requires TrainableModel<Model, Input>
TrainResult<Model> train(Model model, const Dataset<Input>& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("dataset is empty");
  TrainResult<Model> result{model, {}, 0.0};
  result.loss_trace.reserve(cfg.epochs);
  std::vector<double> theta = model.parameters();
  Tape tape;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    tape.clear();
    const std::vector<Var> params = bind_parameters(tape, theta);
    const Var loss = training_objective(model, tape, params, data, cfg);
    check_divergence(epoch, loss.value());
    result.loss_trace.push_back(loss.value());
    const GradientVector grad = tape.backward(loss.id());
    theta = gd_step(theta, grad, cfg.learning_rate);
    model.set_parameters(theta);
  }
  result.model = model;
  result.final_loss = evaluate_objective(model, data, cfg);
  check_divergence(cfg.epochs, result.final_loss);
  return result;
}

/// Writes `epoch,loss` rows.
void write_loss_trace(std::ostream& os, std::span<const double> trace);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace gdl
