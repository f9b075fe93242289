#include "gdl/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace gdl {

std::string_view to_string(LossKind kind) {
  return kind == LossKind::mse ? "mse" : "softmax_cross_entropy";
}

LossKind parse_loss(std::string_view name) {
  if (name == "mse") return LossKind::mse;
  if (name == "softmax_cross_entropy" || name == "cross_entropy") {
    return LossKind::softmax_cross_entropy;
  }
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(l2_lambda >= 0.0)) throw std::invalid_argument("l2 lambda must be non-negative");
}

DivergenceError::DivergenceError(std::size_t epoch, double loss)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + " (loss " +
                         std::to_string(loss) + "); the learning rate is likely too high"),
      epoch_(epoch),
      loss_(loss) {}

double mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw std::invalid_argument("mse: prediction and target lengths differ");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

Var mse_loss(std::span<const Var> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw std::invalid_argument("mse: prediction and target lengths differ");
  }
  std::vector<Var> sq;
  sq.reserve(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Var d = pred[i] - target[i];
    sq.push_back(d * d);
  }
  return sum(sq) * (1.0 / static_cast<double>(pred.size()));
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

double cross_entropy(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) throw std::out_of_range("class label out of range");
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double a : logits) z += std::exp(a - m);
  return m + std::log(z) - logits[label];
}

Var cross_entropy(std::span<const Var> logits, std::size_t label) {
  if (label >= logits.size()) throw std::out_of_range("class label out of range");
  // The shift is a constant: log-sum-exp is exact for any fixed shift.
  double m = logits[0].value();
  for (const Var& a : logits) m = std::max(m, a.value());
  std::vector<Var> terms;
  terms.reserve(logits.size());
  for (const Var& a : logits) terms.push_back(exp(a - m));
  return log(sum(terms)) + m - logits[label];
}

double l2_penalty(std::span<const double> params, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("l2 lambda must be non-negative");
  double s = 0.0;
  for (double p : params) s += p * p;
  return lambda * s;
}

Var l2_penalty(std::span<const Var> params, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("l2 lambda must be non-negative");
  if (params.empty()) throw std::invalid_argument("l2 penalty of an empty parameter list");
  std::vector<Var> sq;
  sq.reserve(params.size());
  for (const Var& p : params) sq.push_back(p * p);
  return sum(sq) * lambda;
}

std::vector<double> gd_step(std::span<const double> params, std::span<const double> grads,
                            double alpha) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("parameter and gradient lengths differ");
  }
  std::vector<double> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) out[i] = params[i] - alpha * grads[i];
  return out;
}

double sample_loss(LossKind kind, std::span<const double> output, const Target& target) {
  if (kind == LossKind::mse) {
    const auto* y = std::get_if<std::vector<double>>(&target);
    if (y == nullptr) throw std::invalid_argument("mse needs a vector target");
    return mse_loss(output, *y);
  }
  const auto* label = std::get_if<std::size_t>(&target);
  if (label == nullptr) throw std::invalid_argument("cross entropy needs a class-index target");
  return cross_entropy(output, *label);
}

Var sample_loss(LossKind kind, std::span<const Var> output, const Target& target) {
  if (kind == LossKind::mse) {
    const auto* y = std::get_if<std::vector<double>>(&target);
    if (y == nullptr) throw std::invalid_argument("mse needs a vector target");
    return mse_loss(output, *y);
  }
  const auto* label = std::get_if<std::size_t>(&target);
  if (label == nullptr) throw std::invalid_argument("cross entropy needs a class-index target");
  return cross_entropy(output, *label);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_loss_trace(std::ostream& os, std::span<const double> trace) {
  os << "epoch,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << format_double(trace[i]) << '\n';
}

}  // namespace gdl
