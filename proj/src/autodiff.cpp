#include "gdl/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gdl {
namespace {

bool is_binary(Op op) { return op == Op::add || op == Op::mul || op == Op::max; }

}  // namespace

namespace {

template <class T>
T eval_op(Op op, T lhs, T rhs) {
  using std::exp, std::log, std::tanh;
  switch (op) {
    case Op::leaf:
      return lhs;
    case Op::add:
      return lhs + rhs;
    case Op::mul:
      return lhs * rhs;
    case Op::neg:
      return -lhs;
    case Op::exp:
      return exp(lhs);
    case Op::log:
      return log(lhs);
    case Op::relu:
      return lhs > T(0) ? lhs : T(0);
    case Op::tanh:
      return tanh(lhs);
    case Op::sigmoid:
      return lhs >= T(0) ? T(1) / (T(1) + exp(-lhs)) : exp(lhs) / (T(1) + exp(lhs));
    case Op::max:
      return lhs >= rhs ? lhs : rhs;
  }
  return std::numeric_limits<T>::quiet_NaN();
}

}  // namespace

double evaluate_op(Op op, double lhs, double rhs) { return eval_op(op, lhs, rhs); }

NodeId Tape::push(Op op, std::uint32_t lhs, std::uint32_t rhs, double value) {
  if (records_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("tape is full");
  }
  records_.push_back(Record{op, lhs, rhs, value});
  return NodeId{static_cast<std::uint32_t>(records_.size() - 1)};
}

NodeId Tape::constant(double value) {
  auto self = static_cast<std::uint32_t>(records_.size());
  return push(Op::leaf, self, self, value);
}

NodeId Tape::parameter(double value) {
  NodeId id = constant(value);
  parameters_.push_back(id);
  return id;
}

NodeId Tape::record(Op op, std::span<const NodeId> operands) {
  if (op == Op::leaf) {
    throw std::invalid_argument("leaves are created with constant() or parameter()");
  }
  const std::size_t arity = is_binary(op) ? 2 : 1;
  if (operands.size() != arity) {
    throw std::invalid_argument("operation expects " + std::to_string(arity) + " operand(s), got " +
                                std::to_string(operands.size()));
  }
  for (NodeId id : operands) {
    if (!valid(id)) {
      throw std::out_of_range("operand id " + std::to_string(id.index) + " is not on the tape");
    }
  }
  const std::uint32_t lhs = operands[0].index;
  const std::uint32_t rhs = operands[arity - 1].index;
  const double a = records_[lhs].value;
  const double b = records_[rhs].value;
  if (op == Op::log && !(a > 0.0)) {
    throw std::domain_error("log of non-positive value " + std::to_string(a));
  }
  return push(op, lhs, rhs, evaluate_op(op, a, b));
}

double Tape::value(NodeId id) const {
  if (!valid(id)) {
    throw std::out_of_range("node id " + std::to_string(id.index) + " is not on the tape");
  }
  return records_[id.index].value;
}

std::vector<double> Tape::adjoints(NodeId output) const {
  if (!valid(output)) {
    throw std::out_of_range("output id " + std::to_string(output.index) + " is not on the tape");
  }
  std::vector<double> adj(output.index + 1, 0.0);
  adj[output.index] = 1.0;
  for (std::size_t i = output.index + 1; i-- > 0;) {
    const double g = adj[i];
    if (g == 0.0) continue;
    const Record& r = records_[i];
    switch (r.op) {
      case Op::leaf:
        break;
      case Op::add:
        adj[r.lhs] += g;
        adj[r.rhs] += g;
        break;
      case Op::mul:
        adj[r.lhs] += g * records_[r.rhs].value;
        adj[r.rhs] += g * records_[r.lhs].value;
        break;
      case Op::neg:
        adj[r.lhs] -= g;
        break;
      case Op::exp:
        adj[r.lhs] += g * r.value;
        break;
      case Op::log:
        adj[r.lhs] += g / records_[r.lhs].value;
        break;
      case Op::relu:
        // Subgradient 0 at the kink.
        if (records_[r.lhs].value > 0.0) adj[r.lhs] += g;
        break;
      case Op::tanh:
        adj[r.lhs] += g * (1.0 - r.value * r.value);
        break;
      case Op::sigmoid:
        adj[r.lhs] += g * r.value * (1.0 - r.value);
        break;
      case Op::max:
        // Ties route the gradient to the left operand.
        if (records_[r.lhs].value >= records_[r.rhs].value) {
          adj[r.lhs] += g;
        } else {
          adj[r.rhs] += g;
        }
        break;
    }
  }
  adj.resize(records_.size(), 0.0);
  return adj;
}

GradientVector Tape::backward(NodeId output) const {
  const std::vector<double> adj = adjoints(output);
  GradientVector grad;
  grad.reserve(parameters_.size());
  for (NodeId p : parameters_) grad.push_back(adj[p.index]);
  return grad;
}

std::vector<double> Tape::replay() const {
  std::vector<double> values(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const Record& r = records_[i];
    values[i] = r.op == Op::leaf ? r.value : evaluate_op(r.op, values[r.lhs], values[r.rhs]);
  }
  return values;
}

void Tape::clear() noexcept {
  records_.clear();
  parameters_.clear();
}

Var unary(Op op, Var a) {
  const NodeId ids[] = {a.id()};
  return Var(a.tape(), a.tape().record(op, ids));
}

Var binary(Op op, Var a, Var b) {
  if (&a.tape() != &b.tape()) {
    throw std::invalid_argument("operands live on different tapes");
  }
  const NodeId ids[] = {a.id(), b.id()};
  return Var(a.tape(), a.tape().record(op, ids));
}

Var sum(std::span<const Var> terms) {
  if (terms.empty()) {
    throw std::invalid_argument("sum of an empty list has no tape");
  }
  Var acc = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) acc = acc + terms[i];
  return acc;
}

std::vector<Var> bind_parameters(Tape& tape, std::span<const double> values) {
  std::vector<Var> out;
  out.reserve(values.size());
  for (double v : values) out.emplace_back(tape, tape.parameter(v));
  return out;
}

std::vector<Var> bind_constants(Tape& tape, std::span<const double> values) {
  std::vector<Var> out;
  out.reserve(values.size());
  for (double v : values) out.emplace_back(tape, tape.constant(v));
  return out;
}

ValueAndGradient value_and_gradient(const ScalarProgram& f, std::span<const double> point) {
  Tape tape;
  const std::vector<Var> params = bind_parameters(tape, point);
  const Var out = f(tape, params);
  return {out.value(), tape.backward(out.id())};
}

GradientVector central_difference_gradient(const ScalarProgram& f, std::span<const double> point,
                                           double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  std::vector<double> probe(point.begin(), point.end());
  auto eval = [&] {
    Tape tape;
    const std::vector<Var> params = bind_parameters(tape, probe);
    return f(tape, params).value();
  };
  GradientVector grad(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + step;
    const double up = eval();
    probe[i] = point[i] - step;
    const double down = eval();
    probe[i] = point[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double finite_diff_check(const ScalarProgram& f, std::span<const double> point, double step) {
  constexpr double kEps = 1e-12;
  const GradientVector analytic = value_and_gradient(f, point).gradient;
  const GradientVector numeric = central_difference_gradient(f, point, step);
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / (std::abs(analytic[i]) + kEps));
  }
  return worst;
}

GradientVector extended_difference_gradient(const Tape& tape, NodeId output, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  if (!tape.valid(output)) {
    throw std::out_of_range("node id " + std::to_string(output.index) + " is not on the tape");
  }
  const auto records = tape.records();
  const auto params = tape.parameters();
  std::vector<long double> values(output.index + 1);
  auto replay_at = [&](std::uint32_t node, long double shifted) {
    for (std::uint32_t i = 0; i <= output.index; ++i) {
      const Tape::Record& r = records[i];
      if (r.op == Op::leaf) {
        values[i] = i == node ? shifted : static_cast<long double>(r.value);
      } else {
        values[i] = eval_op<long double>(r.op, values[r.lhs], values[r.rhs]);
      }
    }
    return values[output.index];
  };
  const long double h = step;
  GradientVector grad(params.size(), 0.0);
  for (std::size_t p = 0; p < params.size(); ++p) {
    const std::uint32_t node = params[p].index;
    if (node > output.index) continue;  // recorded after the output: no influence
    const long double base = records[node].value;
    const long double up = replay_at(node, base + h);
    const long double down = replay_at(node, base - h);
    grad[p] = static_cast<double>((up - down) / (2 * h));
  }
  return grad;
}

double extended_diff_check(const Tape& tape, NodeId output, double step) {
  constexpr double kEps = 1e-12;
  const GradientVector analytic = tape.backward(output);
  const GradientVector numeric = extended_difference_gradient(tape, output, step);
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / (std::abs(analytic[i]) + kEps));
  }
  return worst;
}

double min_kink_margin(const Tape& tape) {
  double margin = std::numeric_limits<double>::infinity();
  const auto records = tape.records();
  for (const auto& r : records) {
    if (r.op == Op::relu) {
      margin = std::min(margin, std::abs(records[r.lhs].value));
    } else if (r.op == Op::max) {
      margin = std::min(margin, std::abs(records[r.lhs].value - records[r.rhs].value));
    }
  }
  return margin;
}

}  // namespace gdl
