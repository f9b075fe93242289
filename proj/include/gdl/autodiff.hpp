#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gdl {

/// Operation kinds a tape can record. `leaf` marks inputs, constants and
/// parameters; every other kind is a pure function of earlier records.
enum class Op : std::uint8_t { leaf, add, mul, neg, exp, log, relu, tanh, sigmoid, max };

struct NodeId {
  std::uint32_t index = 0;
  auto operator<=>(const NodeId&) const = default;
};

/// Partial derivatives ordered like the tape's parameter registry.
using GradientVector = std::vector<double>;

/// Append-only record of scalar operations for reverse-mode differentiation.
///
/// Records are immutable once appended and operands always precede the
/// record that uses them, so the tape is topologically sorted by
/// construction. A tape belongs to one thread; build a fresh one (or
/// `clear()` an old one) for every forward pass.
class Tape {
 public:
  struct Record {
    Op op;
    std::uint32_t lhs;
    std::uint32_t rhs;
    double value;
  };

  Tape() = default;

  NodeId constant(double value);
  /// A leaf whose derivative is reported by `backward`.
  NodeId parameter(double value);

  /// Appends `op` applied to `operands`. Binary ops take two operands,
  /// unary ops one. Throws std::out_of_range for unknown ids,
  /// std::invalid_argument for arity errors and std::domain_error for the
  /// log of a non-positive value.
  NodeId record(Op op, std::span<const NodeId> operands);

  double value(NodeId id) const;
  std::size_t size() const noexcept { return records_.size(); }
  bool valid(NodeId id) const noexcept { return id.index < records_.size(); }
  std::span<const Record> records() const noexcept { return records_; }
  std::span<const NodeId> parameters() const noexcept { return parameters_; }
  std::size_t parameter_count() const noexcept { return parameters_.size(); }

  /// d(output)/d(node) for every record on the tape.
  std::vector<double> adjoints(NodeId output) const;
  /// d(output)/d(p) for every registered parameter p, in registration order.
  GradientVector backward(NodeId output) const;

  /// Recomputes every non-leaf value from the leaves.
  std::vector<double> replay() const;

  /// Drops all records but keeps the allocation for the next pass.
  void clear() noexcept;
  void reserve(std::size_t n) { records_.reserve(n); }

 private:
  NodeId push(Op op, std::uint32_t lhs, std::uint32_t rhs, double value);

  std::vector<Record> records_;
  std::vector<NodeId> parameters_;
};

/// Evaluates `op` on plain doubles; shared by recording and replay.
double evaluate_op(Op op, double lhs, double rhs);

/// Handle to a tape node with arithmetic operators.
class Var {
 public:
  Var() = default;
  Var(Tape& tape, NodeId id) : tape_(&tape), id_(id) {}

  NodeId id() const noexcept { return id_; }
  Tape& tape() const noexcept { return *tape_; }
  double value() const { return tape_->value(id_); }

 private:
  Tape* tape_ = nullptr;
  NodeId id_{};
};

Var unary(Op op, Var a);
Var binary(Op op, Var a, Var b);

inline Var operator+(Var a, Var b) { return binary(Op::add, a, b); }
inline Var operator*(Var a, Var b) { return binary(Op::mul, a, b); }
inline Var operator-(Var a) { return unary(Op::neg, a); }
inline Var operator-(Var a, Var b) { return a + (-b); }
inline Var operator+(Var a, double c) { return a + Var(a.tape(), a.tape().constant(c)); }
inline Var operator+(double c, Var a) { return a + c; }
inline Var operator*(Var a, double c) { return a * Var(a.tape(), a.tape().constant(c)); }
inline Var operator*(double c, Var a) { return a * c; }
inline Var operator-(Var a, double c) { return a + (-c); }

inline Var exp(Var a) { return unary(Op::exp, a); }
inline Var log(Var a) { return unary(Op::log, a); }
inline Var relu(Var a) { return unary(Op::relu, a); }
inline Var tanh(Var a) { return unary(Op::tanh, a); }
inline Var sigmoid(Var a) { return unary(Op::sigmoid, a); }
inline Var max(Var a, Var b) { return binary(Op::max, a, b); }

/// Left fold with `+`; the summation order is the span order.
Var sum(std::span<const Var> terms);

/// Registers each value as a tape parameter.
std::vector<Var> bind_parameters(Tape& tape, std::span<const double> values);
/// Records each value as a constant leaf.
std::vector<Var> bind_constants(Tape& tape, std::span<const double> values);

/// A scalar function of its parameters, expressed on a tape.
using ScalarProgram = std::function<Var(Tape&, std::span<const Var>)>;

/// Value and parameter gradient of `f` at `point`.
struct ValueAndGradient {
  double value;
  GradientVector gradient;
};
ValueAndGradient value_and_gradient(const ScalarProgram& f, std::span<const double> point);

/// Central-difference value of the gradient of `f` at `point`.
GradientVector central_difference_gradient(const ScalarProgram& f, std::span<const double> point,
                                           double step);

/// Max over parameters of |analytic - central difference| / (|analytic| + 1e-12).
double finite_diff_check(const ScalarProgram& f, std::span<const double> point, double step);

/// Central differences of `output` with respect to every registered parameter,
/// from replays of the recorded tape in extended (long double) precision. The
/// rounding floor of double-precision differences (about 1e-11 at step 1e-5)
/// swamps the relative error of tiny gradient components; this one does not.
GradientVector extended_difference_gradient(const Tape& tape, NodeId output, double step);

/// finite_diff_check's metric with extended_difference_gradient as the oracle.
double extended_diff_check(const Tape& tape, NodeId output, double step);

/// Smallest distance of any relu operand or max operand pair from its kink;
/// +inf when the tape has neither.
double min_kink_margin(const Tape& tape);

}  // namespace gdl
