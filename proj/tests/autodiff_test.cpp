#include "gdl/autodiff.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gdl/nn.hpp"
#include "test_support.hpp"

namespace gdl {
namespace {

TEST(Tape, RecordsArithmetic) {
  Tape tape;
  const NodeId a = tape.constant(2.0);
  const NodeId b = tape.constant(3.0);
  const NodeId ab[] = {a, b};
  EXPECT_EQ(tape.value(tape.record(Op::add, ab)), 5.0);

  const NodeId m1[] = {tape.constant(-1.0)};
  EXPECT_EQ(tape.value(tape.record(Op::relu, m1)), 0.0);

  const NodeId zero[] = {tape.constant(0.0)};
  EXPECT_EQ(tape.value(tape.record(Op::exp, zero)), 1.0);
}

TEST(Tape, RejectsBadRecords) {
  Tape tape;
  const NodeId z[] = {tape.constant(0.0)};
  EXPECT_THROW(tape.record(Op::log, z), std::domain_error);
  const NodeId neg[] = {tape.constant(-1.0)};
  EXPECT_THROW(tape.record(Op::log, neg), std::domain_error);
  const NodeId missing[] = {NodeId{42}};
  EXPECT_THROW(tape.record(Op::exp, missing), std::out_of_range);
  EXPECT_THROW(tape.record(Op::add, z), std::invalid_argument);
  EXPECT_THROW(tape.value(NodeId{99}), std::out_of_range);
  EXPECT_THROW(tape.backward(NodeId{99}), std::out_of_range);
}

TEST(Tape, OperandsPrecedeRecords) {
  Tape tape;
  Var x(tape, tape.parameter(0.7));
  Var y = tanh(x * x + exp(x)) + sigmoid(-x);
  (void)y;
  const auto records = tape.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].op == Op::leaf) continue;
    EXPECT_LT(records[i].lhs, i);
    EXPECT_LT(records[i].rhs, i);
  }
}

TEST(Backward, SquareAndRelu) {
  {
    Tape tape;
    Var t(tape, tape.parameter(3.0));
    Var f = t * t;
    const GradientVector g = tape.backward(f.id());
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g[0], 6.0);
  }
  {
    Tape tape;
    Var t(tape, tape.parameter(-2.0));
    EXPECT_EQ(tape.backward(relu(t).id())[0], 0.0);
  }
  {
    // Subgradient at the kink is 0.
    Tape tape;
    Var t(tape, tape.parameter(0.0));
    EXPECT_EQ(tape.backward(relu(t).id())[0], 0.0);
  }
}

TEST(Backward, ExpPlusProduct) {
  // Expected (6, 0) frozen from a central difference with step 1e-6.
  ScalarProgram f = [](Tape&, std::span<const Var> p) { return exp(p[0]) + p[0] * p[1]; };
  const double point[] = {0.0, 5.0};
  const GradientVector g = value_and_gradient(f, point).gradient;
  EXPECT_NEAR(g[0], 6.0, 1e-12);
  EXPECT_NEAR(g[1], 0.0, 1e-12);
  const GradientVector fd = central_difference_gradient(f, point, 1e-6);
  EXPECT_NEAR(fd[0], 6.0, 1e-8);
  EXPECT_NEAR(fd[1], 0.0, 1e-8);
}

TEST(Backward, DoesNotMutateCachedValues) {
  Tape tape;
  Var a(tape, tape.parameter(1.5));
  Var b(tape, tape.parameter(-0.5));
  Var f = log(exp(a) + sigmoid(b)) * tanh(a);
  std::vector<double> before;
  for (const auto& r : tape.records()) before.push_back(r.value);
  (void)tape.backward(f.id());
  (void)tape.backward(f.id());
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(tape.records()[i].value, before[i]);
}

TEST(Backward, MaxRoutesToLargerOperand) {
  Tape tape;
  Var a(tape, tape.parameter(2.0));
  Var b(tape, tape.parameter(1.0));
  const GradientVector g = tape.backward(max(a, b).id());
  EXPECT_EQ(g[0], 1.0);
  EXPECT_EQ(g[1], 0.0);
}

TEST(Backward, IsLinearInTheOutput) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> point = testing::random_vector(rng, 3);
    const double a = rng.uniform(-3, 3);
    const double b = rng.uniform(-3, 3);
    auto f = [](std::span<const Var> p) { return tanh(p[0] * p[1]) + exp(p[2] * 0.3); };
    auto g = [](std::span<const Var> p) { return sigmoid(p[0]) * p[2] + p[1] * p[1]; };
    const GradientVector gf =
        value_and_gradient([&](Tape&, std::span<const Var> p) { return f(p); }, point).gradient;
    const GradientVector gg =
        value_and_gradient([&](Tape&, std::span<const Var> p) { return g(p); }, point).gradient;
    const GradientVector combo =
        value_and_gradient([&](Tape&, std::span<const Var> p) { return a * f(p) + b * g(p); },
                           point)
            .gradient;
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(combo[i], a * gf[i] + b * gg[i], 1e-12);
  }
}

TEST(Replay, ReproducesCachedValuesExactly) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const MLP net = testing::random_mlp(rng, 3, 6);
    const std::vector<double> x = testing::random_vector(rng, net.input_dim());
    Tape tape;
    (void)mlp_forward(net, x, tape);
    const std::vector<double> replayed = tape.replay();
    for (std::size_t i = 0; i < tape.size(); ++i) {
      EXPECT_EQ(replayed[i], tape.records()[i].value);
    }
  }
}

TEST(Replay, SameSeedGivesBitIdenticalTapes) {
  auto build = [] {
    Rng rng(99);
    const MLP net = testing::random_mlp(rng, 3, 8);
    const std::vector<double> x = testing::random_vector(rng, net.input_dim());
    Tape tape;
    (void)mlp_forward(net, x, tape);
    return std::vector<Tape::Record>(tape.records().begin(), tape.records().end());
  };
  const auto a = build();
  const auto b = build();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].op, b[i].op);
    EXPECT_EQ(a[i].lhs, b[i].lhs);
    EXPECT_EQ(a[i].rhs, b[i].rhs);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i].value), std::bit_cast<std::uint64_t>(b[i].value));
  }
}

TEST(FiniteDiffCheck, PolynomialAndConstant) {
  const double one[] = {1.0};
  EXPECT_LT(finite_diff_check([](Tape&, std::span<const Var> p) { return p[0] * p[0]; }, one, 1e-5),
            1e-6);
  EXPECT_EQ(finite_diff_check(
                [](Tape& t, std::span<const Var>) { return Var(t, t.constant(4.0)); }, one, 1e-5),
            0.0);
  EXPECT_THROW(finite_diff_check([](Tape&, std::span<const Var> p) { return p[0]; }, one, 0.0),
               std::invalid_argument);
}

TEST(ExtendedDifferences, AgreeWithClosedForm) {
  Tape tape;
  const double point[] = {0.0, 5.0};
  const auto p = bind_parameters(tape, point);
  const Var f = exp(p[0]) + p[0] * p[1];
  const GradientVector fd = extended_difference_gradient(tape, f.id(), 1e-5);
  EXPECT_NEAR(fd[0], 6.0, 1e-9);
  EXPECT_NEAR(fd[1], 0.0, 1e-15);
  EXPECT_LT(extended_diff_check(tape, f.id(), 1e-5), 1e-9);
  EXPECT_THROW(extended_difference_gradient(tape, f.id(), 0.0), std::invalid_argument);
  EXPECT_THROW(extended_difference_gradient(tape, NodeId{1000}, 1e-5), std::out_of_range);
}

TEST(ExtendedDifferences, ResolveTinyComponents) {
  // d/dt sigmoid(t - 30) at 0 is about 9.4e-14.
  Tape tape;
  const double point[] = {0.0};
  const auto p = bind_parameters(tape, point);
  const Var f = sigmoid(p[0] + (-30.0));
  const double exact = f.value() * (1.0 - f.value());
  EXPECT_NEAR(extended_difference_gradient(tape, f.id(), 1e-5)[0], exact, 1e-6 * exact);
  EXPECT_LT(extended_diff_check(tape, f.id(), 1e-5), 1e-4);
}

TEST(FiniteDiffCheck, PropagatesEvaluationFailure) {
  const double point[] = {0.0};
  EXPECT_THROW(finite_diff_check([](Tape&, std::span<const Var> p) { return log(p[0]); }, point, 1e-5),
               std::domain_error);
}

// 500 random MLPs (<= 3 layers, <= 8 units), resampled near activation kinks.
TEST(FiniteDiffCheck, RandomMlpsMatchAutodiff) {
  Rng rng(2024);
  int checked = 0;
  while (checked < 500) {
    const MLP net = testing::random_mlp(rng, 3, 8);
    const std::vector<double> x = testing::random_vector(rng, net.input_dim());
    Tape probe;
    (void)mlp_forward(net, x, probe);
    if (min_kink_margin(probe) < 1e-3) continue;
    ScalarProgram f = [&](Tape& tape, std::span<const Var> params) {
      const std::vector<Var> in = bind_constants(tape, x);
      const std::vector<Var> out = mlp_forward(net, params, in);
      return sum(out);
    };
    const std::vector<double> theta = net.parameters();
    EXPECT_LT(finite_diff_check(f, theta, 1e-5), 1e-4);
    ++checked;
  }
}

}  // namespace
}  // namespace gdl
