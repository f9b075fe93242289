#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gdl/autodiff.hpp"
#include "gdl/graph.hpp"
#include "gdl/nn.hpp"
#include "gdl/training.hpp"

namespace gdl {

/// Message-passing network: T rounds of
///   c'(v) = update( sum over u in N(v) of encode(c(u)) )
/// followed by the readout
///   f(G) = readout( sum over v of vote(c(v)) ).
/// One encode/update pair is shared by every round. A node's own color only
/// reaches it through its neighbors.
struct GNN {
  MLP encode;   // color_dim -> color_dim
  MLP update;   // color_dim -> color_dim
  MLP vote;     // color_dim -> vote_dim
  MLP readout;  // vote_dim -> output_dim
  std::size_t rounds = 1;

  std::size_t color_dim() const { return encode.input_dim(); }
  std::size_t output_dim() const { return readout.output_dim(); }
  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);
  void validate() const;
};

struct GnnShape {
  std::size_t color_dim = 8;
  std::size_t vote_dim = 8;
  std::size_t output_dim = 1;
  std::vector<std::size_t> hidden;  // hidden widths used inside each of the four MLPs
  std::size_t rounds = 2;
  Activation activation = Activation::relu;
};

GNN gnn_init(const GnnShape& shape, std::uint64_t seed);

/// One colour per node, each of width color_dim.
using ColorMatrix = std::vector<std::vector<Var>>;

/// Labels zero-padded to color_dim; unlabeled graphs start from the
/// constant color (1, 0, ..., 0). Throws if labels are wider than color_dim.
std::vector<std::vector<double>> initial_colors(const GNN& net, const LabeledGraph& g);

/// One message-passing round. Nodes without neighbors aggregate the zero
/// vector.
ColorMatrix gnn_message_pass(const GNN& net, std::span<const Var> params, const LabeledGraph& g,
                             const ColorMatrix& colors);
std::vector<std::vector<double>> gnn_message_pass(const GNN& net, const LabeledGraph& g,
                                                  const std::vector<std::vector<double>>& colors);

std::vector<Var> gnn_forward(const GNN& net, std::span<const Var> params, const LabeledGraph& g);
std::vector<Var> gnn_forward(const GNN& net, const LabeledGraph& g, Tape& tape);
std::vector<double> gnn_eval(const GNN& net, const LabeledGraph& g);

inline std::vector<Var> forward(const GNN& net, Tape&, std::span<const Var> params,
                                const LabeledGraph& g) {
  return gnn_forward(net, params, g);
}

TrainResult<GNN> gnn_train(const GNN& net, const Dataset<LabeledGraph>& data,
                           const TrainConfig& cfg);

nlohmann::json to_json(const GNN& net);
GNN gnn_from_json(const nlohmann::json& doc);
std::string write_checkpoint(const GNN& net);
GNN read_gnn_checkpoint(std::string_view text);

}  // namespace gdl
