#include "gdl/gnn.hpp"

#include <stdexcept>

namespace gdl {
namespace {

struct ParamSlices {
  std::span<const Var> encode, update, vote, readout;
};

ParamSlices slice(const GNN& net, std::span<const Var> params) {
  if (params.size() != net.parameter_count()) {
    throw std::invalid_argument("GNN parameter span does not match the model");
  }
  ParamSlices s;
  std::size_t at = 0;
  auto take = [&](const MLP& m) {
    auto part = params.subspan(at, m.parameter_count());
    at += m.parameter_count();
    return part;
  };
  s.encode = take(net.encode);
  s.update = take(net.update);
  s.vote = take(net.vote);
  s.readout = take(net.readout);
  return s;
}

template <class T>
void accumulate(std::vector<T>& acc, const std::vector<T>& term) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = acc[i] + term[i];
}

}  // namespace

std::size_t GNN::parameter_count() const {
  return encode.parameter_count() + update.parameter_count() + vote.parameter_count() +
         readout.parameter_count();
}

std::vector<double> GNN::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const MLP* m : {&encode, &update, &vote, &readout}) {
    const std::vector<double> p = m->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

void GNN::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw std::invalid_argument("GNN parameter count mismatch");
  }
  std::size_t at = 0;
  for (MLP* m : {&encode, &update, &vote, &readout}) {
    m->set_parameters(values.subspan(at, m->parameter_count()));
    at += m->parameter_count();
  }
}

void GNN::validate() const {
  for (const MLP* m : {&encode, &update, &vote, &readout}) m->validate();
  const std::size_t d = encode.input_dim();
  if (encode.output_dim() != d || update.input_dim() != d || update.output_dim() != d ||
      vote.input_dim() != d || readout.input_dim() != vote.output_dim()) {
    throw std::invalid_argument("GNN blocks do not chain");
  }
}

GNN gnn_init(const GnnShape& shape, std::uint64_t seed) {
  auto dims = [&](std::size_t in, std::size_t out) {
    std::vector<std::size_t> d{in};
    d.insert(d.end(), shape.hidden.begin(), shape.hidden.end());
    d.push_back(out);
    return d;
  };
  const std::size_t c = shape.color_dim;
  GNN net{mlp_init(dims(c, c), shape.activation, seed, shape.activation),
          mlp_init(dims(c, c), shape.activation, seed + 1, shape.activation),
          mlp_init(dims(c, shape.vote_dim), shape.activation, seed + 2, shape.activation),
          mlp_init(dims(shape.vote_dim, shape.output_dim), shape.activation, seed + 3),
          shape.rounds};
  net.validate();
  return net;
}

std::vector<std::vector<double>> initial_colors(const GNN& net, const LabeledGraph& g) {
  const std::size_t d = net.color_dim();
  std::vector<std::vector<double>> colors(g.node_count(), std::vector<double>(d, 0.0));
  if (!g.has_labels()) {
    for (auto& c : colors) c[0] = 1.0;
    return colors;
  }
  if (g.label_dim() > d) {
    throw std::invalid_argument("labels of width " + std::to_string(g.label_dim()) +
                                " do not fit color_dim " + std::to_string(d));
  }
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    std::copy(g.labels()[v].begin(), g.labels()[v].end(), colors[v].begin());
  }
  return colors;
}

ColorMatrix gnn_message_pass(const GNN& net, std::span<const Var> params, const LabeledGraph& g,
                             const ColorMatrix& colors) {
  if (colors.size() != g.node_count()) {
    throw std::invalid_argument("color matrix rows do not match the node count");
  }
  for (const auto& c : colors) {
    if (c.size() != net.color_dim()) throw std::invalid_argument("color width mismatch");
  }
  const ParamSlices p = slice(net, params);
  std::vector<std::vector<Var>> messages;
  messages.reserve(colors.size());
  for (const auto& c : colors) messages.push_back(mlp_forward(net.encode, p.encode, c));
  ColorMatrix next;
  next.reserve(colors.size());
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    std::vector<Var> agg;
    const auto& nb = g.neighbors(v);
    if (nb.empty()) {
      Tape& tape = params.front().tape();
      const std::vector<double> zero(net.color_dim(), 0.0);
      agg = bind_constants(tape, zero);
    } else {
      agg = messages[nb[0]];
      for (std::size_t k = 1; k < nb.size(); ++k) accumulate(agg, messages[nb[k]]);
    }
    next.push_back(mlp_forward(net.update, p.update, agg));
  }
  return next;
}

std::vector<std::vector<double>> gnn_message_pass(const GNN& net, const LabeledGraph& g,
                                                  const std::vector<std::vector<double>>& colors) {
  if (colors.size() != g.node_count()) {
    throw std::invalid_argument("color matrix rows do not match the node count");
  }
  std::vector<std::vector<double>> messages;
  messages.reserve(colors.size());
  for (const auto& c : colors) messages.push_back(mlp_eval(net.encode, c));
  std::vector<std::vector<double>> next;
  next.reserve(colors.size());
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    const auto& nb = g.neighbors(v);
    std::vector<double> agg(net.color_dim(), 0.0);
    if (!nb.empty()) {
      agg = messages[nb[0]];
      for (std::size_t k = 1; k < nb.size(); ++k) accumulate(agg, messages[nb[k]]);
    }
    next.push_back(mlp_eval(net.update, agg));
  }
  return next;
}

std::vector<Var> gnn_forward(const GNN& net, std::span<const Var> params, const LabeledGraph& g) {
  const ParamSlices p = slice(net, params);
  Tape& tape = params.front().tape();
  ColorMatrix colors;
  for (const auto& row : initial_colors(net, g)) colors.push_back(bind_constants(tape, row));
  for (std::size_t t = 0; t < net.rounds; ++t) colors = gnn_message_pass(net, params, g, colors);
  std::vector<Var> pooled;
  for (const auto& c : colors) {
    const std::vector<Var> v = mlp_forward(net.vote, p.vote, c);
    if (pooled.empty()) {
      pooled = v;
    } else {
      accumulate(pooled, v);
    }
  }
  if (pooled.empty()) {
    const std::vector<double> zero(net.vote.output_dim(), 0.0);
    pooled = bind_constants(tape, zero);
  }
  return mlp_forward(net.readout, p.readout, pooled);
}

std::vector<Var> gnn_forward(const GNN& net, const LabeledGraph& g, Tape& tape) {
  const std::vector<double> theta = net.parameters();
  const std::vector<Var> params = bind_parameters(tape, theta);
  return gnn_forward(net, params, g);
}

std::vector<double> gnn_eval(const GNN& net, const LabeledGraph& g) {
  std::vector<std::vector<double>> colors = initial_colors(net, g);
  for (std::size_t t = 0; t < net.rounds; ++t) colors = gnn_message_pass(net, g, colors);
  std::vector<double> pooled;
  for (const auto& c : colors) {
    const std::vector<double> v = mlp_eval(net.vote, c);
    if (pooled.empty()) {
      pooled = v;
    } else {
      accumulate(pooled, v);
    }
  }
  if (pooled.empty()) pooled.assign(net.vote.output_dim(), 0.0);
  return mlp_eval(net.readout, pooled);
}

TrainResult<GNN> gnn_train(const GNN& net, const Dataset<LabeledGraph>& data,
                           const TrainConfig& cfg) {
  net.validate();
  return train(net, data, cfg);
}

nlohmann::json to_json(const GNN& net) {
  return {{"kind", "gnn"},
          {"rounds", net.rounds},
          {"color_dim", net.color_dim()},
          {"phi_encode", to_json(net.encode)},
          {"phi_update", to_json(net.update)},
          {"phi_vote", to_json(net.vote)},
          {"phi_final", to_json(net.readout)}};
}

GNN gnn_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "gnn") {
      throw std::invalid_argument("checkpoint is not a GNN");
    }
    GNN net{mlp_from_json(doc.at("phi_encode")), mlp_from_json(doc.at("phi_update")),
            mlp_from_json(doc.at("phi_vote")), mlp_from_json(doc.at("phi_final")),
            doc.at("rounds").get<std::size_t>()};
    net.validate();
    if (doc.at("color_dim").get<std::size_t>() != net.color_dim()) {
      throw std::invalid_argument("GNN color_dim disagrees with its blocks");
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed GNN checkpoint: ") + e.what());
  }
}

std::string write_checkpoint(const GNN& net) { return to_json(net).dump(2) + "\n"; }

GNN read_gnn_checkpoint(std::string_view text) {
  try {
    return gnn_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("checkpoint is not valid JSON: ") + e.what());
  }
}

}  // namespace gdl
