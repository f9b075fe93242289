#include "gdl/deepsets.hpp"

#include <stdexcept>

namespace gdl {
namespace {

void check_elements(const DeepSet& ds, const ElementSet& elements) {
  if (elements.empty()) throw std::invalid_argument("deep set input must be non-empty");
  for (const auto& e : elements) {
    if (e.size() != ds.element_dim()) {
      throw std::invalid_argument("set element has dimension " + std::to_string(e.size()) +
                                  ", expected " + std::to_string(ds.element_dim()));
    }
  }
}

}  // namespace

std::vector<double> DeepSet::parameters() const {
  std::vector<double> out = phi.parameters();
  const std::vector<double> r = rho.parameters();
  out.insert(out.end(), r.begin(), r.end());
  return out;
}

void DeepSet::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw std::invalid_argument("deep set parameter count mismatch");
  }
  phi.set_parameters(values.first(phi.parameter_count()));
  rho.set_parameters(values.subspan(phi.parameter_count()));
}

void DeepSet::validate() const {
  phi.validate();
  rho.validate();
  if (phi.output_dim() != rho.input_dim()) {
    throw std::invalid_argument("phi output and rho input dimensions differ");
  }
}

DeepSet deepset_init(const DeepSetShape& shape, std::uint64_t seed) {
  std::vector<std::size_t> phi_dims{shape.element_dim};
  phi_dims.insert(phi_dims.end(), shape.phi_hidden.begin(), shape.phi_hidden.end());
  phi_dims.push_back(shape.latent_dim);
  std::vector<std::size_t> rho_dims{shape.latent_dim};
  rho_dims.insert(rho_dims.end(), shape.rho_hidden.begin(), shape.rho_hidden.end());
  rho_dims.push_back(shape.output_dim);
  DeepSet ds{mlp_init(phi_dims, shape.activation, seed, shape.activation),
             mlp_init(rho_dims, shape.activation, seed + 1)};
  ds.validate();
  return ds;
}

std::vector<Var> deepset_forward(const DeepSet& ds, std::span<const Var> params,
                                 const ElementSet& elements) {
  check_elements(ds, elements);
  if (params.size() != ds.parameter_count()) {
    throw std::invalid_argument("deep set parameter span does not match the model");
  }
  Tape& tape = params.front().tape();
  const auto phi_params = params.first(ds.phi.parameter_count());
  const auto rho_params = params.subspan(ds.phi.parameter_count());
  std::vector<Var> pooled;
  for (const auto& e : elements) {
    const std::vector<Var> x = bind_constants(tape, e);
    const std::vector<Var> z = mlp_forward(ds.phi, phi_params, x);
    if (pooled.empty()) {
      pooled = z;
    } else {
      for (std::size_t i = 0; i < z.size(); ++i) pooled[i] = pooled[i] + z[i];
    }
  }
  return mlp_forward(ds.rho, rho_params, pooled);
}

std::vector<Var> deepset_forward(const DeepSet& ds, const ElementSet& elements, Tape& tape) {
  const std::vector<double> theta = ds.parameters();
  const std::vector<Var> params = bind_parameters(tape, theta);
  return deepset_forward(ds, params, elements);
}

std::vector<double> deepset_eval(const DeepSet& ds, const ElementSet& elements) {
  check_elements(ds, elements);
  std::vector<double> pooled;
  for (const auto& e : elements) {
    const std::vector<double> z = mlp_eval(ds.phi, e);
    if (pooled.empty()) {
      pooled = z;
    } else {
      for (std::size_t i = 0; i < z.size(); ++i) pooled[i] = pooled[i] + z[i];
    }
  }
  return mlp_eval(ds.rho, pooled);
}

TrainResult<DeepSet> deepset_train(const DeepSet& ds, const Dataset<ElementSet>& data,
                                   const TrainConfig& cfg) {
  ds.validate();
  return train(ds, data, cfg);
}

nlohmann::json to_json(const DeepSet& ds) {
  return {{"kind", "deepset"},
          {"latent_dim", ds.latent_dim()},
          {"phi", to_json(ds.phi)},
          {"rho", to_json(ds.rho)}};
}

DeepSet deepset_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "deepset") {
      throw std::invalid_argument("checkpoint is not a deep set");
    }
    DeepSet ds{mlp_from_json(doc.at("phi")), mlp_from_json(doc.at("rho"))};
    ds.validate();
    if (doc.at("latent_dim").get<std::size_t>() != ds.latent_dim()) {
      throw std::invalid_argument("deep set latent_dim disagrees with its blocks");
    }
    return ds;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed deep set checkpoint: ") + e.what());
  }
}

std::string write_checkpoint(const DeepSet& ds) { return to_json(ds).dump(2) + "\n"; }

DeepSet read_deepset_checkpoint(std::string_view text) {
  try {
    return deepset_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("checkpoint is not valid JSON: ") + e.what());
  }
}

}  // namespace gdl
