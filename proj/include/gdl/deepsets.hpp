#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gdl/autodiff.hpp"
#include "gdl/nn.hpp"
#include "gdl/training.hpp"

namespace gdl {

/// A multiset of equally sized element vectors.
using ElementSet = std::vector<std::vector<double>>;

/// f(X) = rho(sum over x in X of phi(x)).
struct DeepSet {
  MLP phi;  // element encoder, element_dim -> latent_dim
  MLP rho;  // aggregate readout, latent_dim -> output_dim

  std::size_t element_dim() const { return phi.input_dim(); }
  std::size_t latent_dim() const { return phi.output_dim(); }
  std::size_t output_dim() const { return rho.output_dim(); }
  std::size_t parameter_count() const { return phi.parameter_count() + rho.parameter_count(); }
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);
  void validate() const;
};

struct DeepSetShape {
  std::size_t element_dim = 1;
  std::size_t latent_dim = 64;
  std::vector<std::size_t> phi_hidden;  // hidden widths of phi
  std::vector<std::size_t> rho_hidden;  // hidden widths of rho
  std::size_t output_dim = 1;
  Activation activation = Activation::relu;
};

/// phi ends in `activation` (the encoder is nonlinear up to its output),
/// rho ends in identity.
DeepSet deepset_init(const DeepSetShape& shape, std::uint64_t seed);

/// Throws std::invalid_argument for empty sets or mixed element dimensions.
std::vector<Var> deepset_forward(const DeepSet& ds, std::span<const Var> params,
                                 const ElementSet& elements);
std::vector<Var> deepset_forward(const DeepSet& ds, const ElementSet& elements, Tape& tape);
std::vector<double> deepset_eval(const DeepSet& ds, const ElementSet& elements);

inline std::vector<Var> forward(const DeepSet& ds, Tape&, std::span<const Var> params,
                                const ElementSet& elements) {
  return deepset_forward(ds, params, elements);
}

TrainResult<DeepSet> deepset_train(const DeepSet& ds, const Dataset<ElementSet>& data,
                                   const TrainConfig& cfg);

nlohmann::json to_json(const DeepSet& ds);
DeepSet deepset_from_json(const nlohmann::json& doc);
std::string write_checkpoint(const DeepSet& ds);
DeepSet read_deepset_checkpoint(std::string_view text);

}  // namespace gdl
