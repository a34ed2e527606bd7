#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "ahmca/attention.hpp"
#include "ahmca/hmcn.hpp"

namespace ahmca {

struct TrainConfig {
  std::size_t k = 64;
  std::size_t g = 384;
  std::size_t d_l = 384;
  double beta = 0.5;
  double lambda = 0.1;
  double learning_rate = 1e-3;
  std::size_t epochs = 20;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  Normalization attention_mode = Normalization::sum_normalized;
  Similarity similarity = Similarity::dot;
  bool freeze_embeddings = true;
  bool use_x0_in_global = true;
  /// Epochs without a validation improvement before stopping; 0 never stops early.
  std::size_t early_stop_patience = 5;
  PenaltyTarget penalty_target = PenaltyTarget::global;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Throws ConfigInvalid naming the first violated constraint.
void validate(const TrainConfig& cfg);

/// JSON object with every field; enums as their string names.
std::string config_to_json(const TrainConfig& cfg);

/// Strict parse: absent keys keep defaults. Throws UnknownKey for an
/// unrecognized key, TypeError for a wrong JSON type, RangeError for an
/// out-of-range value, ConfigInvalid if the text is not a JSON object.
TrainConfig config_from_json(std::string_view json_text);

}  // namespace ahmca
