#include "ahmca/config.hpp"

#include <cmath>
#include <optional>

#include "ahmca/error.hpp"
#include <nlohmann/json.hpp>

namespace ahmca {

using nlohmann::json;

namespace {

std::optional<std::string> first_problem(const TrainConfig& c) {
  if (c.k < 1) return "k must be at least 1";
  if (c.g < 1) return "g must be at least 1";
  if (c.d_l < 1) return "d_l must be at least 1";
  if (!(c.beta >= 0.0 && c.beta <= 1.0)) return "beta must lie in [0, 1]";
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) return "lambda must be a finite value >= 0";
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    return "learning_rate must be a finite value > 0";
  }
  if (c.epochs < 1) return "epochs must be at least 1";
  if (c.batch_size < 1) return "batch_size must be at least 1";
  return std::nullopt;
}

std::size_t as_count(const std::string& key, const json& v) {
  if (!v.is_number_integer()) {
    throw Error(ErrorKind::TypeError, "'" + key + "' must be an integer, got " + v.type_name());
  }
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  const auto i = v.get<std::int64_t>();
  if (i < 0) throw Error(ErrorKind::RangeError, "'" + key + "' must not be negative");
  return static_cast<std::size_t>(i);
}

double as_number(const std::string& key, const json& v) {
  if (!v.is_number()) {
    throw Error(ErrorKind::TypeError, "'" + key + "' must be a number, got " + v.type_name());
  }
  return v.get<double>();
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) {
    throw Error(ErrorKind::TypeError, "'" + key + "' must be a boolean, got " + v.type_name());
  }
  return v.get<bool>();
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) {
    throw Error(ErrorKind::TypeError, "'" + key + "' must be a string, got " + v.type_name());
  }
  return v.get<std::string>();
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (auto p = first_problem(cfg)) throw Error(ErrorKind::ConfigInvalid, *p);
}

std::string config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["k"] = c.k;
  j["g"] = c.g;
  j["d_l"] = c.d_l;
  j["beta"] = c.beta;
  j["lambda"] = c.lambda;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["attention_mode"] = std::string(to_string(c.attention_mode));
  j["similarity"] = std::string(to_string(c.similarity));
  j["freeze_embeddings"] = c.freeze_embeddings;
  j["use_x0_in_global"] = c.use_x0_in_global;
  j["early_stop_patience"] = c.early_stop_patience;
  j["penalty_target"] = std::string(to_string(c.penalty_target));
  return j.dump();
}

TrainConfig config_from_json(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::ConfigInvalid, "config must be a JSON object");

  TrainConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "k") c.k = as_count(key, v);
    else if (key == "g") c.g = as_count(key, v);
    else if (key == "d_l") c.d_l = as_count(key, v);
    else if (key == "beta") c.beta = as_number(key, v);
    else if (key == "lambda") c.lambda = as_number(key, v);
    else if (key == "learning_rate") c.learning_rate = as_number(key, v);
    else if (key == "epochs") c.epochs = as_count(key, v);
    else if (key == "batch_size") c.batch_size = as_count(key, v);
    else if (key == "seed") c.seed = as_count(key, v);
    else if (key == "attention_mode") c.attention_mode = parse_normalization(as_string(key, v));
    else if (key == "similarity") c.similarity = parse_similarity(as_string(key, v));
    else if (key == "freeze_embeddings") c.freeze_embeddings = as_bool(key, v);
    else if (key == "use_x0_in_global") c.use_x0_in_global = as_bool(key, v);
    else if (key == "early_stop_patience") c.early_stop_patience = as_count(key, v);
    else if (key == "penalty_target") c.penalty_target = parse_penalty_target(as_string(key, v));
    else throw Error(ErrorKind::UnknownKey, "unknown config key '" + key + "'");
  }
  if (auto p = first_problem(c)) throw Error(ErrorKind::RangeError, *p);
  return c;
}

}  // namespace ahmca
