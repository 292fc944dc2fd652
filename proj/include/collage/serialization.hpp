#pragma once

// JSON forms of the domain types. Top-level documents carry "v": 1.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "collage/criteria.hpp"
#include "collage/importance.hpp"
#include "collage/learning.hpp"
#include "collage/optimizer.hpp"
#include "collage/preference.hpp"

namespace collage {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class T>
T get_field(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T, std::size_t N>
std::array<T, N> get_array(const json& j, const char* key) {
  const auto v = get_field<std::vector<T>>(j, key);
  if (v.size() != N)
    throw ValidationError(std::string("field '") + key + "' must have " + std::to_string(N) + " entries");
  std::array<T, N> a{};
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

}  // namespace detail

inline void check_version(const json& j) {
  if (!j.is_object()) throw ValidationError("document must be a JSON object");
  if (!j.contains("v")) throw ValidationError("document has no schema version");
  if (j["v"] != kSchemaVersion) throw ValidationError("unsupported schema version " + j["v"].dump());
}

inline json versioned(json body) {
  json out = {{"v", kSchemaVersion}};
  for (auto& [k, v] : body.items()) out[k] = std::move(v);
  return out;
}

// ---------------------------------------------------------------------------
// Plain converters (found by ADL from nlohmann).

inline void to_json(json& j, const Canvas& c) {
  j = {{"w", c.width}, {"h", c.height}, {"scale", c.render_scale}};
}
inline void from_json(const json& j, Canvas& c) {
  c.width = detail::get_field<int>(j, "w");
  c.height = detail::get_field<int>(j, "h");
  c.render_scale = j.value("scale", 4);
}

inline void to_json(json& j, const ImageState& s) {
  j = {{"tx", s.tx}, {"ty", s.ty}, {"theta_index", s.theta_index}, {"layer", s.layer}};
}
inline void from_json(const json& j, ImageState& s) {
  s.tx = detail::get_field<int>(j, "tx");
  s.ty = detail::get_field<int>(j, "ty");
  s.theta_index = detail::get_field<int>(j, "theta_index");
  s.layer = detail::get_field<int>(j, "layer");
}

inline void to_json(json& j, const CollageConfiguration& c) { j = {{"canvas", c.canvas}, {"states", c.states}}; }
inline void from_json(const json& j, CollageConfiguration& c) {
  c.canvas = detail::get_field<Canvas>(j, "canvas");
  c.states = detail::get_field<std::vector<ImageState>>(j, "states");
}

inline void to_json(json& j, const CriterionVector& v) { j = v.values; }
inline void from_json(const json& j, CriterionVector& v) {
  const auto xs = j.get<std::vector<double>>();
  if (xs.size() != kCriterionCount) throw ValidationError("criterion vector must have 10 entries");
  std::copy(xs.begin(), xs.end(), v.values.begin());
}

inline void to_json(json& j, const SearchSpec& s) {
  j = {{"canvas", s.canvas}, {"grid", s.grid},       {"xs", s.xs},           {"ys", s.ys},
       {"angles", s.angles}, {"iters", s.max_iterations}, {"seed", s.seed}, {"restarts", s.restarts}};
}
inline void from_json(const json& j, SearchSpec& s) {
  s.canvas = detail::get_field<Canvas>(j, "canvas");
  s.grid = detail::get_field<int>(j, "grid");
  s.xs = detail::get_field<std::vector<int>>(j, "xs");
  s.ys = detail::get_field<std::vector<int>>(j, "ys");
  s.angles = detail::get_field<std::vector<int>>(j, "angles");
  s.max_iterations = detail::get_field<int>(j, "iters");
  s.seed = detail::get_field<std::uint64_t>(j, "seed");
  s.restarts = j.value("restarts", 1);
}

inline void to_json(json& j, const MoveRecord& m) {
  j = {{"iteration", m.iteration}, {"image", m.image}, {"from", m.from}, {"to", m.to}, {"fitness", m.fitness}};
}

inline void to_json(json& j, const SearchTrace& t) {
  j = {{"best_fitness", t.best_fitness}, {"moves", t.moves}, {"wall_seconds", t.wall_seconds}, {"restart", t.restart}};
}

inline void to_json(json& j, const MapProviderConfig& c) {
  j = {{"saliency_tile", c.saliency_tile},
       {"saliency_radii", c.saliency_radii},
       {"harmony_windows", MapProviderConfig::sorted(c.harmony_windows)},
       {"quality_windows", MapProviderConfig::sorted(c.quality_windows)}};
}
inline void from_json(const json& j, MapProviderConfig& c) {
  c = {};
  c.saliency_tile = j.value("saliency_tile", c.saliency_tile);
  if (j.contains("saliency_radii")) c.saliency_radii = detail::get_array<int, 3>(j, "saliency_radii");
  c.harmony_windows = j.value("harmony_windows", c.harmony_windows);
  c.quality_windows = j.value("quality_windows", c.quality_windows);
  c.validate();
}

inline void to_json(json& j, const WeightSet& w) { j = {{"lambdas", w.lambdas}, {"alphas", w.alphas}}; }
inline void from_json(const json& j, WeightSet& w) {
  w.lambdas = detail::get_array<double, kCriterionCount>(j, "lambdas");
  w.alphas = detail::get_array<double, 3>(j, "alphas");
}

inline void to_json(json& j, const PreferenceRecord& r) {
  j = {{"dataset", r.dataset},       {"round", r.round},     {"candidates", r.candidates},
       {"subject", r.subject},       {"timestamp", r.timestamp}};
  if (r.pair) j["pair"] = {r.pair->first, r.pair->second};
  else j["ranking"] = r.ranking;
}
inline void from_json(const json& j, PreferenceRecord& r) {
  r = {};
  r.dataset = detail::get_field<std::string>(j, "dataset");
  r.round = detail::get_field<std::string>(j, "round");
  r.candidates = detail::get_field<std::vector<std::string>>(j, "candidates");
  r.subject = detail::get_field<std::string>(j, "subject");
  r.timestamp = j.value("timestamp", std::int64_t{0});
  if (j.contains("pair")) {
    const auto p = detail::get_field<std::vector<std::string>>(j, "pair");
    if (p.size() != 2) throw ValidationError("pair must be [winner, loser]");
    r.pair = std::pair{p[0], p[1]};
  } else {
    r.ranking = detail::get_field<std::vector<std::string>>(j, "ranking");
  }
}

// ---------------------------------------------------------------------------
// Documents.

inline json config_document(const CollageConfiguration& c) { return versioned(json(c)); }

inline CollageConfiguration parse_config_document(const json& j) {
  check_version(j);
  auto c = j.get<CollageConfiguration>();
  validate_configuration(c);
  return c;
}

/// Stored weights together with how they were obtained.
struct WeightsDocument {
  WeightSet weights;
  std::optional<ObjectiveBreakdown> objective;
  std::vector<std::string> trained_on;  // round ids
};

inline json weights_document(const WeightsDocument& d) {
  json j = json(d.weights);
  if (d.objective) {
    j["objective"] = d.objective->objective;
    j["tau_sum"] = d.objective->tau_sum;
    j["penalty"] = d.objective->penalty;
  }
  j["trained_on"] = d.trained_on;
  const auto report = sign_report(d.weights);
  std::vector<std::string> signs;
  for (int s : report.signs) signs.push_back(sign_symbol(s));
  j["signs"] = signs;
  return versioned(j);
}

inline WeightsDocument parse_weights_document(const json& j, double lambda_bound = 10.0) {
  check_version(j);
  WeightsDocument d;
  d.weights = j.get<WeightSet>();
  d.weights.validate(lambda_bound);
  if (j.contains("objective")) {
    d.objective = ObjectiveBreakdown{detail::get_field<double>(j, "objective"), j.value("tau_sum", 0.0),
                                     j.value("penalty", 0.0)};
  }
  d.trained_on = j.value("trained_on", std::vector<std::string>{});
  return d;
}

inline json preference_line(const PreferenceRecord& r) { return versioned(json(r)); }

inline PreferenceRecord parse_preference_line(const json& j) {
  check_version(j);
  auto r = j.get<PreferenceRecord>();
  r.validate();
  return r;
}

}  // namespace collage
