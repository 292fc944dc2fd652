#pragma once

// Command implementations shared by the CLI and the HTTP service. Each one
// reads and writes the workspace and returns a structured result.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "collage/dataset.hpp"
#include "collage/learning.hpp"
#include "collage/optimizer.hpp"
#include "collage/serialization.hpp"
#include "collage/workspace.hpp"

namespace collage {

// ---------------------------------------------------------------------------
// maps

struct MapsResult {
  std::string dataset_id;  // content id of (images, faces, maps)
  std::vector<std::array<std::string, 3>> map_ids;  // per image, (sal, qua, har)
  int computed = 0;  // maps computed from pixels
  int loaded = 0;    // maps taken from precomputed files
  int reused = 0;    // maps already in the workspace
};

namespace detail {

inline std::string canonical_manifest_path(const std::filesystem::path& p) {
  return std::filesystem::weakly_canonical(std::filesystem::absolute(p)).string();
}

}  // namespace detail

/// Ensures all three base maps of every image exist in the workspace and
/// returns the dataset with those exact maps attached.
inline Dataset workspace_dataset(Workspace& ws, const std::filesystem::path& manifest_path,
                                 const MapProviderConfig& cfg = {}, MapsResult* result = nullptr) {
  cfg.validate();
  const auto manifest = read_manifest(manifest_path);
  Dataset ds = load_images(manifest);
  MapsResult res;
  json dataset_inputs = {{"name", manifest.name}, {"maps", json::array()}, {"faces", json::array()}};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& entry = manifest.images[i];
    const std::string image_sha = sha256_hex(read_binary_file(manifest.resolve(entry.path)));
    std::array<std::string, 3> ids;
    for (MapKind k : kBaseMapKinds) {
      const auto pre = entry.maps.find(k);
      json inputs = {{"image", image_sha}, {"kind", to_string(k)}, {"min_side", kNormalizedMinSide}};
      if (pre != entry.maps.end()) inputs["file"] = sha256_hex(read_binary_file(manifest.resolve(pre->second)));
      else inputs["config"] = json(cfg);
      const std::string id = content_id("map", inputs);
      const int w = ds.images[i].width, h = ds.images[i].height;
      if (ws.has(id)) {
        ++res.reused;
      } else {
        ImportanceMap m;
        if (pre != entry.maps.end()) {
          m = read_map(manifest.resolve(pre->second), k, w, h);
          ++res.loaded;
        } else {
          m = compute_map(k, ds.images[i], cfg);
          ++res.computed;
        }
        ws.put("maps", id, encode_map_png(m), ".png",
               {{"image", entry.path}, {"kind", to_string(k)}, {"w", w}, {"h", h}});
      }
      ds.maps[i][k] = decode_map_png(read_binary_file(ws.path_of(id)), k);
      ids[int(k)] = id;
    }
    dataset_inputs["maps"].push_back(ids);
    json faces = json::array();
    for (const auto& b : entry.faces) faces.push_back({b.x, b.y, b.w, b.h});
    dataset_inputs["faces"].push_back(faces);
    res.map_ids.push_back(ids);
  }
  ds.validate();
  res.dataset_id = content_id("dataset", dataset_inputs);
  if (result) *result = res;
  return ds;
}

inline MapsResult cmd_maps(Workspace& ws, const std::filesystem::path& manifest_path,
                           const MapProviderConfig& cfg = {}) {
  MapsResult res;
  workspace_dataset(ws, manifest_path, cfg, &res);
  ws.journal({{"cmd", "maps"}, {"manifest", detail::canonical_manifest_path(manifest_path)}, {"config", json(cfg)},
              {"computed", res.computed}, {"loaded", res.loaded}, {"reused", res.reused}});
  return res;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
  std::optional<MapKind> basic;  // basic 3-criterion fitness on one map
  std::string weights_id;        // workspace weights artifact
  std::optional<std::filesystem::path> weights_file;
  std::optional<WeightSet> weights;  // explicit weights, as recorded in the journal
  SearchSpec spec = SearchSpec::standard();
  MapProviderConfig maps;
};

struct GenerateResult {
  std::string config_id;
  std::string render_id;
  std::string trace_id;
  CollageConfiguration config;
  WeightSet weights;
  double fitness = 0.0;
  CriterionVector criteria;
  bool cached = false;
};

inline WeightSet load_weights_file(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) throw LoadError("weights file not found: " + p.string());
  try {
    return parse_weights_document(json::parse(read_text_file(p))).weights;
  } catch (const json::exception& e) {
    throw LoadError(p.string() + ": " + e.what());
  }
}

inline WeightSet resolve_weights(const Workspace& ws, const GenerateOptions& o) {
  const int sources = int(o.basic.has_value()) + int(!o.weights_id.empty()) + int(o.weights_file.has_value()) +
                      int(o.weights.has_value());
  if (sources != 1) throw ValidationError("choose exactly one of basic map, weights id, weights file or weights");
  if (o.basic) return WeightSet::basic(*o.basic);
  if (o.weights) {
    o.weights->validate();
    return *o.weights;
  }
  if (o.weights_file) return load_weights_file(*o.weights_file);
  const auto a = ws.find(o.weights_id);
  if (!a || a->kind != "weights") throw ValidationError("unknown weights id: " + o.weights_id);
  return parse_weights_document(ws.read_json(o.weights_id)).weights;
}

inline GenerateResult cmd_generate(Workspace& ws, const std::filesystem::path& manifest_path,
                                   const GenerateOptions& o) {
  o.spec.validate();
  GenerateResult out;
  out.weights = resolve_weights(ws, o);
  MapsResult maps;
  const Dataset ds = workspace_dataset(ws, manifest_path, o.maps, &maps);
  const std::string manifest = detail::canonical_manifest_path(manifest_path);

  json spec_json = json(o.spec);
  const std::string config_id =
      content_id("config", {{"dataset", maps.dataset_id}, {"weights", json(out.weights)}, {"spec", spec_json}});
  out.config_id = config_id;
  if (const auto a = ws.find(config_id)) {
    out.config = parse_config_document(ws.read_json(config_id));
    out.render_id = a->meta.value("render", "");
    out.trace_id = a->meta.value("trace", "");
    out.fitness = a->meta.value("fitness", 0.0);
    out.criteria = a->meta.at("criteria").get<CriterionVector>();
    out.cached = true;
    return out;
  }

  const auto res = optimize(ds, out.weights, o.spec);
  out.config = res.config;
  out.fitness = res.fitness;
  out.criteria = res.criteria;

  out.trace_id = content_id("trace", {{"config", config_id}});
  json trace = json(res.trace);
  trace.erase("wall_seconds");  // keeps the stored trace reproducible
  ws.put("traces", out.trace_id, versioned(trace).dump(1), ".json", {{"config", config_id}});

  const RasterImage img = render(res.config, ds.images);
  out.render_id = content_id("render", {{"config", config_id}, {"scale", res.config.canvas.render_scale}});
  ws.put("renders", out.render_id, encode_png(img), ".png", {{"config", config_id}});

  ws.put("configs", config_id, config_document(res.config).dump(1), ".json",
         {{"manifest", manifest},
          {"dataset", maps.dataset_id},
          {"weights", json(out.weights)},
          {"weights_id", o.weights_id},
          {"basic", o.basic ? to_string(*o.basic) : ""},
          {"spec", spec_json},
          {"fitness", res.fitness},
          {"criteria", res.criteria},
          {"render", out.render_id},
          {"trace", out.trace_id}});
  ws.journal({{"cmd", "generate"},
              {"manifest", manifest},
              {"maps", json(o.maps)},
              {"weights", json(out.weights)},
              {"spec", spec_json},
              {"config", config_id},
              {"wall_seconds", res.trace.wall_seconds}});
  return out;
}

// ---------------------------------------------------------------------------
// criteria / render

struct CriteriaReport {
  CriterionVector criteria;
  double fitness = 0.0;
};

inline CriteriaReport cmd_criteria(Workspace& ws, const std::filesystem::path& manifest_path,
                                   const CollageConfiguration& cfg, const WeightSet& w,
                                   const MapProviderConfig& maps = {}) {
  const Dataset ds = workspace_dataset(ws, manifest_path, maps);
  if (cfg.states.size() != ds.size()) throw ValidationError("configuration and dataset sizes differ");
  CriteriaReport r;
  r.criteria = evaluate_all(cfg, ds, w.alphas);
  r.fitness = fitness(r.criteria, w.lambdas);
  return r;
}

inline RasterImage cmd_render(const std::filesystem::path& manifest_path, const CollageConfiguration& cfg) {
  validate_configuration(cfg);
  const Dataset ds = load_images(read_manifest(manifest_path));
  if (cfg.states.size() != ds.size()) throw ValidationError("configuration and dataset sizes differ");
  return render(cfg, ds.images);
}

// ---------------------------------------------------------------------------
// learn

struct LearnOutcome {
  std::string weights_id;
  WeightsDocument document;
  LearnResult result;
  std::vector<std::string> rounds;  // rounds that contributed a training item
};

/// Candidate features of a stored configuration, re-evaluated on its dataset.
class FeatureCache {
 public:
  explicit FeatureCache(Workspace& ws, MapProviderConfig maps = {}) : ws_(&ws), maps_(std::move(maps)) {}

  const CandidateFeatures& get(const std::string& config_id) {
    if (auto it = features_.find(config_id); it != features_.end()) return it->second;
    const auto a = ws_->find(config_id);
    if (!a || a->kind != "configs") throw ValidationError("unknown candidate id: " + config_id);
    const std::string manifest = a->meta.at("manifest").get<std::string>();
    auto dit = datasets_.find(manifest);
    if (dit == datasets_.end()) {
      auto ds = std::make_unique<Dataset>(workspace_dataset(*ws_, manifest, maps_));
      auto ev = std::make_unique<Evaluator>(*ds);
      dit = datasets_.emplace(manifest, Entry{std::move(ds), std::move(ev)}).first;
    }
    const auto cfg = parse_config_document(ws_->read_json(config_id));
    const std::array<double, 3> uniform{1.0 / 3, 1.0 / 3, 1.0 / 3};
    return features_[config_id] = extract_features(dit->second.evaluator->context(cfg, uniform));
  }

 private:
  struct Entry {
    std::unique_ptr<Dataset> dataset;
    std::unique_ptr<Evaluator> evaluator;
  };
  Workspace* ws_;
  MapProviderConfig maps_;
  std::map<std::string, Entry> datasets_;
  std::map<std::string, CandidateFeatures> features_;
};

/// Builds one training item per round from the records, scored by Formula
/// One points; rounds without any usable record are skipped.
inline std::vector<TrainingItem> training_items(Workspace& ws, const std::vector<PreferenceRecord>& records,
                                                std::vector<std::string>* rounds_used = nullptr,
                                                const MapProviderConfig& maps = {}) {
  std::map<std::string, std::vector<PreferenceRecord>> by_round;
  for (const auto& r : records) by_round[r.round].push_back(r);
  FeatureCache cache(ws, maps);
  std::vector<TrainingItem> items;
  for (const auto& [round, recs] : by_round) {
    const auto& candidates = recs.front().candidates;
    for (const auto& r : recs)
      if (r.candidates != candidates) throw ValidationError("round " + round + ": records disagree on candidates");
    const auto tally = tally_records(recs, candidates);
    const auto scores = f1_score(tally);
    if (std::all_of(scores.begin(), scores.end(), [](int s) { return s == 0; })) continue;
    std::vector<CandidateFeatures> feats;
    for (const auto& c : candidates) feats.push_back(cache.get(c));
    items.push_back(TrainingItem::from_tally(round, std::move(feats), tally));
    if (rounds_used) rounds_used->push_back(round);
  }
  return items;
}

inline void to_json(json& j, const LearnSpec& s) {
  j = {{"eta", s.eta},         {"lambda_bound", s.lambda_bound}, {"learn_alphas", s.learn_alphas},
       {"restarts", s.restarts}, {"initial_step", s.initial_step}, {"final_step", s.final_step},
       {"max_evaluations", s.max_evaluations}, {"seed", s.seed}, {"start_alphas", s.start_alphas}};
}

inline void from_json(const json& j, LearnSpec& s) {
  s = {};
  s.eta = j.value("eta", s.eta);
  s.lambda_bound = j.value("lambda_bound", s.lambda_bound);
  s.learn_alphas = j.value("learn_alphas", s.learn_alphas);
  s.restarts = j.value("restarts", s.restarts);
  s.initial_step = j.value("initial_step", s.initial_step);
  s.final_step = j.value("final_step", s.final_step);
  s.max_evaluations = j.value("max_evaluations", s.max_evaluations);
  s.seed = j.value("seed", s.seed);
  if (j.contains("start_alphas")) s.start_alphas = detail::get_array<double, 3>(j, "start_alphas");
  s.validate();
}

inline LearnOutcome cmd_learn(Workspace& ws, const std::vector<PreferenceRecord>& records, const LearnSpec& spec,
                              const MapProviderConfig& maps = {}) {
  if (records.empty()) throw ValidationError("no preferences");
  LearnOutcome out;
  const auto items = training_items(ws, records, &out.rounds, maps);
  if (items.empty()) throw ValidationError("no preferences: every record was excluded");
  out.result = learn_weights(items, spec);
  out.document = {out.result.weights, out.result.breakdown, out.rounds};

  json recs = json::array();
  for (const auto& r : records) {
    json rj = json(r);
    rj.erase("timestamp");
    recs.push_back(rj);
  }
  out.weights_id = content_id("weights", {{"records", recs}, {"spec", json(spec)}, {"maps", json(maps)}});
  ws.put("weights", out.weights_id, weights_document(out.document).dump(1), ".json",
         {{"rounds", out.rounds}, {"objective", out.result.breakdown.objective}});
  ws.journal({{"cmd", "learn"},
              {"weights", out.weights_id},
              {"rounds", out.rounds},
              {"spec", json(spec)},
              {"maps", json(maps)},
              {"records", recs}});
  return out;
}

/// Records for the given rounds (all rounds when empty) from the workspace log.
inline std::vector<PreferenceRecord> select_records(const Workspace& ws, const std::vector<std::string>& rounds) {
  std::vector<PreferenceRecord> out;
  for (auto& r : ws.preferences())
    if (rounds.empty() || std::find(rounds.begin(), rounds.end(), r.round) != rounds.end()) out.push_back(std::move(r));
  return out;
}

// ---------------------------------------------------------------------------
// replay

struct ReplaySummary {
  int maps = 0, generated = 0, learned = 0;
  std::vector<std::string> config_ids;
  std::vector<std::string> weights_ids;
};

/// Re-executes every journaled command of src against dst. Content ids make
/// the regenerated artifacts land under the same ids.
inline ReplaySummary replay_journal(const Workspace& src, Workspace& dst) {
  ReplaySummary out;
  for (const auto& e : src.journal_entries()) {
    const std::string cmd = e.at("cmd").get<std::string>();
    if (cmd == "maps") {
      cmd_maps(dst, e.at("manifest").get<std::string>(), e.at("config").get<MapProviderConfig>());
      ++out.maps;
    } else if (cmd == "generate") {
      GenerateOptions o;
      o.weights = e.at("weights").get<WeightSet>();
      o.spec = e.at("spec").get<SearchSpec>();
      o.maps = e.value("maps", json::object()).get<MapProviderConfig>();
      out.config_ids.push_back(cmd_generate(dst, e.at("manifest").get<std::string>(), o).config_id);
      ++out.generated;
    } else if (cmd == "learn") {
      std::vector<PreferenceRecord> recs;
      for (const auto& r : e.at("records")) recs.push_back(r.get<PreferenceRecord>());
      const auto r = cmd_learn(dst, recs, e.at("spec").get<LearnSpec>(), e.value("maps", json::object()).get<MapProviderConfig>());
      out.weights_ids.push_back(r.weights_id);
      ++out.learned;
    } else {
      throw ValidationError("unknown journal command: " + cmd);
    }
  }
  return out;
}

}  // namespace collage
