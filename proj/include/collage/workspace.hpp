#pragma once

// On-disk workspace: content-addressed artifacts, command journal,
// preference log and ranking rounds.
//
// Layout under the root:
//   index.json      {"v":1, "artifacts": {id: {kind, file, meta}}, "round_counter": n}
//   journal.jsonl   one line per executed command
//   prefs.jsonl     one line per preference record
//   rounds/<id>.json
//   <kind>/<id>.<ext>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "collage/dataset.hpp"
#include "collage/serialization.hpp"

namespace collage {

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

inline std::string sha256_hex(const std::vector<std::uint8_t>& bytes) {
  return sha256_hex(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

/// Id of an artifact derived from its kind and the JSON of its inputs.
inline std::string content_id(const std::string& kind, const json& inputs) {
  return kind + "-" + sha256_hex(kind + "\n" + inputs.dump()).substr(0, 24);
}

inline std::int64_t unix_millis() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

struct Artifact {
  std::string id;
  std::string kind;
  std::string file;  // relative to the workspace root
  json meta;
};

/// A ranking round: a fixed candidate set shown to subjects.
struct Round {
  std::string id;
  std::string dataset;   // manifest path
  std::vector<std::string> candidates;  // config artifact ids
  std::string weights_id;               // empty for basic candidates
  bool open = true;
  std::int64_t created = 0;
};

inline void to_json(json& j, const Round& r) {
  j = {{"id", r.id},           {"dataset", r.dataset}, {"candidates", r.candidates},
       {"weights_id", r.weights_id}, {"open", r.open}, {"created", r.created}};
}
inline void from_json(const json& j, Round& r) {
  r.id = detail::get_field<std::string>(j, "id");
  r.dataset = detail::get_field<std::string>(j, "dataset");
  r.candidates = detail::get_field<std::vector<std::string>>(j, "candidates");
  r.weights_id = j.value("weights_id", std::string{});
  r.open = j.value("open", true);
  r.created = j.value("created", std::int64_t{0});
}

class Workspace {
 public:
  explicit Workspace(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_ / "rounds");
    if (std::filesystem::exists(root_ / "index.json")) {
      index_ = json::parse(read_text_file(root_ / "index.json"));
      check_version(index_);
    } else {
      index_ = {{"v", kSchemaVersion}, {"artifacts", json::object()}, {"round_counter", 0}};
      write_atomic(root_ / "index.json", index_.dump(1));
    }
  }

  /// COLLAGE_WORKSPACE if set, else ./collage-workspace.
  static std::filesystem::path default_root() {
    if (const char* env = std::getenv("COLLAGE_WORKSPACE"); env && *env) return env;
    return "collage-workspace";
  }

  const std::filesystem::path& root() const { return root_; }

  bool has(const std::string& id) const {
    std::shared_lock lock(mu_);
    return index_["artifacts"].contains(id);
  }

  std::optional<Artifact> find(const std::string& id) const {
    std::shared_lock lock(mu_);
    const auto& a = index_["artifacts"];
    if (!a.contains(id)) return std::nullopt;
    const auto& e = a[id];
    return Artifact{id, e["kind"].get<std::string>(), e["file"].get<std::string>(), e.value("meta", json::object())};
  }

  Artifact get(const std::string& id) const {
    auto a = find(id);
    if (!a) throw ValidationError("unknown artifact id: " + id);
    return *a;
  }

  std::vector<Artifact> list(const std::string& kind) const {
    std::shared_lock lock(mu_);
    std::vector<Artifact> out;
    for (const auto& [id, e] : index_["artifacts"].items())
      if (e["kind"] == kind) out.push_back({id, kind, e["file"].get<std::string>(), e.value("meta", json::object())});
    return out;
  }

  std::filesystem::path path_of(const std::string& id) const { return root_ / get(id).file; }

  /// Stores bytes under <kind>/<id><ext> and records the artifact. An existing
  /// id is left untouched.
  Artifact put(const std::string& kind, const std::string& id, std::string_view bytes, const std::string& ext,
               json meta = json::object()) {
    std::unique_lock lock(mu_);
    if (index_["artifacts"].contains(id)) {
      const auto& e = index_["artifacts"][id];
      return {id, e["kind"].get<std::string>(), e["file"].get<std::string>(), e.value("meta", json::object())};
    }
    const std::string file = kind + "/" + id + ext;
    std::filesystem::create_directories(root_ / kind);
    write_atomic(root_ / file, bytes);
    index_["artifacts"][id] = {{"kind", kind}, {"file", file}, {"meta", meta}};
    write_atomic(root_ / "index.json", index_.dump(1));
    return {id, kind, file, std::move(meta)};
  }

  Artifact put(const std::string& kind, const std::string& id, const std::vector<std::uint8_t>& bytes,
               const std::string& ext, json meta = json::object()) {
    return put(kind, id, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), ext,
               std::move(meta));
  }

  std::string read_text(const std::string& id) const { return read_text_file(path_of(id)); }
  json read_json(const std::string& id) const { return json::parse(read_text(id)); }

  // --- journal -------------------------------------------------------------

  void journal(json entry) {
    entry["time"] = unix_millis();
    append_line(root_ / "journal.jsonl", versioned(std::move(entry)).dump());
  }

  std::vector<json> journal_entries() const { return read_lines(root_ / "journal.jsonl"); }

  // --- preferences ---------------------------------------------------------

  void append_preference(const PreferenceRecord& r) {
    r.validate();
    append_line(root_ / "prefs.jsonl", preference_line(r).dump());
  }

  std::vector<PreferenceRecord> preferences() const {
    std::vector<PreferenceRecord> out;
    for (const auto& j : read_lines(root_ / "prefs.jsonl")) out.push_back(parse_preference_line(j));
    return out;
  }

  // --- rounds --------------------------------------------------------------

  /// Allocates the next round id ("round-<n>", n increasing from 1).
  Round open_round(std::string dataset, std::vector<std::string> candidates, std::string weights_id) {
    if (candidates.size() < 2) throw ValidationError("a round needs at least two candidates");
    for (const auto& c : candidates)
      if (!has(c)) throw ValidationError("unknown candidate id: " + c);
    std::unique_lock lock(mu_);
    const int n = index_["round_counter"].get<int>() + 1;
    index_["round_counter"] = n;
    write_atomic(root_ / "index.json", index_.dump(1));
    Round r{"round-" + std::to_string(n), std::move(dataset), std::move(candidates), std::move(weights_id), true,
            unix_millis()};
    write_atomic(round_path(r.id), versioned(json(r)).dump(1));
    return r;
  }

  std::optional<Round> find_round(const std::string& id) const {
    if (id.find('/') != std::string::npos || id.find("..") != std::string::npos) return std::nullopt;
    std::shared_lock lock(mu_);
    const auto p = round_path(id);
    if (!std::filesystem::exists(p)) return std::nullopt;
    const json j = json::parse(read_text_file(p));
    check_version(j);
    return j.get<Round>();
  }

  void close_round(const std::string& id) {
    auto r = find_round(id);
    if (!r) throw ValidationError("unknown round: " + id);
    std::unique_lock lock(mu_);
    r->open = false;
    write_atomic(round_path(id), versioned(json(*r)).dump(1));
  }

  int round_counter() const {
    std::shared_lock lock(mu_);
    return index_["round_counter"].get<int>();
  }

 private:
  std::filesystem::path round_path(const std::string& id) const { return root_ / "rounds" / (id + ".json"); }

  static void write_atomic(const std::filesystem::path& p, std::string_view bytes) {
    const auto tmp = p.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write " + tmp);
      out.write(bytes.data(), std::streamsize(bytes.size()));
      if (!out) throw Error("cannot write " + tmp);
    }
    std::filesystem::rename(tmp, p);
  }

  void append_line(const std::filesystem::path& p, const std::string& line) {
    std::unique_lock lock(mu_);
    std::ofstream out(p, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot append to " + p.string());
    out << line << '\n';
  }

  std::vector<json> read_lines(const std::filesystem::path& p) const {
    std::shared_lock lock(mu_);
    std::vector<json> out;
    if (!std::filesystem::exists(p)) return out;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) out.push_back(json::parse(line));
    return out;
  }

  std::filesystem::path root_;
  json index_;
  mutable std::shared_mutex mu_;
};

}  // namespace collage
