#pragma once

// Dataset manifests and loading.
//
// Manifest schema:
//   {"name": str, "images": [{"path": str, "faces"?: [[x,y,w,h], ...],
//                             "maps"?: {"saliency"?: str, "harmony"?: str, "quality"?: str}}]}
// Paths are relative to the manifest file.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "collage/importance.hpp"
#include "collage/io.hpp"
#include "collage/scene.hpp"

namespace collage {

struct ManifestEntry {
  std::string path;  // as written in the manifest
  std::vector<FaceBox> faces;
  std::map<MapKind, std::string> maps;  // precomputed base maps
};

struct DatasetManifest {
  std::string name;
  std::vector<ManifestEntry> images;
  std::filesystem::path base_dir;  // directory the relative paths resolve against

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path q(p);
    return q.is_absolute() ? q : base_dir / q;
  }

  void validate() const {
    if (name.empty()) throw ValidationError("manifest: name is empty");
    if (images.size() < 2) throw ValidationError("manifest '" + name + "': at least two images required");
  }
};

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  const auto s = read_text_file(path);
  return {s.begin(), s.end()};
}

inline DatasetManifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                      const std::string& origin = "manifest") {
  auto fail = [&](const std::string& what) { return ValidationError(origin + ": " + what); };
  if (!j.is_object()) throw fail("top level must be an object");
  DatasetManifest m;
  m.base_dir = base_dir;
  if (!j.contains("name") || !j["name"].is_string()) throw fail("missing string field 'name'");
  m.name = j["name"].get<std::string>();
  if (!j.contains("images") || !j["images"].is_array()) throw fail("missing array field 'images'");
  for (std::size_t i = 0; i < j["images"].size(); ++i) {
    const auto& e = j["images"][i];
    const std::string where = "images[" + std::to_string(i) + "]";
    if (!e.is_object() || !e.contains("path") || !e["path"].is_string()) throw fail(where + ": missing 'path'");
    ManifestEntry entry;
    entry.path = e["path"].get<std::string>();
    if (e.contains("faces")) {
      if (!e["faces"].is_array()) throw fail(where + ": 'faces' must be an array");
      for (const auto& b : e["faces"]) {
        if (!b.is_array() || b.size() != 4) throw fail(where + ": face box must be [x,y,w,h]");
        for (const auto& v : b)
          if (!v.is_number_integer()) throw fail(where + ": face box values must be integers");
        entry.faces.push_back({b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()});
      }
    }
    if (e.contains("maps")) {
      if (!e["maps"].is_object()) throw fail(where + ": 'maps' must be an object");
      for (const auto& [k, v] : e["maps"].items()) {
        const MapKind kind = map_kind_from_string(k);
        if (kind == MapKind::combined) throw fail(where + ": only base maps can be precomputed");
        if (!v.is_string()) throw fail(where + ": map path must be a string");
        entry.maps[kind] = v.get<std::string>();
      }
    }
    m.images.push_back(std::move(entry));
  }
  try {
    m.validate();
  } catch (const ValidationError& e) {
    throw fail(e.what());
  }
  return m;
}

inline DatasetManifest read_manifest(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_manifest(j, path.parent_path(), path.string());
}

/// One image after min-side normalization, with its face mask.
struct LoadedImage {
  RasterImage image;
  FaceMask faces;
  int source_width = 0, source_height = 0;
};

inline LoadedImage load_entry(const DatasetManifest& m, std::size_t index) {
  const auto& e = m.images.at(index);
  const auto path = m.resolve(e.path);
  RasterImage src;
  try {
    src = read_image(path, int(index));
  } catch (const LoadError& err) {
    throw LoadError("manifest '" + m.name + "' entry " + std::to_string(index) + ": " + err.what());
  }
  LoadedImage out;
  out.source_width = src.width;
  out.source_height = src.height;
  out.image = resize_min_side(src);
  out.image.id = int(index);
  try {
    out.faces = rasterize_faces(e.faces, src.width, src.height, out.image.width, out.image.height);
  } catch (const ValidationError& err) {
    throw ValidationError(path.string() + ": " + err.what());
  }
  return out;
}

/// Images and masks for every entry; maps are left empty.
inline Dataset load_images(const DatasetManifest& m) {
  m.validate();
  Dataset ds;
  ds.name = m.name;
  for (std::size_t i = 0; i < m.images.size(); ++i) {
    auto li = load_entry(m, i);
    ds.images.push_back(std::move(li.image));
    ds.faces.push_back(std::move(li.faces));
  }
  ds.maps.resize(ds.images.size());
  return ds;
}

/// Loads the manifest and fills every base map, from the precomputed file when
/// the manifest names one and by computation otherwise. Maps are snapped to
/// 8 bits either way.
inline Dataset load_dataset(const DatasetManifest& m, const MapProviderConfig& cfg = {}) {
  Dataset ds = load_images(m);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (MapKind k : kBaseMapKinds) {
      const auto it = m.images[i].maps.find(k);
      if (it != m.images[i].maps.end()) {
        ds.maps[i][k] = read_map(m.resolve(it->second), k, ds.images[i].width, ds.images[i].height);
      } else {
        ds.maps[i][k] = compute_map(k, ds.images[i], cfg);
        quantize_to_8bit(ds.maps[i][k]);
      }
    }
  }
  ds.validate();
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& manifest_path, const MapProviderConfig& cfg = {}) {
  return load_dataset(read_manifest(manifest_path), cfg);
}

}  // namespace collage
