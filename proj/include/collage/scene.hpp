#pragma once

#include <array>
#include <string>
#include <vector>

#include "collage/core.hpp"
#include "collage/geometry.hpp"
#include "collage/importance.hpp"

namespace collage {

/// A loaded image set with its face masks and base importance maps.
struct Dataset {
  std::string name;
  std::vector<RasterImage> images;
  std::vector<FaceMask> faces;  // one per image, all-zero when the image has no faces
  std::vector<MapSet> maps;     // one per image

  std::size_t size() const { return images.size(); }

  void validate() const {
    if (images.empty()) throw ValidationError("dataset has no images");
    if (faces.size() != images.size() || maps.size() != images.size())
      throw ValidationError("dataset: faces/maps must align with images");
    for (std::size_t i = 0; i < images.size(); ++i) {
      images[i].validate();
      const auto& f = faces[i].values;
      if (f.width != images[i].width || f.height != images[i].height)
        throw ValidationError("dataset: face mask dimensions differ from image " + std::to_string(i));
      for (MapKind k : kBaseMapKinds) {
        const auto& m = maps[i][k];
        if (m.width() != images[i].width || m.height() != images[i].height)
          throw ValidationError("dataset: " + to_string(k) + " map dimensions differ from image " +
                                std::to_string(i));
      }
    }
  }

  std::vector<ImportanceMap> combined_maps(const std::array<double, 3>& alphas) const {
    std::vector<ImportanceMap> out;
    out.reserve(maps.size());
    for (const auto& m : maps) out.push_back(combine_maps(m, alphas));
    return out;
  }
};

/// Which per-pixel channels sprites carry.
struct ChannelSpec {
  /// Base maps (sal, qua, har) as three channels.
  static ChannelSpec base() { return {false, {}}; }
  /// One channel holding the alpha-blended map.
  static ChannelSpec combined(const std::array<double, 3>& alphas) { return {true, alphas}; }

  bool blended = false;
  std::array<double, 3> alphas{};
};

/// Lazily built sprites for every (image, orientation) of a dataset. Not
/// thread-safe until prepare_all() has been called; afterwards read-only use
/// from many threads is fine.
class SpriteBank {
 public:
  SpriteBank(const Dataset& ds, ChannelSpec spec) : ds_(&ds), spec_(spec), sprites_(ds.size()) {
    if (spec_.blended) {
      combined_.reserve(ds.size());
      for (const auto& m : ds.maps) combined_.push_back(combine_maps(m, spec_.alphas));
    }
  }

  const Sprite& get(int image, int theta_index) {
    auto& slot = sprites_.at(image).at(theta_index);
    if (slot.rows.empty()) slot = build(image, theta_index);
    return slot;
  }
  const Sprite& get(int image, int theta_index) const {
    const auto& slot = sprites_.at(image).at(theta_index);
    if (slot.rows.empty()) throw Error("sprite not prepared");
    return slot;
  }

  void prepare_all() {
    for (int i = 0; i < int(sprites_.size()); ++i)
      for (int a = 0; a < kAngleCount; ++a) get(i, a);
  }
  void prepare(std::span<const int> theta_indices) {
    for (int i = 0; i < int(sprites_.size()); ++i)
      for (int a : theta_indices) get(i, a);
  }

  int channels() const { return spec_.blended ? 1 : 3; }
  const ChannelSpec& spec() const { return spec_; }
  const Dataset& dataset() const { return *ds_; }
  std::size_t size() const { return sprites_.size(); }

 private:
  Sprite build(int image, int theta_index) const {
    SpriteSource src;
    src.image = &ds_->images[image];
    if (spec_.blended) {
      src.channels = {&combined_[image].values};
    } else {
      const auto& m = ds_->maps[image];
      src.channels = {&m.saliency.values, &m.quality.values, &m.harmony.values};
    }
    src.face = &ds_->faces[image].values;
    return make_sprite(src, theta_index);
  }

  const Dataset* ds_;
  ChannelSpec spec_;
  std::vector<ImportanceMap> combined_;
  std::vector<std::array<Sprite, kAngleCount>> sprites_;
};

}  // namespace collage
