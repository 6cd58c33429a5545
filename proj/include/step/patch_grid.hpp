#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "json.hpp"
#include "step/error.hpp"
#include "step/image.hpp"

namespace step {

inline constexpr int kPatchPx = 16;

// Quadtree-aligned square block of base patches; side length in patch units.
struct Superpatch {
  int row = 0;
  int col = 0;
  int size = 1;

  bool operator==(const Superpatch& o) const {
    return row == o.row && col == o.col && size == o.size;
  }
};

// Disjoint cover of the patch grid, row-major by top-left corner.
struct SuperpatchPartition {
  std::vector<Superpatch> patches;
  int grid_h = 0;
  int grid_w = 0;

  size_t token_count() const { return patches.size(); }
};

struct PartitionError : std::runtime_error {
  enum class Fault { misaligned, out_of_bounds, overlap, gap };
  Fault fault;
  PartitionError(Fault f, const std::string& msg) : std::runtime_error(msg), fault(f) {}
};

// Base 16x16-pixel patch grid over a center-cropped image.
struct PatchGrid {
  Image image;  // cropped to multiples of kPatchPx
  int grid_h = 0;
  int grid_w = 0;
};

inline Image center_crop_to_grid(const Image& img) {
  const int cw = img.width - img.width % kPatchPx;
  const int ch = img.height - img.height % kPatchPx;
  if (cw == img.width && ch == img.height) return img;
  const int ox = (img.width - cw) / 2;
  const int oy = (img.height - ch) / 2;
  Image out(cw, ch, img.channels);
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(x + ox, y + oy, c);
  return out;
}

inline LabelMap center_crop_to_grid(const LabelMap& map) {
  const int cw = map.width - map.width % kPatchPx;
  const int ch = map.height - map.height % kPatchPx;
  if (cw == map.width && ch == map.height) return map;
  const int ox = (map.width - cw) / 2;
  const int oy = (map.height - ch) / 2;
  LabelMap out(cw, ch);
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x) out.at(x, y) = map.at(x + ox, y + oy);
  return out;
}

inline PatchGrid make_grid(const Image& img) {
  if (!img.valid()) throw ShapeError("make_grid: invalid image");
  if (img.width < kPatchPx || img.height < kPatchPx)
    throw ShapeError("make_grid: image smaller than 16x16");
  PatchGrid grid;
  grid.image = center_crop_to_grid(img);
  grid.grid_h = grid.image.height / kPatchPx;
  grid.grid_w = grid.image.width / kPatchPx;
  return grid;
}

inline bool valid_superpatch_size(int s) {
  return s == 1 || s == 2 || s == 4 || s == 8 || s == 16;
}

// Checks disjoint cover, bounds, and quadtree alignment; throws with a
// distinct fault per failure mode.
inline void validate_partition(const SuperpatchPartition& p) {
  if (p.grid_h <= 0 || p.grid_w <= 0)
    throw PartitionError(PartitionError::Fault::out_of_bounds, "empty grid");
  std::vector<uint8_t> covered(static_cast<size_t>(p.grid_h) * p.grid_w, 0);
  for (const auto& sp : p.patches) {
    if (!valid_superpatch_size(sp.size))
      throw PartitionError(PartitionError::Fault::misaligned,
                           "superpatch size " + std::to_string(sp.size) +
                               " is not in {1,2,4,8,16}");
    if (sp.row % sp.size != 0 || sp.col % sp.size != 0)
      throw PartitionError(PartitionError::Fault::misaligned,
                           "superpatch at (" + std::to_string(sp.row) + "," +
                               std::to_string(sp.col) + ") size " +
                               std::to_string(sp.size) + " breaks quadtree alignment");
    if (sp.row < 0 || sp.col < 0 || sp.row + sp.size > p.grid_h ||
        sp.col + sp.size > p.grid_w)
      throw PartitionError(PartitionError::Fault::out_of_bounds,
                           "superpatch exceeds the grid");
    for (int r = sp.row; r < sp.row + sp.size; ++r)
      for (int c = sp.col; c < sp.col + sp.size; ++c) {
        uint8_t& cell = covered[static_cast<size_t>(r) * p.grid_w + c];
        if (cell)
          throw PartitionError(PartitionError::Fault::overlap,
                               "cell (" + std::to_string(r) + "," + std::to_string(c) +
                                   ") covered twice");
        cell = 1;
      }
  }
  for (size_t i = 0; i < covered.size(); ++i)
    if (!covered[i])
      throw PartitionError(PartitionError::Fault::gap,
                           "cell " + std::to_string(i) + " not covered");
}

inline void sort_row_major(SuperpatchPartition& p) {
  std::sort(p.patches.begin(), p.patches.end(), [](const Superpatch& a, const Superpatch& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
}

// Contiguous (size*16)^2 pixel block under a superpatch.
inline Image extract_pixels(const Image& img, const Superpatch& sp) {
  const int px = sp.col * kPatchPx;
  const int py = sp.row * kPatchPx;
  const int side = sp.size * kPatchPx;
  if (px < 0 || py < 0 || px + side > img.width || py + side > img.height)
    throw PartitionError(PartitionError::Fault::out_of_bounds,
                         "superpatch pixel block out of image bounds");
  Image out(side, side, img.channels);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(px + x, py + y, c);
  return out;
}

inline nlohmann::json partition_to_json(const SuperpatchPartition& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& sp : p.patches)
    arr.push_back({{"row", sp.row}, {"col", sp.col}, {"size", sp.size}});
  return arr;
}

}  // namespace step
