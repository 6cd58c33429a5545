#pragma once

#include <cmath>
#include <vector>

#include "step/matrix.hpp"
#include "step/params.hpp"
#include "step/patch_grid.hpp"

namespace step {

// Bilinear resize of a square block to target x target, align-corners-false
// (sample centers at (i + 0.5) * scale - 0.5). Channels are independent;
// outputs are rounded to nearest-even and clamped to [0,255].
inline Image resize_bilinear(const Image& block, int target = kPatchPx) {
  if (block.width != block.height) throw ShapeError("resize_bilinear: non-square block");
  const int side = block.width;
  if (side != 16 && side != 32 && side != 64 && side != 128 && side != 256)
    throw ShapeError("resize_bilinear: side must be 16/32/64/128/256");
  if (side == target) return block;

  const double scale = static_cast<double>(side) / target;
  Image out(target, target, block.channels);
  for (int oy = 0; oy < target; ++oy) {
    const double sy = (oy + 0.5) * scale - 0.5;
    int y0 = static_cast<int>(std::floor(sy));
    const double fy = sy - y0;
    int y1 = y0 + 1;
    y0 = std::clamp(y0, 0, side - 1);
    y1 = std::clamp(y1, 0, side - 1);
    for (int ox = 0; ox < target; ++ox) {
      const double sx = (ox + 0.5) * scale - 0.5;
      int x0 = static_cast<int>(std::floor(sx));
      const double fx = sx - x0;
      int x1 = x0 + 1;
      x0 = std::clamp(x0, 0, side - 1);
      x1 = std::clamp(x1, 0, side - 1);
      for (int c = 0; c < block.channels; ++c) {
        const double top = (1.0 - fx) * block.at(x0, y0, c) + fx * block.at(x1, y0, c);
        const double bot = (1.0 - fx) * block.at(x0, y1, c) + fx * block.at(x1, y1, c);
        const double v = (1.0 - fy) * top + fy * bot;
        out.at(ox, oy, c) =
            static_cast<uint8_t>(std::clamp(std::nearbyint(v), 0.0, 255.0));
      }
    }
  }
  return out;
}

// Learned per-grid-cell embedding vectors.
struct PosEmbedTable {
  int grid_h = 0;
  int grid_w = 0;
  Matrix table;  // (grid_h * grid_w) x d

  static PosEmbedTable from_params(const ParamStore& params, const std::string& name,
                                   int grid_h, int grid_w) {
    PosEmbedTable t;
    t.grid_h = grid_h;
    t.grid_w = grid_w;
    t.table = params.at(name);
    if (t.table.rows != grid_h * grid_w)
      throw ShapeError("positional table rows != grid cells");
    return t;
  }

  const float* cell(int r, int c) const { return table.row(r * grid_w + c); }
};

// Supertoken embeddings plus their superpatch origins and alive mask.
struct TokenSet {
  Matrix embeddings;  // N x d
  std::vector<Superpatch> origins;
  std::vector<char> alive;

  int count() const { return embeddings.rows; }
  int dim() const { return embeddings.cols; }
};

// token_i = W * flatten(resize(pixels_i))/255 + b + mean of positional
// vectors over the covered grid cells (row-major cell order, so the
// accumulation order is fixed). Token order equals partition order.
inline TokenSet embed(const SuperpatchPartition& partition, const Image& img,
                      const ParamStore& params, const PosEmbedTable& pos,
                      MacCounter* counter = nullptr) {
  if (img.channels != 3) throw ShapeError("embed: expects a 3-channel image");
  const Matrix& w = params.at("embed.w");
  const Matrix& b = params.at("embed.b");
  const int in_dim = kPatchPx * kPatchPx * 3;
  if (w.rows != in_dim) throw ShapeError("embed.w must have 768 input rows");
  if (pos.table.cols != w.cols) throw ShapeError("positional dim != embed dim");

  const int n = static_cast<int>(partition.patches.size());
  Matrix flat(n, in_dim);
  for (int i = 0; i < n; ++i) {
    const Image patch = resize_bilinear(extract_pixels(img, partition.patches[i]));
    float* dst = flat.row(i);
    for (int j = 0; j < in_dim; ++j) dst[j] = static_cast<float>(patch.data[j]) / 255.0f;
  }

  TokenSet tokens;
  tokens.embeddings = linear(flat, w, b, counter);
  tokens.origins = partition.patches;
  tokens.alive.assign(n, 1);

  for (int i = 0; i < n; ++i) {
    const Superpatch& sp = partition.patches[i];
    std::vector<float> mean(w.cols, 0.0f);
    for (int r = sp.row; r < sp.row + sp.size; ++r)
      for (int c = sp.col; c < sp.col + sp.size; ++c) {
        const float* cell = pos.cell(r, c);
        for (int d = 0; d < w.cols; ++d) mean[d] += cell[d];
      }
    const float inv = 1.0f / static_cast<float>(sp.size * sp.size);
    float* dst = tokens.embeddings.row(i);
    for (int d = 0; d < w.cols; ++d) dst[d] += mean[d] * inv;
  }
  return tokens;
}

// One value per token broadcast to the grid cells its superpatch covers.
inline std::vector<int> broadcast_to_cells(const SuperpatchPartition& p,
                                           const std::vector<int>& values) {
  if (values.size() != p.patches.size())
    throw std::invalid_argument("broadcast: need exactly one value per token");
  std::vector<int> cells(static_cast<size_t>(p.grid_h) * p.grid_w, 0);
  for (size_t i = 0; i < p.patches.size(); ++i) {
    const Superpatch& sp = p.patches[i];
    for (int r = sp.row; r < sp.row + sp.size; ++r)
      for (int c = sp.col; c < sp.col + sp.size; ++c)
        cells[static_cast<size_t>(r) * p.grid_w + c] = values[i];
  }
  return cells;
}

struct BroadcastLabels {
  LabelMap patch;  // grid resolution
  LabelMap pixel;  // each cell expanded to its 16x16 block
};

inline BroadcastLabels broadcast_labels(const SuperpatchPartition& p,
                                        const std::vector<int>& labels) {
  const std::vector<int> cells = broadcast_to_cells(p, labels);
  BroadcastLabels out;
  out.patch = LabelMap(p.grid_w, p.grid_h);
  for (int r = 0; r < p.grid_h; ++r)
    for (int c = 0; c < p.grid_w; ++c) {
      const int v = cells[static_cast<size_t>(r) * p.grid_w + c];
      if (v < 0 || v > 255) throw std::invalid_argument("label out of 8-bit range");
      out.patch.at(c, r) = static_cast<uint8_t>(v);
    }
  out.pixel = LabelMap(p.grid_w * kPatchPx, p.grid_h * kPatchPx);
  for (int y = 0; y < out.pixel.height; ++y)
    for (int x = 0; x < out.pixel.width; ++x)
      out.pixel.at(x, y) = out.patch.at(x / kPatchPx, y / kPatchPx);
  return out;
}

}  // namespace step
