#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "step/patch_grid.hpp"

namespace step {

// Per-window-size merging thresholds, indexed by side length in patch units.
struct MergeThresholds {
  double tau_2 = 0.6;
  double tau_4 = 0.8;
  double tau_8 = 0.9;
  double tau_16 = 0.9;

  // Named configurations for 2x2 / 4x4 / 8x8 / 16x16 windows.
  static MergeThresholds t4999() { return {0.4, 0.9, 0.9, 0.9}; }
  static MergeThresholds t6899() { return {0.6, 0.8, 0.9, 0.9}; }

  double for_size(int s) const {
    switch (s) {
      case 2: return tau_2;
      case 4: return tau_4;
      case 8: return tau_8;
      case 16: return tau_16;
      default: throw ShapeError("no threshold for window size " + std::to_string(s));
    }
  }

  void validate() const {
    for (double t : {tau_2, tau_4, tau_8, tau_16})
      if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("merge thresholds must be in [0,1]");
  }
};

struct ScoreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// exp(-k * sbar): sbar is the per-channel pixel standard deviation inside the
// window, normalized by 127.5 and averaged over channels. 1.0 exactly iff the
// window is constant per channel.
struct HomogeneityScorer {
  double k = 8.0;
};

// Externally supplied scores keyed by (size,row,col); stands in for a learned
// policy network. Missing keys are an error, never a default.
class FileScorer {
 public:
  FileScorer() = default;
  explicit FileScorer(std::map<std::array<int, 3>, double> scores)
      : scores_(std::move(scores)) {
    for (const auto& [key, v] : scores_)
      if (!(v >= 0.0 && v <= 1.0))
        throw ScoreError("score out of [0,1] for key " + key_string(key));
  }

  static FileScorer load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open score file " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    std::map<std::array<int, 3>, double> scores;
    for (const auto& [key, value] : j.items()) {
      std::array<int, 3> k{};
      if (std::sscanf(key.c_str(), "%d,%d,%d", &k[0], &k[1], &k[2]) != 3)
        throw ScoreError("bad score key '" + key + "', expected \"size,row,col\"");
      scores[k] = value.get<double>();
    }
    return FileScorer(std::move(scores));
  }

  double at(int size, int row, int col) const {
    const std::array<int, 3> key{size, row, col};
    auto it = scores_.find(key);
    if (it == scores_.end()) throw ScoreError("no score for key " + key_string(key));
    return it->second;
  }

 private:
  static std::string key_string(const std::array<int, 3>& k) {
    return std::to_string(k[0]) + "," + std::to_string(k[1]) + "," + std::to_string(k[2]);
  }
  std::map<std::array<int, 3>, double> scores_;
};

using ScoreSource = std::variant<HomogeneityScorer, FileScorer>;

struct CtsTopK {
  int k = 103;
};

struct MergeConfig {
  std::variant<MergeThresholds, CtsTopK> mode = MergeThresholds::t6899();
  ScoreSource source = HomogeneityScorer{};
};

inline double score_window(const Image& img, const Superpatch& window,
                           const ScoreSource& source) {
  if (const auto* file = std::get_if<FileScorer>(&source))
    return file->at(window.size, window.row, window.col);

  const auto& h = std::get<HomogeneityScorer>(source);
  if (!(h.k > 0.0)) throw std::invalid_argument("homogeneity k must be > 0");
  const int px = window.col * kPatchPx;
  const int py = window.row * kPatchPx;
  const int side = window.size * kPatchPx;
  if (px < 0 || py < 0 || px + side > img.width || py + side > img.height)
    throw PartitionError(PartitionError::Fault::out_of_bounds,
                         "score window outside the image");
  const double n = static_cast<double>(side) * side;
  double sbar = 0.0;
  for (int c = 0; c < img.channels; ++c) {
    double mean = 0.0;
    for (int y = py; y < py + side; ++y)
      for (int x = px; x < px + side; ++x) mean += img.at(x, y, c);
    mean /= n;
    double var = 0.0;
    for (int y = py; y < py + side; ++y)
      for (int x = px; x < px + side; ++x) {
        const double d = img.at(x, y, c) - mean;
        var += d * d;
      }
    sbar += std::sqrt(var / n) / 127.5;
  }
  sbar /= img.channels;
  return std::exp(-h.k * sbar);
}

// Coarse-to-fine threshold merging: evaluates aligned, disjoint windows at
// side 16 first, then 8, 4, 2, skipping windows that touch absorbed cells.
// A window merges iff score >= its size threshold; leftovers stay 1x1.
inline SuperpatchPartition merge_dcts(const PatchGrid& grid, const MergeThresholds& thresholds,
                                      const ScoreSource& source) {
  thresholds.validate();
  SuperpatchPartition out;
  out.grid_h = grid.grid_h;
  out.grid_w = grid.grid_w;
  std::vector<uint8_t> absorbed(static_cast<size_t>(grid.grid_h) * grid.grid_w, 0);
  auto cell = [&](int r, int c) -> uint8_t& {
    return absorbed[static_cast<size_t>(r) * grid.grid_w + c];
  };

  for (int size : {16, 8, 4, 2}) {
    const double tau = thresholds.for_size(size);
    for (int row = 0; row + size <= grid.grid_h; row += size) {
      for (int col = 0; col + size <= grid.grid_w; col += size) {
        bool blocked = false;
        for (int r = row; r < row + size && !blocked; ++r)
          for (int c = col; c < col + size && !blocked; ++c)
            if (cell(r, c)) blocked = true;
        if (blocked) continue;
        const Superpatch window{row, col, size};
        if (score_window(grid.image, window, source) >= tau) {
          out.patches.push_back(window);
          for (int r = row; r < row + size; ++r)
            for (int c = col; c < col + size; ++c) cell(r, c) = 1;
        }
      }
    }
  }
  for (int r = 0; r < grid.grid_h; ++r)
    for (int c = 0; c < grid.grid_w; ++c)
      if (!cell(r, c)) out.patches.push_back(Superpatch{r, c, 1});

  sort_row_major(out);
  validate_partition(out);
  return out;
}

// Fixed-budget baseline: merges exactly the K highest-scoring aligned 2x2
// windows, ties broken by row-major window order.
inline SuperpatchPartition merge_cts_topk(const PatchGrid& grid, int k,
                                          const ScoreSource& source) {
  std::vector<Superpatch> windows;
  for (int row = 0; row + 2 <= grid.grid_h; row += 2)
    for (int col = 0; col + 2 <= grid.grid_w; col += 2)
      windows.push_back(Superpatch{row, col, 2});
  if (k < 0 || static_cast<size_t>(k) > windows.size())
    throw std::invalid_argument("cts_topk: K=" + std::to_string(k) + " exceeds " +
                                std::to_string(windows.size()) + " aligned 2x2 windows");

  std::vector<double> scores(windows.size());
  for (size_t i = 0; i < windows.size(); ++i)
    scores[i] = score_window(grid.image, windows[i], source);

  std::vector<size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  SuperpatchPartition out;
  out.grid_h = grid.grid_h;
  out.grid_w = grid.grid_w;
  std::vector<uint8_t> merged(static_cast<size_t>(grid.grid_h) * grid.grid_w, 0);
  for (int i = 0; i < k; ++i) {
    const Superpatch& w = windows[order[i]];
    out.patches.push_back(w);
    for (int r = w.row; r < w.row + 2; ++r)
      for (int c = w.col; c < w.col + 2; ++c)
        merged[static_cast<size_t>(r) * grid.grid_w + c] = 1;
  }
  for (int r = 0; r < grid.grid_h; ++r)
    for (int c = 0; c < grid.grid_w; ++c)
      if (!merged[static_cast<size_t>(r) * grid.grid_w + c])
        out.patches.push_back(Superpatch{r, c, 1});

  sort_row_major(out);
  validate_partition(out);
  return out;
}

inline SuperpatchPartition run_merge(const PatchGrid& grid, const MergeConfig& config) {
  if (const auto* topk = std::get_if<CtsTopK>(&config.mode))
    return merge_cts_topk(grid, topk->k, config.source);
  return merge_dcts(grid, std::get<MergeThresholds>(config.mode), config.source);
}

// Base patch count divided by supertoken count.
inline double token_reduction_factor(const SuperpatchPartition& p) {
  if (p.patches.empty()) throw std::invalid_argument("empty partition");
  return static_cast<double>(p.grid_h) * p.grid_w / static_cast<double>(p.patches.size());
}

}  // namespace step
