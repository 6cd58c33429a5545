#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "step/image.hpp"
#include "step/rng.hpp"

namespace step {

enum class ShapeKind { rectangle, disk };

// Synthetic labeled-scene description. Everything downstream (shape list,
// pixels, noise) is a pure function of these fields.
struct SceneSpec {
  int size = 512;
  int num_classes = 8;
  int num_shapes = 4;
  std::vector<ShapeKind> shape_kinds = {ShapeKind::rectangle, ShapeKind::disk};
  double noise_sigma = 0.0;
  uint64_t seed = 0;
};

struct SceneShape {
  ShapeKind kind = ShapeKind::rectangle;
  int cls = 1;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // rectangle, half-open
  int cx = 0, cy = 0, radius = 0;      // disk
};

inline void validate_spec(const SceneSpec& spec) {
  if (spec.size < 16) throw std::invalid_argument("scene size must be >= 16");
  if (spec.num_classes < 2 || spec.num_classes > 256)
    throw std::invalid_argument("num_classes must be in [2, 256]");
  if (spec.num_shapes < 0) throw std::invalid_argument("num_shapes must be >= 0");
  if (spec.noise_sigma < 0) throw std::invalid_argument("noise_sigma must be >= 0");
  if (spec.num_shapes > 0 && spec.shape_kinds.empty())
    throw std::invalid_argument("shape_kinds must be non-empty when num_shapes > 0");
}

inline bool shape_contains(const SceneShape& s, int x, int y) {
  if (s.kind == ShapeKind::rectangle)
    return x >= s.x0 && x < s.x1 && y >= s.y0 && y < s.y1;
  const long dx = x - s.cx;
  const long dy = y - s.cy;
  return dx * dx + dy * dy <= static_cast<long>(s.radius) * s.radius;
}

// Shape list derived from the spec; exposed so callers can re-rasterize
// independently of the painter below.
inline std::vector<SceneShape> scene_shapes(const SceneSpec& spec) {
  validate_spec(spec);
  Rng rng(spec.seed);
  std::vector<SceneShape> shapes;
  shapes.reserve(spec.num_shapes);
  const int size = spec.size;
  for (int i = 0; i < spec.num_shapes; ++i) {
    SceneShape s;
    s.kind = spec.shape_kinds[rng.next_below(spec.shape_kinds.size())];
    s.cls = 1 + static_cast<int>(rng.next_below(spec.num_classes - 1));
    if (s.kind == ShapeKind::rectangle) {
      const int w = size / 8 + static_cast<int>(rng.next_below(size * 3 / 8 + 1));
      const int h = size / 8 + static_cast<int>(rng.next_below(size * 3 / 8 + 1));
      s.x0 = static_cast<int>(rng.next_below(size - w + 1));
      s.y0 = static_cast<int>(rng.next_below(size - h + 1));
      s.x1 = s.x0 + w;
      s.y1 = s.y0 + h;
    } else {
      s.radius = size / 16 + static_cast<int>(rng.next_below(size / 4 - size / 16 + 1));
      s.cx = static_cast<int>(rng.next_below(size));
      s.cy = static_cast<int>(rng.next_below(size));
    }
    shapes.push_back(s);
  }
  return shapes;
}

// Paints shapes in draw order over a class-0 background, colors pixels with
// the fixed palette, then adds clamped Gaussian noise. The LabelMap is the
// noise-free ground truth.
inline std::pair<Image, LabelMap> generate_scene(const SceneSpec& spec) {
  const auto shapes = scene_shapes(spec);
  const int size = spec.size;

  LabelMap gt(size, size, 0);
  for (const auto& s : shapes) {
    int bx0 = 0, by0 = 0, bx1 = size, by1 = size;
    if (s.kind == ShapeKind::rectangle) {
      bx0 = std::max(0, s.x0);
      by0 = std::max(0, s.y0);
      bx1 = std::min(size, s.x1);
      by1 = std::min(size, s.y1);
    } else {
      bx0 = std::max(0, s.cx - s.radius);
      by0 = std::max(0, s.cy - s.radius);
      bx1 = std::min(size, s.cx + s.radius + 1);
      by1 = std::min(size, s.cy + s.radius + 1);
    }
    for (int y = by0; y < by1; ++y)
      for (int x = bx0; x < bx1; ++x)
        if (shape_contains(s, x, y)) gt.at(x, y) = static_cast<uint8_t>(s.cls);
  }

  Image img(size, size, 3);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const Rgb c = class_color(gt.at(x, y));
      img.at(x, y, 0) = c.r;
      img.at(x, y, 1) = c.g;
      img.at(x, y, 2) = c.b;
    }

  if (spec.noise_sigma > 0) {
    // Separate stream from the shape parameters so geometry stays put when
    // only the noise level changes.
    Rng rng(spec.seed ^ 0x517CC1B727220A95ull);
    GaussianSampler gauss;
    for (auto& v : img.data) {
      const double noisy = static_cast<double>(v) + spec.noise_sigma * gauss.next(rng);
      v = static_cast<uint8_t>(std::clamp<long>(std::lround(noisy), 0, 255));
    }
  }
  return {std::move(img), std::move(gt)};
}

}  // namespace step
