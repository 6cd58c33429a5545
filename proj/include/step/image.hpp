#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "step/error.hpp"
#include "step/rng.hpp"

namespace step {

struct Rgb {
  uint8_t r = 0, g = 0, b = 0;
};

// Fixed 256-entry class palette: class index -> RGB via bit mixing.
// Stable across runs and platforms; class 0 is the scene background.
inline Rgb class_color(int cls) {
  const uint64_t h = mix64(static_cast<uint64_t>(cls) + 1);
  return Rgb{static_cast<uint8_t>(h & 0xFF), static_cast<uint8_t>((h >> 8) & 0xFF),
             static_cast<uint8_t>((h >> 16) & 0xFF)};
}

// 8-bit raster, row-major, channel-interleaved. channels is 1 (gray) or 3 (RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> data;

  Image() = default;
  Image(int w, int h, int c, uint8_t fill = 0)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, fill) {}

  uint8_t& at(int x, int y, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  uint8_t at(int x, int y, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }

  bool valid() const {
    return (channels == 1 || channels == 3) && width > 0 && height > 0 &&
           data.size() == static_cast<size_t>(width) * height * channels;
  }
};

// Per-pixel class indices; stored on disk as a P5 graymap, so classes < 256.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> labels;

  LabelMap() = default;
  LabelMap(int w, int h, uint8_t fill = 0)
      : width(w), height(h), labels(static_cast<size_t>(w) * h, fill) {}

  uint8_t& at(int x, int y) { return labels[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }
};

struct PnmError : std::runtime_error {
  enum class Kind { malformed_header, unsupported_maxval, truncated };
  Kind kind;
  PnmError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

namespace detail {

// Reads the next unsigned decimal token, skipping whitespace and '#' comments.
inline long pnm_uint(std::istream& in) {
  int ch = in.get();
  while (ch != EOF && (std::isspace(ch) || ch == '#')) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    }
    if (ch != EOF) ch = in.get();
  }
  if (ch == EOF || !std::isdigit(ch))
    throw PnmError(PnmError::Kind::malformed_header, "expected integer in pnm header");
  long v = 0;
  while (ch != EOF && std::isdigit(ch)) {
    v = v * 10 + (ch - '0');
    if (v > (1L << 30))
      throw PnmError(PnmError::Kind::malformed_header, "pnm header value out of range");
    ch = in.get();
  }
  if (ch != EOF) in.unget();
  return v;
}

}  // namespace detail

// Binary PPM (P6) or PGM (P5), maxval 255. Anything else is rejected.
inline Image read_image(std::istream& in) {
  const int m0 = in.get();
  const int m1 = in.get();
  int channels = 0;
  if (m0 == 'P' && m1 == '6') {
    channels = 3;
  } else if (m0 == 'P' && m1 == '5') {
    channels = 1;
  } else {
    throw PnmError(PnmError::Kind::malformed_header, "not a binary P5/P6 pnm file");
  }
  const long w = detail::pnm_uint(in);
  const long h = detail::pnm_uint(in);
  const long maxval = detail::pnm_uint(in);
  if (w <= 0 || h <= 0)
    throw PnmError(PnmError::Kind::malformed_header, "non-positive pnm dimensions");
  if (maxval != 255)
    throw PnmError(PnmError::Kind::unsupported_maxval,
                   "unsupported maxval " + std::to_string(maxval) + " (only 255)");
  const int sep = in.get();
  if (sep == EOF || !std::isspace(sep))
    throw PnmError(PnmError::Kind::malformed_header, "missing separator after maxval");

  Image img(static_cast<int>(w), static_cast<int>(h), channels);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (static_cast<size_t>(in.gcount()) != img.data.size())
    throw PnmError(PnmError::Kind::truncated, "pnm payload shorter than header promises");
  return img;
}

inline Image read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_image(in);
}

inline void write_image(const Image& img, std::ostream& out) {
  if (!img.valid()) throw ShapeError("write_image: invalid image");
  out << (img.channels == 3 ? "P6" : "P5") << "\n"
      << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw IoError("write_image: stream failure");
}

inline void write_image(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_image(img, out);
}

// Label maps travel as P5 graymaps with the class index as the gray value.
inline void write_label_map(const LabelMap& map, const std::string& path) {
  Image img(map.width, map.height, 1);
  img.data = map.labels;
  write_image(img, path);
}

inline LabelMap read_label_map(const std::string& path) {
  const Image img = read_image(path);
  if (img.channels != 1) throw ShapeError("label map must be a P5 graymap: " + path);
  LabelMap map(img.width, img.height);
  map.labels = img.data;
  return map;
}

// Grayscale -> RGB by channel replication; RGB passes through.
inline Image to_rgb(const Image& img) {
  if (img.channels == 3) return img;
  if (img.channels != 1) throw ShapeError("to_rgb: expected 1 or 3 channels");
  Image out(img.width, img.height, 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const uint8_t v = img.at(x, y);
      out.at(x, y, 0) = v;
      out.at(x, y, 1) = v;
      out.at(x, y, 2) = v;
    }
  return out;
}

}  // namespace step
