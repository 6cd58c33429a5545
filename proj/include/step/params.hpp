#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "step/error.hpp"
#include "step/matrix.hpp"
#include "step/rng.hpp"

namespace step {

struct TensorShape {
  std::string name;
  int rows = 0;
  int cols = 0;
};

// Named parameter tensors. Insertion order is the manifest order for the
// dump/load format below.
class ParamStore {
 public:
  uint64_t init_seed = 0;

  void put(const std::string& name, Matrix m) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) {
      order_.push_back(name);
      tensors_.emplace(name, std::move(m));
    } else {
      it->second = std::move(m);
    }
  }

  const Matrix& at(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw ShapeError("missing parameter tensor: " + name);
    return it->second;
  }

  bool has(const std::string& name) const { return tensors_.count(name) != 0; }
  const std::vector<std::string>& order() const { return order_; }

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Matrix> tensors_;
};

// Truncated-normal fill (sigma 0.02, cutoff +-2 sigma). Each tensor draws
// from its own stream keyed by (seed, name), so a store is reproducible from
// (shapes, seed) regardless of what else was initialized.
inline ParamStore init_params(const std::vector<TensorShape>& shapes, uint64_t seed) {
  ParamStore store;
  store.init_seed = seed;
  for (const auto& s : shapes) {
    Rng rng(mix64(seed) ^ fnv1a64(s.name));
    GaussianSampler gauss;
    Matrix m(s.rows, s.cols);
    for (auto& v : m.data)
      v = static_cast<float>(gauss.next_truncated(rng, 0.02, 2.0));
    store.put(s.name, std::move(m));
  }
  return store;
}

// Manifest (names, shapes, seed) as JSON plus a raw blob of little-endian
// float32 values in manifest order.
inline void save_params(const ParamStore& store, const std::string& manifest_path,
                        const std::string& blob_path) {
  nlohmann::json manifest;
  manifest["seed"] = store.init_seed;
  manifest["tensors"] = nlohmann::json::array();
  for (const auto& name : store.order()) {
    const Matrix& m = store.at(name);
    manifest["tensors"].push_back({{"name", name}, {"rows", m.rows}, {"cols", m.cols}});
  }
  std::ofstream mf(manifest_path);
  if (!mf) throw IoError("cannot open " + manifest_path + " for writing");
  mf << manifest.dump(2) << "\n";

  std::ofstream bf(blob_path, std::ios::binary);
  if (!bf) throw IoError("cannot open " + blob_path + " for writing");
  for (const auto& name : store.order()) {
    for (float v : store.at(name).data) {
      uint32_t bits;
      static_assert(sizeof(bits) == sizeof(v));
      __builtin_memcpy(&bits, &v, sizeof(bits));
      const char bytes[4] = {static_cast<char>(bits & 0xFF),
                             static_cast<char>((bits >> 8) & 0xFF),
                             static_cast<char>((bits >> 16) & 0xFF),
                             static_cast<char>((bits >> 24) & 0xFF)};
      bf.write(bytes, 4);
    }
  }
  if (!bf) throw IoError("failed writing " + blob_path);
}

inline ParamStore load_params(const std::string& manifest_path,
                              const std::string& blob_path) {
  std::ifstream mf(manifest_path);
  if (!mf) throw IoError("cannot open " + manifest_path);
  nlohmann::json manifest = nlohmann::json::parse(mf);

  std::ifstream bf(blob_path, std::ios::binary);
  if (!bf) throw IoError("cannot open " + blob_path);

  ParamStore store;
  store.init_seed = manifest.at("seed").get<uint64_t>();
  for (const auto& t : manifest.at("tensors")) {
    Matrix m(t.at("rows").get<int>(), t.at("cols").get<int>());
    for (auto& v : m.data) {
      unsigned char bytes[4];
      bf.read(reinterpret_cast<char*>(bytes), 4);
      if (bf.gcount() != 4) throw IoError("parameter blob truncated: " + blob_path);
      const uint32_t bits = static_cast<uint32_t>(bytes[0]) |
                            (static_cast<uint32_t>(bytes[1]) << 8) |
                            (static_cast<uint32_t>(bytes[2]) << 16) |
                            (static_cast<uint32_t>(bytes[3]) << 24);
      __builtin_memcpy(&v, &bits, sizeof(v));
    }
    store.put(t.at("name").get<std::string>(), std::move(m));
  }
  return store;
}

}  // namespace step
