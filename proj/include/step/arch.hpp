#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace step {

// Encoder geometry. Presets follow the standard ViT-Base / ViT-Large layouts.
struct ArchConfig {
  int layers = 12;
  int dim = 768;
  int heads = 12;
  int mlp_ratio = 4;
  int num_classes = 8;

  static ArchConfig vit_base(int num_classes) { return {12, 768, 12, 4, num_classes}; }
  static ArchConfig vit_large(int num_classes) { return {24, 1024, 16, 4, num_classes}; }

  int head_dim() const { return dim / heads; }

  void validate() const {
    if (layers < 1) throw std::invalid_argument("arch: layers must be >= 1");
    if (heads < 1 || dim < heads || dim % heads != 0)
      throw std::invalid_argument("arch: dim must be a positive multiple of heads");
    if (mlp_ratio != 4) throw std::invalid_argument("arch: mlp_ratio is fixed at 4");
    if (num_classes < 2 || num_classes > 256)
      throw std::invalid_argument("arch: num_classes must be in [2, 256]");
  }
};

// Auxiliary-head positions, 1-based; a head runs after the listed layer.
// The final head is separate and always present.
struct StagePlan {
  std::vector<int> head_positions;

  int stages() const { return static_cast<int>(head_positions.size()); }
  bool empty() const { return head_positions.empty(); }

  void validate(int layers) const {
    int prev = 0;
    for (int p : head_positions) {
      if (p <= prev)
        throw std::invalid_argument("plan: head positions must be strictly increasing");
      if (p >= layers)
        throw std::invalid_argument("plan: head position " + std::to_string(p) +
                                    " must be < layers (" + std::to_string(layers) + ")");
      prev = p;
    }
  }

  // "8,16" -> {8, 16}; empty string -> no auxiliary heads.
  static StagePlan parse(const std::string& text) {
    StagePlan plan;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (part.empty()) continue;
      size_t pos = 0;
      const int v = std::stoi(part, &pos);
      if (pos != part.size()) throw std::invalid_argument("plan: bad position '" + part + "'");
      plan.head_positions.push_back(v);
    }
    return plan;
  }

  std::string to_string() const {
    std::string s;
    for (size_t i = 0; i < head_positions.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(head_positions[i]);
    }
    return s;
  }
};

// masked keeps halted tokens in place but excluded from attention (the
// reference path); compact physically gathers survivors (the fast path).
enum class ExecMode { masked, compact };

}  // namespace step
