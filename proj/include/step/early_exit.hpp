#pragma once

#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "step/arch.hpp"
#include "step/matrix.hpp"
#include "step/params.hpp"
#include "step/patch_grid.hpp"
#include "step/supertoken.hpp"

namespace step {

struct HaltConfig {
  double tau_halt = 0.9;

  void validate() const {
    if (!(tau_halt >= 0.0 && tau_halt <= 1.0))
      throw std::invalid_argument("tau_halt must be in [0,1]");
  }
};

// Where a token exited and the class probabilities captured at that moment.
struct HaltRecord {
  static constexpr int kFinalStage = std::numeric_limits<int>::max();

  int token_id = 0;
  int stage = kFinalStage;  // 0-based auxiliary head index, or kFinalStage
  std::vector<float> class_probs;

  bool is_final() const { return stage == kFinalStage; }
};

// LN -> linear(d -> C) -> softmax; the structure shared by auxiliary heads
// and the final head, each with its own parameters.
inline Matrix head_probs(const Matrix& tokens, const ParamStore& params,
                         const std::string& prefix, MacCounter* counter = nullptr) {
  const Matrix normed =
      layer_norm(tokens, params.at(prefix + ".ln.g"), params.at(prefix + ".ln.b"));
  const Matrix logits =
      linear(normed, params.at(prefix + ".w"), params.at(prefix + ".b"), counter);
  return softmax_rows(logits);
}

inline Matrix aux_head(const Matrix& tokens, const ParamStore& params, int head_id,
                       MacCounter* counter = nullptr) {
  return head_probs(tokens, params, "aux" + std::to_string(head_id), counter);
}

inline float confidence_of_row(const Matrix& probs, int r) {
  const float* row = probs.row(r);
  float mx = row[0];
  for (int c = 1; c < probs.cols; ++c) mx = std::max(mx, row[c]);
  return mx;
}

// Core halting rule: token i halts iff it is alive and c_i >= tau (tokens at
// the boundary halt; the survivor set is the strict c < tau complement).
inline std::vector<char> halt_decisions(const std::vector<double>& confidences,
                                        const std::vector<char>& alive, double tau) {
  if (confidences.size() != alive.size())
    throw std::invalid_argument("halt: confidence/alive length mismatch");
  std::vector<char> halt(alive.size(), 0);
  for (size_t i = 0; i < alive.size(); ++i)
    if (alive[i] && confidences[i] >= tau) halt[i] = 1;
  return halt;
}

struct HaltOutcome {
  std::vector<char> new_alive;
  std::vector<HaltRecord> halted;
};

// probs carries one row per token (N rows); rows of dead tokens are ignored.
// Confidence is the maximum class probability.
inline HaltOutcome halt_step(const Matrix& probs, const std::vector<char>& alive,
                             double tau, int stage = 0) {
  if (probs.rows != static_cast<int>(alive.size()))
    throw std::invalid_argument("halt_step: probs rows != token count");
  std::vector<double> conf(alive.size(), 0.0);
  for (size_t i = 0; i < alive.size(); ++i)
    if (alive[i]) conf[i] = confidence_of_row(probs, static_cast<int>(i));
  const std::vector<char> halt = halt_decisions(conf, alive, tau);

  HaltOutcome out;
  out.new_alive = alive;
  for (size_t i = 0; i < alive.size(); ++i) {
    if (!halt[i]) continue;
    out.new_alive[i] = 0;
    HaltRecord rec;
    rec.token_id = static_cast<int>(i);
    rec.stage = stage;
    rec.class_probs.assign(probs.row(static_cast<int>(i)),
                           probs.row(static_cast<int>(i)) + probs.cols);
    out.halted.push_back(std::move(rec));
  }
  return out;
}

struct Predictions {
  std::vector<int> labels;
  std::vector<int> stages;  // HaltRecord::kFinalStage for tokens that ran through
};

// label_i = argmax of the halt-time probabilities; ties go to the lowest
// class index. Requires exactly one record per token.
inline Predictions assemble_predictions(const std::vector<HaltRecord>& records, int n) {
  std::vector<const HaltRecord*> by_id(n, nullptr);
  for (const auto& rec : records) {
    if (rec.token_id < 0 || rec.token_id >= n)
      throw std::invalid_argument("halt record for unknown token " +
                                  std::to_string(rec.token_id));
    if (by_id[rec.token_id])
      throw std::invalid_argument("duplicate halt record for token " +
                                  std::to_string(rec.token_id));
    by_id[rec.token_id] = &rec;
  }
  Predictions out;
  out.labels.resize(n);
  out.stages.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!by_id[i])
      throw std::invalid_argument("missing halt record for token " + std::to_string(i));
    const auto& probs = by_id[i]->class_probs;
    int best = 0;
    for (size_t c = 1; c < probs.size(); ++c)
      if (probs[c] > probs[best]) best = static_cast<int>(c);
    out.labels[i] = best;
    out.stages[i] = by_id[i]->stage;
  }
  return out;
}

struct PruneStats {
  std::vector<int64_t> cumulative;   // tokens with stage <= head index
  std::vector<int64_t> incremental;  // tokens halted exactly at that head
  std::vector<double> fraction_cumulative;
  std::vector<double> fraction_incremental;
  int64_t total_tokens = 0;
};

inline PruneStats pruned_fraction(const std::vector<HaltRecord>& records,
                                  const StagePlan& plan) {
  PruneStats stats;
  const int heads = plan.stages();
  stats.cumulative.assign(heads, 0);
  stats.incremental.assign(heads, 0);
  stats.total_tokens = static_cast<int64_t>(records.size());
  for (const auto& rec : records) {
    if (rec.is_final()) continue;
    if (rec.stage >= 0 && rec.stage < heads) stats.incremental[rec.stage]++;
  }
  int64_t running = 0;
  for (int h = 0; h < heads; ++h) {
    running += stats.incremental[h];
    stats.cumulative[h] = running;
  }
  stats.fraction_cumulative.resize(heads);
  stats.fraction_incremental.resize(heads);
  for (int h = 0; h < heads; ++h) {
    stats.fraction_cumulative[h] =
        stats.total_tokens ? static_cast<double>(stats.cumulative[h]) / stats.total_tokens : 0.0;
    stats.fraction_incremental[h] =
        stats.total_tokens ? static_cast<double>(stats.incremental[h]) / stats.total_tokens : 0.0;
  }
  return stats;
}

// Scripted per-token confidences, keyed by stage; test-harness control over
// halting decisions without touching the recorded probabilities.
struct ConfidenceOverride {
  std::vector<std::vector<double>> per_stage;

  static ConfidenceOverride load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open confidence override " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    ConfidenceOverride ov;
    for (const auto& [key, value] : j.items()) {
      const size_t stage = std::stoul(key);
      if (ov.per_stage.size() <= stage) ov.per_stage.resize(stage + 1);
      ov.per_stage[stage] = value.get<std::vector<double>>();
    }
    return ov;
  }

  double at(int stage, int token_id) const {
    if (stage < 0 || static_cast<size_t>(stage) >= per_stage.size())
      throw std::out_of_range("confidence override missing stage " + std::to_string(stage));
    const auto& row = per_stage[stage];
    if (token_id < 0 || static_cast<size_t>(token_id) >= row.size())
      throw std::out_of_range("confidence override missing token " + std::to_string(token_id));
    return row[token_id];
  }
};

// Patch-resolution stage map: auxiliary stage index as the gray value,
// final-stage tokens at 255.
inline LabelMap halt_stage_map(const SuperpatchPartition& partition,
                               const std::vector<int>& stages) {
  std::vector<int> gray(stages.size());
  for (size_t i = 0; i < stages.size(); ++i)
    gray[i] = stages[i] == HaltRecord::kFinalStage ? 255 : std::min(stages[i], 254);
  std::vector<int> cells = broadcast_cells_stub(partition, gray);
  LabelMap map(partition.grid_w, partition.grid_h);
  for (int r = 0; r < partition.grid_h; ++r)
    for (int c = 0; c < partition.grid_w; ++c)
      map.at(c, r) = static_cast<uint8_t>(cells[static_cast<size_t>(r) * partition.grid_w + c]);
  return map;
}

}  // namespace step
