#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stefan/core/config.hpp"
#include "stefan/nn/mlp.hpp"
#include "stefan/sampling/sampling.hpp"
#include "stefan/train/loss.hpp"
#include "stefan/train/optim.hpp"

namespace stefan::train {

enum class Regime { kUniform, kStatic, kDynamic, kPointwise, kSeqUniform, kSeqStatic, kSeqDynamic };

/// "uniform", "static", "dynamic", "pointwise", "seq-uniform", ...
std::string to_string(Regime r);
/// Throws ConfigError on an unknown name.
Regime parse_regime(const std::string& name);
bool is_curriculum(Regime r) noexcept;

struct TrainOptions {
  Regime regime = Regime::kUniform;
  long iterations = 100000;  ///< ignored by curriculum regimes
  std::uint64_t seed = 0;
  std::vector<int> layer_sizes = nn::default_layer_sizes();

  std::size_t n0 = 1024;
  std::size_t nb = 256;
  std::size_t nr = 10000;

  LrSchedule lr{1e-3, 0.9, 8000.0};
  double static_w0 = 100.0;

  double dynamic_alpha = 0.6;
  long dynamic_every = 1000;
  DynamicVariant dynamic_variant = DynamicVariant::kPrinted;

  double weight_lr = 1e-3;  ///< ascent rate of pointwise weights
  MaskParams init_mask{1000.0, 0.1, 2.0};
  MaskParams res_mask{1.0, 1.0, 5.0};

  double dt_seq = 0.05;
  std::size_t seq_base_nr = 1000;
  std::size_t seq_incr = 500;
  double budget = 1e8;
  /// Advance a curriculum stage early once the weighted loss drops below
  /// this value; 0 disables.
  double stage_loss_threshold = 0.0;

  long history_every = 500;

  /// Defaults for a regime: pointwise uses kappa = 5000.
  static TrainOptions for_regime(Regime r);
  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

struct HistoryRow {
  long iteration = 0;
  double l_r = 0.0, l_0 = 0.0, l_b = 0.0;
  /// Scalar weights; in the pointwise regime the mean mask value of the
  /// initial (omega_0) and residual (omega_r) families, omega_b = 1.
  double omega_0 = 1.0, omega_b = 1.0, omega_r = 1.0;
  double lr = 0.0;
  double rel_l2 = 0.0;  ///< NaN when no evaluator was supplied
};

struct StageRecord {
  int k = 0;
  double t_end = 0.0;
  long iterations_end = 0;  ///< global iteration count at stage completion
  double rel_l2 = 0.0;      ///< over [t0, t_end]; NaN without an evaluator
};

struct TrainResult {
  nn::Mlp net;
  std::vector<HistoryRow> history;
  std::vector<StageRecord> stages;
  ScalarWeights weights;
  std::optional<PointWeights> point_weights;
  long iterations = 0;
};

/// Relative L2 error of a network over [t0, t_end] x [x0, x1].
using Evaluator = std::function<double(const nn::Mlp& net, double t_end)>;

/// Full-batch Adam training. Deterministic per (cfg, options). Throws
/// NanLoss with the iteration index when the weighted loss stops being
/// finite.
TrainResult train(const StefanConfig& cfg, const TrainOptions& opts,
                  const Evaluator& evaluator = {});

void write_history(const std::filesystem::path& path, const std::vector<HistoryRow>& rows);
std::vector<HistoryRow> read_history(const std::filesystem::path& path);
void write_stages(const std::filesystem::path& path, const std::vector<StageRecord>& rows);

}  // namespace stefan::train
