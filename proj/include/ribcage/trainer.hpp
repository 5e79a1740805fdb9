#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ribcage/adam.hpp"
#include "ribcage/defect.hpp"
#include "ribcage/losses.hpp"
#include "ribcage/metrics.hpp"
#include "ribcage/micronet.hpp"

namespace ribcage {

struct TrainConfig {
  NetConfig net;
  OptConfig opt;
  int steps = 500;
  /// Objective that is differentiated. The log always carries every component.
  LossKind loss = LossKind::Rib;
  LossRegion region = LossRegion::DefectCrop;
  /// Seeds the parameter initialisation.
  std::uint64_t seed = 0;
  /// Initial output level, see init_params.
  double head_prior = kDefaultHeadPrior;
};

struct TrainReport {
  /// One entry per step, evaluated before that step's update. With batch
  /// size > 1 the components are averaged over the batch.
  std::vector<LossReport> log;
};

struct TrainResult {
  NetParams params;
  OptState opt;
  TrainReport report;
};

/// Only R_d is fed to the network; I_g is the loss target. Cases are
/// consumed cyclically in their given order, batch_size per step, and the
/// batch gradient is the mean of the per-case gradients.
TrainResult train(const std::vector<TrainingCase>& cases, const TrainConfig& cfg);

/// Continues from an existing state (same config as the state's).
TrainResult train_from(const std::vector<TrainingCase>& cases, const TrainConfig& cfg,
                       NetParams params, OptState opt);

/// Per case: forward, crop to the defect box, binarize at `threshold`, then
/// DSC and Hausdorff against the cropped I_g. An empty binarized prediction
/// raises EmptySetError.
std::vector<MetricReport> evaluate(const NetParams& params, const std::vector<TrainingCase>& cases,
                                   double threshold = 0.5, double hd_percentile = 100.0);

struct MetricSummary {
  double mean_dsc = 0.0;
  double mean_hd = 0.0;
};
MetricSummary summarize(const std::vector<MetricReport>& reports);

/// step,dice,mse,err,gf,rib with step counted from 1.
void write_train_log(const std::filesystem::path& path, const TrainReport& report);
/// case_id,dsc,hd_mm,hd_ab,hd_ba.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<std::string>& case_ids,
                       const std::vector<MetricReport>& reports);

/// Reloads R_d, I_g and the defect box written by `prep`.
TrainingCase load_case(const std::filesystem::path& manifest_path);

}  // namespace ribcage
