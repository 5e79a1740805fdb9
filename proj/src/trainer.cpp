#include "ribcage/trainer.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ribcage/manifest.hpp"
#include "ribcage/nifti.hpp"

namespace ribcage {

namespace {

struct CaseStep {
  LossReport report;
  ParamGrads grads;
};

// Loss gradient on the crop, embedded in a zero full-size volume.
Volume embed(const Volume& crop_grad, const Box& box, const Volume& like) {
  std::vector<double> out(like.size(), 0.0);
  std::size_t s = 0;
  for (int z = 0; z < box.size.z; ++z) {
    for (int y = 0; y < box.size.y; ++y) {
      const std::size_t row = like.offset(box.origin.x, box.origin.y + y, box.origin.z + z);
      for (int x = 0; x < box.size.x; ++x) out[row + static_cast<std::size_t>(x)] = crop_grad[s++];
    }
  }
  return Volume(like.dims(), like.spacing(), ValueDomain::Unbounded, std::move(out));
}

CaseStep case_step(const NetParams& params, const TrainingCase& c, const TrainConfig& cfg) {
  auto [pred, cache] = forward(params, c.defective);
  CaseStep out;
  if (cfg.region == LossRegion::DefectCrop) {
    const Volume p = crop(pred, c.defect);
    const Volume g = crop(c.implant, c.defect);
    out.report = rib_loss(p, g, LossRegion::DefectCrop);
    out.report.dice = dice_loss(p, g);
    out.grads = backward(params, cache, embed(loss_gradient(cfg.loss, p, g), c.defect, pred));
  } else {
    out.report = rib_loss(pred, c.implant, LossRegion::FullVolume);
    out.report.dice = dice_loss(pred, c.implant);
    out.grads = backward(params, cache, loss_gradient(cfg.loss, pred, c.implant));
  }
  return out;
}

bool finite(const LossReport& r) {
  return std::isfinite(r.dice) && std::isfinite(r.mse) && std::isfinite(r.err) &&
         std::isfinite(r.gf) && std::isfinite(r.rib);
}

}  // namespace

TrainResult train(const std::vector<TrainingCase>& cases, const TrainConfig& cfg) {
  validate(cfg.net);
  NetParams params = init_params(cfg.net, cfg.seed, cfg.head_prior);
  OptState opt = make_opt_state(params, cfg.opt);
  return train_from(cases, cfg, std::move(params), std::move(opt));
}

TrainResult train_from(const std::vector<TrainingCase>& cases, const TrainConfig& cfg,
                       NetParams params, OptState opt) {
  if (cases.empty()) throw ConfigError("train: no training cases");
  if (cfg.steps < 0) throw ConfigError("train: steps must be >= 0");
  validate(cfg.opt);
  if (params.config != cfg.net) throw ConfigError("train: parameters do not match net config");

  TrainResult result;
  const std::size_t batch = static_cast<std::size_t>(cfg.opt.batch_size);
  std::size_t next = 0;
  for (int step = 1; step <= cfg.steps; ++step) {
    LossReport mean_report;
    ParamGrads grads = zero_grads(params);
    for (std::size_t b = 0; b < batch; ++b) {
      const TrainingCase& c = cases[next];
      next = (next + 1) % cases.size();
      CaseStep cs;
      try {
        cs = case_step(params, c, cfg);
      } catch (const DomainError& e) {
        // NaN logits are rejected when the Unit-range output is built.
        throw NonFiniteLossError(static_cast<std::size_t>(step),
                                 "non-finite network output at step " + std::to_string(step) +
                                     ": " + e.what());
      }
      if (!finite(cs.report)) {
        std::ostringstream msg;
        msg << "non-finite loss at step " << step << ": dice=" << cs.report.dice
            << " mse=" << cs.report.mse << " err=" << cs.report.err << " gf=" << cs.report.gf
            << " rib=" << cs.report.rib;
        throw NonFiniteLossError(static_cast<std::size_t>(step), msg.str());
      }
      mean_report.dice += cs.report.dice;
      mean_report.mse += cs.report.mse;
      mean_report.err += cs.report.err;
      mean_report.gf += cs.report.gf;
      mean_report.rib += cs.report.rib;
      mean_report.n = cs.report.n;
      mean_report.region = cs.report.region;
      for (std::size_t t = 0; t < grads.size(); ++t) {
        for (std::size_t i = 0; i < grads[t].size(); ++i) grads[t][i] += cs.grads[t][i];
      }
    }
    if (batch > 1) {
      const double inv = 1.0 / static_cast<double>(batch);
      for (double* x : {&mean_report.dice, &mean_report.mse, &mean_report.err, &mean_report.gf,
                        &mean_report.rib}) {
        *x *= inv;
      }
      for (auto& g : grads) {
        for (double& x : g) x *= inv;
      }
    }
    result.report.log.push_back(mean_report);
    adam_step(params, grads, opt);
  }
  result.params = std::move(params);
  result.opt = std::move(opt);
  return result;
}

std::vector<MetricReport> evaluate(const NetParams& params, const std::vector<TrainingCase>& cases,
                                   double threshold, double hd_percentile) {
  std::vector<MetricReport> out;
  out.reserve(cases.size());
  for (const auto& c : cases) {
    const Volume pred = predict(params, c.defective);
    const Mask p = binarize(crop(pred, c.defect), threshold);
    const Mask g = binarize(crop(c.implant, c.defect), 0.5);
    out.push_back(compare_masks(p, g, pred.spacing(), hd_percentile));
  }
  return out;
}

MetricSummary summarize(const std::vector<MetricReport>& reports) {
  MetricSummary s;
  if (reports.empty()) return s;
  for (const auto& r : reports) {
    s.mean_dsc += r.dsc;
    s.mean_hd += r.hd;
  }
  s.mean_dsc /= static_cast<double>(reports.size());
  s.mean_hd /= static_cast<double>(reports.size());
  return s;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

void write_train_log(const std::filesystem::path& path, const TrainReport& report) {
  auto out = open_csv(path);
  out << "step,dice,mse,err,gf,rib\n";
  for (std::size_t i = 0; i < report.log.size(); ++i) {
    const auto& r = report.log[i];
    out << (i + 1) << ',' << format_double(r.dice) << ',' << format_double(r.mse) << ','
        << format_double(r.err) << ',' << format_double(r.gf) << ',' << format_double(r.rib)
        << '\n';
  }
  if (!out) throw IoError(path.string(), "failed writing '" + path.string() + "'");
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<std::string>& case_ids,
                       const std::vector<MetricReport>& reports) {
  if (case_ids.size() != reports.size()) {
    throw ShapeError("write_metrics_csv: case id and report counts differ");
  }
  auto out = open_csv(path);
  out << "case_id,dsc,hd_mm,hd_ab,hd_ba\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out << case_ids[i] << ',' << format_double(r.dsc) << ',' << format_double(r.hd) << ','
        << format_double(r.hd_ab) << ',' << format_double(r.hd_ba) << '\n';
  }
  if (!out) throw IoError(path.string(), "failed writing '" + path.string() + "'");
}

TrainingCase load_case(const std::filesystem::path& manifest_path) {
  const CaseManifest m = read_manifest(manifest_path);
  Volume defective = read_volume(resolve_relative(manifest_path, m.defective)).first;
  Volume implant = read_volume(resolve_relative(manifest_path, m.implant)).first;
  if (defective.dims() != m.dims || implant.dims() != m.dims) {
    throw FormatError("dims", "volume dims disagree with manifest '" + manifest_path.string() + "'");
  }
  const Mask rd(defective);
  const Mask ig(implant);
  std::vector<double> md(m.dims.count(), 1.0);
  for (int z = 0; z < m.defect.size.z; ++z) {
    for (int y = 0; y < m.defect.size.y; ++y) {
      for (int x = 0; x < m.defect.size.x; ++x) {
        md[defective.offset(m.defect.origin.x + x, m.defect.origin.y + y,
                            m.defect.origin.z + z)] = 0.0;
      }
    }
  }
  Mask defect_mask(Volume(m.dims, defective.spacing(), ValueDomain::Unit, std::move(md)));
  return TrainingCase{rd.volume(), ig.volume(), m.defect, std::move(defect_mask), m.seed};
}

}  // namespace ribcage
