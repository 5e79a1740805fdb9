// ribcage: phantom -> prep -> train -> eval pipeline, plus a loss gradient check.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ribcage/checkpoint.hpp"
#include "ribcage/defect.hpp"
#include "ribcage/losses.hpp"
#include "ribcage/manifest.hpp"
#include "ribcage/nifti.hpp"
#include "ribcage/phantom.hpp"
#include "ribcage/trainer.hpp"

namespace fs = std::filesystem;
using namespace ribcage;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string out_dir = "out";
};

Dims to_dims(const std::vector<int>& v) { return {v.at(0), v.at(1), v.at(2)}; }

std::string case_name(const char* prefix, int i) {
  std::ostringstream s;
  s << prefix << '_' << std::setw(3) << std::setfill('0') << i;
  return s.str();
}

// The list/checkpoint flags default to files inside --out-dir.
fs::path or_default(const std::string& given, const Globals& g, const char* name) {
  return given.empty() ? fs::path(g.out_dir) / name : fs::path(given);
}

struct PhantomFlags {
  int cases = 2;
  std::vector<int> dims{128, 128, 128};
  std::vector<double> spacing{1.0, 1.0, 1.0};
  int rib_pairs = 12;
  double rib_radius = 2.0;
  double torso_semi_x = 54.0;
  double torso_semi_y = 42.0;
  double jitter = 1.0;
};

void cmd_phantom(const Globals& g, const PhantomFlags& f) {
  PhantomSpec spec;
  spec.dims = to_dims(f.dims);
  spec.spacing = {f.spacing.at(0), f.spacing.at(1), f.spacing.at(2)};
  spec.rib_pairs = f.rib_pairs;
  spec.rib_radius = f.rib_radius;
  spec.torso_semi_x = f.torso_semi_x;
  spec.torso_semi_y = f.torso_semi_y;
  spec.jitter = f.jitter;
  validate(spec);
  if (f.cases < 1) throw ConfigError("--cases must be >= 1");
  fs::create_directories(g.out_dir);
  std::vector<std::string> names;
  for (int i = 0; i < f.cases; ++i) {
    spec.seed = g.seed + static_cast<std::uint64_t>(i);
    const std::string name = case_name("phantom", i) + ".nii";
    write_volume(fs::path(g.out_dir) / name, generate_phantom(spec), VoxelType::Float32);
    names.push_back(name);
    std::cout << "wrote " << (fs::path(g.out_dir) / name).string() << '\n';
  }
  write_path_list(fs::path(g.out_dir) / "phantoms.lst", names);
}

struct PrepFlags {
  std::string input;
  double hu_threshold = 200.0;
  double window_lo = -1024.0;
  double window_hi = 2048.0;
  std::vector<int> working_dims{64, 64, 32};
  std::vector<int> reference_dims{256, 256, 128};
  std::vector<int> reference_defect{64, 64, 64};
  double band_lo = 0.5;
  double band_hi = 0.75;
  int max_attempts = 32;
  double min_bone_fraction = 0.01;
};

void cmd_prep(const Globals& g, const PrepFlags& f) {
  PipelineConfig cfg;
  cfg.hu_threshold = f.hu_threshold;
  cfg.window_lo = f.window_lo;
  cfg.window_hi = f.window_hi;
  cfg.working_dims = to_dims(f.working_dims);
  cfg.reference_dims = to_dims(f.reference_dims);
  cfg.reference_defect = to_dims(f.reference_defect);
  cfg.band_lo = f.band_lo;
  cfg.band_hi = f.band_hi;
  cfg.max_attempts = f.max_attempts;
  cfg.min_bone_fraction = f.min_bone_fraction;

  const fs::path list = or_default(f.input, g, "phantoms.lst");
  const auto sources = read_path_list(list);
  if (sources.empty()) throw ConfigError("no input volumes listed in '" + list.string() + "'");
  fs::create_directories(g.out_dir);
  std::vector<std::string> manifests;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    cfg.seed = g.seed + i;
    const Volume ct = read_volume(sources[i]).first;
    const PreparedCase pc = prepare_case(ct, cfg);
    const std::string id = case_name("case", static_cast<int>(i));
    const fs::path dir = fs::path(g.out_dir) / id;
    fs::create_directories(dir);
    write_volume(dir / "ct.nii", pc.ct, VoxelType::Float32);
    write_volume(dir / "bone.nii", pc.bone.volume(), VoxelType::UInt8);
    write_volume(dir / "defective.nii", pc.sample.defective, VoxelType::UInt8);
    write_volume(dir / "implant.nii", pc.sample.implant, VoxelType::UInt8);

    CaseManifest m;
    m.case_id = id;
    m.seed = cfg.seed;
    m.source = fs::relative(fs::absolute(sources[i]), fs::absolute(dir)).generic_string();
    m.ct = "ct.nii";
    m.bone_mask = "bone.nii";
    m.defective = "defective.nii";
    m.implant = "implant.nii";
    m.dims = cfg.working_dims;
    m.defect = pc.sample.defect;
    m.prep = cfg.record();
    write_manifest(dir / "case.manifest", m);
    manifests.push_back(id + "/case.manifest");
    std::cout << "prepared " << id << " defect origin " << m.defect.origin.x << ' '
              << m.defect.origin.y << ' ' << m.defect.origin.z << " size "
              << to_string(m.defect.size) << '\n';
  }
  write_path_list(fs::path(g.out_dir) / "cases.lst", manifests);
}

std::vector<TrainingCase> load_cases(const fs::path& list, std::vector<std::string>* ids = nullptr) {
  std::vector<TrainingCase> cases;
  for (const auto& p : read_path_list(list)) {
    cases.push_back(load_case(p));
    if (ids) ids->push_back(read_manifest(p).case_id);
  }
  if (cases.empty()) throw ConfigError("no cases listed in '" + list.string() + "'");
  return cases;
}

struct TrainFlags {
  std::string cases;
  int depth = 2;
  int base_channels = 8;
  int steps = 500;
  std::string loss = "mse+err+gf";
  std::string region = "crop";
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
  int batch_size = 1;
  double head_prior = kDefaultHeadPrior;
  int log_every = 50;
};

void cmd_train(const Globals& g, const TrainFlags& f) {
  TrainConfig cfg;
  cfg.net = {f.depth, f.base_channels};
  cfg.opt = {f.lr, f.beta1, f.beta2, f.eps, f.weight_decay, f.batch_size};
  cfg.steps = f.steps;
  cfg.loss = parse_loss_kind(f.loss);
  cfg.region = parse_loss_region(f.region);
  cfg.seed = g.seed;
  cfg.head_prior = f.head_prior;
  const auto cases = load_cases(or_default(f.cases, g, "cases.lst"));
  const TrainResult r = train(cases, cfg);
  fs::create_directories(g.out_dir);
  write_checkpoint(fs::path(g.out_dir) / "checkpoint.bin", {r.params, r.opt});
  write_train_log(fs::path(g.out_dir) / "train_log.csv", r.report);
  for (std::size_t i = 0; i < r.report.log.size(); ++i) {
    const bool last = i + 1 == r.report.log.size();
    if (f.log_every > 0 && (i % static_cast<std::size_t>(f.log_every) == 0 || last)) {
      const auto& e = r.report.log[i];
      std::cout << "step " << (i + 1) << " rib " << e.rib << " mse " << e.mse << " err " << e.err
                << " gf " << e.gf << " dice " << e.dice << '\n';
    }
  }
}

struct EvalFlags {
  std::string cases;
  std::string checkpoint;
  double threshold = 0.5;
  double hd_percentile = 100.0;
};

void cmd_eval(const Globals& g, const EvalFlags& f) {
  std::vector<std::string> ids;
  const auto cases = load_cases(or_default(f.cases, g, "cases.lst"), &ids);
  const Checkpoint ck = read_checkpoint(or_default(f.checkpoint, g, "checkpoint.bin"));
  const auto reports = evaluate(ck.params, cases, f.threshold, f.hd_percentile);
  fs::create_directories(g.out_dir);
  write_metrics_csv(fs::path(g.out_dir) / "metrics.csv", ids, reports);
  const MetricSummary s = summarize(reports);
  std::cout << "cases " << reports.size() << " mean_dsc " << s.mean_dsc << " mean_hd_mm "
            << s.mean_hd << '\n';
}

struct GradcheckFlags {
  std::vector<std::string> kinds{"dice", "mse", "mse+err", "mse+err+gf"};
  int samples = 100;
  int size = 8;
  double h = 1e-3;
  double tolerance = 1e-4;
};

bool cmd_gradcheck(const Globals& g, const GradcheckFlags& f) {
  bool ok = true;
  for (const auto& k : f.kinds) {
    const double worst = gradcheck_random_pairs(parse_loss_kind(k), f.size, f.samples, f.h, g.seed);
    const bool pass = worst < f.tolerance;
    ok = ok && pass;
    std::cout << k << " max_rel_err " << worst << (pass ? " PASS" : " FAIL") << '\n';
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic ribcage phantoms, defect simulation, implant-completion training"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Print help for every subcommand and exit");

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every stochastic choice");
  app.add_option("--out-dir", g.out_dir, "Output directory");

  PhantomFlags pf;
  auto* phantom = app.add_subcommand("phantom", "Write synthetic HU phantoms and phantoms.lst");
  phantom->add_option("--cases", pf.cases, "Number of phantoms (case i uses seed + i)");
  phantom->add_option("--dims", pf.dims, "Grid size x y z")->expected(3);
  phantom->add_option("--spacing", pf.spacing, "Voxel spacing in mm x y z")->expected(3);
  phantom->add_option("--rib-pairs", pf.rib_pairs, "Rib pairs");
  phantom->add_option("--rib-radius", pf.rib_radius, "Rib tube radius (voxels)");
  phantom->add_option("--torso-semi-x", pf.torso_semi_x, "Torso semi-axis along x (voxels)");
  phantom->add_option("--torso-semi-y", pf.torso_semi_y, "Torso semi-axis along y (voxels)");
  phantom->add_option("--jitter", pf.jitter, "Per-rib random offset amplitude (voxels)");

  PrepFlags rf;
  auto* prep = app.add_subcommand("prep", "Threshold, resample, cut a defect; write cases.lst");
  prep->add_option("--input", rf.input, "Phantom list file")
      ->default_str("<out-dir>/phantoms.lst");
  prep->add_option("--hu-threshold", rf.hu_threshold, "Bone threshold in HU");
  prep->add_option("--window-lo", rf.window_lo, "CT window lower bound (HU)");
  prep->add_option("--window-hi", rf.window_hi, "CT window upper bound (HU)");
  prep->add_option("--working-dims", rf.working_dims, "Working grid x y z")->expected(3);
  prep->add_option("--reference-dims", rf.reference_dims, "Grid the defect size refers to")
      ->expected(3);
  prep->add_option("--reference-defect", rf.reference_defect, "Defect size on the reference grid")
      ->expected(3);
  prep->add_option("--band-lo", rf.band_lo, "Lower height-band fraction for the defect start");
  prep->add_option("--band-hi", rf.band_hi, "Upper height-band fraction for the defect start");
  prep->add_option("--max-attempts", rf.max_attempts, "Defect placement attempts");
  prep->add_option("--min-bone-fraction", rf.min_bone_fraction,
                   "Minimum bone fraction inside the defect");

  TrainFlags tf;
  auto* trainc = app.add_subcommand("train", "Train the network; write checkpoint.bin and train_log.csv");
  trainc->add_option("--cases", tf.cases, "Case list file")->default_str("<out-dir>/cases.lst");
  trainc->add_option("--depth", tf.depth, "Encoder levels");
  trainc->add_option("--base-channels", tf.base_channels, "Channels at level 0");
  trainc->add_option("--steps", tf.steps, "Optimizer steps");
  trainc->add_option("--loss", tf.loss, "dice | mse | mse+err | mse+err+gf");
  trainc->add_option("--region", tf.region, "Loss region: crop | full");
  trainc->add_option("--lr", tf.lr, "Adam learning rate");
  trainc->add_option("--beta1", tf.beta1, "Adam beta1");
  trainc->add_option("--beta2", tf.beta2, "Adam beta2");
  trainc->add_option("--eps", tf.eps, "Adam epsilon");
  trainc->add_option("--weight-decay", tf.weight_decay, "Coupled L2 weight decay");
  trainc->add_option("--batch-size", tf.batch_size, "Cases per step");
  trainc->add_option("--head-prior", tf.head_prior, "Initial output probability (sets the head bias)");
  trainc->add_option("--log-every", tf.log_every, "Print every n-th step (0 = quiet)");

  EvalFlags ef;
  auto* evalc = app.add_subcommand("eval", "Evaluate a checkpoint; write metrics.csv");
  evalc->add_option("--cases", ef.cases, "Case list file")->default_str("<out-dir>/cases.lst");
  evalc->add_option("--checkpoint", ef.checkpoint, "Checkpoint file")
      ->default_str("<out-dir>/checkpoint.bin");
  evalc->add_option("--threshold", ef.threshold, "Binarization threshold");
  evalc->add_option("--hd-percentile", ef.hd_percentile, "Hausdorff percentile (100 = max)");

  GradcheckFlags gf;
  auto* gradc = app.add_subcommand("gradcheck", "Finite-difference check of the loss gradients");
  gradc->add_option("--kinds", gf.kinds, "Loss kinds to check")->delimiter(',');
  gradc->add_option("--samples", gf.samples, "Random pairs per kind");
  gradc->add_option("--size", gf.size, "Edge length of the cubic test volumes");
  gradc->add_option("--fd-step", gf.h, "Central-difference step");
  gradc->add_option("--tolerance", gf.tolerance, "Maximum accepted relative error");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*phantom) cmd_phantom(g, pf);
    if (*prep) cmd_prep(g, rf);
    if (*trainc) cmd_train(g, tf);
    if (*evalc) cmd_eval(g, ef);
    if (*gradc) return cmd_gradcheck(g, gf) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
