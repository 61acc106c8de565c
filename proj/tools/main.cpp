#include "commands.hpp"

#include "xview/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

namespace {

using namespace xview;

// "a:b" into a pair of doubles.
std::pair<double, double> parse_range(const std::string& text, const char* flag) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorKind::validation, std::string(flag) + " expects a:b");
  }
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorKind::validation, std::string(flag) + " expects a:b with numbers");
  }
}

int report_error(const char* kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xview: synthetic tri-view geometry toolkit"};
  app.require_subcommand(1);

  cli::GenerateOptions gen;
  std::string uav_alt = "30:120", uav_pitch = "0:90";
  auto* g = app.add_subcommand("generate", "Write synthetic sample directories");
  g->add_option("--scenes", gen.scenes, "Number of scenes")->required();
  g->add_option("--samples-per-scene", gen.samples_per_scene, "Samples per scene")->required();
  g->add_option("--seed", gen.seed, "Master seed")->required();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--tile-extent", gen.capture.tile_extent, "Satellite tile side in meters");
  g->add_option("--tile-px", gen.capture.tile_px, "Satellite tile side in pixels");
  g->add_option("--uav-alt", uav_alt, "UAV altitude range a:b in meters");
  g->add_option("--uav-pitch", uav_pitch, "UAV pitch range a:b in degrees");
  g->add_option("--tile-rotation", gen.capture.tile_rotation_max,
                "Max in-plane tile rotation in degrees");
  g->add_option("--boxes", gen.boxes, "Buildings per scene");

  cli::PerturbOptions per;
  int only_view = -1;
  auto* p = app.add_subcommand("perturb", "Write a noisy prediction set for a generated set");
  p->add_option("--gt", per.gt, "Ground-truth root")->required();
  p->add_option("--out", per.out, "Output root")->required();
  p->add_option("--seed", per.seed, "Noise seed");
  p->add_option("--rot-sigma", per.noise.rot_sigma_deg, "Rotation noise, degrees");
  p->add_option("--trans-sigma", per.noise.trans_sigma_m, "Camera centre noise, meters");
  p->add_option("--point-sigma", per.noise.point_sigma_m, "Point-map noise, meters");
  p->add_option("--rho-sigma", per.noise.rho_rel_sigma, "Relative rho noise");
  p->add_option("--only-view", only_view, "Perturb only this view index (0-5)");
  p->add_flag("--yaw-only", per.noise.yaw_only, "Rotate about the vertical axis only");

  cli::EvalCliOptions ev;
  std::string csv;
  auto* e = app.add_subcommand("eval", "Evaluate predictions against ground truth");
  e->add_option("--pred", ev.pred, "Prediction root")->required();
  e->add_option("--gt", ev.gt, "Ground-truth root")->required();
  e->add_option("--out", ev.out, "report.json path")->required();
  e->add_option("--csv", csv, "CSV path (default: next to --out)");
  e->add_flag("--per-view-accmean", ev.per_view_accmean, "Average Acc-mean over views");
  e->add_option("--threads", ev.threads, "Worker threads");
  e->add_option("--stride", ev.stride, "Pixel stride for reconstruction clouds");

  cli::LocalizeOptions loc;
  std::string drop, overlay;
  auto* l = app.add_subcommand("localize", "Register a sample and place cameras on its tile");
  l->add_option("--sample", loc.sample, "Sample directory")->required();
  l->add_option("--drop-view", drop, "Drop a modality: uav or ground")
      ->check(CLI::IsMember({"uav", "ground"}));
  l->add_option("--overlay", overlay, "Overlay PLY path");

  cli::PairOptions pair;
  auto* pa = app.add_subcommand("pair", "Select tri-view tuples by voxel overlap");
  pa->add_option("--scene", pair.scene, "Scene directory (with scene.json)")->required();
  pa->add_option("--cell", pair.cell, "Voxel cell in meters");
  pa->add_option("--top", pair.top, "Number of tuples");
  pa->add_flag("--iou", pair.iou, "Score by IoU instead of intersection");

  cli::FuseOptions fuse;
  std::string fuse_out;
  auto* f = app.add_subcommand("fuse", "Anchor a relative depth map to a metric one");
  f->add_option("--rel", fuse.rel, "Relative depth (float32)")->required();
  f->add_option("--anchor", fuse.anchor, "Metric anchor depth (float32)")->required();
  f->add_option("--width", fuse.width, "Grid width")->required();
  f->add_option("--height", fuse.height, "Grid height")->required();
  f->add_option("--pcc-min", fuse.pcc_min, "Pearson acceptance gate");
  f->add_option("--out", fuse_out, "Fused depth output (float32)");

  cli::LossesOptions los;
  auto* lo = app.add_subcommand("losses", "Training-loss components of a prediction");
  lo->add_option("--pred", los.pred, "Predicted sample directory")->required();
  lo->add_option("--gt", los.gt, "Ground-truth sample directory")->required();
  lo->add_flag("--warmup", los.warmup, "Warm-up phase (normal term off)");

  cli::SweepOptions sw;
  auto* s = app.add_subcommand("sweep", "Recover the altitude of a nadir height image");
  s->add_option("--target", sw.target, "Height image (float32, NaN = miss)")->required();
  s->add_option("--scene", sw.scene, "Scene directory (with scene.json)")->required();
  s->add_option("--min", sw.min, "Lowest candidate altitude");
  s->add_option("--max", sw.max, "Highest candidate altitude");
  s->add_option("--step", sw.step, "Candidate spacing");
  s->add_option("--x", sw.camera.ground_x, "Camera ground x (south)");
  s->add_option("--z", sw.camera.ground_z, "Camera ground z (east)");
  s->add_option("--fov", sw.camera.fov_deg, "Field of view, degrees");
  s->add_option("--width", sw.camera.width, "Image width");
  s->add_option("--height", sw.camera.height, "Image height");
  s->add_option("--yaw", sw.camera.yaw_deg, "Image-up heading, degrees");

  cli::fs::path validate_dir;
  auto* v = app.add_subcommand("validate", "Validate a sample directory");
  v->add_option("--sample", validate_dir, "Sample directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ok) {
    return app.exit(ok);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return exit_code(ErrorKind::validation);
  }

  try {
    if (*g) {
      std::tie(gen.capture.uav_alt_min, gen.capture.uav_alt_max) = parse_range(uav_alt, "--uav-alt");
      std::tie(gen.capture.uav_pitch_min, gen.capture.uav_pitch_max) =
          parse_range(uav_pitch, "--uav-pitch");
      cli::cmd_generate(gen, std::cout);
    } else if (*p) {
      if (only_view >= 0) per.noise.only_view = only_view;
      cli::cmd_perturb(per, std::cout);
    } else if (*e) {
      if (!csv.empty()) ev.csv = csv;
      cli::cmd_eval(ev, std::cout);
    } else if (*l) {
      if (!drop.empty()) loc.drop = modality_from_string(drop);
      if (!overlay.empty()) loc.overlay = overlay;
      cli::cmd_localize(loc, std::cout);
    } else if (*pa) {
      cli::cmd_pair(pair, std::cout);
    } else if (*f) {
      if (!fuse_out.empty()) fuse.out = fuse_out;
      cli::cmd_fuse(fuse, std::cout);
    } else if (*lo) {
      cli::cmd_losses(los, std::cout);
    } else if (*s) {
      cli::cmd_sweep(sw, std::cout);
    } else if (*v) {
      cli::cmd_validate(validate_dir, std::cout);
    }
  } catch (const Error& err) {
    return report_error(to_string(err.kind()), err.what(), exit_code(err.kind()));
  } catch (const std::filesystem::filesystem_error& err) {
    return report_error("io", err.what(), exit_code(ErrorKind::io));
  } catch (const std::exception& err) {
    return report_error("validation", err.what(), exit_code(ErrorKind::validation));
  }
  return 0;
}
