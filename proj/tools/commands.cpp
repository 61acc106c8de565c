#include "commands.hpp"

#include "xview/dataset.hpp"
#include "xview/depthfusion.hpp"
#include "xview/error.hpp"
#include "xview/losses.hpp"
#include "xview/ortho.hpp"
#include "xview/pairing.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace xview::cli {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kSceneFormat = "xview-scene/1";
constexpr const char* kManifestFormat = "xview-manifest/1";

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string padded(int v, int width) {
  std::string s = std::to_string(v);
  return std::string(std::max(0, width - static_cast<int>(s.size())), '0') + s;
}

void write_json_file(const fs::path& p, const ojson& j) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot write " + p.string());
  f << j.dump(2) << "\n";
  if (!f) throw Error(ErrorKind::io, "write failed for " + p.string());
}

json read_json_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot open " + p.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::validation, p.filename().string() + ": " + e.what());
  }
}

ojson vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec_from(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

DepthGrid read_depth(const fs::path& p, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(ErrorKind::validation, "width and height must be positive");
  const auto raw = read_f32(p, static_cast<std::size_t>(width) * height);
  DepthGrid d(height, width);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (std::isfinite(raw[k]) && raw[k] > 0.0f) {
      d.values.data[k] = raw[k];
      d.valid.data[k] = 1;
    }
  }
  return d;
}

bool has_points(const PointMap& pm) {
  return std::any_of(pm.valid.data.begin(), pm.valid.data.end(), [](auto v) { return v != 0; });
}

std::vector<Projection> projections_of(const TriViewSample& meta) {
  std::vector<Projection> p;
  for (const auto& v : meta.views) {
    p.push_back(v.modality == Modality::satellite ? Projection::orthographic
                                                  : Projection::perspective);
  }
  return p;
}

}  // namespace

SyntheticSample to_synthetic(const SampleData& s) {
  SyntheticSample out;
  out.meta = s.meta;
  out.depths = s.depths;
  for (int i = 0; i < 6; ++i) out.pointmaps[i] = view_pointmap(s, i);
  if (s.correspondences) out.correspondences = *s.correspondences;
  out.seed = s.seed;
  return out;
}

std::vector<fs::path> find_samples(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(ErrorKind::io, "not a directory: " + root.string());
  std::vector<fs::path> out;
  if (fs::exists(root / "meta.json")) out.emplace_back(".");
  for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator();
       ++it) {
    if (it->is_directory() && fs::exists(it->path() / "meta.json")) {
      out.push_back(fs::relative(it->path(), root));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_scene_json(const fs::path& path, const SceneSpec& scene,
                      const std::vector<std::pair<std::string, double>>& sample_shifts) {
  ojson j;
  j["format"] = kSceneFormat;
  j["texture_seed"] = scene.texture_seed;
  j["plane_point"] = vec_json(scene.plane_point);
  j["plane_normal"] = vec_json(scene.plane_normal);
  j["boxes"] = ojson::array();
  for (const Box& b : scene.boxes) j["boxes"].push_back({{"min", vec_json(b.min)}, {"max", vec_json(b.max)}});
  j["samples"] = ojson::array();
  for (const auto& [id, shift] : sample_shifts) {
    j["samples"].push_back({{"id", id}, {"altitude_shift", shift}});
  }
  write_json_file(path, j);
}

SceneSpec read_scene_json(const fs::path& path,
                          std::vector<std::pair<std::string, double>>* sample_shifts) {
  const json j = read_json_file(path);
  SceneSpec s;
  try {
    if (j.at("format") != kSceneFormat) throw Error(ErrorKind::validation, "unsupported scene format");
    s.texture_seed = j.at("texture_seed");
    s.plane_point = vec_from(j.at("plane_point"));
    s.plane_normal = vec_from(j.at("plane_normal"));
    for (const auto& b : j.at("boxes")) s.boxes.push_back({vec_from(b.at("min")), vec_from(b.at("max"))});
    if (sample_shifts) {
      for (const auto& e : j.at("samples")) sample_shifts->emplace_back(e.at("id"), e.at("altitude_shift"));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::validation, path.filename().string() + ": " + e.what());
  }
  s.validate();
  return s;
}

void cmd_generate(const GenerateOptions& opt, std::ostream& out) {
  if (opt.scenes < 1 || opt.samples_per_scene < 1) {
    throw Error(ErrorKind::validation, "--scenes and --samples-per-scene must be >= 1");
  }
  if (opt.boxes < 0) throw Error(ErrorKind::validation, "--boxes must be >= 0");
  opt.capture.validate();
  std::error_code ec;
  fs::create_directories(opt.out, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + opt.out.string());

  const SplitManifest split = split_scenes(opt.scenes, opt.seed);
  ojson samples = ojson::array();
  for (int sc = 0; sc < opt.scenes; ++sc) {
    const std::uint64_t scene_seed = mix(opt.seed, static_cast<std::uint64_t>(sc));
    const SceneSpec scene = SceneSpec::random_city(scene_seed, opt.boxes);
    const std::string scene_name = "scene_" + padded(sc, 4);
    std::vector<std::pair<std::string, double>> shifts;
    for (int m = 0; m < opt.samples_per_scene; ++m) {
      const std::uint64_t sample_seed = mix(scene_seed, static_cast<std::uint64_t>(m) + 1);
      const SyntheticSample syn = make_sample(scene, opt.capture, sample_seed);
      const std::string name = "sample_" + padded(m, 2);
      const std::string id = scene_name + "/" + name;
      write_sample_dir(opt.out / scene_name / name, from_synthetic(syn, id, sc));
      shifts.emplace_back(name, syn.scene.plane_point.y() - scene.plane_point.y());
      samples.push_back({{"id", id}, {"scene", sc}, {"path", scene_name + "/" + name}});
    }
    write_scene_json(opt.out / scene_name / "scene.json", scene, shifts);
  }

  ojson m;
  m["format"] = kManifestFormat;
  m["seed"] = opt.seed;
  m["scenes"] = opt.scenes;
  m["samples_per_scene"] = opt.samples_per_scene;
  const CaptureConfig& c = opt.capture;
  m["capture"] = {{"tile_extent", c.tile_extent}, {"tile_px", c.tile_px},
                  {"uav_alt", {c.uav_alt_min, c.uav_alt_max}},
                  {"uav_pitch", {c.uav_pitch_min, c.uav_pitch_max}},
                  {"ground_height", c.ground_height}, {"tile_rotation_max", c.tile_rotation_max}};
  m["split"] = {{"train", split.train}, {"val", split.val}, {"test", split.test}};
  m["samples"] = samples;
  write_json_file(opt.out / "manifest.json", m);

  ojson r = {{"out", opt.out.string()}, {"samples", samples.size()}, {"split", m["split"]}};
  out << r.dump(2) << "\n";
}

void cmd_perturb(const PerturbOptions& opt, std::ostream& out) {
  const auto rels = find_samples(opt.gt);
  if (rels.empty()) throw Error(ErrorKind::structural, "no samples under " + opt.gt.string());
  ojson injected = ojson::array();
  for (std::size_t k = 0; k < rels.size(); ++k) {
    const SampleData gt = read_sample_dir(opt.gt / rels[k]);
    const PerturbResult p = perturb(to_synthetic(gt), opt.noise, mix(opt.seed, k));
    write_sample_dir(opt.out / rels[k], with_prediction(gt, p.bundle));
    ojson offsets = ojson::array();
    for (const Vec3& v : p.injected.center_offset) offsets.push_back(vec_json(v));
    injected.push_back({{"id", gt.id},
                        {"center_offset", offsets},
                        {"rot_angle_deg", p.injected.rot_angle_deg},
                        {"rho_scale", p.injected.rho_scale}});
  }
  out << ojson{{"samples", rels.size()}, {"injected", injected}}.dump(2) << "\n";
}

void cmd_eval(const EvalCliOptions& opt, std::ostream& out) {
  if (opt.threads < 1) throw Error(ErrorKind::validation, "--threads must be >= 1");
  const auto gt_rel = find_samples(opt.gt);
  const auto pred_rel = find_samples(opt.pred);
  std::vector<std::string> missing, extra;
  for (const auto& r : gt_rel) {
    if (!std::binary_search(pred_rel.begin(), pred_rel.end(), r)) missing.push_back(r.string());
  }
  for (const auto& r : pred_rel) {
    if (!std::binary_search(gt_rel.begin(), gt_rel.end(), r)) extra.push_back(r.string());
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "sample mismatch between --pred and --gt;";
    for (const auto& m : missing) msg += " missing:" + m;
    for (const auto& e : extra) msg += " unexpected:" + e;
    throw Error(ErrorKind::structural, msg);
  }
  if (gt_rel.empty()) throw Error(ErrorKind::structural, "no samples under " + opt.gt.string());

  EvalOptions eo;
  eo.per_view_accmean = opt.per_view_accmean;
  eo.stride = opt.stride;
  std::vector<SampleEvaluation> evals(gt_rel.size());
  std::vector<std::exception_ptr> errors(gt_rel.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < gt_rel.size(); k = next++) {
      try {
        const SampleData gt = read_sample_dir(opt.gt / gt_rel[k]);
        const SampleData pred = read_sample_dir(opt.pred / gt_rel[k]);
        if (pred.id != gt.id) {
          throw Error(ErrorKind::structural, "sample id mismatch at " + gt_rel[k].string());
        }
        evals[k] = evaluate_sample(pred, gt, eo);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int n_threads = std::min<int>(opt.threads, static_cast<int>(gt_rel.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const MetricsReport report = aggregate(evals);
  const std::string js = report_json(report);
  {
    std::ofstream f(opt.out, std::ios::binary);
    if (!f) throw Error(ErrorKind::io, "cannot write " + opt.out.string());
    f << js;
  }
  fs::path csv = opt.csv ? *opt.csv : fs::path(opt.out).replace_extension(".csv");
  {
    std::ofstream f(csv, std::ios::binary);
    if (!f) throw Error(ErrorKind::io, "cannot write " + csv.string());
    f << report_csv(report);
  }
  out << js;
}

void cmd_localize(const LocalizeOptions& opt, std::ostream& out) {
  const SampleData s = read_sample_dir(opt.sample);
  if (!s.correspondences || s.correspondences->matches.empty()) {
    throw Error(ErrorKind::structural, "sample has no correspondences (corr.json)");
  }
  const auto names = view_names(s.meta);
  std::vector<PointMap> maps;
  for (int i = 0; i < 6; ++i) maps.push_back(view_pointmap(s, i));
  if (opt.drop) {
    if (*opt.drop == Modality::satellite) {
      throw Error(ErrorKind::validation, "only uav or ground views can be dropped");
    }
    for (int i : s.meta.indices_of(*opt.drop)) {
      if (!has_points(maps[i])) {
        throw Error(ErrorKind::structural, "cannot drop " + names[i] + ": view has no points");
      }
      maps[i] = PointMap();
    }
  }
  const auto proj = projections_of(s.meta);
  const int ref = s.meta.indices_of(Modality::satellite)[0];
  const LocalizationResult loc = localize_views(maps, proj, *s.correspondences, ref);

  const ViewRecord& sat = s.meta.views[ref];
  const SatTile ref_tile{sat.width, sat.height, *sat.rho, sat.pose};
  ojson cams = ojson::array();
  PlyCloud overlay;
  const PointMap& sat_map = maps[ref];
  for (std::size_t k = 0; k < sat_map.size(); ++k) {
    if (!sat_map.is_valid(k)) continue;
    overlay.points.push_back(sat_map.points.data[k]);
    overlay.colors.push_back({160, 160, 160});
  }
  for (const auto& c : loc.cameras) {
    const ViewRecord& v = s.meta.views[c.view];
    const TileLocation expect = camera_on_tile(v.pose, ref_tile);
    const LocEval err = localization_eval(c.location, expect, s.meta.meters_per_pixel_gt);
    cams.push_back({{"view", names[c.view]},
                    {"modality", std::string(to_string(v.modality))},
                    {"u", c.location.u},
                    {"v", c.location.v},
                    {"yaw_deg", c.location.yaw_deg},
                    {"reference", {{"u", expect.u}, {"v", expect.v}, {"yaw_deg", expect.yaw_deg}}},
                    {"meter_err", err.meter_err},
                    {"yaw_err", err.yaw_err}});
    // A small cross at the camera centre, colored by modality.
    const std::array<std::uint8_t, 3> color =
        v.modality == Modality::uav ? std::array<std::uint8_t, 3>{230, 60, 40}
                                    : std::array<std::uint8_t, 3>{40, 90, 230};
    const Vec3 centre = c.pose.center();
    const double arm = 3.0 * loc.rho;
    for (int step = -4; step <= 4; ++step) {
      for (int axis = 0; axis < 3; ++axis) {
        Vec3 p = centre;
        p[axis] += arm * step / 4.0;
        overlay.points.push_back(p);
        overlay.colors.push_back(color);
      }
    }
  }
  const fs::path overlay_path = opt.overlay ? *opt.overlay : opt.sample / "localize_overlay.ply";
  write_ply(overlay_path, overlay);

  ojson r;
  r["sample"] = s.id;
  r["dropped"] = opt.drop ? ojson(std::string(to_string(*opt.drop))) : ojson(nullptr);
  r["rho"] = loc.rho;
  r["rounds"] = loc.registration.rounds;
  r["rms_residual"] = loc.registration.rms_residual;
  r["cameras"] = cams;
  r["overlay"] = overlay_path.string();
  out << r.dump(2) << "\n";
}

void cmd_pair(const PairOptions& opt, std::ostream& out) {
  if (!(opt.cell > 0.0)) throw Error(ErrorKind::validation, "--cell must be positive");
  if (opt.stride < 1) throw Error(ErrorKind::validation, "--stride must be >= 1");
  std::vector<std::pair<std::string, double>> shifts;
  read_scene_json(opt.scene / "scene.json", &shifts);

  PairingViews views;
  std::vector<std::string> labels[3];
  for (const auto& [id, shift] : shifts) {
    const SampleData s = read_sample_dir(opt.scene / id);
    const auto names = view_names(s.meta);
    for (int i = 0; i < 6; ++i) {
      const PointMap pm = view_pointmap(s, i);
      const Pose& pose = s.meta.views[i].pose;
      std::vector<Vec3> cloud;
      for (int r = 0; r < pm.height(); r += opt.stride) {
        for (int c = 0; c < pm.width(); c += opt.stride) {
          const std::size_t k = pm.points.index(r, c);
          if (!pm.is_valid(k)) continue;
          Vec3 p = pose.inverse_apply(pm.points.data[k]);
          p.y() -= shift;  // back to the scene's shared frame
          cloud.push_back(p);
        }
      }
      const Modality m = s.meta.views[i].modality;
      labels[static_cast<int>(m)].push_back(id + "/" + names[i]);
      (m == Modality::satellite ? views.satellite : m == Modality::uav ? views.uav : views.ground)
          .push_back(std::move(cloud));
    }
  }
  const auto tuples =
      select_tuples(views, opt.top, opt.cell, opt.iou ? PairScore::iou : PairScore::intersection);
  ojson arr = ojson::array();
  for (const auto& t : tuples) {
    arr.push_back({{"satellite", {labels[0][t.satellite[0]], labels[0][t.satellite[1]]}},
                   {"uav", {labels[1][t.uav[0]], labels[1][t.uav[1]]}},
                   {"ground", {labels[2][t.ground[0]], labels[2][t.ground[1]]}},
                   {"score", t.score},
                   {"min_overlap", t.min_overlap}});
  }
  out << ojson{{"cell", opt.cell}, {"score", opt.iou ? "iou" : "intersection"}, {"tuples", arr}}.dump(2)
      << "\n";
}

void cmd_fuse(const FuseOptions& opt, std::ostream& out) {
  const DepthGrid rel = read_depth(opt.rel, opt.width, opt.height);
  const DepthGrid anchor = read_depth(opt.anchor, opt.width, opt.height);
  const FusionResult f = fuse_and_filter(rel, anchor, opt.pcc_min);
  if (f.accepted && opt.out) {
    std::vector<float> buf(f.fused.size());
    for (std::size_t k = 0; k < buf.size(); ++k) {
      buf[k] = f.fused.is_valid(k) ? static_cast<float>(f.fused.values.data[k]) : 0.0f;
    }
    write_f32(*opt.out, buf);
  }
  ojson r = {{"accepted", f.accepted}, {"pcc", f.pcc}, {"scale", f.fit.scale}, {"shift", f.fit.shift},
             {"pcc_min", opt.pcc_min}};
  if (f.accepted && opt.out) r["out"] = opt.out->string();
  out << r.dump(2) << "\n";
}

void cmd_losses(const LossesOptions& opt, std::ostream& out) {
  const SampleData pred = read_sample_dir(opt.pred);
  const SampleData gt = read_sample_dir(opt.gt);
  const auto names = view_names(gt.meta);
  LossComponents c;
  int used = 0;
  for (int i = 0; i < 6; ++i) {
    const PointMap p = view_pointmap(pred, i);
    const PointMap g = view_pointmap(gt, i);
    if (!has_points(p)) continue;
    ConfMap conf{Grid<double>(p.height(), p.width(), 1.0 - kConfClamp)};
    const fs::path conf_file = opt.pred / ("conf_" + names[i] + ".f32");
    if (fs::exists(conf_file)) {
      const auto raw = read_f32(conf_file, p.size());
      std::copy(raw.begin(), raw.end(), conf.conf.data.begin());
    }
    c.geo += loss_geo(p, g).value;
    c.norm += loss_norm(p, g);
    c.conf += loss_conf(conf, p, g);
    ++used;
  }
  if (used == 0) throw Error(ErrorKind::degenerate, "prediction has no valid points");
  c.geo /= used;
  c.norm /= used;
  c.conf /= used;
  std::array<Pose, 6> pp, gp;
  for (int i = 0; i < 6; ++i) {
    pp[i] = pred.meta.views[i].pose;
    gp[i] = gt.meta.views[i].pose;
  }
  c.cam = loss_cam(pp, gp).value;
  const LossWeights w;
  ojson r = {{"geo", c.geo}, {"norm", c.norm}, {"conf", c.conf}, {"cam", c.cam},
             {"total", total_loss(c, w, opt.warmup)}, {"warmup", opt.warmup},
             {"weights", {{"lambda_n", w.lambda_n}, {"lambda_c", w.lambda_c}, {"lambda_p", w.lambda_p}}}};
  out << r.dump(2) << "\n";
}

void cmd_sweep(const SweepOptions& opt, std::ostream& out) {
  if (!(opt.step > 0.0) || !(opt.max >= opt.min) || !(opt.min > 0.0)) {
    throw Error(ErrorKind::validation, "sweep range needs 0 < min <= max and step > 0");
  }
  const SceneSpec scene = read_scene_json(opt.scene / "scene.json");
  const auto raw = read_f32(opt.target, static_cast<std::size_t>(opt.camera.width) * opt.camera.height);
  DepthGrid target(opt.camera.height, opt.camera.width);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (std::isnan(raw[k])) continue;  // heights may be zero or negative; NaN marks misses
    target.values.data[k] = raw[k];
    target.valid.data[k] = 1;
  }
  std::vector<double> candidates;
  const auto n = static_cast<long>(std::floor((opt.max - opt.min) / opt.step + 1e-9));
  for (long k = 0; k <= n; ++k) candidates.push_back(opt.min + static_cast<double>(k) * opt.step);
  const double best = altitude_sweep(target, scene, candidates, opt.camera);
  out << ojson{{"altitude", best}, {"candidates", candidates.size()}}.dump(2) << "\n";
}

void cmd_validate(const fs::path& sample, std::ostream& out) {
  const SampleData s = read_sample_dir(sample);
  out << ojson{{"valid", true}, {"id", s.id}}.dump(2) << "\n";
}

}  // namespace xview::cli
