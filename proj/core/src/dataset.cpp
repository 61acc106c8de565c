#include "xview/dataset.hpp"

#include "xview/error.hpp"
#include "xview/ortho.hpp"
#include "xview/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace xview {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "raw float32 files are read and written as little-endian");

namespace {

[[noreturn]] void io_fail(const std::string& what) { throw Error(ErrorKind::io, what); }
[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::validation, what); }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) io_fail("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) io_fail("cannot write " + p.string());
  out << text;
  if (!out) io_fail("write failed for " + p.string());
}

json pose_json(const Pose& p) {
  json R = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R.push_back(p.R(r, c));
  return {{"R", R}, {"t", {p.t.x(), p.t.y(), p.t.z()}}};
}

Pose pose_from_json(const json& j) {
  Pose p;
  const auto& R = j.at("R");
  const auto& t = j.at("t");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) p.R(r, c) = R.at(3 * r + c).get<double>();
  for (int k = 0; k < 3; ++k) p.t[k] = t.at(k).get<double>();
  return p;
}

void require(bool cond, const std::string& what) {
  if (!cond) invalid("meta.json: " + what);
}

bool is_number_array(const json& j, std::size_t n) {
  if (!j.is_array() || j.size() != n) return false;
  return std::all_of(j.begin(), j.end(), [](const json& x) { return x.is_number(); });
}

void validate_meta_json(const json& j) {
  require(j.is_object(), "root must be an object");
  require(j.contains("format") && j["format"] == kSampleFormat, "unsupported format tag");
  require(j.contains("id") && j["id"].is_string(), "id must be a string");
  require(j.contains("scene") && j["scene"].is_number_integer(), "scene must be an integer");
  require(j.contains("seed") && j["seed"].is_number_unsigned(), "seed must be unsigned");
  require(j.contains("meters_per_pixel_gt") && j["meters_per_pixel_gt"].is_number() &&
              j["meters_per_pixel_gt"].get<double>() > 0.0,
          "meters_per_pixel_gt must be a positive number");
  require(j.contains("origin") && j["origin"].is_object(), "origin must be an object");
  for (const char* k : {"lat", "lon", "alt"}) {
    require(j["origin"].contains(k) && j["origin"][k].is_number(),
            std::string("origin.") + k + " must be a number");
  }
  const double lat = j["origin"]["lat"].get<double>();
  const double lon = j["origin"]["lon"].get<double>();
  require(lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0,
          "origin outside WGS-84 bounds");
  require(j.contains("views") && j["views"].is_array() && j["views"].size() == 6,
          "views must be an array of six entries");
  int counts[3] = {0, 0, 0};
  for (const auto& v : j["views"]) {
    require(v.is_object(), "view must be an object");
    require(v.contains("name") && v["name"].is_string(), "view.name must be a string");
    require(v.contains("modality") && v["modality"].is_string(), "view.modality must be a string");
    const std::string m = v["modality"];
    require(m == "satellite" || m == "uav" || m == "ground", "unknown modality " + m);
    counts[static_cast<int>(modality_from_string(m))]++;
    require(v.contains("pose") && v["pose"].is_object(), "view.pose must be an object");
    require(is_number_array(v["pose"].value("R", json()), 9), "pose.R must hold 9 numbers");
    require(is_number_array(v["pose"].value("t", json()), 3), "pose.t must hold 3 numbers");
    require(v.contains("width") && v["width"].is_number_integer() && v["width"].get<int>() > 0,
            "view.width must be a positive integer");
    require(v.contains("height") && v["height"].is_number_integer() && v["height"].get<int>() > 0,
            "view.height must be a positive integer");
    require(v.contains("depth") && v["depth"].is_string(), "view.depth must name a file");
    if (v.contains("pointmap")) require(v["pointmap"].is_string(), "view.pointmap must be a string");
    const bool has_rho = v.contains("rho");
    const bool has_intr = v.contains("intrinsics");
    if (m == "satellite") {
      require(has_rho && !has_intr, "satellite views carry rho and no intrinsics");
      require(v["rho"].is_number() && v["rho"].get<double>() > 0.0, "rho must be positive");
    } else {
      require(has_intr && !has_rho, "perspective views carry intrinsics and no rho");
      const auto& in = v["intrinsics"];
      require(in.is_object(), "intrinsics must be an object");
      for (const char* k : {"fx", "fy", "cu", "cv"}) {
        require(in.contains(k) && in[k].is_number(), std::string("intrinsics.") + k + " missing");
      }
    }
  }
  require(counts[0] == 2 && counts[1] == 2 && counts[2] == 2,
          "modality counts must be {satellite:2, uav:2, ground:2}");
  if (j.contains("correspondences")) {
    require(j["correspondences"].is_string(), "correspondences must name a file");
  }
}

json corr_json(const CorrespondenceSet& c) {
  json matches = json::array();
  for (const Match& m : c.matches) {
    matches.push_back({m.view_a, m.pixel_a.x(), m.pixel_a.y(), m.view_b, m.pixel_b.x(),
                       m.pixel_b.y()});
  }
  return {{"source", c.source == CorrespondenceSource::ground_truth ? "ground_truth"
                                                                      : "nearest_neighbor"},
          {"matches", matches}};
}

CorrespondenceSet corr_from_json(const json& j) {
  CorrespondenceSet c;
  const std::string src = j.at("source");
  if (src == "ground_truth") {
    c.source = CorrespondenceSource::ground_truth;
  } else if (src == "nearest_neighbor") {
    c.source = CorrespondenceSource::nearest_neighbor;
  } else {
    invalid("corr.json: unknown source " + src);
  }
  for (const auto& m : j.at("matches")) {
    if (!is_number_array(m, 6)) invalid("corr.json: each match needs six numbers");
    c.matches.push_back({m[0].get<int>(), Vec2(m[1].get<double>(), m[2].get<double>()),
                         m[3].get<int>(), Vec2(m[4].get<double>(), m[5].get<double>())});
  }
  return c;
}

}  // namespace

std::array<std::string, 6> view_names(const TriViewSample& meta) {
  std::array<std::string, 6> names;
  int seen[3] = {0, 0, 0};
  for (int i = 0; i < 6; ++i) {
    const Modality m = meta.views[i].modality;
    const char* prefix = m == Modality::satellite ? "sat" : (m == Modality::uav ? "uav" : "grd");
    names[i] = prefix + std::to_string(seen[static_cast<int>(m)]++);
  }
  return names;
}

SampleData from_synthetic(const SyntheticSample& s, const std::string& id, int scene) {
  SampleData d;
  d.id = id;
  d.scene = scene;
  d.seed = s.seed;
  d.meta = s.meta;
  d.depths = s.depths;
  for (int i = 0; i < 6; ++i) d.pointmaps[i] = s.pointmaps[i];
  d.correspondences = s.correspondences;
  return d;
}

SampleData with_prediction(const SampleData& gt, const PredictionBundle& pred) {
  SampleData d = gt;
  for (int i = 0; i < 6; ++i) {
    d.meta.views[i].pose = pred.poses[i];
    if (d.meta.views[i].modality == Modality::satellite) d.meta.views[i].rho = pred.rho[i];
    d.pointmaps[i] = pred.pointmaps[i];
  }
  return d;
}

PointMap view_pointmap(const SampleData& s, int i) {
  if (s.pointmaps[i]) return *s.pointmaps[i];
  const ViewRecord& v = s.meta.views[i];
  if (v.modality == Modality::satellite) {
    return lift_ortho(s.depths[i], SatTile{v.width, v.height, *v.rho, v.pose});
  }
  return lift_perspective(s.depths[i], *v.intrinsics);
}

void write_f32(const fs::path& path, std::span<const float> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!out) io_fail("write failed for " + path.string());
}

std::vector<float> read_f32(const fs::path& path, std::size_t expected_count) {
  std::error_code ec;
  const auto bytes = fs::file_size(path, ec);
  if (ec) io_fail("cannot stat " + path.string());
  if (bytes != expected_count * sizeof(float)) {
    invalid(path.filename().string() + ": expected " + std::to_string(expected_count * 4) +
            " bytes, found " + std::to_string(bytes));
  }
  std::vector<float> v(expected_count);
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail("cannot open " + path.string());
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
  if (!in) io_fail("read failed for " + path.string());
  return v;
}

void write_sample_dir(const fs::path& dir, const SampleData& s, const WriteOptions& opt) {
  s.meta.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) io_fail("cannot create " + dir.string());

  SampleData stored = s;
  for (auto& d : stored.depths) {
    for (double& x : d.values.data) x = static_cast<float>(x);
  }
  for (auto& pm : stored.pointmaps) {
    if (!pm) continue;
    for (Vec3& p : pm->points.data) p = p.cast<float>().cast<double>();
  }
  if (!opt.pointmaps) {
    for (auto& pm : stored.pointmaps) pm.reset();
  }

  const auto names = view_names(s.meta);
  json meta;
  meta["format"] = kSampleFormat;
  meta["id"] = s.id;
  meta["scene"] = s.scene;
  meta["seed"] = s.seed;
  meta["origin"] = {{"lat", s.meta.origin.lat}, {"lon", s.meta.origin.lon},
                    {"alt", s.meta.origin.alt}};
  meta["meters_per_pixel_gt"] = s.meta.meters_per_pixel_gt;
  meta["views"] = json::array();

  for (int i = 0; i < 6; ++i) {
    const ViewRecord& v = s.meta.views[i];
    json jv;
    jv["name"] = names[i];
    jv["modality"] = std::string(to_string(v.modality));
    jv["pose"] = pose_json(v.pose);
    jv["width"] = v.width;
    jv["height"] = v.height;
    if (v.rho) jv["rho"] = *v.rho;
    if (v.intrinsics) {
      jv["intrinsics"] = {{"fx", v.intrinsics->fx}, {"fy", v.intrinsics->fy},
                          {"cu", v.intrinsics->cu}, {"cv", v.intrinsics->cv}};
    }

    const DepthGrid& d = s.depths[i];
    if (d.height() != v.height || d.width() != v.width) {
      throw Error(ErrorKind::structural, "depth grid size differs from view " + names[i]);
    }
    std::vector<float> buf(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
      buf[k] = d.is_valid(k) ? static_cast<float>(d.values.data[k]) : 0.0f;
    }
    jv["depth"] = "depth_" + names[i] + ".f32";
    write_f32(dir / jv["depth"].get<std::string>(), buf);

    if (opt.pointmaps && s.pointmaps[i]) {
      const PointMap& pm = *s.pointmaps[i];
      std::vector<float> pbuf(pm.size() * 3);
      for (std::size_t k = 0; k < pm.size(); ++k) {
        for (int c = 0; c < 3; ++c) {
          pbuf[3 * k + c] = pm.is_valid(k) ? static_cast<float>(pm.points.data[k][c])
                                           : std::numeric_limits<float>::quiet_NaN();
        }
      }
      jv["pointmap"] = "pointmap_" + names[i] + ".f32";
      write_f32(dir / jv["pointmap"].get<std::string>(), pbuf);
    }

    if (opt.clouds) {
      // Built from the float32 values on disk so a re-read sample writes
      // the same cloud.
      PlyCloud cloud;
      const PointMap pm = view_pointmap(stored, i);
      for (std::size_t k = 0; k < pm.size(); ++k) {
        if (pm.is_valid(k)) cloud.points.push_back(v.pose.inverse_apply(pm.points.data[k]));
      }
      write_ply(dir / ("cloud_" + names[i] + ".ply"), cloud, opt.binary_ply);
    }
    meta["views"].push_back(jv);
  }

  if (s.correspondences) {
    meta["correspondences"] = "corr.json";
    write_text(dir / "corr.json", corr_json(*s.correspondences).dump(1) + "\n");
  }
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

void validate_meta(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    invalid(std::string("meta.json: ") + e.what());
  }
  validate_meta_json(j);
}

SampleData read_sample_dir(const fs::path& dir) {
  json j;
  try {
    j = json::parse(read_text(dir / "meta.json"));
  } catch (const json::parse_error& e) {
    invalid(std::string("meta.json: ") + e.what());
  }
  validate_meta_json(j);

  SampleData s;
  s.id = j["id"];
  s.scene = j["scene"];
  s.seed = j["seed"];
  s.meta.origin = {j["origin"]["lat"], j["origin"]["lon"], j["origin"]["alt"]};
  s.meta.meters_per_pixel_gt = j["meters_per_pixel_gt"];
  for (int i = 0; i < 6; ++i) {
    const json& jv = j["views"][i];
    ViewRecord& v = s.meta.views[i];
    v.modality = modality_from_string(jv["modality"].get<std::string>());
    v.pose = pose_from_json(jv["pose"]);
    v.width = jv["width"];
    v.height = jv["height"];
    if (jv.contains("rho")) v.rho = jv["rho"].get<double>();
    if (jv.contains("intrinsics")) {
      const json& in = jv["intrinsics"];
      v.intrinsics = Intrinsics{in["fx"], in["fy"], in["cu"], in["cv"], v.width, v.height};
    }

    const std::size_t n = static_cast<std::size_t>(v.width) * v.height;
    const auto depth = read_f32(dir / jv["depth"].get<std::string>(), n);
    DepthGrid& d = s.depths[i];
    d = DepthGrid(v.height, v.width);
    for (std::size_t k = 0; k < n; ++k) {
      const float x = depth[k];
      if (std::isfinite(x) && x > 0.0f) {
        d.values.data[k] = x;
        d.valid.data[k] = 1;
      }
    }
    if (jv.contains("pointmap")) {
      const auto buf = read_f32(dir / jv["pointmap"].get<std::string>(), 3 * n);
      PointMap pm(v.height, v.width);
      for (std::size_t k = 0; k < n; ++k) {
        const float x = buf[3 * k], y = buf[3 * k + 1], z = buf[3 * k + 2];
        if (std::isnan(x) || std::isnan(y) || std::isnan(z)) continue;
        pm.points.data[k] = Vec3(x, y, z);
        pm.valid.data[k] = 1;
      }
      s.pointmaps[i] = std::move(pm);
    }
  }
  if (j.contains("correspondences")) {
    try {
      s.correspondences =
          corr_from_json(json::parse(read_text(dir / j["correspondences"].get<std::string>())));
    } catch (const json::exception& e) {
      invalid(std::string("corr.json: ") + e.what());
    }
  }
  s.meta.validate();
  return s;
}

void write_ply(const fs::path& path, const PlyCloud& cloud, bool binary) {
  const bool color = !cloud.colors.empty();
  if (color && cloud.colors.size() != cloud.points.size()) {
    throw Error(ErrorKind::structural, "PLY colors must match the point count");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail("cannot write " + path.string());
  out << "ply\n"
      << "format " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
      << "element vertex " << cloud.points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n";
  if (color) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  char num[64];
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const float xyz[3] = {static_cast<float>(cloud.points[i].x()),
                          static_cast<float>(cloud.points[i].y()),
                          static_cast<float>(cloud.points[i].z())};
    if (binary) {
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      if (color) out.write(reinterpret_cast<const char*>(cloud.colors[i].data()), 3);
    } else {
      std::snprintf(num, sizeof(num), "%.9g %.9g %.9g", xyz[0], xyz[1], xyz[2]);
      out << num;
      if (color) {
        out << ' ' << int(cloud.colors[i][0]) << ' ' << int(cloud.colors[i][1]) << ' '
            << int(cloud.colors[i][2]);
      }
      out << '\n';
    }
  }
  if (!out) io_fail("write failed for " + path.string());
}

PlyCloud read_ply(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "ply") invalid(path.string() + ": not a PLY file");
  bool binary = false;
  std::size_t count = 0;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string f;
      ls >> f;
      if (f == "binary_little_endian") {
        binary = true;
      } else if (f != "ascii") {
        invalid(path.string() + ": unsupported PLY format " + f);
      }
    } else if (word == "element") {
      std::string name;
      ls >> name >> count;
      if (name != "vertex") invalid(path.string() + ": only vertex elements are supported");
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  const bool color = props.size() == 6;
  if (props.size() != 3 && !color) invalid(path.string() + ": unexpected vertex properties");

  PlyCloud cloud;
  cloud.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    float xyz[3];
    std::array<std::uint8_t, 3> rgb{};
    if (binary) {
      in.read(reinterpret_cast<char*>(xyz), sizeof(xyz));
      if (color) in.read(reinterpret_cast<char*>(rgb.data()), 3);
    } else {
      int r = 0, g = 0, b = 0;
      in >> xyz[0] >> xyz[1] >> xyz[2];
      if (color) {
        in >> r >> g >> b;
        rgb = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
               static_cast<std::uint8_t>(b)};
      }
    }
    if (!in) invalid(path.string() + ": truncated vertex data");
    cloud.points.emplace_back(xyz[0], xyz[1], xyz[2]);
    if (color) cloud.colors.push_back(rgb);
  }
  return cloud;
}

SplitManifest split_scenes(int n_scenes, std::uint64_t seed) {
  if (n_scenes < 1) throw Error(ErrorKind::validation, "need at least one scene");
  std::vector<int> ids(n_scenes);
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 rng(seed);
  for (int i = n_scenes - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(ids[i], ids[pick(rng)]);
  }
  // 75 : 5 : 5 scene proportions; val and test each get one scene as soon as
  // there are at least three scenes.
  int n_held = static_cast<int>(std::lround(n_scenes * 5.0 / 85.0));
  if (n_scenes >= 3) n_held = std::max(n_held, 1);
  SplitManifest m;
  m.val.assign(ids.begin(), ids.begin() + n_held);
  m.test.assign(ids.begin() + n_held, ids.begin() + 2 * n_held);
  m.train.assign(ids.begin() + 2 * n_held, ids.end());
  for (auto* v : {&m.train, &m.val, &m.test}) std::sort(v->begin(), v->end());
  return m;
}

}  // namespace xview
