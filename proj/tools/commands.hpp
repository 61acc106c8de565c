#pragma once

#include "xview/evaluation.hpp"
#include "xview/synth.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace xview::cli {

namespace fs = std::filesystem;

// Output layout of `generate`:
//   <out>/manifest.json
//   <out>/scene_NNNN/scene.json
//   <out>/scene_NNNN/sample_MM/          one sample directory each

struct GenerateOptions {
  int scenes = 1;
  int samples_per_scene = 1;
  std::uint64_t seed = 0;
  fs::path out;
  CaptureConfig capture;
  int boxes = 12;
};
void cmd_generate(const GenerateOptions& opt, std::ostream& out);

struct PerturbOptions {
  fs::path gt;
  fs::path out;
  NoiseSpec noise;
  std::uint64_t seed = 0;
};
void cmd_perturb(const PerturbOptions& opt, std::ostream& out);

struct EvalCliOptions {
  fs::path pred;
  fs::path gt;
  fs::path out;
  std::optional<fs::path> csv;  // defaults to <out> with a .csv extension
  bool per_view_accmean = false;
  int threads = 1;
  int stride = 2;
};
void cmd_eval(const EvalCliOptions& opt, std::ostream& out);

struct LocalizeOptions {
  fs::path sample;
  std::optional<Modality> drop;
  std::optional<fs::path> overlay;  // defaults to <sample>/localize_overlay.ply
};
void cmd_localize(const LocalizeOptions& opt, std::ostream& out);

struct PairOptions {
  fs::path scene;
  double cell = 2.0;
  std::size_t top = 5;
  bool iou = false;
  int stride = 2;
};
void cmd_pair(const PairOptions& opt, std::ostream& out);

struct FuseOptions {
  fs::path rel;
  fs::path anchor;
  int width = 0;
  int height = 0;
  double pcc_min = 0.9;
  std::optional<fs::path> out;
};
void cmd_fuse(const FuseOptions& opt, std::ostream& out);

struct LossesOptions {
  fs::path pred;
  fs::path gt;
  bool warmup = false;
};
void cmd_losses(const LossesOptions& opt, std::ostream& out);

struct SweepOptions {
  fs::path target;
  fs::path scene;
  double min = 100.0;
  double max = 200.0;
  double step = 10.0;
  SweepCamera camera;
};
void cmd_sweep(const SweepOptions& opt, std::ostream& out);

void cmd_validate(const fs::path& sample, std::ostream& out);

// Scene description file written next to the samples of a scene.
void write_scene_json(const fs::path& path, const SceneSpec& scene,
                      const std::vector<std::pair<std::string, double>>& sample_shifts);
SceneSpec read_scene_json(const fs::path& path,
                          std::vector<std::pair<std::string, double>>* sample_shifts = nullptr);

/// Sample directories below `root` (any directory holding meta.json), as
/// paths relative to `root` in lexicographic order.
std::vector<fs::path> find_samples(const fs::path& root);

/// Rebuild the synthetic-sample view of a sample directory.
SyntheticSample to_synthetic(const SampleData& s);

}  // namespace xview::cli
