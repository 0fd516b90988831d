#pragma once
// 7-channel feature tensors: assembly from a scenario, dataset-wide 0-100
// normalization with the obstacle-200 override, per-channel pad/interpolate
// rescaling, and training-time augmentation.
//
// Channel order (fixed): 1 obstacle, 2 start, 3 goal, 4 canonical-visit
// heatmap, 5 shortest-pair conflicts, 6 shortest+1-suboptimal-pair
// conflicts, 7 all-shortest-visit heatmap.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mapfsel/grid.hpp"

namespace mapfsel {

constexpr int kNumChannels = 7;
constexpr double kObstacleOverride = 200.0;

// Per-channel fill for padding, erasing, and the obstacle override: heatmap
// channels 4 and 7 treat obstacles as 200; indicator/conflict channels as 0;
// channel 1 as 100 (it is itself the obstacle map).
constexpr std::array<double, kNumChannels> kPadValue = {100, 0, 0, 200, 0, 0, 200};

struct FeatureTensor {
  int height = 0;
  int width = 0;
  bool normalized = false;
  std::array<std::vector<double>, kNumChannels> channels;  // row-major
  std::vector<uint8_t> obstacle;  // 1 on obstacle cells, empty after rescale

  double& at(int ch, int r, int c) { return channels[ch][r * width + c]; }
  double at(int ch, int r, int c) const { return channels[ch][r * width + c]; }
};

struct RescaleSpec {
  std::array<char, kNumChannels> method{};  // 'p' pad or 'r' interpolate
  int target = 384;

  // 7 characters after stripping spaces, e.g. "ppp rrrp".
  static RescaleSpec parse(const std::string& s, int target = 384);
  std::string str() const;
};

struct NormalizationStats {
  // global per-channel max over non-obstacle cells
  std::array<double, kNumChannels> max_value{};
};

FeatureTensor assemble(const Scenario& scn);

NormalizationStats fit_stats(const std::vector<FeatureTensor>& tensors);
// divide by global max (skipped for all-zero channels), x100, then the
// obstacle overrides: channels 4/7 -> 200, channels 2/3/5/6 -> 0, channel 1
// -> {0,100}.
void apply_stats(FeatureTensor& t, const NormalizationStats& stats);

FeatureTensor rescale(const FeatureTensor& t, const RescaleSpec& spec);

struct AugmentConfig {
  double probability = 0.5;  // independent per transform
  double erase_min_frac = 0.02;
  double erase_max_frac = 0.20;
};

// horizontal flip, rotation by a random multiple of 90 degrees, and random
// erasing to the per-channel pad value; all channels share one decision.
FeatureTensor augment(const FeatureTensor& t, std::mt19937_64& rng,
                      const AugmentConfig& cfg = {});

// Dataset export: a manifest plus one float32 little-endian binary per
// scenario, channels contiguous in channel order, row-major.
struct TensorExport {
  std::string dataset_name;
  RescaleSpec spec;
  NormalizationStats stats;
  std::string label_file;
};

void write_tensor_binary(const FeatureTensor& t, const std::string& path);
FeatureTensor read_tensor_binary(const std::string& path, int side);
void write_manifest(const TensorExport& info, int side,
                    const std::vector<std::string>& tensor_files,
                    const std::string& path);

}  // namespace mapfsel
