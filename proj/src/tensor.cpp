#include "mapfsel/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "mapfsel/ensembles.hpp"
#include "mapfsel/simd/kernels.hpp"

namespace mapfsel {

RescaleSpec RescaleSpec::parse(const std::string& s, int target) {
  RescaleSpec spec;
  spec.target = target;
  std::string clean;
  for (char ch : s)
    if (ch != ' ') clean.push_back(ch);
  if (clean.size() != kNumChannels)
    throw std::invalid_argument("rescale spec needs exactly 7 p/r characters: " + s);
  for (int i = 0; i < kNumChannels; ++i) {
    if (clean[i] != 'p' && clean[i] != 'r')
      throw std::invalid_argument("rescale spec characters must be p or r: " + s);
    spec.method[i] = clean[i];
  }
  return spec;
}

std::string RescaleSpec::str() const {
  return std::string(method.begin(), method.end());
}

FeatureTensor assemble(const Scenario& scn) {
  const Grid& g = *scn.grid;
  FeatureTensor t;
  t.height = g.height();
  t.width = g.width();
  t.obstacle.assign(g.blocked_mask().begin(), g.blocked_mask().end());
  for (auto& ch : t.channels) ch.assign(g.size(), 0.0);

  for (int i = 0; i < g.size(); ++i)
    t.channels[0][i] = t.obstacle[i] ? 1.0 : 0.0;
  for (const auto& agent : scn.agents) {
    t.channels[1][g.index(agent.start)] = 1.0;
    t.channels[2][g.index(agent.goal)] = 1.0;
  }
  t.channels[3] = heatmap_canonical_visits(scn).value;
  t.channels[4] = heatmap_pairwise_conflicts(scn, false).value;
  t.channels[5] = heatmap_pairwise_conflicts(scn, true).value;
  t.channels[6] = heatmap_all_shortest_visits(scn).value;
  return t;
}

NormalizationStats fit_stats(const std::vector<FeatureTensor>& tensors) {
  if (tensors.empty())
    throw std::invalid_argument("fit_stats: empty tensor collection");
  NormalizationStats stats;
  std::vector<double> mask;
  for (const auto& t : tensors) {
    mask.resize(t.obstacle.size());
    for (std::size_t i = 0; i < mask.size(); ++i)
      mask[i] = t.obstacle[i] ? 0.0 : 1.0;
    for (int ch = 0; ch < kNumChannels; ++ch) {
      double m = simd::active().masked_max(t.channels[ch].data(), mask.data(),
                                           mask.size());
      stats.max_value[ch] = std::max(stats.max_value[ch], m);
    }
  }
  return stats;
}

void apply_stats(FeatureTensor& t, const NormalizationStats& stats) {
  const auto& k = simd::active();
  for (int ch = 0; ch < kNumChannels; ++ch) {
    if (stats.max_value[ch] > 0.0)
      k.scale(t.channels[ch].data(), 100.0 / stats.max_value[ch],
              t.channels[ch].size());
  }
  for (std::size_t i = 0; i < t.obstacle.size(); ++i) {
    if (!t.obstacle[i]) continue;
    t.channels[0][i] = 100.0;
    t.channels[1][i] = 0.0;
    t.channels[2][i] = 0.0;
    t.channels[3][i] = kObstacleOverride;
    t.channels[4][i] = 0.0;
    t.channels[5][i] = 0.0;
    t.channels[6][i] = kObstacleOverride;
  }
  t.normalized = true;
}

namespace {

std::vector<double> pad_channel(const std::vector<double>& src, int h, int w,
                                int target, double fill) {
  std::vector<double> dst(static_cast<std::size_t>(target) * target, fill);
  const int row_off = (target - h) / 2;
  const int col_off = (target - w) / 2;
  for (int r = 0; r < h; ++r)
    std::copy(src.begin() + static_cast<std::size_t>(r) * w,
              src.begin() + static_cast<std::size_t>(r + 1) * w,
              dst.begin() + static_cast<std::size_t>(r + row_off) * target +
                  col_off);
  return dst;
}

std::vector<double> bilinear_channel(const std::vector<double>& src, int h,
                                     int w, int target) {
  std::vector<double> dst(static_cast<std::size_t>(target) * target);
  // align_corners=false convention: sample at pixel centers
  const double sy = static_cast<double>(h) / target;
  const double sx = static_cast<double>(w) / target;
  for (int r = 0; r < target; ++r) {
    double fy = (r + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y0c = std::clamp(y0, 0, h - 1);
    int y1c = std::clamp(y0 + 1, 0, h - 1);
    for (int c = 0; c < target; ++c) {
      double fx = (c + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x0c = std::clamp(x0, 0, w - 1);
      int x1c = std::clamp(x0 + 1, 0, w - 1);
      double top = src[y0c * w + x0c] * (1 - wx) + src[y0c * w + x1c] * wx;
      double bot = src[y1c * w + x0c] * (1 - wx) + src[y1c * w + x1c] * wx;
      dst[static_cast<std::size_t>(r) * target + c] = top * (1 - wy) + bot * wy;
    }
  }
  return dst;
}

}  // namespace

FeatureTensor rescale(const FeatureTensor& t, const RescaleSpec& spec) {
  if (!t.normalized)
    throw std::invalid_argument("rescale: tensor must be normalized first");
  for (int ch = 0; ch < kNumChannels; ++ch)
    if (spec.method[ch] == 'p' &&
        (t.height > spec.target || t.width > spec.target))
      throw std::invalid_argument(
          "map larger than rescale target " + std::to_string(spec.target) +
          " with a 'p' channel; use a larger target");

  FeatureTensor out;
  out.height = spec.target;
  out.width = spec.target;
  out.normalized = true;
  for (int ch = 0; ch < kNumChannels; ++ch) {
    out.channels[ch] =
        spec.method[ch] == 'p'
            ? pad_channel(t.channels[ch], t.height, t.width, spec.target,
                          kPadValue[ch])
            : bilinear_channel(t.channels[ch], t.height, t.width, spec.target);
  }
  return out;
}

FeatureTensor augment(const FeatureTensor& t, std::mt19937_64& rng,
                      const AugmentConfig& cfg) {
  if (t.height != t.width)
    throw std::invalid_argument("augment: tensor must be square");
  const int n = t.height;
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  const bool do_flip = uni(rng) < cfg.probability;
  const bool do_rot = uni(rng) < cfg.probability;
  int quarters = 0;
  if (do_rot) {
    std::uniform_int_distribution<int> q(0, 3);
    quarters = q(rng);
  }
  const bool do_erase = uni(rng) < cfg.probability;
  int er = 0, ec = 0, eh = 0, ew = 0;
  if (do_erase) {
    std::uniform_real_distribution<double> frac(cfg.erase_min_frac,
                                                cfg.erase_max_frac);
    double area = frac(rng) * n * n;
    std::uniform_real_distribution<double> aspect(0.5, 2.0);
    double asp = aspect(rng);
    eh = std::clamp(static_cast<int>(std::lround(std::sqrt(area * asp))), 1, n);
    ew = std::clamp(static_cast<int>(std::lround(std::sqrt(area / asp))), 1, n);
    std::uniform_int_distribution<int> rr(0, n - eh), rc(0, n - ew);
    er = rr(rng);
    ec = rc(rng);
  }

  FeatureTensor out = t;
  for (int ch = 0; ch < kNumChannels; ++ch) {
    auto& dst = out.channels[ch];
    const auto& src = t.channels[ch];
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        int sr = r, sc = c;
        // invert rotation then flip to find the source pixel
        for (int q = 0; q < quarters; ++q) {
          int tr = sc, tc = n - 1 - sr;  // inverse of a 90 deg CW rotation
          sr = tr;
          sc = tc;
        }
        if (do_flip) sc = n - 1 - sc;
        dst[static_cast<std::size_t>(r) * n + c] =
            src[static_cast<std::size_t>(sr) * n + sc];
      }
    if (do_erase)
      for (int r = er; r < er + eh; ++r)
        for (int c = ec; c < ec + ew; ++c)
          dst[static_cast<std::size_t>(r) * n + c] = kPadValue[ch];
  }
  return out;
}

void write_tensor_binary(const FeatureTensor& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  std::vector<float> buf;
  buf.reserve(t.channels[0].size());
  for (int ch = 0; ch < kNumChannels; ++ch) {
    buf.assign(t.channels[ch].begin(), t.channels[ch].end());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
}

FeatureTensor read_tensor_binary(const std::string& path, int side) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  FeatureTensor t;
  t.height = side;
  t.width = side;
  t.normalized = true;
  std::vector<float> buf(static_cast<std::size_t>(side) * side);
  for (int ch = 0; ch < kNumChannels; ++ch) {
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw std::runtime_error("truncated tensor file " + path);
    t.channels[ch].assign(buf.begin(), buf.end());
  }
  return t;
}

void write_manifest(const TensorExport& info, int side,
                    const std::vector<std::string>& tensor_files,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "dataset " << info.dataset_name << "\n"
      << "channels obstacle,start,goal,canonical_visits,shortest_conflicts,"
         "suboptimal_conflicts,all_shortest_visits\n"
      << "dtype float32-le\n"
      << "shape " << kNumChannels << "x" << side << "x" << side << "\n"
      << "rescale_spec " << info.spec.str() << "\n"
      << "labels " << info.label_file << "\n"
      << "normalization";
  for (double m : info.stats.max_value) out << " " << m;
  out << "\n";
  for (const auto& f : tensor_files) out << "tensor " << f << "\n";
}

}  // namespace mapfsel
