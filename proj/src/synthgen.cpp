#include "geofuse/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "geofuse/error.hpp"
#include "geofuse/rng.hpp"

namespace geofuse {
namespace {

constexpr std::uint64_t kLayoutStream = 1;
constexpr std::uint64_t kLidarNoiseStream = 2;
constexpr std::uint64_t kSarNoiseStream = 3;
constexpr std::uint64_t kOpticalNoiseStream = 4;

using Rgb = std::array<double, 3>;

struct Canvas {
  std::size_t width, height;
  std::vector<std::uint8_t> label;
  std::vector<double> height_m;
  std::vector<double> sar;
  std::vector<Rgb> rgb;

  Canvas(std::size_t w, std::size_t h)
      : width(w), height(h), label(w * h, 0), height_m(w * h, 0.0),
        sar(w * h, 0.0), rgb(w * h) {}

  std::size_t idx(std::size_t r, std::size_t c) const { return r * width + c; }
};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void paint_background(Canvas& cv, Rng& rng) {
  const double sar_level = rng.uniform(0.4, 0.5);
  // Soil brightness overlaps roof grays; its brown tint varies per scene
  // and is faint in some, so color alone cannot always isolate roofs.
  const double level = rng.uniform(0.35, 0.55);
  const double tint = rng.uniform(0.1, 1.0);
  const Rgb soil = {level + 0.09 * tint, level, level - 0.10 * tint};
  for (std::size_t q = 0; q < cv.label.size(); ++q) {
    cv.label[q] = static_cast<std::uint8_t>(UrbanClass::background);
    cv.height_m[q] = 0.0;
    cv.sar[q] = sar_level + rng.uniform(-0.03, 0.03);
    cv.rgb[q] = soil;
  }
}

void paint_road(Canvas& cv, Rng& rng) {
  const bool horizontal = rng.uniform() < 0.5;
  const std::size_t extent = horizontal ? cv.height : cv.width;
  const std::size_t road_width = 2 + rng.uniform_index(3);  // 2..4 px
  const std::size_t start = rng.uniform_index(extent - road_width + 1);
  const double sar_level = rng.uniform(0.1, 0.2);
  const double tone = rng.uniform(0.16, 0.24);
  const Rgb asphalt = {tone, tone, tone + 0.02};
  for (std::size_t a = start; a < start + road_width; ++a) {
    const std::size_t along = horizontal ? cv.width : cv.height;
    for (std::size_t b = 0; b < along; ++b) {
      const std::size_t q = horizontal ? cv.idx(a, b) : cv.idx(b, a);
      cv.label[q] = static_cast<std::uint8_t>(UrbanClass::road);
      cv.height_m[q] = 0.0;
      cv.sar[q] = sar_level;
      cv.rgb[q] = asphalt;
    }
  }
}

void paint_vegetation(Canvas& cv, Rng& rng) {
  const double cy = rng.uniform(0.0, static_cast<double>(cv.height));
  const double cx = rng.uniform(0.0, static_cast<double>(cv.width));
  const double ry = rng.uniform(3.0, 9.0);
  const double rx = rng.uniform(3.0, 9.0);
  const double canopy = rng.uniform(1.0, 6.0);
  for (std::size_t r = 0; r < cv.height; ++r)
    for (std::size_t c = 0; c < cv.width; ++c) {
      const double dy = (static_cast<double>(r) + 0.5 - cy) / ry;
      const double dx = (static_cast<double>(c) + 0.5 - cx) / rx;
      if (dx * dx + dy * dy > 1.0) continue;
      const std::size_t q = cv.idx(r, c);
      cv.label[q] = static_cast<std::uint8_t>(UrbanClass::vegetation);
      cv.height_m[q] = std::clamp(canopy + rng.uniform(-1.0, 1.0), 1.0, 6.0);
      cv.sar[q] = rng.uniform(0.15, 0.85);
      cv.rgb[q] = {0.30 + rng.uniform(-0.05, 0.05),
                   0.42 + rng.uniform(-0.05, 0.05),
                   0.24 + rng.uniform(-0.05, 0.05)};
    }
}

void paint_building(Canvas& cv, Rng& rng) {
  const std::size_t bh = std::min(cv.height, 5 + rng.uniform_index(10));
  const std::size_t bw = std::min(cv.width, 5 + rng.uniform_index(10));
  const std::size_t r0 = rng.uniform_index(cv.height - bh + 1);
  const std::size_t c0 = rng.uniform_index(cv.width - bw + 1);
  const double roof_height = rng.uniform(8.0, 40.0);
  const double sar_level = rng.uniform(0.7, 0.9);
  const double gray = rng.uniform(0.35, 0.65);
  for (std::size_t r = r0; r < r0 + bh; ++r)
    for (std::size_t c = c0; c < c0 + bw; ++c) {
      const std::size_t q = cv.idx(r, c);
      cv.label[q] = static_cast<std::uint8_t>(UrbanClass::building);
      cv.height_m[q] = roof_height;
      cv.sar[q] = sar_level;
      cv.rgb[q] = {gray, gray, gray};
    }
}

}  // namespace

void SceneSpec::validate() const {
  if (width == 0 || height == 0 || width % 4 != 0 || height % 4 != 0)
    throw ValidationError("scene extents must be positive multiples of 4");
  if (width < 16 || height < 16)
    throw ValidationError("scene extents must be at least 16");
  if (!(lidar_sigma >= 0.0) || !(optical_sigma >= 0.0) ||
      !(sar_speckle_rate >= 0.0) || sar_speckle_rate > 1.0)
    throw ValidationError("noise levels must be >= 0 (speckle rate <= 1)");
}

SceneSample generate_scene(const SceneSpec& spec) {
  spec.validate();
  Canvas cv(spec.width, spec.height);
  Rng layout = Rng::substream(spec.seed, kLayoutStream);
  paint_background(cv, layout);
  // Paint order fixes label precedence: road < vegetation < building.
  for (std::size_t i = 0; i < spec.road_count; ++i) paint_road(cv, layout);
  for (std::size_t i = 0; i < spec.vegetation_blobs; ++i)
    paint_vegetation(cv, layout);
  for (std::size_t i = 0; i < spec.building_count; ++i)
    paint_building(cv, layout);

  const Georef georef{500000.0, 4500000.0, 1.0};
  const std::size_t W = spec.width, H = spec.height, P = W * H;

  Rng lidar_noise = Rng::substream(spec.seed, kLidarNoiseStream);
  std::vector<float> lidar(P);
  for (std::size_t q = 0; q < P; ++q) {
    // Truncated at 3 sigma so class height ranges stay separable.
    const double n = std::clamp(lidar_noise.normal(), -3.0, 3.0);
    lidar[q] = static_cast<float>(cv.height_m[q] + spec.lidar_sigma * n);
  }

  Rng sar_noise = Rng::substream(spec.seed, kSarNoiseStream);
  std::vector<float> sar(P);
  for (std::size_t q = 0; q < P; ++q) {
    double v = cv.sar[q];
    const double hit = sar_noise.uniform();
    const double factor = sar_noise.uniform(0.3, 2.0);
    if (hit < spec.sar_speckle_rate) v *= factor;
    sar[q] = static_cast<float>(clamp01(v));
  }

  Rng optical_noise = Rng::substream(spec.seed, kOpticalNoiseStream);
  std::vector<float> optical(3 * P);
  for (std::size_t ch = 0; ch < 3; ++ch)
    for (std::size_t q = 0; q < P; ++q)
      optical[ch * P + q] = static_cast<float>(
          clamp01(cv.rgb[q][ch] + spec.optical_sigma * optical_noise.normal()));

  return SceneSample{
      Raster(W, H, 1, Modality::lidar, georef, std::move(lidar)),
      Raster(W, H, 1, Modality::sar, georef, std::move(sar)),
      Raster(W, H, 3, Modality::optical, georef, std::move(optical)),
      LabelMap(W, H, kNumUrbanClasses, std::move(cv.label)),
  };
}

std::vector<SceneSample> generate_dataset(std::uint64_t base_seed,
                                          std::size_t count,
                                          const SceneSpec& spec_template) {
  if (count == 0) throw ValidationError("dataset count must be >= 1");
  std::vector<SceneSample> out;
  out.reserve(count);
  SceneSpec spec = spec_template;
  for (std::size_t k = 0; k < count; ++k) {
    spec.seed = base_seed + k;
    out.push_back(generate_scene(spec));
  }
  return out;
}

void write_scene(const SceneSample& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_raster(scene.lidar, dir / "lidar.gfr");
  write_raster(scene.sar, dir / "sar.gfr");
  write_raster(scene.optical, dir / "optical.gfr");
  write_labels(scene.labels, dir / "labels.gfl");
}

SceneSample read_scene(const std::filesystem::path& dir) {
  return SceneSample{read_raster(dir / "lidar.gfr"),
                     read_raster(dir / "sar.gfr"),
                     read_raster(dir / "optical.gfr"),
                     read_labels(dir / "labels.gfl")};
}

}  // namespace geofuse
