#include "geofuse/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "geofuse/error.hpp"
#include "geofuse/fusion.hpp"
#include "geofuse/rng.hpp"

namespace geofuse {

std::size_t InputOptions::channel_count() const {
  std::size_t n = 0;
  for (Modality m : modalities) n += m == Modality::optical ? 3 : 1;
  return n;
}

std::vector<Modality> parse_modalities(const std::string& list) {
  std::vector<Modality> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    const std::string name = list.substr(start, comma - start);
    const Modality m = parse_modality(name);
    if (m == Modality::fused)
      throw ValidationError("'fused' is not an input modality");
    if (std::find(out.begin(), out.end(), m) != out.end())
      throw ValidationError("duplicate modality '" + name + "'");
    out.push_back(m);
    start = comma + 1;
  }
  return out;
}

std::string format_modalities(std::span<const Modality> modalities) {
  std::string s;
  for (Modality m : modalities) {
    if (!s.empty()) s += ",";
    s += to_string(m);
  }
  return s;
}

Raster assemble_input(const SceneSample& scene, const InputOptions& options) {
  if (options.modalities.empty())
    throw ValidationError("at least one modality is required");
  std::vector<Raster> parts;
  for (Modality m : options.modalities) {
    const Raster& src = m == Modality::lidar ? scene.lidar
                        : m == Modality::sar ? scene.sar
                                             : scene.optical;
    parts.push_back(options.denoise ? denoise(src) : src);
  }
  return fuse_rasters(parts);
}

Sample make_sample(const SceneSample& scene, const InputOptions& options) {
  return Sample{raster_to_tensor(assemble_input(scene, options)), scene.labels};
}

Dataset make_dataset(std::span<const SceneSample> scenes,
                     const InputOptions& options) {
  Dataset out;
  out.reserve(scenes.size());
  for (const SceneSample& s : scenes) out.push_back(make_sample(s, options));
  return out;
}

Split split_indices(std::size_t n, std::uint64_t seed, double train_fraction,
                    double val_fraction) {
  if (train_fraction < 0.0 || val_fraction < 0.0 ||
      train_fraction + val_fraction > 1.0)
    throw ValidationError("split fractions must be >= 0 and sum to <= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  const auto n_train =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
  const auto n_val =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * val_fraction));
  Split split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                   order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                    order.end());
  return split;
}

std::vector<std::filesystem::path> list_scene_dirs(
    const std::filesystem::path& data_dir) {
  if (!std::filesystem::is_directory(data_dir))
    throw ValidationError("data directory '" + data_dir.string() +
                          "' does not exist");
  std::vector<std::pair<std::uint64_t, std::filesystem::path>> found;
  for (const auto& entry : std::filesystem::directory_iterator(data_dir)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("scene_", 0) != 0) continue;
    std::uint64_t k = 0;
    const char* first = name.data() + 6;
    const char* last = name.data() + name.size();
    const auto [ptr, ec] = std::from_chars(first, last, k);
    if (ec != std::errc() || ptr != last || first == last) continue;
    found.emplace_back(k, entry.path());
  }
  std::sort(found.begin(), found.end());
  std::vector<std::filesystem::path> out;
  for (auto& [k, p] : found) out.push_back(std::move(p));
  return out;
}

}  // namespace geofuse
