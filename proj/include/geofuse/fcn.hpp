#pragma once

// Encoder/decoder fully convolutional segmentation network.
//
// Layout for depth D and F = base_filters:
//   input -> per-channel affine normalization
//   stem: 3x3 conv, stride 1, zero "same" padding, -> F channels, ReLU   (a0)
//   down d = 1..D: 4x4 conv, stride 2, padding 1, F -> F, ReLU          (a_d)
//   up d = D..1: nearest x2 upsample, concat with a_{d-1}, 3x3 conv
//                2F -> F, ReLU
//   head: 1x1 conv F -> num_classes (logits)

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "geofuse/raster.hpp"
#include "geofuse/rng.hpp"
#include "geofuse/tensor.hpp"

namespace geofuse {

struct FcnConfig {
  std::size_t in_channels = 5;
  std::size_t num_classes = 4;
  std::size_t base_filters = 16;
  std::size_t depth = 2;
  double learning_rate = 0.1;
  std::size_t batch_size = 4;
  std::size_t epochs = 20;
  double l2 = 0.0;
  double l1 = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
  /// Tile extents must be multiples of 2^depth.
  std::size_t tile_multiple() const { return std::size_t{1} << depth; }

  friend bool operator==(const FcnConfig&, const FcnConfig&) = default;
};

/// x' = x * scale[c] + shift[c]. Fitted from training data, not trained.
struct ChannelAffine {
  std::vector<double> scale;
  std::vector<double> shift;

  friend bool operator==(const ChannelAffine&, const ChannelAffine&) = default;
};

struct DecoderStage {
  std::size_t scale = 2;
  ConvParams conv;

  friend bool operator==(const DecoderStage&, const DecoderStage&) = default;
};

struct FcnModel {
  FcnConfig config;
  ChannelAffine input_norm;
  /// encoder[0] is the stride-1 stem; encoder[d] for d >= 1 downsamples.
  std::vector<ConvParams> encoder;
  /// decoder[0] is the deepest stage.
  std::vector<DecoderStage> decoder;
  ConvParams head;

  /// Trainable conv layers in canonical order: encoder, decoder, head.
  std::vector<ConvParams*> layers();
  std::vector<const ConvParams*> layers() const;
  std::size_t parameter_count() const;

  friend bool operator==(const FcnModel&, const FcnModel&) = default;
};

/// Per-layer gradients in the same order as FcnModel::layers().
struct GradientTape {
  std::vector<Tensor> weight_grads;
  std::vector<Tensor> bias_grads;

  static GradientTape zeros_like(const FcnModel& model);
  void accumulate(const GradientTape& other);
  void scale(double factor);
  double squared_norm() const;
  bool all_finite() const;
};

/// Activations retained for the backward pass.
struct ForwardTrace {
  Tensor input;                      // normalized input
  std::vector<Tensor> encoder_pre;   // conv outputs before ReLU
  std::vector<Tensor> encoder_post;  // after ReLU
  std::vector<Tensor> decoder_in;    // upsampled ++ skip
  std::vector<Tensor> decoder_pre;
  std::vector<Tensor> decoder_post;
  Tensor logits;
};

struct Sample {
  Tensor input;  // [channels, H, W]
  LabelMap labels;
};

using Dataset = std::vector<Sample>;

/// Builds a model with fan-in scaled uniform weights and zero biases drawn
/// from `config.seed`. Identical configs give bit-identical models.
FcnModel build_fcn(const FcnConfig& config);

/// Sets the input normalization to zero mean / unit variance per channel
/// over every pixel of `tiles`.
void fit_input_normalization(FcnModel& model, const Dataset& tiles);

/// Logits [num_classes, H, W]. Adds the exact conv MAC count to `*macs`.
Tensor forward(const FcnModel& model, const Tensor& input,
               std::uint64_t* macs = nullptr);
ForwardTrace forward_trace(const FcnModel& model, const Tensor& input,
                           std::uint64_t* macs = nullptr);
/// Parameter gradients of sum(logit_grad * logits).
GradientTape backward(const FcnModel& model, const ForwardTrace& trace,
                      const Tensor& logit_grad, std::uint64_t* macs = nullptr);

/// Mean cross-entropy loss over `samples` and the parameter gradient of
/// that mean.
struct LossAndGradient {
  double loss = 0.0;
  GradientTape gradient;
};
LossAndGradient loss_and_gradient(const FcnModel& model,
                                  std::span<const Sample> samples,
                                  std::uint64_t* macs = nullptr);

/// Unweighted mean of per-tile cross-entropy.
double mean_loss(const FcnModel& model, std::span<const Sample> samples,
                 std::uint64_t* macs = nullptr);

void apply_sgd(FcnModel& model, const GradientTape& gradient);

// Dihedral augmentation. rot90 maps out[i][j] = in[n-1-j][i], so the label
// map [[1,2],[3,4]] becomes [[3,1],[4,2]].
enum class Transform { identity, rot90, rot180, rot270, flip_h, flip_v };
inline constexpr Transform kAllTransforms[] = {
    Transform::identity, Transform::rot90,  Transform::rot180,
    Transform::rot270,   Transform::flip_h, Transform::flip_v};

Tensor apply_transform(const Tensor& input, Transform t);
LabelMap apply_transform(const LabelMap& labels, Transform t);
Sample apply_transform(const Sample& sample, Transform t);
/// Draws one of the six transforms uniformly.
Sample augment(const Sample& sample, Rng& rng);

class BudgetTracker {
 public:
  using Clock = std::chrono::steady_clock;

  BudgetTracker(double max_seconds = std::numeric_limits<double>::infinity(),
                std::uint64_t max_macs =
                    std::numeric_limits<std::uint64_t>::max())
      : wall_start_(Clock::now()), max_seconds_(max_seconds),
        max_macs_(max_macs) {}

  double elapsed_seconds() const {
    return std::chrono::duration<double>(Clock::now() - wall_start_).count();
  }
  bool time_exhausted() const { return elapsed_seconds() >= max_seconds_; }
  bool macs_exhausted() const { return mac_count >= max_macs_; }
  bool exhausted() const { return time_exhausted() || macs_exhausted(); }

  double max_seconds() const { return max_seconds_; }
  std::uint64_t max_macs() const { return max_macs_; }

  std::uint64_t mac_count = 0;

 private:
  Clock::time_point wall_start_;
  double max_seconds_;
  std::uint64_t max_macs_;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double elapsed_seconds = 0.0;
  std::uint64_t macs = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  FcnModel model;
  TrainHistory history;
  /// False when the budget ran out before a single epoch finished; `model`
  /// is then the initial snapshot.
  bool complete = true;
  std::string stop_reason;
  std::size_t best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
};

/// Mini-batch SGD with augmentation. Returns the epoch snapshot with the
/// lowest validation loss (training loss when `val_set` is empty). Throws
/// NumericError on a non-finite loss or gradient.
TrainResult train(const FcnModel& initial, const Dataset& train_set,
                  const Dataset& val_set, BudgetTracker& budget);

/// Per-pixel argmax over classes; ties go to the lowest class index.
LabelMap argmax_labels(const Tensor& logits);

Tensor raster_to_tensor(const Raster& raster);

/// Segments a raster. Extents that are not multiples of 2^depth are
/// reflect-padded and the prediction cropped back.
LabelMap predict(const FcnModel& model, const Raster& raster);
LabelMap predict(const FcnModel& model, const Tensor& input);

// GFM1 model files:
//   "GFM1" | u32 version=1 | u32 in_channels | u32 num_classes | u32 depth
//   | u32 base_filters | u64 seed
//   then one record per layer: u8 kind | u32 x4 weight shape
//   | f32 weights | f32 biases (shape[0] of them)
// kinds: 0 input normalization ([C,1,1,1] scale, C shifts), 1 stem conv,
// 2 downsampling conv, 3 decoder conv, 4 head.
std::vector<std::uint8_t> encode_model(const FcnModel& model);
FcnModel decode_model(std::span<const std::uint8_t> bytes);
void write_model(const FcnModel& model, const std::filesystem::path& path);
FcnModel read_model(const std::filesystem::path& path);

}  // namespace geofuse
