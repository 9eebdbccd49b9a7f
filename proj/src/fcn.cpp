#include "geofuse/fcn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "geofuse/error.hpp"

namespace geofuse {
namespace {

constexpr std::size_t kStemKernel = 3;
constexpr std::size_t kDownKernel = 4;
constexpr std::size_t kDecoderKernel = 3;

// Substream tags.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kAugmentStream = 3;

ConvParams make_conv(std::size_t out, std::size_t in, std::size_t kernel,
                     std::size_t stride, std::size_t padding, double bound,
                     Rng& rng) {
  ConvParams p;
  p.weights = Tensor({out, in, kernel, kernel});
  for (double& w : p.weights.values()) w = rng.uniform(-bound, bound);
  p.bias = Tensor({out});
  p.stride = stride;
  p.padding = padding;
  return p;
}

double he_bound(std::size_t fan_in) {
  return std::sqrt(6.0 / static_cast<double>(fan_in));
}

void check_input(const FcnModel& model, const Tensor& input) {
  if (input.rank() != 3)
    throw ValidationError("model input must be [C,H,W]");
  if (input.dim(0) != model.config.in_channels)
    throw ValidationError(fmt::format(
        "model expects {} input channels, got {}", model.config.in_channels,
        input.dim(0)));
  const std::size_t mult = model.config.tile_multiple();
  if (input.dim(1) % mult != 0 || input.dim(2) % mult != 0)
    throw ValidationError(fmt::format(
        "tile extent {}x{} is not divisible by 2^depth = {}", input.dim(1),
        input.dim(2), mult));
}

Tensor normalize(const ChannelAffine& norm, const Tensor& input) {
  Tensor out = input;
  const std::size_t plane = input.dim(1) * input.dim(2);
  for (std::size_t c = 0; c < input.dim(0); ++c) {
    const double a = norm.scale[c], b = norm.shift[c];
    double* p = out.data().data() + c * plane;
    for (std::size_t q = 0; q < plane; ++q) p[q] = p[q] * a + b;
  }
  return out;
}

Tensor conv(const ConvParams& p, const Tensor& x, std::uint64_t* macs) {
  if (macs) *macs += conv_macs(p, x.dim(1), x.dim(2));
  return conv2d_forward(x, p);
}

// Splits a [A+B, H, W] gradient into its first A channels and the rest.
std::pair<Tensor, Tensor> split_channels(const Tensor& t, std::size_t first) {
  const std::size_t plane = t.dim(1) * t.dim(2);
  const auto mid = t.values().begin() +
                   static_cast<std::ptrdiff_t>(first * plane);
  Tensor a({first, t.dim(1), t.dim(2)},
           std::vector<double>(t.values().begin(), mid));
  Tensor b({t.dim(0) - first, t.dim(1), t.dim(2)},
           std::vector<double>(mid, t.values().end()));
  return {std::move(a), std::move(b)};
}

void add_into(Tensor& dst, const Tensor& src) {
  auto d = dst.data();
  const auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

std::size_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < n ? i : period - i);
}

void validate_dataset(const Dataset& set, const FcnConfig& config,
                      const char* name) {
  for (const Sample& s : set) {
    if (s.input.rank() != 3 || s.input.dim(0) != config.in_channels)
      throw ValidationError(fmt::format("{} tile has wrong channel count",
                                        name));
    if (s.input.dim(1) != set.front().input.dim(1) ||
        s.input.dim(2) != set.front().input.dim(2))
      throw ValidationError(fmt::format("{} tiles differ in extent", name));
    if (s.labels.height() != s.input.dim(1) ||
        s.labels.width() != s.input.dim(2))
      throw ValidationError(fmt::format("{} label map extent mismatch", name));
    if (s.labels.num_classes() > config.num_classes)
      throw ValidationError(fmt::format(
          "{} labels declare {} classes, model has {}", name,
          s.labels.num_classes(), config.num_classes));
  }
}

}  // namespace

void FcnConfig::validate() const {
  if (in_channels == 0) throw ValidationError("in_channels must be >= 1");
  if (num_classes == 0 || num_classes > 255)
    throw ValidationError("num_classes must be in [1, 255]");
  if (base_filters == 0) throw ValidationError("base_filters must be >= 1");
  if (depth == 0 || depth > 16) throw ValidationError("depth must be in [1, 16]");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("learning_rate must be > 0");
  if (batch_size == 0) throw ValidationError("batch_size must be >= 1");
  if (!(l2 >= 0.0) || !(l1 >= 0.0))
    throw ValidationError("l1/l2 must be >= 0");
}

std::vector<ConvParams*> FcnModel::layers() {
  std::vector<ConvParams*> out;
  for (auto& c : encoder) out.push_back(&c);
  for (auto& d : decoder) out.push_back(&d.conv);
  out.push_back(&head);
  return out;
}

std::vector<const ConvParams*> FcnModel::layers() const {
  std::vector<const ConvParams*> out;
  for (const auto& c : encoder) out.push_back(&c);
  for (const auto& d : decoder) out.push_back(&d.conv);
  out.push_back(&head);
  return out;
}

std::size_t FcnModel::parameter_count() const {
  std::size_t n = 0;
  for (const ConvParams* p : layers()) n += p->weights.size() + p->bias.size();
  return n;
}

GradientTape GradientTape::zeros_like(const FcnModel& model) {
  GradientTape tape;
  for (const ConvParams* p : model.layers()) {
    tape.weight_grads.emplace_back(p->weights.shape());
    tape.bias_grads.emplace_back(p->bias.shape());
  }
  return tape;
}

void GradientTape::accumulate(const GradientTape& other) {
  for (std::size_t i = 0; i < weight_grads.size(); ++i) {
    add_into(weight_grads[i], other.weight_grads[i]);
    add_into(bias_grads[i], other.bias_grads[i]);
  }
}

void GradientTape::scale(double factor) {
  for (auto* group : {&weight_grads, &bias_grads})
    for (Tensor& t : *group)
      for (double& v : t.values()) v *= factor;
}

double GradientTape::squared_norm() const {
  double sum = 0.0;
  for (const auto* group : {&weight_grads, &bias_grads})
    for (const Tensor& t : *group)
      for (double v : t.values()) sum += v * v;
  return sum;
}

bool GradientTape::all_finite() const {
  for (const auto* group : {&weight_grads, &bias_grads})
    for (const Tensor& t : *group)
      if (!t.all_finite()) return false;
  return true;
}

FcnModel build_fcn(const FcnConfig& config) {
  config.validate();
  Rng rng = Rng::substream(config.seed, kInitStream);
  const std::size_t F = config.base_filters;
  FcnModel model;
  model.config = config;
  model.input_norm.scale.assign(config.in_channels, 1.0);
  model.input_norm.shift.assign(config.in_channels, 0.0);

  const std::size_t stem_fan = config.in_channels * kStemKernel * kStemKernel;
  model.encoder.push_back(make_conv(F, config.in_channels, kStemKernel, 1,
                                    kStemKernel / 2, he_bound(stem_fan), rng));
  for (std::size_t d = 1; d <= config.depth; ++d)
    model.encoder.push_back(make_conv(F, F, kDownKernel, 2, 1,
                                      he_bound(F * kDownKernel * kDownKernel),
                                      rng));
  for (std::size_t d = config.depth; d >= 1; --d) {
    DecoderStage stage;
    stage.scale = 2;
    stage.conv = make_conv(F, 2 * F, kDecoderKernel, 1, kDecoderKernel / 2,
                           he_bound(2 * F * kDecoderKernel * kDecoderKernel),
                           rng);
    model.decoder.push_back(std::move(stage));
  }
  model.head = make_conv(config.num_classes, F, 1, 1, 0,
                         std::sqrt(3.0 / static_cast<double>(F)), rng);
  return model;
}

void fit_input_normalization(FcnModel& model, const Dataset& tiles) {
  const std::size_t C = model.config.in_channels;
  std::vector<double> sum(C, 0.0), sq(C, 0.0);
  double count = 0.0;
  for (const Sample& s : tiles) {
    if (s.input.dim(0) != C)
      throw ValidationError("normalization tile channel mismatch");
    const std::size_t plane = s.input.dim(1) * s.input.dim(2);
    for (std::size_t c = 0; c < C; ++c) {
      const double* p = s.input.data().data() + c * plane;
      for (std::size_t q = 0; q < plane; ++q) {
        sum[c] += p[q];
        sq[c] += p[q] * p[q];
      }
    }
    count += static_cast<double>(plane);
  }
  if (count == 0.0) return;
  for (std::size_t c = 0; c < C; ++c) {
    const double mean = sum[c] / count;
    const double var = std::max(0.0, sq[c] / count - mean * mean);
    const double sd = std::sqrt(var);
    const double scale = sd > 1e-12 ? 1.0 / sd : 1.0;
    model.input_norm.scale[c] = scale;
    model.input_norm.shift[c] = -mean * scale;
  }
}

ForwardTrace forward_trace(const FcnModel& model, const Tensor& input,
                           std::uint64_t* macs) {
  check_input(model, input);
  ForwardTrace t;
  t.input = normalize(model.input_norm, input);
  const Tensor* x = &t.input;
  for (const ConvParams& p : model.encoder) {
    t.encoder_pre.push_back(conv(p, *x, macs));
    t.encoder_post.push_back(relu(t.encoder_pre.back()));
    x = &t.encoder_post.back();
  }
  // encoder_post has depth + 1 entries; decoder stage i pairs with skip
  // encoder_post[depth - 1 - i].
  const std::size_t depth = model.decoder.size();
  for (std::size_t i = 0; i < depth; ++i) {
    const DecoderStage& stage = model.decoder[i];
    t.decoder_in.push_back(concat_channels(upsample_nearest(*x, stage.scale),
                                           t.encoder_post[depth - 1 - i]));
    t.decoder_pre.push_back(conv(stage.conv, t.decoder_in.back(), macs));
    t.decoder_post.push_back(relu(t.decoder_pre.back()));
    x = &t.decoder_post.back();
  }
  t.logits = conv(model.head, *x, macs);
  return t;
}

Tensor forward(const FcnModel& model, const Tensor& input,
               std::uint64_t* macs) {
  return forward_trace(model, input, macs).logits;
}

GradientTape backward(const FcnModel& model, const ForwardTrace& t,
                      const Tensor& logit_grad, std::uint64_t* macs) {
  GradientTape tape;
  const std::size_t n_enc = model.encoder.size();
  const std::size_t depth = model.decoder.size();
  tape.weight_grads.resize(n_enc + depth + 1);
  tape.bias_grads.resize(n_enc + depth + 1);
  auto store = [&](std::size_t slot, ConvGrads& g) {
    tape.weight_grads[slot] = std::move(g.weight_grad);
    tape.bias_grads[slot] = std::move(g.bias_grad);
  };
  auto count = [&](const ConvParams& p, const Tensor& in, bool input_grad) {
    if (macs)
      *macs += conv_macs(p, in.dim(1), in.dim(2)) * (input_grad ? 2 : 1);
  };

  // Gradients flowing into each encoder activation (from the main path and
  // from skip connections).
  std::vector<Tensor> enc_grad(n_enc);
  for (std::size_t d = 0; d < n_enc; ++d)
    enc_grad[d] = Tensor(t.encoder_post[d].shape());

  const Tensor& head_in = depth ? t.decoder_post.back() : t.encoder_post.back();
  count(model.head, head_in, true);
  ConvGrads hg = conv2d_backward(head_in, model.head, logit_grad);
  Tensor grad = std::move(hg.input_grad);
  store(n_enc + depth, hg);

  for (std::size_t i = depth; i-- > 0;) {
    const DecoderStage& stage = model.decoder[i];
    const Tensor g_pre = relu_backward(t.decoder_pre[i], grad);
    count(stage.conv, t.decoder_in[i], true);
    ConvGrads dg = conv2d_backward(t.decoder_in[i], stage.conv, g_pre);
    const std::size_t up_channels =
        dg.input_grad.dim(0) - t.encoder_post[depth - 1 - i].dim(0);
    auto [g_up, g_skip] = split_channels(dg.input_grad, up_channels);
    add_into(enc_grad[depth - 1 - i], g_skip);
    grad = upsample_nearest_backward(g_up, stage.scale);
    store(n_enc + i, dg);
  }
  add_into(enc_grad[n_enc - 1], grad);

  for (std::size_t d = n_enc; d-- > 0;) {
    const Tensor g_pre = relu_backward(t.encoder_pre[d], enc_grad[d]);
    const Tensor& in = d == 0 ? t.input : t.encoder_post[d - 1];
    const bool need_input = d > 0;
    count(model.encoder[d], in, need_input);
    ConvGrads eg = conv2d_backward(in, model.encoder[d], g_pre, need_input);
    if (need_input) add_into(enc_grad[d - 1], eg.input_grad);
    store(d, eg);
  }
  return tape;
}

LossAndGradient loss_and_gradient(const FcnModel& model,
                                  std::span<const Sample> samples,
                                  std::uint64_t* macs) {
  if (samples.empty()) throw ValidationError("no samples");
  LossAndGradient out;
  out.gradient = GradientTape::zeros_like(model);
  for (const Sample& s : samples) {
    const ForwardTrace trace = forward_trace(model, s.input, macs);
    const LossResult lr = softmax_cross_entropy(trace.logits, s.labels);
    out.loss += lr.loss;
    out.gradient.accumulate(backward(model, trace, lr.logit_grad, macs));
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  out.loss *= inv;
  out.gradient.scale(inv);
  return out;
}

double mean_loss(const FcnModel& model, std::span<const Sample> samples,
                 std::uint64_t* macs) {
  if (samples.empty()) throw ValidationError("no samples");
  double sum = 0.0;
  for (const Sample& s : samples)
    sum += softmax_cross_entropy(forward(model, s.input, macs), s.labels).loss;
  return sum / static_cast<double>(samples.size());
}

void apply_sgd(FcnModel& model, const GradientTape& gradient) {
  const SgdOptions opts{model.config.learning_rate, model.config.l2,
                        model.config.l1};
  if (!gradient.all_finite()) throw NumericError("non-finite gradient");
  auto layers = model.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    sgd_step(layers[i]->weights.data(), gradient.weight_grads[i].data(), opts);
    sgd_step(layers[i]->bias.data(), gradient.bias_grads[i].data(), opts);
  }
}

namespace {

// Source (row, col) for output (i, j) of a transform on an H x W grid.
std::pair<std::size_t, std::size_t> transform_source(Transform t, std::size_t i,
                                                     std::size_t j,
                                                     std::size_t H,
                                                     std::size_t W) {
  switch (t) {
    case Transform::identity: return {i, j};
    case Transform::rot90: return {H - 1 - j, i};
    case Transform::rot180: return {H - 1 - i, W - 1 - j};
    case Transform::rot270: return {j, W - 1 - i};
    case Transform::flip_h: return {i, W - 1 - j};
    case Transform::flip_v: return {H - 1 - i, j};
  }
  return {i, j};
}

bool is_rotation(Transform t) {
  return t == Transform::rot90 || t == Transform::rot180 ||
         t == Transform::rot270;
}

void check_square(std::size_t H, std::size_t W, Transform t) {
  if (is_rotation(t) && H != W)
    throw ValidationError(fmt::format(
        "rotation requires a square tile, got {}x{}", H, W));
}

}  // namespace

Tensor apply_transform(const Tensor& input, Transform t) {
  if (input.rank() != 3) throw ValidationError("transform input must be [C,H,W]");
  const std::size_t C = input.dim(0), H = input.dim(1), W = input.dim(2);
  check_square(H, W, t);
  Tensor out(input.shape());
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = 0; j < W; ++j) {
        const auto [r, q] = transform_source(t, i, j, H, W);
        out.at(c, i, j) = input.at(c, r, q);
      }
  return out;
}

LabelMap apply_transform(const LabelMap& labels, Transform t) {
  const std::size_t H = labels.height(), W = labels.width();
  check_square(H, W, t);
  std::vector<std::uint8_t> ids(labels.size());
  for (std::size_t i = 0; i < H; ++i)
    for (std::size_t j = 0; j < W; ++j) {
      const auto [r, q] = transform_source(t, i, j, H, W);
      ids[i * W + j] = labels.at(r, q);
    }
  return LabelMap(W, H, labels.num_classes(), std::move(ids));
}

Sample apply_transform(const Sample& sample, Transform t) {
  return Sample{apply_transform(sample.input, t),
                apply_transform(sample.labels, t)};
}

Sample augment(const Sample& sample, Rng& rng) {
  return apply_transform(sample, kAllTransforms[rng.uniform_index(6)]);
}

TrainResult train(const FcnModel& initial, const Dataset& train_set,
                  const Dataset& val_set, BudgetTracker& budget) {
  const FcnConfig& cfg = initial.config;
  cfg.validate();
  if (train_set.empty()) throw ValidationError("training set is empty");
  validate_dataset(train_set, cfg, "training");
  validate_dataset(val_set, cfg, "validation");

  TrainResult result;
  result.model = initial;
  if (cfg.epochs == 0) return result;

  FcnModel model = initial;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (budget.exhausted()) {
      result.stop_reason = budget.time_exhausted() ? "time budget exhausted"
                                                   : "MAC budget exhausted";
      break;
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = Rng::substream(cfg.seed, kShuffleStream, epoch);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle.uniform_index(i)]);
    Rng aug = Rng::substream(cfg.seed, kAugmentStream, epoch);

    double loss_sum = 0.0;
    std::vector<Sample> batch;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k)
        batch.push_back(augment(train_set[order[k]], aug));
      LossAndGradient lg = loss_and_gradient(model, batch, &budget.mac_count);
      if (!std::isfinite(lg.loss))
        throw NumericError(fmt::format(
            "non-finite training loss at epoch {}, batch starting at {}",
            epoch, start));
      if (!lg.gradient.all_finite())
        throw NumericError(fmt::format(
            "non-finite gradient at epoch {}, batch starting at {}", epoch,
            start));
      loss_sum += lg.loss * static_cast<double>(end - start);
      apply_sgd(model, lg.gradient);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.val_loss = val_set.empty()
                       ? rec.train_loss
                       : mean_loss(model, val_set, &budget.mac_count);
    if (!std::isfinite(rec.val_loss))
      throw NumericError(fmt::format("non-finite validation loss at epoch {}",
                                     epoch));
    rec.elapsed_seconds = budget.elapsed_seconds();
    rec.macs = budget.mac_count;
    result.history.epochs.push_back(rec);
    if (rec.val_loss < result.best_val_loss) {
      result.best_val_loss = rec.val_loss;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  if (result.history.epochs.empty()) {
    result.complete = false;
    result.model = initial;
  }
  return result;
}

LabelMap argmax_labels(const Tensor& logits) {
  if (logits.rank() != 3) throw ValidationError("logits must be [C,H,W]");
  const std::size_t C = logits.dim(0), H = logits.dim(1), W = logits.dim(2);
  const std::size_t P = H * W;
  const double* z = logits.data().data();
  std::vector<std::uint8_t> ids(P);
  for (std::size_t q = 0; q < P; ++q) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < C; ++c)
      if (z[c * P + q] > z[best * P + q]) best = c;
    ids[q] = static_cast<std::uint8_t>(best);
  }
  return LabelMap(W, H, C, std::move(ids));
}

Tensor raster_to_tensor(const Raster& raster) {
  const auto s = raster.samples();
  return Tensor({raster.channels(), raster.height(), raster.width()},
                std::vector<double>(s.begin(), s.end()));
}

LabelMap predict(const FcnModel& model, const Tensor& input) {
  if (input.rank() != 3) throw ValidationError("model input must be [C,H,W]");
  if (input.dim(0) != model.config.in_channels)
    throw ValidationError(fmt::format(
        "model expects {} input channels, got {}", model.config.in_channels,
        input.dim(0)));
  const std::size_t mult = model.config.tile_multiple();
  const std::size_t H = input.dim(1), W = input.dim(2);
  const std::size_t Hp = (H + mult - 1) / mult * mult;
  const std::size_t Wp = (W + mult - 1) / mult * mult;
  if (Hp == H && Wp == W) return argmax_labels(forward(model, input));

  const std::size_t C = input.dim(0);
  Tensor padded({C, Hp, Wp});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < Hp; ++i)
      for (std::size_t j = 0; j < Wp; ++j)
        padded.at(c, i, j) = input.at(
            c, reflect_index(static_cast<std::ptrdiff_t>(i),
                             static_cast<std::ptrdiff_t>(H)),
            reflect_index(static_cast<std::ptrdiff_t>(j),
                          static_cast<std::ptrdiff_t>(W)));
  const LabelMap full = argmax_labels(forward(model, padded));
  std::vector<std::uint8_t> ids(H * W);
  for (std::size_t i = 0; i < H; ++i)
    for (std::size_t j = 0; j < W; ++j) ids[i * W + j] = full.at(i, j);
  return LabelMap(W, H, full.num_classes(), std::move(ids));
}

LabelMap predict(const FcnModel& model, const Raster& raster) {
  return predict(model, raster_to_tensor(raster));
}

}  // namespace geofuse
