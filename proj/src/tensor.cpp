#include "geofuse/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "geofuse/error.hpp"

namespace geofuse {
namespace {

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void require_rank3(const Tensor& t, const char* what) {
  if (t.rank() != 3)
    throw ValidationError(std::string(what) + " must be [C,H,W], got " +
                          shape_string(t.shape()));
}

// Output columns j in [first, last) whose input column j*stride + tap - pad
// falls inside [0, in_extent).
struct TapRange {
  std::ptrdiff_t first;
  std::ptrdiff_t last;
};

TapRange valid_outputs(std::ptrdiff_t tap, std::ptrdiff_t pad,
                       std::ptrdiff_t stride, std::ptrdiff_t in_extent,
                       std::ptrdiff_t out_extent) {
  const std::ptrdiff_t shift = tap - pad;
  std::ptrdiff_t first = 0;
  if (shift < 0) first = (-shift + stride - 1) / stride;
  std::ptrdiff_t last = 0;
  if (in_extent - 1 - shift >= 0) last = (in_extent - 1 - shift) / stride + 1;
  last = std::min(last, out_extent);
  if (first > last) first = last;
  return {first, last};
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)) {
  for (std::size_t d : shape_)
    if (d == 0) throw ValidationError("tensor extents must be positive");
  values_.assign(shape_product(shape_), fill);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  for (std::size_t d : shape_)
    if (d == 0) throw ValidationError("tensor extents must be positive");
  if (shape_product(shape_) != values_.size())
    throw ValidationError("tensor shape " + shape_string(shape_) +
                          " does not match " + std::to_string(values_.size()) +
                          " values");
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void ConvParams::validate() const {
  if (weights.rank() != 4)
    throw ValidationError("conv weights must be [K,L,M,N], got " +
                          shape_string(weights.shape()));
  if (bias.rank() != 1 || bias.dim(0) != weights.dim(0))
    throw ValidationError("conv bias must be [" +
                          std::to_string(weights.dim(0)) + "], got " +
                          shape_string(bias.shape()));
  if (stride == 0) throw ValidationError("conv stride must be >= 1");
}

std::size_t conv_output_extent(std::size_t extent, std::size_t kernel,
                               std::size_t stride, std::size_t padding) {
  const std::size_t padded = extent + 2 * padding;
  if (padded < kernel)
    throw ValidationError("kernel " + std::to_string(kernel) +
                          " larger than padded extent " +
                          std::to_string(padded));
  if ((padded - kernel) % stride != 0)
    throw ValidationError("output extent (" + std::to_string(extent) + " + 2*" +
                          std::to_string(padding) + " - " +
                          std::to_string(kernel) + ")/" +
                          std::to_string(stride) + " + 1 is not an integer");
  return (padded - kernel) / stride + 1;
}

std::uint64_t conv_macs(const ConvParams& p, std::size_t height,
                        std::size_t width) {
  const auto ho = conv_output_extent(height, p.kernel_h(), p.stride, p.padding);
  const auto wo = conv_output_extent(width, p.kernel_w(), p.stride, p.padding);
  return std::uint64_t{p.out_channels()} * ho * wo * p.in_channels() *
         p.kernel_h() * p.kernel_w();
}

Tensor conv2d_forward(const Tensor& input, const ConvParams& params) {
  params.validate();
  require_rank3(input, "conv input");
  if (input.dim(0) != params.in_channels())
    throw ValidationError("conv input has " + std::to_string(input.dim(0)) +
                          " channels, weights expect " +
                          std::to_string(params.in_channels()));
  const auto L = static_cast<std::ptrdiff_t>(params.in_channels());
  const auto K = static_cast<std::ptrdiff_t>(params.out_channels());
  const auto M = static_cast<std::ptrdiff_t>(params.kernel_h());
  const auto N = static_cast<std::ptrdiff_t>(params.kernel_w());
  const auto H = static_cast<std::ptrdiff_t>(input.dim(1));
  const auto W = static_cast<std::ptrdiff_t>(input.dim(2));
  const auto s = static_cast<std::ptrdiff_t>(params.stride);
  const auto pad = static_cast<std::ptrdiff_t>(params.padding);
  const auto Ho = static_cast<std::ptrdiff_t>(conv_output_extent(
      input.dim(1), params.kernel_h(), params.stride, params.padding));
  const auto Wo = static_cast<std::ptrdiff_t>(conv_output_extent(
      input.dim(2), params.kernel_w(), params.stride, params.padding));

  Tensor output({static_cast<std::size_t>(K), static_cast<std::size_t>(Ho),
                 static_cast<std::size_t>(Wo)});
  const double* x = input.data().data();
  const double* w = params.weights.data().data();
  double* y = output.data().data();

  for (std::ptrdiff_t k = 0; k < K; ++k) {
    double* yk = y + k * Ho * Wo;
    std::fill(yk, yk + Ho * Wo, params.bias[static_cast<std::size_t>(k)]);
    for (std::ptrdiff_t l = 0; l < L; ++l) {
      const double* xl = x + l * H * W;
      for (std::ptrdiff_t m = 0; m < M; ++m) {
        const TapRange rows = valid_outputs(m, pad, s, H, Ho);
        for (std::ptrdiff_t n = 0; n < N; ++n) {
          const double wv = w[((k * L + l) * M + m) * N + n];
          const TapRange cols = valid_outputs(n, pad, s, W, Wo);
          for (std::ptrdiff_t i = rows.first; i < rows.last; ++i) {
            double* yrow = yk + i * Wo;
            const double* xrow = xl + (i * s + m - pad) * W + (n - pad);
            if (s == 1) {
              for (std::ptrdiff_t j = cols.first; j < cols.last; ++j)
                yrow[j] += wv * xrow[j];
            } else {
              for (std::ptrdiff_t j = cols.first; j < cols.last; ++j)
                yrow[j] += wv * xrow[j * s];
            }
          }
        }
      }
    }
  }
  return output;
}

ConvGrads conv2d_backward(const Tensor& input, const ConvParams& params,
                          const Tensor& upstream, bool want_input_grad) {
  params.validate();
  require_rank3(input, "conv input");
  require_rank3(upstream, "conv upstream gradient");
  if (input.dim(0) != params.in_channels())
    throw ValidationError("conv input channel mismatch");
  const auto L = static_cast<std::ptrdiff_t>(params.in_channels());
  const auto K = static_cast<std::ptrdiff_t>(params.out_channels());
  const auto M = static_cast<std::ptrdiff_t>(params.kernel_h());
  const auto N = static_cast<std::ptrdiff_t>(params.kernel_w());
  const auto H = static_cast<std::ptrdiff_t>(input.dim(1));
  const auto W = static_cast<std::ptrdiff_t>(input.dim(2));
  const auto s = static_cast<std::ptrdiff_t>(params.stride);
  const auto pad = static_cast<std::ptrdiff_t>(params.padding);
  const auto Ho = static_cast<std::ptrdiff_t>(conv_output_extent(
      input.dim(1), params.kernel_h(), params.stride, params.padding));
  const auto Wo = static_cast<std::ptrdiff_t>(conv_output_extent(
      input.dim(2), params.kernel_w(), params.stride, params.padding));
  if (upstream.dim(0) != static_cast<std::size_t>(K) ||
      upstream.dim(1) != static_cast<std::size_t>(Ho) ||
      upstream.dim(2) != static_cast<std::size_t>(Wo))
    throw ValidationError("upstream gradient shape " +
                          shape_string(upstream.shape()) +
                          " does not match conv output [" + std::to_string(K) +
                          "," + std::to_string(Ho) + "," + std::to_string(Wo) +
                          "]");

  ConvGrads grads;
  grads.weight_grad = Tensor(params.weights.shape());
  grads.bias_grad = Tensor(params.bias.shape());
  if (want_input_grad) grads.input_grad = Tensor(input.shape());

  const double* x = input.data().data();
  const double* w = params.weights.data().data();
  const double* g = upstream.data().data();
  double* dw = grads.weight_grad.data().data();
  double* dx = want_input_grad ? grads.input_grad.data().data() : nullptr;

  for (std::ptrdiff_t k = 0; k < K; ++k) {
    const double* gk = g + k * Ho * Wo;
    double bsum = 0.0;
    for (std::ptrdiff_t q = 0; q < Ho * Wo; ++q) bsum += gk[q];
    grads.bias_grad[static_cast<std::size_t>(k)] = bsum;

    for (std::ptrdiff_t l = 0; l < L; ++l) {
      const double* xl = x + l * H * W;
      double* dxl = dx ? dx + l * H * W : nullptr;
      for (std::ptrdiff_t m = 0; m < M; ++m) {
        const TapRange rows = valid_outputs(m, pad, s, H, Ho);
        for (std::ptrdiff_t n = 0; n < N; ++n) {
          const std::ptrdiff_t widx = ((k * L + l) * M + m) * N + n;
          const double wv = w[widx];
          const TapRange cols = valid_outputs(n, pad, s, W, Wo);
          double acc = 0.0;
          for (std::ptrdiff_t i = rows.first; i < rows.last; ++i) {
            const double* grow = gk + i * Wo;
            const std::ptrdiff_t off = (i * s + m - pad) * W + (n - pad);
            const double* xrow = xl + off;
            if (s == 1) {
              for (std::ptrdiff_t j = cols.first; j < cols.last; ++j)
                acc += grow[j] * xrow[j];
              if (dxl) {
                double* dxrow = dxl + off;
                for (std::ptrdiff_t j = cols.first; j < cols.last; ++j)
                  dxrow[j] += wv * grow[j];
              }
            } else {
              for (std::ptrdiff_t j = cols.first; j < cols.last; ++j)
                acc += grow[j] * xrow[j * s];
              if (dxl) {
                double* dxrow = dxl + off;
                for (std::ptrdiff_t j = cols.first; j < cols.last; ++j)
                  dxrow[j * s] += wv * grow[j];
              }
            }
          }
          dw[widx] = acc;
        }
      }
    }
  }
  return grads;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& pre_activation, const Tensor& upstream) {
  if (pre_activation.shape() != upstream.shape())
    throw ValidationError("relu backward shape mismatch");
  Tensor out = upstream;
  const auto z = pre_activation.data();
  auto g = out.data();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(z[i] > 0.0)) g[i] = 0.0;
  return out;
}

Tensor upsample_nearest(const Tensor& input, std::size_t scale) {
  if (scale == 0) throw ValidationError("upsample scale must be >= 1");
  require_rank3(input, "upsample input");
  const std::size_t C = input.dim(0), H = input.dim(1), W = input.dim(2);
  Tensor out({C, H * scale, W * scale});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < H * scale; ++i)
      for (std::size_t j = 0; j < W * scale; ++j)
        out.at(c, i, j) = input.at(c, i / scale, j / scale);
  return out;
}

Tensor upsample_nearest_backward(const Tensor& upstream, std::size_t scale) {
  if (scale == 0) throw ValidationError("upsample scale must be >= 1");
  require_rank3(upstream, "upsample gradient");
  if (upstream.dim(1) % scale != 0 || upstream.dim(2) % scale != 0)
    throw ValidationError("upsample gradient extent not divisible by scale");
  const std::size_t C = upstream.dim(0);
  const std::size_t H = upstream.dim(1) / scale, W = upstream.dim(2) / scale;
  Tensor out({C, H, W});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < H * scale; ++i)
      for (std::size_t j = 0; j < W * scale; ++j)
        out.at(c, i / scale, j / scale) += upstream.at(c, i, j);
  return out;
}

Tensor softmax(const Tensor& logits) {
  require_rank3(logits, "logits");
  const std::size_t C = logits.dim(0), P = logits.dim(1) * logits.dim(2);
  Tensor out(logits.shape());
  const double* z = logits.data().data();
  double* p = out.data().data();
  for (std::size_t q = 0; q < P; ++q) {
    double mx = z[q];
    for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, z[c * P + q]);
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      p[c * P + q] = std::exp(z[c * P + q] - mx);
      sum += p[c * P + q];
    }
    for (std::size_t c = 0; c < C; ++c) p[c * P + q] /= sum;
  }
  return out;
}

LossResult softmax_cross_entropy(const Tensor& logits, const LabelMap& labels) {
  require_rank3(logits, "logits");
  const std::size_t C = logits.dim(0);
  if (labels.height() != logits.dim(1) || labels.width() != logits.dim(2))
    throw ValidationError("label map extent does not match logits");
  const std::size_t P = labels.size();
  const double* z = logits.data().data();

  LossResult result;
  result.logit_grad = Tensor(logits.shape());
  double* grad = result.logit_grad.data().data();
  const double inv_n = 1.0 / static_cast<double>(P);
  double total = 0.0;
  for (std::size_t q = 0; q < P; ++q) {
    const std::size_t label = labels[q];
    if (label >= C)
      throw ValidationError("label " + std::to_string(label) + " at pixel " +
                            std::to_string(q) + " outside [0, " +
                            std::to_string(C) + ")");
    double mx = z[q];
    for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, z[c * P + q]);
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double e = std::exp(z[c * P + q] - mx);
      grad[c * P + q] = e;
      sum += e;
    }
    total -= z[label * P + q] - mx - std::log(sum);
    for (std::size_t c = 0; c < C; ++c) {
      const double p = grad[c * P + q] / sum;
      grad[c * P + q] = (p - (c == label ? 1.0 : 0.0)) * inv_n;
    }
  }
  result.loss = total * inv_n;
  return result;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require_rank3(a, "concat operand");
  require_rank3(b, "concat operand");
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2))
    throw ValidationError("concat operands differ in spatial extent: " +
                          shape_string(a.shape()) + " vs " +
                          shape_string(b.shape()));
  std::vector<double> values;
  values.reserve(a.size() + b.size());
  values.insert(values.end(), a.values().begin(), a.values().end());
  values.insert(values.end(), b.values().begin(), b.values().end());
  return Tensor({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)}, std::move(values));
}

void sgd_step(std::span<double> params, std::span<const double> grads,
              const SgdOptions& options) {
  if (params.size() != grads.size())
    throw ValidationError("parameter/gradient size mismatch");
  if (!(options.learning_rate > 0.0))
    throw ValidationError("learning_rate must be > 0");
  if (options.l2 < 0.0 || options.l1 < 0.0)
    throw ValidationError("regularization coefficients must be >= 0");
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads[i]))
      throw NumericError("non-finite gradient at parameter " +
                         std::to_string(i));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double theta = params[i];
    const double sign = theta > 0.0 ? 1.0 : (theta < 0.0 ? -1.0 : 0.0);
    params[i] = theta - options.learning_rate *
                            (grads[i] + 2.0 * options.l2 * theta +
                             options.l1 * sign);
  }
}

}  // namespace geofuse
