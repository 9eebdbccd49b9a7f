#pragma once

// Dense 64-bit tensors and the layer primitives of the segmentation network:
// convolution, ReLU, nearest-neighbour upsampling and softmax cross-entropy,
// each with a hand-written backward pass.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "geofuse/raster.hpp"

namespace geofuse {

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> data() noexcept { return values_; }
  std::span<const double> data() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Element of a rank-3 [C, H, W] tensor.
  double& at(std::size_t c, std::size_t i, std::size_t j) {
    return values_[(c * shape_[1] + i) * shape_[2] + j];
  }
  double at(std::size_t c, std::size_t i, std::size_t j) const {
    return values_[(c * shape_[1] + i) * shape_[2] + j];
  }

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

/// Weights are [out_channels, in_channels, kernel_h, kernel_w]; bias is
/// [out_channels].
struct ConvParams {
  Tensor weights;
  Tensor bias;
  std::size_t stride = 1;
  std::size_t padding = 0;

  std::size_t out_channels() const { return weights.dim(0); }
  std::size_t in_channels() const { return weights.dim(1); }
  std::size_t kernel_h() const { return weights.dim(2); }
  std::size_t kernel_w() const { return weights.dim(3); }

  /// Throws ValidationError on malformed shapes or zero stride.
  void validate() const;

  friend bool operator==(const ConvParams&, const ConvParams&) = default;
};

struct ConvGrads {
  Tensor input_grad;
  Tensor weight_grad;
  Tensor bias_grad;
};

/// (extent + 2*padding - kernel) / stride + 1, rejecting non-integer or
/// non-positive results.
std::size_t conv_output_extent(std::size_t extent, std::size_t kernel,
                               std::size_t stride, std::size_t padding);

/// Multiply-accumulates performed by one forward pass of `params` on a
/// [L, height, width] input.
std::uint64_t conv_macs(const ConvParams& params, std::size_t height,
                        std::size_t width);

/// y[k,i,j] = sum_{l,m,n} x[l, i*s+m-p, j*s+n-p] * w[k,l,m,n] + b[k], with
/// out-of-range input samples read as zero.
Tensor conv2d_forward(const Tensor& input, const ConvParams& params);

/// Exact partials of sum(upstream * conv2d_forward(input, params)). When
/// `want_input_grad` is false the input gradient is left empty.
ConvGrads conv2d_backward(const Tensor& input, const ConvParams& params,
                          const Tensor& upstream, bool want_input_grad = true);

Tensor relu(const Tensor& input);
/// upstream * [pre_activation > 0]; the derivative at exactly 0 is 0.
Tensor relu_backward(const Tensor& pre_activation, const Tensor& upstream);

/// output[k,i,j] = input[k, i/s, j/s] (integer division).
Tensor upsample_nearest(const Tensor& input, std::size_t scale);
/// Sums each s-by-s block of the upstream gradient into its source cell.
Tensor upsample_nearest_backward(const Tensor& upstream, std::size_t scale);

/// Per-pixel softmax over the channel axis of a [C, H, W] tensor.
Tensor softmax(const Tensor& logits);

struct LossResult {
  double loss = 0.0;
  Tensor logit_grad;
};

/// Mean per-pixel cross-entropy of softmax(logits) against `labels`, with
/// gradient (p - t) / (H*W).
LossResult softmax_cross_entropy(const Tensor& logits, const LabelMap& labels);

/// Concatenates two [C, H, W] tensors along the channel axis.
Tensor concat_channels(const Tensor& a, const Tensor& b);

struct SgdOptions {
  double learning_rate = 0.05;
  double l2 = 0.0;
  double l1 = 0.0;
};

/// theta <- theta - lr * (g + 2*l2*theta + l1*sign(theta)), sign(0) = 0.
/// Throws NumericError if any gradient is non-finite; nothing is updated in
/// that case.
void sgd_step(std::span<double> params, std::span<const double> grads,
              const SgdOptions& options);

}  // namespace geofuse
