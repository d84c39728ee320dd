#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "itas/core/matrix.hpp"
#include "itas/core/random.hpp"

namespace itas {

// One trainable tensor as seen by optimizers and the gradient checker.
struct ParamSlot {
  std::string name;
  std::span<double> value;
  std::span<double> grad;
};

// Weights and bias of a dense layer or a temporal convolution, with gradient
// accumulators of identical shape.
//
// Dense:       weights is in x out.
// Convolution: weights is (kKernelTaps * in) x out; tap k occupies rows
//              [k * in, (k + 1) * in) and reads frame t + (k - 1) * dilation.
struct LayerParams {
  Matrix weights;
  std::vector<double> bias;
  Matrix grad_weights;
  std::vector<double> grad_bias;

  LayerParams() = default;
  LayerParams(std::size_t weight_rows, std::size_t out_dim);

  std::size_t out_dim() const noexcept { return bias.size(); }

  void zero_grad();
  // Appends `extra` output units with zero weights and zero gradients.
  void grow_outputs(std::size_t extra);

  void append_slots(const std::string& prefix, std::vector<ParamSlot>& slots);
};

inline constexpr std::size_t kKernelTaps = 3;

// Uniform in ±1/sqrt(fan_in) for weights and bias.
void init_uniform(LayerParams& params, std::size_t fan_in, RandomSource& rng);

Matrix linear_forward(const LayerParams& params, const Matrix& input);
// Returns d(loss)/d(input) and adds parameter gradients into `params`.
Matrix linear_backward(LayerParams& params, const Matrix& input, const Matrix& grad_out);

// Kernel-3 dilated temporal convolution with zero padding; output has the same
// number of frames as the input.
Matrix dilated_conv1d_forward(const LayerParams& params, const Matrix& input, std::size_t dilation);
Matrix dilated_conv1d_backward(LayerParams& params, const Matrix& input, std::size_t dilation,
                               const Matrix& grad_out);

Matrix relu(const Matrix& pre);
// Gradient gate uses the pre-activation: pass-through where pre > 0.
Matrix relu_backward(const Matrix& pre, const Matrix& grad_out);

Matrix softmax_rows(const Matrix& logits);
Matrix log_softmax_rows(const Matrix& logits);
// Given log-softmax outputs and d(loss)/d(log-softmax), returns d(loss)/d(logits).
Matrix log_softmax_backward(const Matrix& log_probs, const Matrix& grad_log_probs);

}  // namespace itas
