#include "itas/core/layers.hpp"

#include <algorithm>
#include <cmath>

#include "itas/core/errors.hpp"

namespace itas {

LayerParams::LayerParams(std::size_t weight_rows, std::size_t out_dim)
    : weights(weight_rows, out_dim), bias(out_dim, 0.0), grad_weights(weight_rows, out_dim),
      grad_bias(out_dim, 0.0) {}

void LayerParams::zero_grad() {
  grad_weights.fill(0.0);
  std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
}

void LayerParams::grow_outputs(std::size_t extra) {
  weights.append_cols(extra);
  grad_weights.append_cols(extra);
  bias.resize(bias.size() + extra, 0.0);
  grad_bias.resize(grad_bias.size() + extra, 0.0);
}

void LayerParams::append_slots(const std::string& prefix, std::vector<ParamSlot>& slots) {
  slots.push_back({prefix + ".weight", weights.values(), grad_weights.values()});
  slots.push_back({prefix + ".bias", bias, grad_bias});
}

void init_uniform(LayerParams& params, std::size_t fan_in, RandomSource& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (double& w : params.weights.values()) w = rng.uniform(-bound, bound);
  for (double& b : params.bias) b = rng.uniform(-bound, bound);
}

namespace {

void add_bias_rows(Matrix& out, const std::vector<double>& bias) {
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double* o = out.row(r).data();
    for (std::size_t c = 0; c < bias.size(); ++c) o[c] += bias[c];
  }
}

void accumulate_bias_grad(std::vector<double>& grad_bias, const Matrix& grad_out) {
  for (std::size_t r = 0; r < grad_out.rows(); ++r) {
    const double* g = grad_out.row(r).data();
    for (std::size_t c = 0; c < grad_bias.size(); ++c) grad_bias[c] += g[c];
  }
}

void check_dense_shapes(const LayerParams& params, const Matrix& input) {
  if (input.cols() != params.weights.rows()) {
    fail(ErrorKind::kShape, "dense layer expects input width " + std::to_string(params.weights.rows()) +
                                " (weights " + params.weights.shape_string() + "), got input " +
                                input.shape_string());
  }
}

void check_conv_shapes(const LayerParams& params, const Matrix& input, std::size_t dilation) {
  if (dilation == 0) fail(ErrorKind::kDomain, "dilation must be at least 1");
  if (input.cols() * kKernelTaps != params.weights.rows()) {
    fail(ErrorKind::kShape, "convolution weights " + params.weights.shape_string() + " expect " +
                                std::to_string(params.weights.rows() / kKernelTaps) +
                                " input channels, got input " + input.shape_string());
  }
}

// Frame read by tap k for output frame t, or -1 when it falls on padding.
inline long long tap_source(std::size_t t, std::size_t k, std::size_t dilation, std::size_t frames) {
  const long long src = static_cast<long long>(t) + (static_cast<long long>(k) - 1) * static_cast<long long>(dilation);
  return (src < 0 || src >= static_cast<long long>(frames)) ? -1 : src;
}

}  // namespace

Matrix linear_forward(const LayerParams& params, const Matrix& input) {
  check_dense_shapes(params, input);
  Matrix out = matmul(input, params.weights);
  add_bias_rows(out, params.bias);
  return out;
}

Matrix linear_backward(LayerParams& params, const Matrix& input, const Matrix& grad_out) {
  check_dense_shapes(params, input);
  if (grad_out.rows() != input.rows() || grad_out.cols() != params.out_dim()) {
    fail(ErrorKind::kShape, "dense backward expects grad " + std::to_string(input.rows()) + "x" +
                                std::to_string(params.out_dim()) + ", got " + grad_out.shape_string());
  }
  add_matmul_tn(params.grad_weights, input, grad_out);
  accumulate_bias_grad(params.grad_bias, grad_out);
  return matmul_nt(grad_out, params.weights);
}

Matrix dilated_conv1d_forward(const LayerParams& params, const Matrix& input, std::size_t dilation) {
  check_conv_shapes(params, input, dilation);
  const std::size_t frames = input.rows();
  const std::size_t in_ch = input.cols();
  const std::size_t out_ch = params.out_dim();
  Matrix out(frames, out_ch);
  add_bias_rows(out, params.bias);
  for (std::size_t t = 0; t < frames; ++t) {
    double* o = out.row(t).data();
    for (std::size_t k = 0; k < kKernelTaps; ++k) {
      const long long src = tap_source(t, k, dilation, frames);
      if (src < 0) continue;
      const double* x = input.row(static_cast<std::size_t>(src)).data();
      for (std::size_t i = 0; i < in_ch; ++i) {
        const double xv = x[i];
        if (xv == 0.0) continue;
        const double* w = params.weights.row(k * in_ch + i).data();
        for (std::size_t c = 0; c < out_ch; ++c) o[c] += xv * w[c];
      }
    }
  }
  return out;
}

Matrix dilated_conv1d_backward(LayerParams& params, const Matrix& input, std::size_t dilation,
                               const Matrix& grad_out) {
  check_conv_shapes(params, input, dilation);
  const std::size_t frames = input.rows();
  const std::size_t in_ch = input.cols();
  const std::size_t out_ch = params.out_dim();
  if (grad_out.rows() != frames || grad_out.cols() != out_ch) {
    fail(ErrorKind::kShape, "convolution backward expects grad " + std::to_string(frames) + "x" +
                                std::to_string(out_ch) + ", got " + grad_out.shape_string());
  }
  accumulate_bias_grad(params.grad_bias, grad_out);
  Matrix grad_in(frames, in_ch);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* g = grad_out.row(t).data();
    for (std::size_t k = 0; k < kKernelTaps; ++k) {
      const long long src = tap_source(t, k, dilation, frames);
      if (src < 0) continue;
      const double* x = input.row(static_cast<std::size_t>(src)).data();
      double* gi = grad_in.row(static_cast<std::size_t>(src)).data();
      for (std::size_t i = 0; i < in_ch; ++i) {
        const double* w = params.weights.row(k * in_ch + i).data();
        double* gw = params.grad_weights.row(k * in_ch + i).data();
        const double xv = x[i];
        double acc = 0.0;
        for (std::size_t c = 0; c < out_ch; ++c) {
          acc += g[c] * w[c];
          gw[c] += xv * g[c];
        }
        gi[i] += acc;
      }
    }
  }
  return grad_in;
}

Matrix relu(const Matrix& pre) {
  Matrix out = pre;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix relu_backward(const Matrix& pre, const Matrix& grad_out) {
  if (pre.rows() != grad_out.rows() || pre.cols() != grad_out.cols()) {
    fail(ErrorKind::kShape, "relu backward " + pre.shape_string() + " vs " + grad_out.shape_string());
  }
  Matrix grad = grad_out;
  auto p = pre.values();
  auto g = grad.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(p[i] > 0.0)) g[i] = 0.0;
  }
  return grad;
}

Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto in = logits.row(r);
    if (in.empty()) continue;
    const double peak = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (double v : in) sum += std::exp(v - peak);
    const double log_norm = peak + std::log(sum);
    auto o = out.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) o[c] = in[c] - log_norm;
  }
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out = log_softmax_rows(logits);
  for (double& v : out.values()) v = std::exp(v);
  return out;
}

Matrix log_softmax_backward(const Matrix& log_probs, const Matrix& grad_log_probs) {
  if (log_probs.rows() != grad_log_probs.rows() || log_probs.cols() != grad_log_probs.cols()) {
    fail(ErrorKind::kShape,
         "log-softmax backward " + log_probs.shape_string() + " vs " + grad_log_probs.shape_string());
  }
  Matrix grad(log_probs.rows(), log_probs.cols());
  for (std::size_t r = 0; r < log_probs.rows(); ++r) {
    auto lp = log_probs.row(r);
    auto g = grad_log_probs.row(r);
    double total = 0.0;
    for (double v : g) total += v;
    auto o = grad.row(r);
    for (std::size_t c = 0; c < lp.size(); ++c) o[c] = g[c] - std::exp(lp[c]) * total;
  }
  return grad;
}

}  // namespace itas
