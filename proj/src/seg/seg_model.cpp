#include "itas/seg/seg_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "itas/core/errors.hpp"

namespace itas {

namespace {

std::size_t dilation_of(std::size_t layer) { return std::size_t{1} << layer; }

std::uint64_t mix_mask(std::uint64_t h, const Matrix& pre) {
  std::uint64_t word = 0;
  std::size_t bits = 0;
  for (double v : pre.values()) {
    word = (word << 1) | (v > 0.0 ? 1U : 0U);
    if (++bits == 64) {
      h = (h ^ word) * 0x100000001b3ULL;
      word = 0;
      bits = 0;
    }
  }
  return (h ^ word ^ bits) * 0x100000001b3ULL;
}

}  // namespace

SegModel::SegModel(SegModelConfig config, RandomSource& init_rng) : config_(config) {
  if (config_.input_dim == 0 || config_.channels == 0) {
    fail(ErrorKind::kConfig, "segmentation model needs positive input_dim and channels");
  }
  const std::size_t c = config_.channels;
  input_proj_ = LayerParams(config_.input_dim, c);
  init_uniform(input_proj_, config_.input_dim, init_rng);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    LayerParams conv(kKernelTaps * c, c);
    init_uniform(conv, kKernelTaps * c, init_rng);
    dilated_.push_back(std::move(conv));
    LayerParams pw(c, c);
    init_uniform(pw, c, init_rng);
    pointwise_.push_back(std::move(pw));
  }
  head_ = LayerParams(c, 0);
}

SegModel::Trace SegModel::forward_trace(const Matrix& input) const {
  if (input.cols() != config_.input_dim) {
    fail(ErrorKind::kShape, "segmentation model expects " + std::to_string(config_.input_dim) +
                                "-dim features, got " + input.shape_string());
  }
  Trace trace;
  trace.input = input;
  trace.block_inputs.push_back(linear_forward(input_proj_, input));
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const Matrix& x = trace.block_inputs.back();
    Matrix pre = dilated_conv1d_forward(dilated_[l], x, dilation_of(l));
    Matrix out = linear_forward(pointwise_[l], relu(pre));
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += x.values()[i];
    trace.conv_pre.push_back(std::move(pre));
    trace.block_inputs.push_back(std::move(out));
  }
  trace.logits = linear_forward(head_, trace.block_inputs.back());
  return trace;
}

Matrix SegModel::forward(const FeatureSequence& x) const { return forward_trace(x.values).logits; }

Matrix SegModel::backward(const Trace& trace, const Matrix& grad_logits) {
  Matrix grad = linear_backward(head_, trace.block_inputs.back(), grad_logits);
  for (std::size_t l = config_.layers; l-- > 0;) {
    const Matrix& x = trace.block_inputs[l];
    const Matrix& pre = trace.conv_pre[l];
    Matrix grad_act = linear_backward(pointwise_[l], relu(pre), grad);
    Matrix grad_x = dilated_conv1d_backward(dilated_[l], x, dilation_of(l), relu_backward(pre, grad_act));
    for (std::size_t i = 0; i < grad.size(); ++i) grad.values()[i] += grad_x.values()[i];
  }
  return linear_backward(input_proj_, trace.input, grad);
}

std::uint64_t SegModel::relu_signature(const Trace& trace) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Matrix& pre : trace.conv_pre) h = mix_mask(h, pre);
  return h;
}

std::optional<std::size_t> SegModel::column_of(ClassId id) const {
  auto it = std::find(class_ids_.begin(), class_ids_.end(), id);
  if (it == class_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - class_ids_.begin());
}

std::vector<int> SegModel::columns_for(const SegmentLabeling& labels) const {
  std::vector<int> columns;
  columns.reserve(labels.frames());
  for (const Segment& s : labels.segments()) {
    auto col = column_of(s.action);
    if (!col) {
      fail(ErrorKind::kModelLabelMismatch, "class " + std::to_string(s.action) + " is not in the model head (" +
                                               std::to_string(num_classes()) + " classes)");
    }
    columns.insert(columns.end(), s.length, static_cast<int>(*col));
  }
  return columns;
}

void SegModel::expand_head(std::span<const ClassId> classes, LabelMode mode, RandomSource& init_rng) {
  std::vector<ClassId> fresh;
  for (ClassId id : classes) {
    const bool known = column_of(id).has_value() || std::find(fresh.begin(), fresh.end(), id) != fresh.end();
    if (known) {
      if (mode == LabelMode::kDisjoint) {
        fail(ErrorKind::kLabelSpace, "class " + std::to_string(id) + " already present in disjoint mode");
      }
      continue;
    }
    fresh.push_back(id);
  }
  if (fresh.empty()) return;
  const std::size_t old_cols = head_.out_dim();
  head_.grow_outputs(fresh.size());
  const double bound = 1.0 / std::sqrt(static_cast<double>(config_.channels));
  for (std::size_t r = 0; r < head_.weights.rows(); ++r) {
    for (std::size_t c = old_cols; c < head_.out_dim(); ++c) head_.weights(r, c) = init_rng.uniform(-bound, bound);
  }
  for (std::size_t c = old_cols; c < head_.out_dim(); ++c) head_.bias[c] = init_rng.uniform(-bound, bound);
  class_ids_.insert(class_ids_.end(), fresh.begin(), fresh.end());
}

std::vector<ParamSlot> SegModel::parameters() {
  std::vector<ParamSlot> slots;
  input_proj_.append_slots("input_proj", slots);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    dilated_[l].append_slots("block" + std::to_string(l) + ".dilated", slots);
    pointwise_[l].append_slots("block" + std::to_string(l) + ".pointwise", slots);
  }
  head_.append_slots("head", slots);
  return slots;
}

void SegModel::zero_grad() {
  input_proj_.zero_grad();
  for (auto& p : dilated_) p.zero_grad();
  for (auto& p : pointwise_) p.zero_grad();
  head_.zero_grad();
}

Checkpoint SegModel::to_checkpoint() const {
  Checkpoint ck;
  ck.kind = "seg_model";
  ck.hyperparameters["input_dim"] = std::to_string(config_.input_dim);
  ck.hyperparameters["channels"] = std::to_string(config_.channels);
  ck.hyperparameters["layers"] = std::to_string(config_.layers);
  std::vector<double> ids(class_ids_.begin(), class_ids_.end());
  ck.add_vector("class_ids", ids);
  auto add = [&](const std::string& name, const LayerParams& p) {
    ck.add_tensor(name + ".weight", p.weights);
    ck.add_vector(name + ".bias", p.bias);
  };
  add("input_proj", input_proj_);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    add("block" + std::to_string(l) + ".dilated", dilated_[l]);
    add("block" + std::to_string(l) + ".pointwise", pointwise_[l]);
  }
  add("head", head_);
  return ck;
}

SegModel SegModel::from_checkpoint(const Checkpoint& ck) {
  if (ck.kind != "seg_model") fail(ErrorKind::kFormat, "expected a seg_model checkpoint, got '" + ck.kind + "'");
  SegModel model;
  model.config_.input_dim = std::stoul(ck.hyper("input_dim"));
  model.config_.channels = std::stoul(ck.hyper("channels"));
  model.config_.layers = std::stoul(ck.hyper("layers"));
  for (double id : ck.vector("class_ids")) model.class_ids_.push_back(static_cast<ClassId>(id));
  auto load = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    LayerParams p(rows, cols);
    p.weights = ck.tensor(name + ".weight");
    p.bias = ck.vector(name + ".bias");
    if (p.weights.rows() != rows || p.weights.cols() != cols || p.bias.size() != cols) {
      fail(ErrorKind::kFormat, "checkpoint tensor " + name + " has shape " + p.weights.shape_string());
    }
    return p;
  };
  const std::size_t c = model.config_.channels;
  model.input_proj_ = load("input_proj", model.config_.input_dim, c);
  for (std::size_t l = 0; l < model.config_.layers; ++l) {
    model.dilated_.push_back(load("block" + std::to_string(l) + ".dilated", kKernelTaps * c, c));
    model.pointwise_.push_back(load("block" + std::to_string(l) + ".pointwise", c, c));
  }
  model.head_ = load("head", c, model.class_ids_.size());
  return model;
}

SegmentLabeling predict(const SegModel& model, const FeatureSequence& x) {
  if (model.num_classes() == 0) fail(ErrorKind::kModelLabelMismatch, "model head has no classes");
  const Matrix logits = model.forward(x);
  std::vector<ClassId> framewise(logits.rows());
  const auto& ids = model.class_ids();
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.cols(); ++k) {
      const double v = logits(t, k);
      const double b = logits(t, best);
      if (v > b || (v == b && ids[k] < ids[best])) best = k;
    }
    framewise[t] = ids[best];
  }
  return SegmentLabeling::from_framewise(std::move(framewise));
}

TasLossResult train_on_sequence(SegModel& model, Adam& optimizer, const LabeledVideo& item,
                                const TasLossConfig& loss_config) {
  const std::vector<int> targets = model.columns_for(item.labels);
  const SegModel::Trace trace = model.forward_trace(item.features.values);
  TasLossResult loss = tas_loss_with_grad(trace.logits, targets, loss_config);
  if (!std::isfinite(loss.total)) {
    fail(ErrorKind::kNumeric, "non-finite loss on '" + item.features.source_id + "'");
  }
  model.zero_grad();
  model.backward(trace, loss.grad_logits);
  optimizer.step(model.parameters());
  return loss;
}

}  // namespace itas
