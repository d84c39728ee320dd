#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "itas/core/adam.hpp"
#include "itas/core/checkpoint.hpp"
#include "itas/core/layers.hpp"
#include "itas/core/random.hpp"
#include "itas/data/types.hpp"
#include "itas/seg/losses.hpp"

namespace itas {

struct SegModelConfig {
  std::size_t input_dim = 0;
  std::size_t channels = 64;
  std::size_t layers = 8;
};

// Single-stage dilated temporal convolution network. Layout:
//   input projection D -> C
//   L residual blocks: x + W_1x1 * relu(conv_k3_dilated(x)), dilation 2^l
//   output projection C -> A, one column per known class
// The output columns grow as classes arrive; `class_ids()[k]` is the global
// class id predicted by column k.
class SegModel {
 public:
  SegModel(SegModelConfig config, RandomSource& init_rng);

  // Intermediates of one forward pass, consumed by backward().
  struct Trace {
    Matrix input;
    std::vector<Matrix> block_inputs;  // L + 1 entries; the last feeds the head
    std::vector<Matrix> conv_pre;      // L entries (pre-ReLU)
    Matrix logits;
  };

  Trace forward_trace(const Matrix& input) const;
  // T x A logits.
  Matrix forward(const FeatureSequence& x) const;
  // Accumulates parameter gradients; returns d(loss)/d(input).
  Matrix backward(const Trace& trace, const Matrix& grad_logits);

  static std::uint64_t relu_signature(const Trace& trace);

  const SegModelConfig& config() const noexcept { return config_; }
  std::size_t num_classes() const noexcept { return class_ids_.size(); }
  const std::vector<ClassId>& class_ids() const noexcept { return class_ids_; }
  std::optional<std::size_t> column_of(ClassId id) const;
  // Head columns for every frame; throws a model/label mismatch error for a
  // class the head does not know.
  std::vector<int> columns_for(const SegmentLabeling& labels) const;

  // Adds output columns for classes. Disjoint mode rejects ids already present;
  // blurry mode skips them. Existing columns are untouched.
  void expand_head(std::span<const ClassId> classes, LabelMode mode, RandomSource& init_rng);

  std::vector<ParamSlot> parameters();
  void zero_grad();

  LayerParams& head() noexcept { return head_; }
  const LayerParams& head() const noexcept { return head_; }

  Checkpoint to_checkpoint() const;
  static SegModel from_checkpoint(const Checkpoint& ck);

 private:
  SegModel() = default;

  SegModelConfig config_;
  LayerParams input_proj_;
  std::vector<LayerParams> dilated_;
  std::vector<LayerParams> pointwise_;
  LayerParams head_;
  std::vector<ClassId> class_ids_;
};

// Per-frame argmax (ties resolved to the lowest class id), run-length encoded.
SegmentLabeling predict(const SegModel& model, const FeatureSequence& x);

// One optimizer step on a single labeled sequence. Returns the loss before
// the update. Throws a numeric error on a non-finite loss.
TasLossResult train_on_sequence(SegModel& model, Adam& optimizer, const LabeledVideo& item,
                                const TasLossConfig& loss_config);

}  // namespace itas
