#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "itas/core/checkpoint.hpp"
#include "itas/core/layers.hpp"
#include "itas/core/random.hpp"
#include "itas/data/types.hpp"
#include "itas/tca/coherence.hpp"

namespace itas {

struct TcaConfig {
  std::size_t feature_dim = 0;
  std::size_t latent_dim = 16;
  std::size_t hidden = 64;
};

struct LatentSample {
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<double> epsilon;
  std::vector<double> z;  // mu + sigma * epsilon
};

// Frames with their action slot (index into the model's class list) and
// coherence value.
struct TcaBatch {
  Matrix features;
  std::vector<std::size_t> slots;
  std::vector<double> coherence;

  std::size_t size() const noexcept { return slots.size(); }
};

struct TcaLoss {
  double total = 0.0;
  double recon = 0.0;  // mean squared error over batch and feature dims
  double reg = 0.0;    // batch mean of KL(N(mu, sigma^2) || N(0, I))
};

// Conditional VAE over single frames, conditioned on a one-hot action and the
// frame's coherence value.
//   encoder: [x, onehot(a), c] -> hidden -> ReLU -> [mu, log sigma^2]
//   decoder: [z, onehot(a), c] -> hidden -> ReLU -> x_hat (linear output)
class TcaModel {
 public:
  TcaModel(TcaConfig config, std::vector<ClassId> class_ids, RandomSource& init_rng);

  const TcaConfig& config() const noexcept { return config_; }
  std::size_t num_classes() const noexcept { return class_ids_.size(); }
  const std::vector<ClassId>& class_ids() const noexcept { return class_ids_; }
  // Throws a labeling error for classes the model was not built for.
  std::size_t slot_of(ClassId id) const;

  LatentSample encode(std::span<const double> x, std::size_t slot, Coherence c, RandomSource& rng) const;
  std::vector<double> decode(std::span<const double> z, std::size_t slot, Coherence c) const;
  // Row-wise decode: one (z, slot, c) per output row.
  Matrix decode_rows(const Matrix& z, std::span<const std::size_t> slots, std::span<const double> coherence) const;

  // total = recon + beta * reg. Epsilon is drawn from `rng` row by row.
  TcaLoss loss(const TcaBatch& batch, RandomSource& rng, double beta) const;
  // Same value as loss() and accumulates parameter gradients. When given,
  // `relu_signature` receives a fingerprint of the ReLU gates.
  TcaLoss loss_and_grad(const TcaBatch& batch, RandomSource& rng, double beta,
                        std::uint64_t* relu_signature = nullptr);

  std::vector<ParamSlot> parameters();
  void zero_grad();

  Checkpoint to_checkpoint() const;
  static TcaModel from_checkpoint(const Checkpoint& ck);

 private:
  TcaModel() = default;

  struct Pass;
  Pass run(const TcaBatch& batch, RandomSource& rng, double beta) const;
  Matrix condition(std::span<const std::size_t> slots, std::span<const double> coherence) const;
  void check_batch(const TcaBatch& batch) const;

  TcaConfig config_;
  std::vector<ClassId> class_ids_;
  LayerParams enc_hidden_;
  LayerParams enc_out_;
  LayerParams dec_hidden_;
  LayerParams dec_out_;
};

// Closed-form KL(N(mu, sigma^2) || N(0, I)).
double gaussian_kl(std::span<const double> mu, std::span<const double> log_var);

struct TcaTrainConfig {
  double data_ratio = 1.0;
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  double beta = 1.0;
};

struct TcaTrainResult {
  std::vector<std::size_t> selected_items;  // indices into task.train
  std::vector<double> epoch_losses;         // mean total loss per epoch
  std::size_t frames = 0;
};

// Picks ceil(ratio * n) training items by seed.
std::vector<std::size_t> select_items(std::size_t n, double ratio, RandomSource& rng);

// All (frame, slot, coherence) triples of the given videos.
TcaBatch collect_frames(const TcaModel& model, std::span<const LabeledVideo> videos);

TcaTrainResult train_tca(TcaModel& model, const TaskDataset& task, const TcaTrainConfig& config, RandomSource& rng);

}  // namespace itas
