#include "itas/tca/tca_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "itas/core/adam.hpp"
#include "itas/core/errors.hpp"

namespace itas {

struct TcaModel::Pass {
  Matrix enc_in;
  Matrix enc_pre;
  Matrix enc_act;
  Matrix mu;
  Matrix log_var;
  Matrix sigma;
  Matrix epsilon;
  Matrix dec_in;
  Matrix dec_pre;
  Matrix dec_act;
  Matrix reconstruction;
  TcaLoss loss;
};

TcaModel::TcaModel(TcaConfig config, std::vector<ClassId> class_ids, RandomSource& init_rng)
    : config_(config), class_ids_(std::move(class_ids)) {
  if (config_.feature_dim == 0 || config_.latent_dim == 0 || config_.hidden == 0) {
    fail(ErrorKind::kConfig, "TCA model needs positive feature_dim, latent_dim and hidden");
  }
  if (class_ids_.empty()) fail(ErrorKind::kConfig, "TCA model needs at least one class");
  const std::size_t cond = class_ids_.size() + 1;
  enc_hidden_ = LayerParams(config_.feature_dim + cond, config_.hidden);
  enc_out_ = LayerParams(config_.hidden, 2 * config_.latent_dim);
  dec_hidden_ = LayerParams(config_.latent_dim + cond, config_.hidden);
  dec_out_ = LayerParams(config_.hidden, config_.feature_dim);
  init_uniform(enc_hidden_, enc_hidden_.weights.rows(), init_rng);
  init_uniform(enc_out_, enc_out_.weights.rows(), init_rng);
  init_uniform(dec_hidden_, dec_hidden_.weights.rows(), init_rng);
  init_uniform(dec_out_, dec_out_.weights.rows(), init_rng);
}

std::size_t TcaModel::slot_of(ClassId id) const {
  auto it = std::find(class_ids_.begin(), class_ids_.end(), id);
  if (it == class_ids_.end()) {
    fail(ErrorKind::kLabeling, "class " + std::to_string(id) + " is not modeled by this TCA model");
  }
  return static_cast<std::size_t>(it - class_ids_.begin());
}

Matrix TcaModel::condition(std::span<const std::size_t> slots, std::span<const double> coherence) const {
  Matrix cond(slots.size(), class_ids_.size() + 1);
  for (std::size_t n = 0; n < slots.size(); ++n) {
    if (slots[n] >= class_ids_.size()) {
      fail(ErrorKind::kLabeling, "action slot " + std::to_string(slots[n]) + " outside " +
                                     std::to_string(class_ids_.size()) + " classes");
    }
    cond(n, slots[n]) = 1.0;
    cond(n, class_ids_.size()) = coherence[n];
  }
  return cond;
}

void TcaModel::check_batch(const TcaBatch& batch) const {
  if (batch.size() == 0) fail(ErrorKind::kData, "empty TCA batch");
  if (batch.features.rows() != batch.size() || batch.coherence.size() != batch.size()) {
    fail(ErrorKind::kShape, "TCA batch has " + batch.features.shape_string() + " features, " +
                                std::to_string(batch.slots.size()) + " slots and " +
                                std::to_string(batch.coherence.size()) + " coherence values");
  }
  if (batch.features.cols() != config_.feature_dim) {
    fail(ErrorKind::kShape, "TCA model expects " + std::to_string(config_.feature_dim) + "-dim frames, got " +
                                batch.features.shape_string());
  }
}

LatentSample TcaModel::encode(std::span<const double> x, std::size_t slot, Coherence c, RandomSource& rng) const {
  if (x.size() != config_.feature_dim) {
    fail(ErrorKind::kShape, "encode expects a " + std::to_string(config_.feature_dim) + "-vector, got " +
                                std::to_string(x.size()));
  }
  const double cv = c.value();
  const Matrix cond = condition(std::span<const std::size_t>(&slot, 1), std::span<const double>(&cv, 1));
  const Matrix row(1, x.size(), std::vector<double>(x.begin(), x.end()));
  const Matrix out = linear_forward(enc_out_, relu(linear_forward(enc_hidden_, hconcat({&row, &cond}))));
  const std::size_t z_dim = config_.latent_dim;
  LatentSample s;
  for (std::size_t j = 0; j < z_dim; ++j) {
    const double mu = out(0, j);
    const double sigma = std::exp(0.5 * out(0, z_dim + j));
    const double eps = rng.normal();
    s.mu.push_back(mu);
    s.sigma.push_back(sigma);
    s.epsilon.push_back(eps);
    s.z.push_back(mu + sigma * eps);
  }
  return s;
}

std::vector<double> TcaModel::decode(std::span<const double> z, std::size_t slot, Coherence c) const {
  if (z.size() != config_.latent_dim) {
    fail(ErrorKind::kShape, "decode expects a " + std::to_string(config_.latent_dim) + "-dim latent, got " +
                                std::to_string(z.size()));
  }
  const Matrix zm(1, z.size(), std::vector<double>(z.begin(), z.end()));
  const double cv = c.value();
  return decode_rows(zm, std::span<const std::size_t>(&slot, 1), std::span<const double>(&cv, 1)).storage();
}

Matrix TcaModel::decode_rows(const Matrix& z, std::span<const std::size_t> slots,
                             std::span<const double> coherence) const {
  if (z.cols() != config_.latent_dim || z.rows() != slots.size() || slots.size() != coherence.size()) {
    fail(ErrorKind::kShape, "decode_rows with latent " + z.shape_string() + ", " + std::to_string(slots.size()) +
                                " slots, " + std::to_string(coherence.size()) + " coherence values");
  }
  const Matrix cond = condition(slots, coherence);
  return linear_forward(dec_out_, relu(linear_forward(dec_hidden_, hconcat({&z, &cond}))));
}

TcaModel::Pass TcaModel::run(const TcaBatch& batch, RandomSource& rng, double beta) const {
  check_batch(batch);
  const std::size_t n = batch.size();
  const std::size_t z_dim = config_.latent_dim;
  Pass p;
  const Matrix cond = condition(batch.slots, batch.coherence);
  p.enc_in = hconcat({&batch.features, &cond});
  p.enc_pre = linear_forward(enc_hidden_, p.enc_in);
  p.enc_act = relu(p.enc_pre);
  const Matrix enc_out = linear_forward(enc_out_, p.enc_act);
  p.mu = slice_cols(enc_out, 0, z_dim);
  p.log_var = slice_cols(enc_out, z_dim, z_dim);
  p.sigma = Matrix(n, z_dim);
  p.epsilon = Matrix(n, z_dim);
  Matrix z(n, z_dim);
  double kl_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < z_dim; ++j) {
      const double sigma = std::exp(0.5 * p.log_var(i, j));
      const double eps = rng.normal();
      p.sigma(i, j) = sigma;
      p.epsilon(i, j) = eps;
      z(i, j) = p.mu(i, j) + sigma * eps;
    }
    kl_sum += gaussian_kl(p.mu.row(i), p.log_var.row(i));
  }
  p.dec_in = hconcat({&z, &cond});
  p.dec_pre = linear_forward(dec_hidden_, p.dec_in);
  p.dec_act = relu(p.dec_pre);
  p.reconstruction = linear_forward(dec_out_, p.dec_act);

  double sq = 0.0;
  for (std::size_t i = 0; i < p.reconstruction.size(); ++i) {
    const double d = p.reconstruction.values()[i] - batch.features.values()[i];
    sq += d * d;
  }
  p.loss.recon = sq / static_cast<double>(p.reconstruction.size());
  p.loss.reg = kl_sum / static_cast<double>(n);
  p.loss.total = p.loss.recon + beta * p.loss.reg;
  return p;
}

TcaLoss TcaModel::loss(const TcaBatch& batch, RandomSource& rng, double beta) const {
  return run(batch, rng, beta).loss;
}

TcaLoss TcaModel::loss_and_grad(const TcaBatch& batch, RandomSource& rng, double beta,
                                std::uint64_t* relu_signature) {
  const Pass p = run(batch, rng, beta);
  const std::size_t n = batch.size();
  const std::size_t z_dim = config_.latent_dim;

  Matrix grad_recon(p.reconstruction.rows(), p.reconstruction.cols());
  const double scale = 2.0 / static_cast<double>(p.reconstruction.size());
  for (std::size_t i = 0; i < grad_recon.size(); ++i) {
    grad_recon.values()[i] = scale * (p.reconstruction.values()[i] - batch.features.values()[i]);
  }
  const Matrix grad_dec_act = linear_backward(dec_out_, p.dec_act, grad_recon);
  const Matrix grad_dec_in = linear_backward(dec_hidden_, p.dec_in, relu_backward(p.dec_pre, grad_dec_act));

  // z = mu + exp(log_var / 2) * eps, plus the KL term's direct gradients.
  Matrix grad_enc_out(n, 2 * z_dim);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < z_dim; ++j) {
      const double gz = grad_dec_in(i, j);
      grad_enc_out(i, j) = gz + beta * p.mu(i, j) * inv_n;
      grad_enc_out(i, z_dim + j) = gz * p.epsilon(i, j) * 0.5 * p.sigma(i, j) +
                                   beta * 0.5 * (p.sigma(i, j) * p.sigma(i, j) - 1.0) * inv_n;
    }
  }
  const Matrix grad_enc_act = linear_backward(enc_out_, p.enc_act, grad_enc_out);
  linear_backward(enc_hidden_, p.enc_in, relu_backward(p.enc_pre, grad_enc_act));

  if (relu_signature) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Matrix* pre : {&p.enc_pre, &p.dec_pre}) {
      for (std::size_t i = 0; i < pre->size(); ++i) {
        if (pre->values()[i] > 0.0) h = (h ^ i) * 0x100000001b3ULL;
      }
      h = (h ^ 0xff) * 0x100000001b3ULL;
    }
    *relu_signature = h;
  }
  return p.loss;
}

std::vector<ParamSlot> TcaModel::parameters() {
  std::vector<ParamSlot> slots;
  enc_hidden_.append_slots("encoder.hidden", slots);
  enc_out_.append_slots("encoder.out", slots);
  dec_hidden_.append_slots("decoder.hidden", slots);
  dec_out_.append_slots("decoder.out", slots);
  return slots;
}

void TcaModel::zero_grad() {
  enc_hidden_.zero_grad();
  enc_out_.zero_grad();
  dec_hidden_.zero_grad();
  dec_out_.zero_grad();
}

Checkpoint TcaModel::to_checkpoint() const {
  Checkpoint ck;
  ck.kind = "tca_model";
  ck.hyperparameters["feature_dim"] = std::to_string(config_.feature_dim);
  ck.hyperparameters["latent_dim"] = std::to_string(config_.latent_dim);
  ck.hyperparameters["hidden"] = std::to_string(config_.hidden);
  ck.add_vector("class_ids", std::vector<double>(class_ids_.begin(), class_ids_.end()));
  auto add = [&](const std::string& name, const LayerParams& p) {
    ck.add_tensor(name + ".weight", p.weights);
    ck.add_vector(name + ".bias", p.bias);
  };
  add("encoder.hidden", enc_hidden_);
  add("encoder.out", enc_out_);
  add("decoder.hidden", dec_hidden_);
  add("decoder.out", dec_out_);
  return ck;
}

TcaModel TcaModel::from_checkpoint(const Checkpoint& ck) {
  if (ck.kind != "tca_model") fail(ErrorKind::kFormat, "expected a tca_model checkpoint, got '" + ck.kind + "'");
  TcaModel m;
  m.config_.feature_dim = std::stoul(ck.hyper("feature_dim"));
  m.config_.latent_dim = std::stoul(ck.hyper("latent_dim"));
  m.config_.hidden = std::stoul(ck.hyper("hidden"));
  for (double id : ck.vector("class_ids")) m.class_ids_.push_back(static_cast<ClassId>(id));
  const std::size_t cond = m.class_ids_.size() + 1;
  auto load = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    LayerParams p(rows, cols);
    p.weights = ck.tensor(name + ".weight");
    p.bias = ck.vector(name + ".bias");
    if (p.weights.rows() != rows || p.weights.cols() != cols || p.bias.size() != cols) {
      fail(ErrorKind::kFormat, "checkpoint tensor " + name + " has shape " + p.weights.shape_string());
    }
    return p;
  };
  m.enc_hidden_ = load("encoder.hidden", m.config_.feature_dim + cond, m.config_.hidden);
  m.enc_out_ = load("encoder.out", m.config_.hidden, 2 * m.config_.latent_dim);
  m.dec_hidden_ = load("decoder.hidden", m.config_.latent_dim + cond, m.config_.hidden);
  m.dec_out_ = load("decoder.out", m.config_.hidden, m.config_.feature_dim);
  return m;
}

double gaussian_kl(std::span<const double> mu, std::span<const double> log_var) {
  double kl = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    kl += mu[j] * mu[j] + std::exp(log_var[j]) - 1.0 - log_var[j];
  }
  return 0.5 * kl;
}

std::vector<std::size_t> select_items(std::size_t n, double ratio, RandomSource& rng) {
  if (!(ratio > 0.0 && ratio <= 1.0)) fail(ErrorKind::kConfig, "TCA data ratio must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
  if (k == 0) fail(ErrorKind::kData, "TCA training selection is empty");
  std::vector<std::size_t> order = rng.permutation(n);
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

TcaBatch collect_frames(const TcaModel& model, std::span<const LabeledVideo> videos) {
  std::size_t total = 0;
  for (const LabeledVideo& v : videos) total += v.features.frames();
  const std::size_t dim = model.config().feature_dim;
  TcaBatch batch;
  batch.features = Matrix(total, dim);
  std::size_t row = 0;
  for (const LabeledVideo& v : videos) {
    if (v.features.dim() != dim) {
      fail(ErrorKind::kShape, "video '" + v.features.source_id + "' has dim " + std::to_string(v.features.dim()) +
                                  ", TCA expects " + std::to_string(dim));
    }
    for (const Segment& s : v.labels.segments()) {
      const std::size_t slot = model.slot_of(s.action);
      for (std::size_t i = 0; i < s.length; ++i) {
        auto src = v.features.values.row(s.start + i);
        std::copy(src.begin(), src.end(), batch.features.row(row).begin());
        batch.slots.push_back(slot);
        batch.coherence.push_back(coherence(i + 1, s.length).value());
        ++row;
      }
    }
  }
  return batch;
}

namespace {

TcaBatch gather(const TcaBatch& all, std::span<const std::size_t> rows) {
  TcaBatch b;
  b.features = Matrix(rows.size(), all.features.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    auto src = all.features.row(rows[k]);
    std::copy(src.begin(), src.end(), b.features.row(k).begin());
    b.slots.push_back(all.slots[rows[k]]);
    b.coherence.push_back(all.coherence[rows[k]]);
  }
  return b;
}

}  // namespace

TcaTrainResult train_tca(TcaModel& model, const TaskDataset& task, const TcaTrainConfig& config, RandomSource& rng) {
  if (config.batch_size == 0) fail(ErrorKind::kConfig, "TCA batch size must be positive");
  TcaTrainResult result;
  if (task.train.empty()) fail(ErrorKind::kData, "task " + std::to_string(task.task) + " has no training videos");
  RandomSource select_rng = rng.substream("select");
  result.selected_items = select_items(task.train.size(), config.data_ratio, select_rng);
  std::vector<LabeledVideo> chosen;
  for (std::size_t i : result.selected_items) chosen.push_back(task.train[i]);
  const TcaBatch all = collect_frames(model, chosen);
  result.frames = all.size();

  Adam optimizer(AdamConfig{config.learning_rate});
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const TcaBatch batch = gather(all, std::span<const std::size_t>(order).subspan(begin, end - begin));
      model.zero_grad();
      const TcaLoss l = model.loss_and_grad(batch, rng, config.beta);
      if (!std::isfinite(l.total)) fail(ErrorKind::kNumeric, "non-finite TCA loss in epoch " + std::to_string(epoch));
      optimizer.step(model.parameters());
      epoch_loss += l.total * static_cast<double>(end - begin);
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return result;
}

}  // namespace itas
