#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topemb/embed_store.hpp"
#include "topemb/matrix.hpp"

namespace topemb {

enum class LossKind { InfoNCE, InfoLOOB };

LossKind parse_loss_kind(std::string_view name);  // "infonce" | "infoloob"
std::string_view to_string(LossKind kind);

struct LabConfig {
  std::size_t latent_dim = 8;
  std::size_t input_dim = 16;
  std::size_t embed_dim = 16;
  std::size_t n_clusters = 6;
  std::size_t samples = 2000;
  std::size_t batch = 64;
  std::size_t steps = 1500;
  double learning_rate = 0.004;
  double momentum = 0.9;
  // Multiplies inner products inside the exponentials (inverse temperature).
  double temperature = 60.0;
  double hopfield_beta = 20.0;
  LossKind loss = LossKind::InfoNCE;
  bool use_hopfield = false;
  std::uint64_t seed = 0;
  double cluster_spread = 3.0;  // std of the mixture means
  double input_noise = 0.1;
  double init_bias_scale = 4.0;  // std of the output-layer bias at init
  double heldout_fraction = 0.2;

  void validate() const;
};

struct SyntheticData {
  Matrix latent;    // N×latent_dim
  Matrix inputs_a;  // N×input_dim
  Matrix inputs_b;  // N×input_dim
  std::vector<int> cluster;
};

// z ~ mixture of n_clusters Gaussians; modality inputs are fixed random
// linear maps of z plus independent noise. Depends only on config and seed.
SyntheticData gen_synthetic(const LabConfig& config, std::uint64_t seed);

struct LossResult {
  double value = 0.0;
  Matrix grad_x;
  Matrix grad_y;
};

// Negated batch mean of the two log-softmax terms (x-anchored over y_j and
// y-anchored over x_j), scaled by `tau`. Max-subtracted log-sum-exp.
LossResult infonce_loss(const Matrix& x, const Matrix& y, double tau);
// Same with the positive pair left out of both denominators. Needs B ≥ 2.
LossResult infoloob_loss(const Matrix& x, const Matrix& y, double tau);
LossResult contrastive_loss(const Matrix& x, const Matrix& y, double tau, LossKind kind);

enum class Anchor { First, Second };

// A single term: Anchor::First contrasts p_i against every q_j,
// Anchor::Second contrasts q_i against every p_j.
LossResult contrastive_term(const Matrix& p, const Matrix& q, double tau, LossKind kind, Anchor anchor);

// Modern Hopfield retrieval: normalize(Mᵀ softmax(beta M query)) where the
// rows of `memory` are the stored patterns.
std::vector<double> hopfield_retrieve(std::span<const double> query, const Matrix& memory, double beta);

struct HopfieldGrad {
  std::vector<double> query;
  Matrix memory;
};

HopfieldGrad hopfield_backward(std::span<const double> query, const Matrix& memory, double beta,
                               std::span<const double> grad_out);

// Row-wise retrieval of every query against one memory, with backward pass.
Matrix hopfield_retrieve_batch(const Matrix& queries, const Matrix& memory, double beta);
void hopfield_backward_batch(const Matrix& queries, const Matrix& memory, double beta,
                             const Matrix& grad_out, Matrix& grad_queries, Matrix& grad_memory);

// Two dense layers with tanh between, L2-normalized output. All parameters
// live in one flat vector: W1 (hidden×in), b1, W2 (out×hidden), b2.
class Encoder {
 public:
  Encoder() = default;
  Encoder(std::size_t in, std::size_t hidden, std::size_t out);

  template <typename Rng>
  static Encoder random(std::size_t in, std::size_t hidden, std::size_t out, double bias_scale, Rng& rng);

  std::size_t in_dim() const noexcept { return in_; }
  std::size_t hidden_dim() const noexcept { return hidden_; }
  std::size_t out_dim() const noexcept { return out_; }

  std::vector<double>& params() noexcept { return params_; }
  const std::vector<double>& params() const noexcept { return params_; }

  Matrix forward(const Matrix& inputs) const;
  // Gradient of sum_i <grad_out_i, output_i> w.r.t. the flat parameters.
  std::vector<double> backward(const Matrix& inputs, const Matrix& grad_out) const;

  friend bool operator==(const Encoder&, const Encoder&) = default;

 private:
  double w1(std::size_t h, std::size_t i) const { return params_[h * in_ + i]; }
  double b1(std::size_t h) const { return params_[hidden_ * in_ + h]; }
  double w2(std::size_t o, std::size_t h) const { return params_[hidden_ * in_ + hidden_ + o * hidden_ + h]; }
  double b2(std::size_t o) const { return params_[hidden_ * in_ + hidden_ + out_ * hidden_ + o]; }

  std::size_t in_ = 0, hidden_ = 0, out_ = 0;
  std::vector<double> params_;
};

struct BatchLoss {
  double value = 0.0;
  std::vector<double> grad_a;  // w.r.t. encoder A parameters
  std::vector<double> grad_b;
};

// Loss of one batch through both encoders, with Hopfield retrieval when
// enabled: the x-anchored term sees retrievals from the X memory, the
// y-anchored term retrievals from the Y memory.
BatchLoss lab_batch_loss(const Encoder& enc_a, const Encoder& enc_b, const Matrix& inputs_a,
                         const Matrix& inputs_b, const LabConfig& config);

struct LabRun {
  LabConfig config;
  Encoder encoder_a;
  Encoder encoder_b;
  std::vector<double> loss_trace;
  std::vector<std::size_t> heldout_indices;
  std::vector<std::size_t> train_indices;
  PairedDataset heldout;  // embeddings, rounded to the stored binary32 values
};

LabRun train(const LabConfig& config);

struct AblationRow {
  LossKind loss = LossKind::InfoNCE;
  bool hopfield = false;
  double svm_accuracy = 0.0;
  double mean_paired_cosine = 0.0;
  double centroid_gap = 0.0;
};

struct LabAblation {
  std::vector<LabRun> runs;  // (infonce,off) (infonce,on) (infoloob,off) (infoloob,on)
  std::vector<AblationRow> table;
};

LabAblation ablation_2x2(const LabConfig& base);

// <dir>/run.json (config, trace, encoder parameters) plus the held-out
// embeddings as TOPE files with their manifest.
void save_lab_run(const LabRun& run, const std::filesystem::path& dir);
std::string lab_config_json(const LabConfig& config);
LabConfig parse_lab_config_json(const std::string& text);
std::string ablation_table_csv(const std::vector<AblationRow>& table);

}  // namespace topemb

#include "topemb/detail/encoder_random.hpp"
