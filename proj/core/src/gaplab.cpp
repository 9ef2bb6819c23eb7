#include "topemb/gaplab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <sstream>

#include "topemb/csv.hpp"
#include "topemb/error.hpp"
#include "topemb/parallel.hpp"
#include "topemb/separability.hpp"

namespace topemb {

LossKind parse_loss_kind(std::string_view name) {
  if (name == "infonce") return LossKind::InfoNCE;
  if (name == "infoloob") return LossKind::InfoLOOB;
  throw Error(ErrorCode::InvalidArgument, "unknown loss: " + std::string(name));
}

std::string_view to_string(LossKind kind) {
  return kind == LossKind::InfoNCE ? "infonce" : "infoloob";
}

void LabConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (latent_dim < 1) fail("latent_dim must be >= 1");
  if (input_dim < 1) fail("input_dim must be >= 1");
  if (embed_dim < 2) fail("embed_dim must be >= 2");
  if (n_clusters < 1) fail("n_clusters must be >= 1");
  if (batch < 1) fail("batch must be >= 1");
  if (loss == LossKind::InfoLOOB && batch < 2)
    throw Error(ErrorCode::BatchTooSmall, "infoloob needs batch >= 2");
  if (!(temperature > 0.0)) fail("temperature must be > 0");
  if (!(hopfield_beta > 0.0)) fail("hopfield_beta must be > 0");
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
  if (!(cluster_spread >= 0.0) || !(input_noise >= 0.0) || !(init_bias_scale >= 0.0))
    fail("spread, noise and bias scale must be >= 0");
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) fail("heldout_fraction must be in (0, 1)");
  const auto n_held = static_cast<std::size_t>(std::round(heldout_fraction * static_cast<double>(samples)));
  if (n_held < 1 || samples - n_held < batch) fail("too few samples for the held-out split and batch size");
}

// ---------------------------------------------------------------- data

SyntheticData gen_synthetic(const LabConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t m = config.latent_dim;
  const std::size_t p = config.input_dim;
  const std::size_t n = config.samples;

  Matrix means(config.n_clusters, m);
  for (double& v : means.data()) v = config.cluster_spread * normal(rng);
  const double map_scale = 1.0 / std::sqrt(static_cast<double>(m));
  Matrix map_a(p, m), map_b(p, m);
  for (double& v : map_a.data()) v = map_scale * normal(rng);
  for (double& v : map_b.data()) v = map_scale * normal(rng);

  SyntheticData out;
  out.latent = Matrix(n, m);
  out.inputs_a = Matrix(n, p);
  out.inputs_b = Matrix(n, p);
  out.cluster.resize(n);
  std::uniform_int_distribution<std::size_t> pick(0, config.n_clusters - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = pick(rng);
    out.cluster[i] = static_cast<int>(c);
    for (std::size_t k = 0; k < m; ++k) out.latent(i, k) = means(c, k) + normal(rng);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < p; ++r) {
      double sa = 0.0, sb = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        sa += map_a(r, k) * out.latent(i, k);
        sb += map_b(r, k) * out.latent(i, k);
      }
      out.inputs_a(i, r) = sa;
      out.inputs_b(i, r) = sb;
    }
  }
  if (config.input_noise > 0.0) {
    for (double& v : out.inputs_a.data()) v += config.input_noise * normal(rng);
    for (double& v : out.inputs_b.data()) v += config.input_noise * normal(rng);
  }
  return out;
}

// ---------------------------------------------------------------- losses

LossResult contrastive_term(const Matrix& p, const Matrix& q, double tau, LossKind kind, Anchor anchor) {
  const std::size_t b = p.rows();
  if (b == 0 || q.rows() != b || p.cols() != q.cols())
    throw Error(ErrorCode::InvalidArgument, "loss inputs must be two nonempty B×d matrices");
  const bool loo = kind == LossKind::InfoLOOB;
  if (loo && b < 2) throw Error(ErrorCode::BatchTooSmall, "infoloob needs at least two pairs");

  const Matrix s = matmul_transposed(p, q);
  Matrix g(b, b);  // dL/dS
  const double inv_b = 1.0 / static_cast<double>(b);
  double value = 0.0;
  std::vector<double> logits(b);
  for (std::size_t i = 0; i < b; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b; ++j) {
      logits[j] = tau * (anchor == Anchor::First ? s(i, j) : s(j, i));
      if (!(loo && j == i)) mx = std::max(mx, logits[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < b; ++j)
      if (!(loo && j == i)) sum += std::exp(logits[j] - mx);
    const double lse = mx + std::log(sum);
    value -= (logits[i] - lse) * inv_b;
    g(i, i) -= tau * inv_b;
    for (std::size_t j = 0; j < b; ++j) {
      if (loo && j == i) continue;
      const double w = tau * std::exp(logits[j] - lse) * inv_b;
      if (anchor == Anchor::First)
        g(i, j) += w;
      else
        g(j, i) += w;
    }
  }
  if (!std::isfinite(value)) throw Error(ErrorCode::NonFinite, "contrastive loss is not finite");

  LossResult r;
  r.value = value;
  r.grad_x = matmul(g, q);
  r.grad_y = matmul(g.transposed(), p);
  return r;
}

namespace {

void add_into(Matrix& dst, const Matrix& src) {
  for (std::size_t k = 0; k < dst.data().size(); ++k) dst.data()[k] += src.data()[k];
}

}  // namespace

LossResult contrastive_loss(const Matrix& x, const Matrix& y, double tau, LossKind kind) {
  LossResult first = contrastive_term(x, y, tau, kind, Anchor::First);
  const LossResult second = contrastive_term(x, y, tau, kind, Anchor::Second);
  first.value += second.value;
  add_into(first.grad_x, second.grad_x);
  add_into(first.grad_y, second.grad_y);
  return first;
}

LossResult infonce_loss(const Matrix& x, const Matrix& y, double tau) {
  return contrastive_loss(x, y, tau, LossKind::InfoNCE);
}

LossResult infoloob_loss(const Matrix& x, const Matrix& y, double tau) {
  return contrastive_loss(x, y, tau, LossKind::InfoLOOB);
}

// ---------------------------------------------------------------- hopfield

namespace {

struct HopfieldForward {
  std::vector<double> p;  // softmax weights over patterns
  std::vector<double> u;  // unnormalized retrieval
  double u_norm = 0.0;
  std::vector<double> out;
};

HopfieldForward hopfield_forward(std::span<const double> query, const Matrix& memory, double beta) {
  const std::size_t b = memory.rows();
  const std::size_t d = memory.cols();
  if (b == 0 || query.size() != d)
    throw Error(ErrorCode::InvalidArgument, "hopfield memory/query shape mismatch");
  HopfieldForward f;
  f.p.resize(b);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < b; ++j) {
    f.p[j] = beta * dot(memory.row(j), query);
    mx = std::max(mx, f.p[j]);
  }
  double sum = 0.0;
  for (double& v : f.p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : f.p) v /= sum;
  f.u.assign(d, 0.0);
  for (std::size_t j = 0; j < b; ++j)
    for (std::size_t k = 0; k < d; ++k) f.u[k] += f.p[j] * memory(j, k);
  f.u_norm = norm(f.u);
  if (!(f.u_norm > kZeroNormThreshold) || !std::isfinite(f.u_norm))
    throw Error(ErrorCode::NonFinite, "hopfield retrieval has zero or non-finite norm");
  f.out.resize(d);
  for (std::size_t k = 0; k < d; ++k) f.out[k] = f.u[k] / f.u_norm;
  return f;
}

}  // namespace

std::vector<double> hopfield_retrieve(std::span<const double> query, const Matrix& memory, double beta) {
  if (beta < 0.0) throw Error(ErrorCode::InvalidArgument, "beta must be >= 0");
  return hopfield_forward(query, memory, beta).out;
}

HopfieldGrad hopfield_backward(std::span<const double> query, const Matrix& memory, double beta,
                               std::span<const double> grad_out) {
  const HopfieldForward f = hopfield_forward(query, memory, beta);
  const std::size_t b = memory.rows();
  const std::size_t d = memory.cols();
  // through the normalization
  const double go = dot(grad_out, f.out);
  std::vector<double> gu(d);
  for (std::size_t k = 0; k < d; ++k) gu[k] = (grad_out[k] - go * f.out[k]) / f.u_norm;
  // through u = Σ_j p_j m_j and the softmax
  std::vector<double> gp(b);
  for (std::size_t j = 0; j < b; ++j) gp[j] = dot(memory.row(j), gu);
  const double pg = dot(f.p, gp);
  std::vector<double> ga(b);
  for (std::size_t j = 0; j < b; ++j) ga[j] = f.p[j] * (gp[j] - pg);

  HopfieldGrad g;
  g.query.assign(d, 0.0);
  g.memory = Matrix(b, d);
  for (std::size_t j = 0; j < b; ++j) {
    for (std::size_t k = 0; k < d; ++k) {
      g.query[k] += beta * ga[j] * memory(j, k);
      g.memory(j, k) = f.p[j] * gu[k] + beta * ga[j] * query[k];
    }
  }
  return g;
}

Matrix hopfield_retrieve_batch(const Matrix& queries, const Matrix& memory, double beta) {
  Matrix out(queries.rows(), queries.cols());
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    const auto r = hopfield_retrieve(queries.row(i), memory, beta);
    std::copy(r.begin(), r.end(), out.row(i).begin());
  }
  return out;
}

void hopfield_backward_batch(const Matrix& queries, const Matrix& memory, double beta,
                             const Matrix& grad_out, Matrix& grad_queries, Matrix& grad_memory) {
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    const HopfieldGrad g = hopfield_backward(queries.row(i), memory, beta, grad_out.row(i));
    auto gq = grad_queries.row(i);
    for (std::size_t k = 0; k < gq.size(); ++k) gq[k] += g.query[k];
    add_into(grad_memory, g.memory);
  }
}

// ---------------------------------------------------------------- encoder

Encoder::Encoder(std::size_t in, std::size_t hidden, std::size_t out)
    : in_(in), hidden_(hidden), out_(out), params_(hidden * in + hidden + out * hidden + out, 0.0) {}

Matrix Encoder::forward(const Matrix& inputs) const {
  if (inputs.cols() != in_) throw Error(ErrorCode::InvalidArgument, "encoder input dimension mismatch");
  Matrix out(inputs.rows(), out_);
  std::vector<double> h(hidden_);
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    const auto x = inputs.row(i);
    for (std::size_t a = 0; a < hidden_; ++a) {
      double z = b1(a);
      for (std::size_t k = 0; k < in_; ++k) z += w1(a, k) * x[k];
      h[a] = std::tanh(z);
    }
    auto o = out.row(i);
    for (std::size_t c = 0; c < out_; ++c) {
      double z = b2(c);
      for (std::size_t a = 0; a < hidden_; ++a) z += w2(c, a) * h[a];
      o[c] = z;
    }
    const double n = norm(o);
    if (!(n > kZeroNormThreshold) || !std::isfinite(n))
      throw Error(ErrorCode::NonFinite, "encoder output has zero or non-finite norm");
    for (double& v : o) v /= n;
  }
  return out;
}

std::vector<double> Encoder::backward(const Matrix& inputs, const Matrix& grad_out) const {
  if (inputs.cols() != in_ || grad_out.rows() != inputs.rows() || grad_out.cols() != out_)
    throw Error(ErrorCode::InvalidArgument, "encoder backward shape mismatch");
  std::vector<double> grad(params_.size(), 0.0);
  const std::size_t ob1 = hidden_ * in_;
  const std::size_t ow2 = ob1 + hidden_;
  const std::size_t ob2 = ow2 + out_ * hidden_;
  std::vector<double> h(hidden_), o(out_), go(out_), gz(hidden_);
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    const auto x = inputs.row(i);
    for (std::size_t a = 0; a < hidden_; ++a) {
      double z = b1(a);
      for (std::size_t k = 0; k < in_; ++k) z += w1(a, k) * x[k];
      h[a] = std::tanh(z);
    }
    for (std::size_t c = 0; c < out_; ++c) {
      double z = b2(c);
      for (std::size_t a = 0; a < hidden_; ++a) z += w2(c, a) * h[a];
      o[c] = z;
    }
    const double n = norm(o);
    const auto ge = grad_out.row(i);
    double ge_dot_e = 0.0;
    for (std::size_t c = 0; c < out_; ++c) ge_dot_e += ge[c] * o[c] / n;
    for (std::size_t c = 0; c < out_; ++c) go[c] = (ge[c] - ge_dot_e * o[c] / n) / n;

    std::fill(gz.begin(), gz.end(), 0.0);
    for (std::size_t c = 0; c < out_; ++c) {
      grad[ob2 + c] += go[c];
      for (std::size_t a = 0; a < hidden_; ++a) {
        grad[ow2 + c * hidden_ + a] += go[c] * h[a];
        gz[a] += w2(c, a) * go[c];
      }
    }
    for (std::size_t a = 0; a < hidden_; ++a) {
      gz[a] *= 1.0 - h[a] * h[a];
      grad[ob1 + a] += gz[a];
      for (std::size_t k = 0; k < in_; ++k) grad[a * in_ + k] += gz[a] * x[k];
    }
  }
  return grad;
}

// ---------------------------------------------------------------- training

BatchLoss lab_batch_loss(const Encoder& enc_a, const Encoder& enc_b, const Matrix& inputs_a,
                         const Matrix& inputs_b, const LabConfig& config) {
  const Matrix x = enc_a.forward(inputs_a);
  const Matrix y = enc_b.forward(inputs_b);
  Matrix gx, gy;
  double value = 0.0;
  if (!config.use_hopfield) {
    LossResult l = contrastive_loss(x, y, config.temperature, config.loss);
    value = l.value;
    gx = std::move(l.grad_x);
    gy = std::move(l.grad_y);
  } else {
    const double beta = config.hopfield_beta;
    const Matrix ux = hopfield_retrieve_batch(x, x, beta);
    const Matrix uy = hopfield_retrieve_batch(y, x, beta);
    const Matrix vx = hopfield_retrieve_batch(x, y, beta);
    const Matrix vy = hopfield_retrieve_batch(y, y, beta);
    const LossResult t1 = contrastive_term(ux, uy, config.temperature, config.loss, Anchor::First);
    const LossResult t2 = contrastive_term(vx, vy, config.temperature, config.loss, Anchor::Second);
    value = t1.value + t2.value;
    gx = Matrix(x.rows(), x.cols());
    gy = Matrix(y.rows(), y.cols());
    // queries and memories are both the batch embeddings
    hopfield_backward_batch(x, x, beta, t1.grad_x, gx, gx);
    hopfield_backward_batch(y, x, beta, t1.grad_y, gy, gx);
    hopfield_backward_batch(x, y, beta, t2.grad_x, gx, gy);
    hopfield_backward_batch(y, y, beta, t2.grad_y, gy, gy);
  }
  BatchLoss out;
  out.value = value;
  out.grad_a = enc_a.backward(inputs_a, gx);
  out.grad_b = enc_b.backward(inputs_b, gy);
  return out;
}

namespace {

constexpr std::uint64_t kDataStream = 0x0da7a;
constexpr std::uint64_t kSplitStream = 0x5b117;
constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kBatchStream = 0xba7c4;

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

void sgd_step(std::vector<double>& params, std::vector<double>& velocity, const std::vector<double>& grad,
              double lr, double momentum) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    velocity[k] = momentum * velocity[k] + grad[k];
    params[k] -= lr * velocity[k];
  }
}

}  // namespace

LabRun train(const LabConfig& config) {
  config.validate();
  LabRun run;
  run.config = config;

  auto data_rng = stream(config.seed, kDataStream);
  const SyntheticData data = gen_synthetic(config, data_rng());

  const std::size_t n = config.samples;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto split_rng = stream(config.seed, kSplitStream);
  std::shuffle(order.begin(), order.end(), split_rng);
  const auto n_held = static_cast<std::size_t>(std::round(config.heldout_fraction * static_cast<double>(n)));
  run.heldout_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_held));
  run.train_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_held), order.end());
  std::sort(run.heldout_indices.begin(), run.heldout_indices.end());
  std::sort(run.train_indices.begin(), run.train_indices.end());

  auto init_rng = stream(config.seed, kInitStream);
  const std::size_t hidden = 2 * config.embed_dim;
  run.encoder_a = Encoder::random(config.input_dim, hidden, config.embed_dim, config.init_bias_scale, init_rng);
  run.encoder_b = Encoder::random(config.input_dim, hidden, config.embed_dim, config.init_bias_scale, init_rng);

  std::vector<double> vel_a(run.encoder_a.params().size(), 0.0);
  std::vector<double> vel_b(run.encoder_b.params().size(), 0.0);
  auto batch_rng = stream(config.seed, kBatchStream);
  std::vector<std::size_t> pool = run.train_indices;
  run.loss_trace.reserve(config.steps);
  for (std::size_t step = 0; step < config.steps; ++step) {
    // partial Fisher-Yates: the first `batch` entries become the batch
    for (std::size_t k = 0; k < config.batch; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(batch_rng)]);
    }
    const std::span<const std::size_t> idx(pool.data(), config.batch);
    const Matrix in_a = select_rows(data.inputs_a, idx);
    const Matrix in_b = select_rows(data.inputs_b, idx);
    const BatchLoss l = lab_batch_loss(run.encoder_a, run.encoder_b, in_a, in_b, config);
    if (!std::isfinite(l.value)) throw Error(ErrorCode::NonFinite, "training diverged");
    run.loss_trace.push_back(l.value);
    sgd_step(run.encoder_a.params(), vel_a, l.grad_a, config.learning_rate, config.momentum);
    sgd_step(run.encoder_b.params(), vel_b, l.grad_b, config.learning_rate, config.momentum);
  }
  for (double v : run.encoder_a.params())
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "encoder parameters diverged");
  for (double v : run.encoder_b.params())
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "encoder parameters diverged");

  Matrix emb_a = run.encoder_a.forward(select_rows(data.inputs_a, run.heldout_indices));
  Matrix emb_b = run.encoder_b.forward(select_rows(data.inputs_b, run.heldout_indices));
  round_to_storage(emb_a);
  round_to_storage(emb_b);
  run.heldout = make_paired(make_set(std::move(emb_a), "image"), make_set(std::move(emb_b), "text"),
                            "gaplab-" + std::string(to_string(config.loss)) +
                                (config.use_hopfield ? "-hopfield" : ""));
  return run;
}

LabAblation ablation_2x2(const LabConfig& base) {
  std::vector<LabConfig> configs;
  for (LossKind loss : {LossKind::InfoNCE, LossKind::InfoLOOB}) {
    for (bool hop : {false, true}) {
      LabConfig c = base;
      c.loss = loss;
      c.use_hopfield = hop;
      c.validate();
      configs.push_back(c);
    }
  }
  LabAblation out;
  out.runs.resize(configs.size());
  out.table.resize(configs.size());
  parallel_for(configs.size(), [&](std::size_t k) {
    out.runs[k] = train(configs[k]);
    SvmParams svm;
    svm.seed = base.seed;
    const ClassifierReport sep = modality_separability(out.runs[k].heldout, 0.8, svm);
    const GapReport gap = paired_cosine_distribution(out.runs[k].heldout);
    out.table[k] = AblationRow{configs[k].loss, configs[k].use_hopfield, sep.accuracy, gap.mean_cosine,
                               gap.centroid_gap};
  });
  return out;
}

// ---------------------------------------------------------------- serialization

namespace {

nlohmann::ordered_json config_to_json(const LabConfig& c) {
  nlohmann::ordered_json j;
  j["latent_dim"] = c.latent_dim;
  j["input_dim"] = c.input_dim;
  j["embed_dim"] = c.embed_dim;
  j["n_clusters"] = c.n_clusters;
  j["samples"] = c.samples;
  j["batch"] = c.batch;
  j["steps"] = c.steps;
  j["learning_rate"] = c.learning_rate;
  j["momentum"] = c.momentum;
  j["temperature"] = c.temperature;
  j["hopfield_beta"] = c.hopfield_beta;
  j["loss"] = std::string(to_string(c.loss));
  j["use_hopfield"] = c.use_hopfield;
  j["seed"] = c.seed;
  j["cluster_spread"] = c.cluster_spread;
  j["input_noise"] = c.input_noise;
  j["init_bias_scale"] = c.init_bias_scale;
  j["heldout_fraction"] = c.heldout_fraction;
  return j;
}

}  // namespace

std::string lab_config_json(const LabConfig& config) { return config_to_json(config).dump(2); }

LabConfig parse_lab_config_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("lab config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "lab config must be a JSON object");
  LabConfig c;
  const nlohmann::ordered_json known = config_to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorCode::InvalidArgument, "unknown lab config key: " + key);
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("latent_dim", c.latent_dim);
    get("input_dim", c.input_dim);
    get("embed_dim", c.embed_dim);
    get("n_clusters", c.n_clusters);
    get("samples", c.samples);
    get("batch", c.batch);
    get("steps", c.steps);
    get("learning_rate", c.learning_rate);
    get("momentum", c.momentum);
    get("temperature", c.temperature);
    get("hopfield_beta", c.hopfield_beta);
    if (j.contains("loss")) c.loss = parse_loss_kind(j.at("loss").get<std::string>());
    get("use_hopfield", c.use_hopfield);
    get("seed", c.seed);
    get("cluster_spread", c.cluster_spread);
    get("input_noise", c.input_noise);
    get("init_bias_scale", c.init_bias_scale);
    get("heldout_fraction", c.heldout_fraction);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("lab config: ") + e.what());
  }
  c.validate();
  return c;
}

void save_lab_run(const LabRun& run, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
  nlohmann::ordered_json j;
  j["config"] = config_to_json(run.config);
  j["loss_trace"] = run.loss_trace;
  j["heldout_indices"] = run.heldout_indices;
  j["encoder_a"] = run.encoder_a.params();
  j["encoder_b"] = run.encoder_b.params();
  j["manifest"] = "manifest.json";
  std::ofstream f(dir / "run.json", std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + (dir / "run.json").string());
  f << j.dump(2) << '\n';
  save_dataset(run.heldout, dir, true, "held-out embeddings from gaplab");
}

std::string ablation_table_csv(const std::vector<AblationRow>& table) {
  std::ostringstream out;
  out << "loss,hopfield,svm_accuracy,mean_paired_cosine,centroid_gap\n";
  for (const AblationRow& r : table) {
    out << to_string(r.loss) << ',' << (r.hopfield ? "on" : "off") << ',' << format_double(r.svm_accuracy)
        << ',' << format_double(r.mean_paired_cosine) << ',' << format_double(r.centroid_gap) << '\n';
  }
  return out.str();
}

}  // namespace topemb
