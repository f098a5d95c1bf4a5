#include "psm/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "psm/rng.hpp"

namespace psm {

namespace {

// Row-wise layer normalization. Returns the output and stores the normalized
// rows and inverse standard deviations for the backward pass.
Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& gain,
                           const Eigen::RowVectorXd& bias, double eps,
                           Eigen::MatrixXd& xhat, Eigen::VectorXd& invstd) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  xhat.resize(rows, cols);
  invstd.resize(rows);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + eps);
    invstd(i) = inv;
    xhat.row(i) = (x.row(i).array() - mean) * inv;
    out.row(i) = xhat.row(i).cwiseProduct(gain) + bias;
  }
  return out;
}

// dL/dx for layer_norm, accumulating gain/bias gradients.
Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy,
                                    const Eigen::MatrixXd& xhat,
                                    const Eigen::VectorXd& invstd,
                                    const Eigen::RowVectorXd& gain,
                                    Eigen::Map<Eigen::MatrixXd> dgain,
                                    Eigen::Map<Eigen::MatrixXd> dbias) {
  const Eigen::Index rows = dy.rows();
  const Eigen::Index cols = dy.cols();
  Eigen::MatrixXd dx(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    dgain.row(0) += dy.row(i).cwiseProduct(xhat.row(i));
    dbias.row(0) += dy.row(i);
    const Eigen::RowVectorXd dxhat = dy.row(i).cwiseProduct(gain);
    const double mean_dxhat = dxhat.mean();
    const double mean_dxhat_xhat = dxhat.cwiseProduct(xhat.row(i)).mean();
    dx.row(i) = invstd(i) * (dxhat.array() - mean_dxhat -
                             xhat.row(i).array() * mean_dxhat_xhat)
                    .matrix();
  }
  (void)cols;
  return dx;
}

Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& scores) {
  Eigen::MatrixXd out(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double m = scores.row(i).maxCoeff();
    Eigen::ArrayXd e = (scores.row(i).array() - m).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  return out;
}

// Row-wise softmax Jacobian product: ds = s .* (dout - (dout . s)).
Eigen::MatrixXd row_softmax_backward(const Eigen::MatrixXd& s,
                                     const Eigen::MatrixXd& dout) {
  Eigen::MatrixXd dscores(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double dot = dout.row(i).dot(s.row(i));
    dscores.row(i) = s.row(i).cwiseProduct(
        (dout.row(i).array() - dot).matrix());
  }
  return dscores;
}

}  // namespace

NetworkParams::NetworkParams(const NetConfig& cfg) : cfg_(cfg) {
  build_layout();
  theta_ = Eigen::VectorXd::Zero(specs_.empty() ? 0 : specs_.back().offset +
                                                      specs_.back().rows *
                                                          specs_.back().cols);
}

void NetworkParams::build_layout() {
  specs_.clear();
  index_.clear();
  Eigen::Index offset = 0;
  auto add = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    index_[name] = specs_.size();
    specs_.push_back(TensorSpec{name, rows, cols, offset});
    offset += rows * cols;
  };
  const Eigen::Index d = cfg_.embed_dim;
  const Eigen::Index f = d * cfg_.ffn_mult;
  add("in.W", cfg_.input_dim, d);
  add("in.b", 1, d);
  for (int blk = 0; blk < cfg_.num_blocks; ++blk) {
    const std::string p = "blk" + std::to_string(blk) + ".";
    add(p + "ln1.g", 1, d);
    add(p + "ln1.b", 1, d);
    add(p + "attn.Wq", d, d);
    add(p + "attn.bq", 1, d);
    add(p + "attn.Wk", d, d);
    add(p + "attn.bk", 1, d);
    add(p + "attn.Wv", d, d);
    add(p + "attn.bv", 1, d);
    add(p + "attn.Wo", d, d);
    add(p + "attn.bo", 1, d);
    add(p + "ln2.g", 1, d);
    add(p + "ln2.b", 1, d);
    add(p + "ffn.W1", d, f);
    add(p + "ffn.b1", 1, f);
    add(p + "ffn.W2", f, d);
    add(p + "ffn.b2", 1, d);
  }
  add("lnf.g", 1, d);
  add("lnf.b", 1, d);
  add("actor.W", d, 1);
  add("actor.b", 1, 1);
  add("critic.W", d, 1);
  add("critic.b", 1, 1);
}

const TensorSpec& NetworkParams::spec(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("unknown tensor: " + name);
  return specs_[it->second];
}

Eigen::Map<Eigen::MatrixXd> NetworkParams::tensor(const std::string& name) {
  const TensorSpec& s = spec(name);
  return {theta_.data() + s.offset, s.rows, s.cols};
}

Eigen::Map<const Eigen::MatrixXd> NetworkParams::tensor(const std::string& name) const {
  const TensorSpec& s = spec(name);
  return {theta_.data() + s.offset, s.rows, s.cols};
}

Eigen::Map<Eigen::MatrixXd> NetworkParams::view_in(Eigen::VectorXd& buffer,
                                                   const std::string& name) const {
  if (buffer.size() != theta_.size()) {
    throw std::invalid_argument("buffer size does not match parameter layout");
  }
  const TensorSpec& s = spec(name);
  return {buffer.data() + s.offset, s.rows, s.cols};
}

NetworkParams NetworkParams::init(const NetConfig& cfg, std::uint64_t seed) {
  NetworkParams params(cfg);
  Rng rng = Rng::stream(seed, 0x17A7);
  for (const TensorSpec& s : params.specs_) {
    double* data = params.theta_.data() + s.offset;
    const Eigen::Index n = s.rows * s.cols;
    const bool is_ln_gain =
        s.name.size() > 2 && s.name.compare(s.name.size() - 2, 2, ".g") == 0;
    if (is_ln_gain) {
      for (Eigen::Index i = 0; i < n; ++i) data[i] = 1.0;
      continue;
    }
    if (s.rows == 1) {  // biases start at zero
      for (Eigen::Index i = 0; i < n; ++i) data[i] = 0.0;
      continue;
    }
    // Scaled-uniform (Glorot) weights; head matrices get an extra gain so the
    // untrained policy starts near 0.5.
    double gain = 1.0;
    if (s.name == "actor.W" || s.name == "critic.W") gain = cfg.head_gain;
    const double limit =
        gain * std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
    for (Eigen::Index i = 0; i < n; ++i) data[i] = rng.uniform(-limit, limit);
  }
  return params;
}

ForwardResult forward(const NetworkParams& params, const Eigen::MatrixXd& features,
                      ForwardCache* cache) {
  const NetConfig& cfg = params.config();
  if (features.rows() == 0) throw std::invalid_argument("empty feature matrix");
  if (features.cols() != cfg.input_dim) {
    throw std::invalid_argument("feature matrix must have " +
                                std::to_string(cfg.input_dim) + " columns");
  }
  const Eigen::Index m = features.rows();
  const Eigen::Index d = cfg.embed_dim;
  const Eigen::Index heads = cfg.num_heads;
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.x = features;
  c.blocks.assign(static_cast<std::size_t>(cfg.num_blocks), BlockCache{});

  Eigen::MatrixXd h = features * params.tensor("in.W");
  h.rowwise() += params.tensor("in.b").row(0);

  for (int blk = 0; blk < cfg.num_blocks; ++blk) {
    const std::string p = "blk" + std::to_string(blk) + ".";
    BlockCache& bc = c.blocks[static_cast<std::size_t>(blk)];
    bc.h_in = h;
    bc.a = layer_norm(h, params.tensor(p + "ln1.g").row(0),
                      params.tensor(p + "ln1.b").row(0), cfg.ln_epsilon, bc.xhat1,
                      bc.invstd1);
    bc.q = bc.a * params.tensor(p + "attn.Wq");
    bc.q.rowwise() += params.tensor(p + "attn.bq").row(0);
    bc.k = bc.a * params.tensor(p + "attn.Wk");
    bc.k.rowwise() += params.tensor(p + "attn.bk").row(0);
    bc.v = bc.a * params.tensor(p + "attn.Wv");
    bc.v.rowwise() += params.tensor(p + "attn.bv").row(0);
    bc.attn.resize(static_cast<std::size_t>(heads));
    bc.concat.resize(m, d);
    for (Eigen::Index hd = 0; hd < heads; ++hd) {
      const auto qh = bc.q.middleCols(hd * dh, dh);
      const auto kh = bc.k.middleCols(hd * dh, dh);
      const auto vh = bc.v.middleCols(hd * dh, dh);
      Eigen::MatrixXd scores = qh * kh.transpose() * scale;
      bc.attn[static_cast<std::size_t>(hd)] = row_softmax(scores);
      bc.concat.middleCols(hd * dh, dh) = bc.attn[static_cast<std::size_t>(hd)] * vh;
    }
    Eigen::MatrixXd o = bc.concat * params.tensor(p + "attn.Wo");
    o.rowwise() += params.tensor(p + "attn.bo").row(0);
    bc.h_mid = bc.h_in + o;
    bc.b = layer_norm(bc.h_mid, params.tensor(p + "ln2.g").row(0),
                      params.tensor(p + "ln2.b").row(0), cfg.ln_epsilon, bc.xhat2,
                      bc.invstd2);
    Eigen::MatrixXd z = bc.b * params.tensor(p + "ffn.W1");
    z.rowwise() += params.tensor(p + "ffn.b1").row(0);
    bc.t = z.array().tanh().matrix();
    Eigen::MatrixXd f = bc.t * params.tensor(p + "ffn.W2");
    f.rowwise() += params.tensor(p + "ffn.b2").row(0);
    h = bc.h_mid + f;
  }

  c.h_final = layer_norm(h, params.tensor("lnf.g").row(0),
                         params.tensor("lnf.b").row(0), cfg.ln_epsilon, c.xhat_f,
                         c.invstd_f);
  c.pooled = c.h_final.colwise().mean();

  ForwardResult result;
  result.logits = c.h_final * params.tensor("actor.W");
  result.logits.array() += params.tensor("actor.b")(0, 0);
  result.probs = result.logits.unaryExpr(
      [](double z) { return 1.0 / (1.0 + std::exp(-z)); });
  result.value = (c.pooled * params.tensor("critic.W"))(0, 0) +
                 params.tensor("critic.b")(0, 0);
  return result;
}

void backward(const NetworkParams& params, const ForwardCache& cache,
              const Eigen::VectorXd& dlogits, double dvalue, Eigen::VectorXd& grad) {
  const NetConfig& cfg = params.config();
  if (grad.size() != params.size()) grad = Eigen::VectorXd::Zero(params.size());
  const Eigen::Index m = cache.h_final.rows();
  const Eigen::Index d = cfg.embed_dim;
  const Eigen::Index heads = cfg.num_heads;
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  auto g = [&](const std::string& name) { return params.view_in(grad, name); };

  // Heads.
  g("actor.W") += cache.h_final.transpose() * dlogits;
  g("actor.b")(0, 0) += dlogits.sum();
  g("critic.W") += cache.pooled.transpose() * dvalue;
  g("critic.b")(0, 0) += dvalue;

  Eigen::MatrixXd dh_final =
      dlogits * params.tensor("actor.W").transpose();  // (M x 1) * (1 x d)
  const Eigen::RowVectorXd dpooled =
      dvalue * params.tensor("critic.W").transpose().row(0);
  dh_final.rowwise() += dpooled / static_cast<double>(m);

  Eigen::MatrixXd dhid =
      layer_norm_backward(dh_final, cache.xhat_f, cache.invstd_f,
                          params.tensor("lnf.g").row(0), g("lnf.g"), g("lnf.b"));

  for (int blk = cfg.num_blocks - 1; blk >= 0; --blk) {
    const std::string p = "blk" + std::to_string(blk) + ".";
    const BlockCache& bc = cache.blocks[static_cast<std::size_t>(blk)];
    // h_out = h_mid + f(LN2(h_mid)); dhid is dL/dh_out.
    const Eigen::MatrixXd& df = dhid;
    g(p + "ffn.W2") += bc.t.transpose() * df;
    g(p + "ffn.b2").row(0) += df.colwise().sum();
    Eigen::MatrixXd dt = df * params.tensor(p + "ffn.W2").transpose();
    Eigen::MatrixXd dz = dt.cwiseProduct(
        (1.0 - bc.t.array().square()).matrix());
    g(p + "ffn.W1") += bc.b.transpose() * dz;
    g(p + "ffn.b1").row(0) += dz.colwise().sum();
    const Eigen::MatrixXd db = dz * params.tensor(p + "ffn.W1").transpose();
    Eigen::MatrixXd dh_mid =
        dhid + layer_norm_backward(db, bc.xhat2, bc.invstd2,
                                   params.tensor(p + "ln2.g").row(0), g(p + "ln2.g"),
                                   g(p + "ln2.b"));
    // h_mid = h_in + concat * Wo + bo
    const Eigen::MatrixXd& dout = dh_mid;
    g(p + "attn.Wo") += bc.concat.transpose() * dout;
    g(p + "attn.bo").row(0) += dout.colwise().sum();
    Eigen::MatrixXd dconcat = dout * params.tensor(p + "attn.Wo").transpose();
    Eigen::MatrixXd dq(m, d), dk(m, d), dv(m, d);
    for (Eigen::Index hd = 0; hd < heads; ++hd) {
      const Eigen::MatrixXd& s = bc.attn[static_cast<std::size_t>(hd)];
      const auto dch = dconcat.middleCols(hd * dh, dh);
      const auto vh = bc.v.middleCols(hd * dh, dh);
      const auto qh = bc.q.middleCols(hd * dh, dh);
      const auto kh = bc.k.middleCols(hd * dh, dh);
      dv.middleCols(hd * dh, dh) = s.transpose() * dch;
      const Eigen::MatrixXd ds = dch * vh.transpose();
      const Eigen::MatrixXd dscores = row_softmax_backward(s, ds);
      dq.middleCols(hd * dh, dh) = dscores * kh * scale;
      dk.middleCols(hd * dh, dh) = dscores.transpose() * qh * scale;
    }
    g(p + "attn.Wq") += bc.a.transpose() * dq;
    g(p + "attn.bq").row(0) += dq.colwise().sum();
    g(p + "attn.Wk") += bc.a.transpose() * dk;
    g(p + "attn.bk").row(0) += dk.colwise().sum();
    g(p + "attn.Wv") += bc.a.transpose() * dv;
    g(p + "attn.bv").row(0) += dv.colwise().sum();
    Eigen::MatrixXd da = dq * params.tensor(p + "attn.Wq").transpose() +
                         dk * params.tensor(p + "attn.Wk").transpose() +
                         dv * params.tensor(p + "attn.Wv").transpose();
    dhid = dh_mid + layer_norm_backward(da, bc.xhat1, bc.invstd1,
                                        params.tensor(p + "ln1.g").row(0),
                                        g(p + "ln1.g"), g(p + "ln1.b"));
  }

  g("in.W") += cache.x.transpose() * dhid;
  g("in.b").row(0) += dhid.colwise().sum();
}

Eigen::VectorXd forward_actor(const NetworkParams& params,
                              const Eigen::MatrixXd& features,
                              const std::vector<bool>& mask) {
  ForwardResult result = forward(params, features);
  if (!mask.empty()) {
    if (static_cast<Eigen::Index>(mask.size()) != result.probs.size()) {
      throw std::invalid_argument("mask length must equal node count");
    }
    for (Eigen::Index i = 0; i < result.probs.size(); ++i) {
      if (mask[static_cast<std::size_t>(i)]) result.probs(i) = 1.0;
    }
  }
  return result.probs;
}

double forward_critic(const NetworkParams& params, const Eigen::MatrixXd& features) {
  return forward(params, features).value;
}

}  // namespace psm
