#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace psm {

// Encoder topology. Table values (8 heads, 3 blocks, embedding 128) are the
// defaults; the remaining choices (pre-norm residual blocks, 4x feed-forward
// width, tanh nonlinearity, final layer norm, no positional encoding so the
// encoder is permutation-equivariant over node rows) are fixed here.
struct NetConfig {
  int input_dim = 11;
  int embed_dim = 128;
  int num_heads = 8;
  int num_blocks = 3;
  int ffn_mult = 4;
  double ln_epsilon = 1e-5;
  // Actor/critic head weights are initialized with this extra gain so the
  // untrained policy stays near probability 0.5 per node.
  double head_gain = 0.05;
};

struct TensorSpec {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index offset = 0;
};

// All weights live in one flat vector; named matrices are views into it. The
// flat layout makes clipping, optimizer steps, serialization, and
// finite-difference perturbation one-liners.
class NetworkParams {
 public:
  NetworkParams() = default;
  explicit NetworkParams(const NetConfig& cfg);

  static NetworkParams init(const NetConfig& cfg, std::uint64_t seed);

  Eigen::Map<Eigen::MatrixXd> tensor(const std::string& name);
  Eigen::Map<const Eigen::MatrixXd> tensor(const std::string& name) const;
  // View of the named tensor inside an external buffer with this layout
  // (used for gradient buffers).
  Eigen::Map<Eigen::MatrixXd> view_in(Eigen::VectorXd& buffer,
                                      const std::string& name) const;

  Eigen::VectorXd& flat() { return theta_; }
  const Eigen::VectorXd& flat() const { return theta_; }
  Eigen::Index size() const { return theta_.size(); }
  const std::vector<TensorSpec>& specs() const { return specs_; }
  const NetConfig& config() const { return cfg_; }

 private:
  const TensorSpec& spec(const std::string& name) const;
  void build_layout();

  NetConfig cfg_;
  std::vector<TensorSpec> specs_;
  std::unordered_map<std::string, std::size_t> index_;
  Eigen::VectorXd theta_;
};

struct BlockCache {
  Eigen::MatrixXd h_in, xhat1, a;  // block input, LN1 normalized, LN1 output
  Eigen::VectorXd invstd1;
  Eigen::MatrixXd q, k, v;
  std::vector<Eigen::MatrixXd> attn;  // per-head row-softmax matrices
  Eigen::MatrixXd concat;             // heads concatenated, before Wo
  Eigen::MatrixXd h_mid, xhat2, b;    // post-attention residual, LN2
  Eigen::VectorXd invstd2;
  Eigen::MatrixXd t;  // tanh activations of the feed-forward hidden layer
};

struct ForwardCache {
  Eigen::MatrixXd x;  // input features
  std::vector<BlockCache> blocks;
  Eigen::MatrixXd xhat_f;
  Eigen::VectorXd invstd_f;
  Eigen::MatrixXd h_final;
  Eigen::RowVectorXd pooled;
};

struct ForwardResult {
  Eigen::VectorXd logits;  // per node
  Eigen::VectorXd probs;   // sigmoid(logits)
  double value = 0;
};

// Full forward pass; fills `cache` (when given) with everything backward()
// needs.
ForwardResult forward(const NetworkParams& params, const Eigen::MatrixXd& features,
                      ForwardCache* cache = nullptr);

// Accumulates d(loss)/d(theta) into `grad` (same layout as params.flat())
// given the loss gradients w.r.t. the actor logits and the critic value.
void backward(const NetworkParams& params, const ForwardCache& cache,
              const Eigen::VectorXd& dlogits, double dvalue, Eigen::VectorXd& grad);

// Per-node probability of action 1; masked nodes are forced to probability 1
// so their log-probability contribution is exactly 0.
Eigen::VectorXd forward_actor(const NetworkParams& params,
                              const Eigen::MatrixXd& features,
                              const std::vector<bool>& mask);

double forward_critic(const NetworkParams& params, const Eigen::MatrixXd& features);

}  // namespace psm
