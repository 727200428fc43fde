#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace holgraph {

using Rng = std::mt19937_64;

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Activation { Relu, Identity };

template <typename T>
struct DenseLayer {
  Matrix<T> weight;  // inputs x outputs
  Matrix<T> bias;    // 1 x outputs
  Activation activation = Activation::Relu;
};

template <typename T>
struct MlpParams {
  std::vector<DenseLayer<T>> layers;

  std::size_t input_size() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.rows()); }
  std::size_t output_size() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weight.cols()); }
  MlpParams zeros_like() const;
};

template <typename T>
struct NamedParameter {
  std::string name;
  Matrix<T>* value;
};

template <typename T>
void collect_parameters(MlpParams<T>& mlp, const std::string& prefix, std::vector<NamedParameter<T>>& out) {
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    out.push_back({prefix + "/layer" + std::to_string(i) + "/weight", &mlp.layers[i].weight});
    out.push_back({prefix + "/layer" + std::to_string(i) + "/bias", &mlp.layers[i].bias});
  }
}

/// Dense layers `input -> widths[0] -> ... -> widths.back()`, `hidden`
/// activation everywhere except the last layer. Weights are drawn uniformly
/// from +-sqrt(3 / fan_in); biases start at zero.
template <typename T>
MlpParams<T> make_mlp(std::size_t input, std::span<const std::size_t> widths, Activation hidden, Activation output,
                      Rng& rng);

template <typename T>
struct MlpTape {
  struct Layer {
    Matrix<T> input;  // after dropout
    Matrix<T> mask;   // 0 or 1/keep per entry; empty when dropout was off
    Matrix<T> output;
  };
  std::vector<Layer> layers;
  bool consumed = false;
};

template <typename T>
struct MlpResult {
  Matrix<T> output;
  MlpTape<T> tape;
};

/// Inverted dropout with keep probability `keep` is applied to the input of
/// every dense layer when `training` is set.
template <typename T>
MlpResult<T> mlp_forward(const MlpParams<T>& params, const Matrix<T>& input, double keep, bool training, Rng& rng);

/// Forward pass without recording a tape.
template <typename T>
Matrix<T> mlp_apply(const MlpParams<T>& params, const Matrix<T>& input);

/// Accumulates parameter gradients into `grads` and returns the gradient with
/// respect to the input. A tape can be consumed once.
template <typename T>
Matrix<T> mlp_backward(const MlpParams<T>& params, MlpTape<T>& tape, const Matrix<T>& output_grad,
                       MlpParams<T>& grads);

/// Fills `mask` with 0 or 1/keep entries.
template <typename T>
void fill_dropout_mask(Matrix<T>& mask, double keep, Rng& rng);

template <typename T>
bool all_finite(const Matrix<T>& m) {
  return m.allFinite();
}

template <typename T>
struct LossResult {
  T loss{};
  std::vector<T> grad;
};

/// Mean softmax cross-entropy over rows; gradient has the shape of `logits`
/// flattened row-major.
template <typename T>
LossResult<T> softmax_xent(const Matrix<T>& logits, std::span<const int> labels);

/// Returns {loss, d loss / d logit}.
template <typename T>
std::pair<T, T> sigmoid_xent(T logit, int label);

/// ln(1 + e^{-x}) computed without overflow.
template <typename T>
T softplus_neg(T x);

/// Pairwise ranking loss sum_{i pos, j neg} w_ij ln(1 + e^{-(l_i - l_j)}) with
/// w_ij = 2 when both logits belong to the same goal, 1 otherwise.
template <typename T>
LossResult<T> aucroc_loss(std::span<const T> logits, std::span<const std::uint8_t> positive,
                          std::span<const int> goal_ids);

struct AdamConfig {
  double learning_rate = 1e-4;
  double decay_rate = 0.98;
  long decay_steps = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double polyak_rate = 0.9999;
};

/// Adam moments and the Polyak shadow for a flat list of parameters.
template <typename T>
struct OptimizerState {
  AdamConfig config;
  long step = 0;
  long skipped = 0;
  std::vector<Matrix<T>> first_moment;
  std::vector<Matrix<T>> second_moment;
  std::vector<Matrix<T>> shadow;
};

/// Moments start at zero; the shadow starts as a copy of the parameters.
template <typename T>
OptimizerState<T> make_optimizer_state(const AdamConfig& config, std::span<Matrix<T>* const> params);

/// base * decay^(step / decay_steps), evaluated for the current step count.
double effective_learning_rate(const AdamConfig& config, long step);

/// One Adam update with bias correction, followed by the Polyak update
/// shadow <- r * shadow + (1 - r) * param. Non-finite gradients are rejected:
/// nothing changes, the step counter stays put and false is returned.
template <typename T>
bool adam_step(OptimizerState<T>& state, std::span<Matrix<T>* const> params,
               std::span<const Matrix<T>* const> grads);

}  // namespace holgraph
