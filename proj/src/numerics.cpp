#include "holgraph/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace holgraph {

template <typename T>
MlpParams<T> MlpParams<T>::zeros_like() const {
  MlpParams<T> out;
  for (const auto& layer : layers) {
    out.layers.push_back({Matrix<T>::Zero(layer.weight.rows(), layer.weight.cols()),
                          Matrix<T>::Zero(layer.bias.rows(), layer.bias.cols()), layer.activation});
  }
  return out;
}

template <typename T>
MlpParams<T> make_mlp(std::size_t input, std::span<const std::size_t> widths, Activation hidden, Activation output,
                      Rng& rng) {
  MlpParams<T> params;
  std::size_t fan_in = input;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const double limit = std::sqrt(3.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer<T> layer;
    layer.weight.resize(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(widths[i]));
    for (Eigen::Index k = 0; k < layer.weight.size(); ++k) layer.weight.data()[k] = static_cast<T>(dist(rng));
    layer.bias = Matrix<T>::Zero(1, static_cast<Eigen::Index>(widths[i]));
    layer.activation = i + 1 == widths.size() ? output : hidden;
    params.layers.push_back(std::move(layer));
    fan_in = widths[i];
  }
  return params;
}

template <typename T>
void fill_dropout_mask(Matrix<T>& mask, double keep, Rng& rng) {
  if (!(keep > 0.0 && keep <= 1.0)) throw NumericsError("dropout keep probability must be in (0, 1]");
  const T scale = static_cast<T>(1.0 / keep);
  const auto threshold = static_cast<std::uint64_t>(std::ldexp(keep, 32));
  T* data = mask.data();
  const Eigen::Index n = mask.size();
  Eigen::Index i = 0;
  while (i < n) {
    const std::uint64_t bits = rng();
    data[i++] = (bits & 0xffffffffULL) < threshold ? scale : T(0);
    if (i < n) data[i++] = (bits >> 32) < threshold ? scale : T(0);
  }
}

template <typename T>
MlpResult<T> mlp_forward(const MlpParams<T>& params, const Matrix<T>& input, double keep, bool training, Rng& rng) {
  if (params.layers.empty()) throw NumericsError("MLP without layers");
  MlpResult<T> result;
  Matrix<T> x = input;
  result.tape.layers.reserve(params.layers.size());
  for (const DenseLayer<T>& layer : params.layers) {
    if (x.cols() != layer.weight.rows()) {
      throw NumericsError("MLP shape mismatch: input has " + std::to_string(x.cols()) + " columns, layer expects " +
                          std::to_string(layer.weight.rows()));
    }
    typename MlpTape<T>::Layer record;
    if (training && keep < 1.0) {
      record.mask.resize(x.rows(), x.cols());
      fill_dropout_mask(record.mask, keep, rng);
      x.array() *= record.mask.array();
    }
    Matrix<T> z = x * layer.weight;
    z.rowwise() += layer.bias.row(0);
    if (layer.activation == Activation::Relu) z = z.cwiseMax(T(0));
    record.input = std::move(x);
    record.output = z;
    result.tape.layers.push_back(std::move(record));
    x = std::move(z);
  }
  result.output = std::move(x);
  return result;
}

template <typename T>
Matrix<T> mlp_apply(const MlpParams<T>& params, const Matrix<T>& input) {
  Matrix<T> x = input;
  for (const DenseLayer<T>& layer : params.layers) {
    if (x.cols() != layer.weight.rows()) throw NumericsError("MLP shape mismatch");
    Matrix<T> z = x * layer.weight;
    z.rowwise() += layer.bias.row(0);
    if (layer.activation == Activation::Relu) z = z.cwiseMax(T(0));
    x = std::move(z);
  }
  return x;
}

template <typename T>
Matrix<T> mlp_backward(const MlpParams<T>& params, MlpTape<T>& tape, const Matrix<T>& output_grad,
                       MlpParams<T>& grads) {
  if (tape.consumed) throw NumericsError("MLP tape already consumed");
  if (tape.layers.size() != params.layers.size() || grads.layers.size() != params.layers.size()) {
    throw NumericsError("MLP tape does not match parameters");
  }
  tape.consumed = true;
  Matrix<T> g = output_grad;
  for (std::size_t i = params.layers.size(); i-- > 0;) {
    const DenseLayer<T>& layer = params.layers[i];
    auto& record = tape.layers[i];
    if (g.rows() != record.output.rows() || g.cols() != record.output.cols()) {
      throw NumericsError("MLP output gradient shape mismatch");
    }
    if (layer.activation == Activation::Relu) {
      g.array() *= (record.output.array() > T(0)).template cast<T>();
    }
    grads.layers[i].weight.noalias() += record.input.transpose() * g;
    grads.layers[i].bias += g.colwise().sum();
    Matrix<T> g_in = g * layer.weight.transpose();
    if (record.mask.size() > 0) g_in.array() *= record.mask.array();
    g = std::move(g_in);
    record = {};
  }
  return g;
}

template <typename T>
LossResult<T> softmax_xent(const Matrix<T>& logits, std::span<const int> labels) {
  const Eigen::Index n = logits.rows();
  const Eigen::Index classes = logits.cols();
  if (static_cast<std::size_t>(n) != labels.size()) throw NumericsError("softmax_xent: label count mismatch");
  if (n == 0) throw NumericsError("softmax_xent: empty batch");
  LossResult<T> result;
  result.grad.assign(static_cast<std::size_t>(logits.size()), T(0));
  double total = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const int label = labels[static_cast<std::size_t>(r)];
    if (label < 0 || label >= classes) throw NumericsError("softmax_xent: label out of range");
    const T max = logits.row(r).maxCoeff();
    T sum = 0;
    for (Eigen::Index c = 0; c < classes; ++c) sum += std::exp(logits(r, c) - max);
    const T log_z = max + std::log(sum);
    total += static_cast<double>(log_z - logits(r, label));
    for (Eigen::Index c = 0; c < classes; ++c) {
      const T p = std::exp(logits(r, c) - log_z);
      result.grad[static_cast<std::size_t>(r * classes + c)] = (p - (c == label ? T(1) : T(0))) / static_cast<T>(n);
    }
  }
  result.loss = static_cast<T>(total / static_cast<double>(n));
  return result;
}

template <typename T>
T softplus_neg(T x) {
  // ln(1 + e^{-x})
  if (x > 0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

template <typename T>
std::pair<T, T> sigmoid_xent(T logit, int label) {
  const T y = label ? T(1) : T(0);
  const T loss = std::max(logit, T(0)) - logit * y + std::log1p(std::exp(-std::abs(logit)));
  const T p = logit >= 0 ? T(1) / (T(1) + std::exp(-logit)) : std::exp(logit) / (T(1) + std::exp(logit));
  return {loss, p - y};
}

template <typename T>
LossResult<T> aucroc_loss(std::span<const T> logits, std::span<const std::uint8_t> positive,
                          std::span<const int> goal_ids) {
  const std::size_t n = logits.size();
  if (positive.size() != n || goal_ids.size() != n) throw NumericsError("aucroc_loss: length mismatch");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (positive[i] ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw NumericsError("aucroc_loss: needs at least one positive and one negative");
  LossResult<T> result;
  result.grad.assign(n, T(0));
  double total = 0.0;
  for (std::size_t i : pos) {
    for (std::size_t j : neg) {
      const T w = goal_ids[i] == goal_ids[j] ? T(2) : T(1);
      const T d = logits[i] - logits[j];
      total += static_cast<double>(w * softplus_neg(d));
      // d/dd ln(1 + e^{-d}) = -sigmoid(-d)
      const T s = d >= 0 ? std::exp(-d) / (T(1) + std::exp(-d)) : T(1) / (T(1) + std::exp(d));
      result.grad[i] -= w * s;
      result.grad[j] += w * s;
    }
  }
  result.loss = static_cast<T>(total);
  return result;
}

double effective_learning_rate(const AdamConfig& config, long step) {
  const double period = static_cast<double>(std::max<long>(config.decay_steps, 1));
  return config.learning_rate * std::pow(config.decay_rate, static_cast<double>(step) / period);
}

template <typename T>
OptimizerState<T> make_optimizer_state(const AdamConfig& config, std::span<Matrix<T>* const> params) {
  OptimizerState<T> state;
  state.config = config;
  for (Matrix<T>* p : params) {
    state.first_moment.push_back(Matrix<T>::Zero(p->rows(), p->cols()));
    state.second_moment.push_back(Matrix<T>::Zero(p->rows(), p->cols()));
    state.shadow.push_back(*p);
  }
  return state;
}

template <typename T>
bool adam_step(OptimizerState<T>& state, std::span<Matrix<T>* const> params,
               std::span<const Matrix<T>* const> grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw NumericsError("adam_step: parameter count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != grads[i]->rows() || params[i]->cols() != grads[i]->cols() ||
        state.first_moment[i].rows() != params[i]->rows() || state.first_moment[i].cols() != params[i]->cols()) {
      throw NumericsError("adam_step: shape mismatch for parameter " + std::to_string(i));
    }
  }
  for (const Matrix<T>* g : grads) {
    if (!g->allFinite()) {
      ++state.skipped;
      std::clog << "adam_step: non-finite gradient, step " << state.step << " skipped\n";
      return false;
    }
  }
  const AdamConfig& c = state.config;
  const double lr = effective_learning_rate(c, state.step);
  const long t = state.step + 1;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
  const T b1 = static_cast<T>(c.beta1), b2 = static_cast<T>(c.beta2);
  const T step_size = static_cast<T>(lr / correction1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(correction2));
  const T eps = static_cast<T>(c.epsilon);
  const T r = static_cast<T>(c.polyak_rate);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    const auto& g = *grads[i];
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g.cwiseProduct(g);
    params[i]->array() -= step_size * m.array() / ((v.array().sqrt() * inv_sqrt_c2) + eps);
    state.shadow[i] = r * state.shadow[i] + (T(1) - r) * (*params[i]);
  }
  state.step = t;
  return true;
}

#define HOLGRAPH_INSTANTIATE(T)                                                                                  \
  template struct MlpParams<T>;                                                                                  \
  template MlpParams<T> make_mlp<T>(std::size_t, std::span<const std::size_t>, Activation, Activation, Rng&);   \
  template void fill_dropout_mask<T>(Matrix<T>&, double, Rng&);                                                  \
  template MlpResult<T> mlp_forward<T>(const MlpParams<T>&, const Matrix<T>&, double, bool, Rng&);               \
  template Matrix<T> mlp_apply<T>(const MlpParams<T>&, const Matrix<T>&);                                        \
  template Matrix<T> mlp_backward<T>(const MlpParams<T>&, MlpTape<T>&, const Matrix<T>&, MlpParams<T>&);         \
  template LossResult<T> softmax_xent<T>(const Matrix<T>&, std::span<const int>);                                \
  template T softplus_neg<T>(T);                                                                                 \
  template std::pair<T, T> sigmoid_xent<T>(T, int);                                                              \
  template LossResult<T> aucroc_loss<T>(std::span<const T>, std::span<const std::uint8_t>, std::span<const int>); \
  template OptimizerState<T> make_optimizer_state<T>(const AdamConfig&, std::span<Matrix<T>* const>);            \
  template bool adam_step<T>(OptimizerState<T>&, std::span<Matrix<T>* const>, std::span<const Matrix<T>* const>);

HOLGRAPH_INSTANTIATE(float)
HOLGRAPH_INSTANTIATE(double)

#undef HOLGRAPH_INSTANTIATE

}  // namespace holgraph
