#include "stochq/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stochq/errors.hpp"

namespace stochq {

MlpParams::MlpParams(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw Error(ErrorCode::shape_mismatch, "an MLP needs at least two layer sizes");
  for (std::size_t s : sizes_) {
    if (s == 0) throw Error(ErrorCode::shape_mismatch, "zero-width layer");
  }
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
  }
  data_.assign(total, 0.0);
}

MlpParams MlpParams::random(std::vector<std::size_t> layer_sizes, Rng& rng) {
  MlpParams p(std::move(layer_sizes));
  for (std::size_t l = 0; l < p.n_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(p.sizes_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const std::size_t count = p.sizes_[l] * p.sizes_[l + 1] + p.sizes_[l + 1];
    double* w = p.weights(l);
    for (std::size_t i = 0; i < count; ++i) w[i] = dist(rng);
  }
  return p;
}

bool MlpParams::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void MlpParams::add_scaled(const MlpParams& other, double scale) {
  if (!same_shape(other)) throw Error(ErrorCode::shape_mismatch, "add_scaled on different shapes");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
}

void MlpParams::blend_toward(const MlpParams& source, double tau) {
  if (!same_shape(source)) throw Error(ErrorCode::shape_mismatch, "blend_toward on different shapes");
  if (tau == 1.0) {
    data_ = source.data_;
    return;
  }
  // Incremental form so that identical networks stay bit-identical.
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += tau * (source.data_[i] - data_[i]);
}

namespace {

// out = bias + W x, accumulated in input order.
void affine(const MlpParams& p, std::size_t l, const double* x, double* out) {
  const std::size_t n_in = p.layer_sizes()[l];
  const std::size_t n_out = p.layer_sizes()[l + 1];
  const double* w = p.weights(l);
  const double* b = p.bias(l);
  std::copy(b, b + n_out, out);
  for (std::size_t i = 0; i < n_in; ++i) {
    const double xi = x[i];
    const double* col = w + i * n_out;
    for (std::size_t o = 0; o < n_out; ++o) out[o] += col[o] * xi;
  }
}

void relu(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void check_input(const MlpParams& params, std::size_t size) {
  if (params.layer_sizes().empty() || size != params.input_size() || params.layer_sizes().back() != 1) {
    throw Error(ErrorCode::shape_mismatch,
                "input of size " + std::to_string(size) + " for a network expecting " +
                    std::to_string(params.layer_sizes().empty() ? 0 : params.input_size()));
  }
}

}  // namespace

double forward(const MlpParams& params, std::span<const double> input) {
  check_input(params, input.size());
  const auto& sizes = params.layer_sizes();
  std::vector<double> a(input.begin(), input.end());
  std::vector<double> b;
  for (std::size_t l = 0; l < params.n_layers(); ++l) {
    b.resize(sizes[l + 1]);
    affine(params, l, a.data(), b.data());
    if (l + 1 < params.n_layers()) relu(b.data(), b.size());
    std::swap(a, b);
  }
  return a[0];
}

double mse_loss(const MlpParams& params, std::span<const RegressionSample> batch) {
  if (batch.empty()) throw Error(ErrorCode::invalid_params, "empty batch");
  double sum = 0.0;
  for (const auto& s : batch) {
    const double r = s.target - forward(params, s.input);
    sum += r * r;
  }
  return sum / static_cast<double>(batch.size());
}

MlpParams gradient(const MlpParams& params, std::span<const RegressionSample> batch) {
  if (batch.empty()) throw Error(ErrorCode::invalid_params, "empty batch");
  const auto& sizes = params.layer_sizes();
  const std::size_t layers = params.n_layers();
  MlpParams grad(sizes);
  const double scale = 2.0 / static_cast<double>(batch.size());

  // activations[0] = input, activations[l+1] = post-activation of layer l.
  std::vector<std::vector<double>> activations(layers + 1);
  std::vector<double> delta;
  std::vector<double> delta_prev;
  for (const auto& sample : batch) {
    check_input(params, sample.input.size());
    activations[0] = sample.input;
    for (std::size_t l = 0; l < layers; ++l) {
      activations[l + 1].resize(sizes[l + 1]);
      affine(params, l, activations[l].data(), activations[l + 1].data());
      if (l + 1 < layers) relu(activations[l + 1].data(), sizes[l + 1]);
    }
    // dL/dQ for this sample.
    delta.assign(1, -scale * (sample.target - activations[layers][0]));
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t n_in = sizes[l];
      const std::size_t n_out = sizes[l + 1];
      const double* x = activations[l].data();
      double* gw = grad.weights(l);
      double* gb = grad.bias(l);
      for (std::size_t o = 0; o < n_out; ++o) gb[o] += delta[o];
      for (std::size_t i = 0; i < n_in; ++i) {
        double* gcol = gw + i * n_out;
        for (std::size_t o = 0; o < n_out; ++o) gcol[o] += delta[o] * x[i];
      }
      if (l == 0) break;
      delta_prev.assign(n_in, 0.0);
      const double* w = params.weights(l);
      for (std::size_t i = 0; i < n_in; ++i) {
        // ReLU derivative: zero where the hidden unit was inactive.
        if (x[i] <= 0.0) continue;
        const double* col = w + i * n_out;
        double acc = 0.0;
        for (std::size_t o = 0; o < n_out; ++o) acc += col[o] * delta[o];
        delta_prev[i] = acc;
      }
      std::swap(delta, delta_prev);
    }
  }
  return grad;
}

StateActionEvaluator::StateActionEvaluator(const MlpParams& params, std::span<const double> state)
    : params_(&params), state_dim_(state.size()) {
  const auto& sizes = params.layer_sizes();
  if (sizes.size() < 2 || state.size() >= params.input_size()) {
    throw Error(ErrorCode::shape_mismatch, "state does not leave room for action features");
  }
  const std::size_t n_out = sizes[1];
  first_layer_state_.assign(params.bias(0), params.bias(0) + n_out);
  const double* w = params.weights(0);
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double xi = state[i];
    const double* col = w + i * n_out;
    for (std::size_t o = 0; o < n_out; ++o) first_layer_state_[o] += col[o] * xi;
  }
}

double StateActionEvaluator::operator()(std::span<const double> action_features) {
  const MlpParams& p = *params_;
  if (state_dim_ + action_features.size() != p.input_size()) {
    throw Error(ErrorCode::shape_mismatch, "action feature size");
  }
  ++calls_;
  const auto& sizes = p.layer_sizes();
  const std::size_t n_out0 = sizes[1];
  a_.assign(first_layer_state_.begin(), first_layer_state_.end());
  const double* w0 = p.weights(0);
  for (std::size_t j = 0; j < action_features.size(); ++j) {
    const double xj = action_features[j];
    const double* col = w0 + (state_dim_ + j) * n_out0;
    for (std::size_t o = 0; o < n_out0; ++o) a_[o] += col[o] * xj;
  }
  if (p.n_layers() > 1) relu(a_.data(), a_.size());
  for (std::size_t l = 1; l < p.n_layers(); ++l) {
    b_.resize(sizes[l + 1]);
    affine(p, l, a_.data(), b_.data());
    if (l + 1 < p.n_layers()) relu(b_.data(), b_.size());
    std::swap(a_, b_);
  }
  return a_[0];
}

}  // namespace stochq
