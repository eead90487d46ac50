#pragma once

// Fully connected value network Q(s, a; theta): input is the concatenation
// of state and action features, hidden layers use ReLU, the single output is
// linear.

#include <cstddef>
#include <span>
#include <vector>

#include "stochq/rng.hpp"

namespace stochq {

/// Weights and biases of every layer in one flat buffer. Layer l stores its
/// weight matrix input-major (entry (out o, in i) at i * outputs + o),
/// followed by its bias vector.
class MlpParams {
 public:
  MlpParams() = default;
  /// All-zero parameters for the given layer widths (input first, output last).
  explicit MlpParams(std::vector<std::size_t> layer_sizes);

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer.
  static MlpParams random(std::vector<std::size_t> layer_sizes, Rng& rng);

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  std::size_t n_layers() const noexcept { return sizes_.size() - 1; }
  std::size_t input_size() const noexcept { return sizes_.front(); }
  std::size_t parameter_count() const noexcept { return data_.size(); }

  std::span<double> parameters() noexcept { return data_; }
  std::span<const double> parameters() const noexcept { return data_; }

  /// Weights of layer l (inputs: sizes[l], outputs: sizes[l+1]).
  const double* weights(std::size_t l) const noexcept { return data_.data() + offsets_[l]; }
  double* weights(std::size_t l) noexcept { return data_.data() + offsets_[l]; }
  const double* bias(std::size_t l) const noexcept {
    return data_.data() + offsets_[l] + sizes_[l] * sizes_[l + 1];
  }
  double* bias(std::size_t l) noexcept { return data_.data() + offsets_[l] + sizes_[l] * sizes_[l + 1]; }

  bool same_shape(const MlpParams& other) const noexcept { return sizes_ == other.sizes_; }
  bool all_finite() const noexcept;

  /// this += scale * other
  void add_scaled(const MlpParams& other, double scale);
  /// this = tau * source + (1 - tau) * this
  void blend_toward(const MlpParams& source, double tau);

  friend bool operator==(const MlpParams&, const MlpParams&) = default;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> data_;
};

/// Throws shape_mismatch when input.size() != params.input_size().
double forward(const MlpParams& params, std::span<const double> input);

struct RegressionSample {
  std::vector<double> input;
  double target = 0.0;
};

/// (1/B) sum (target - Q(input))^2
double mse_loss(const MlpParams& params, std::span<const RegressionSample> batch);

/// Gradient of mse_loss with respect to every parameter. Empty batch throws
/// invalid_params.
MlpParams gradient(const MlpParams& params, std::span<const RegressionSample> batch);

/// Evaluates Q(s, .) for one fixed state across many actions. The state
/// half of the first layer is computed once; results are bit-identical to
/// forward() on the concatenated input. Counts evaluations.
class StateActionEvaluator {
 public:
  StateActionEvaluator(const MlpParams& params, std::span<const double> state);

  double operator()(std::span<const double> action_features);
  std::size_t calls() const noexcept { return calls_; }

 private:
  const MlpParams* params_;
  std::size_t state_dim_;
  std::vector<double> first_layer_state_;
  std::vector<double> a_;
  std::vector<double> b_;
  std::size_t calls_ = 0;
};

}  // namespace stochq
