#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace romkit {

enum class Activation { tanh, relu, sigmoid };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

/// Fully connected feedforward network. Hidden layers apply the activation;
/// the output layer is affine (identity output function).
struct Mlp {
  std::vector<std::size_t> layer_sizes;
  /// weights[l] is layer_sizes[l+1] x layer_sizes[l].
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Activation activation = Activation::tanh;
  double learning_rate = 1e-2;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }
};

/// Glorot-uniform weights, zero biases; deterministic for a given seed.
Mlp make_mlp(std::vector<std::size_t> layer_sizes, Activation activation, double learning_rate,
             std::uint64_t seed);

/// Throws invalid_argument if layer shapes are inconsistent.
void validate_mlp(const Mlp& net);

Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& x);
/// Batch forward: inputs are input_dim x M, result output_dim x M.
Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& inputs);

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Mean squared error over all samples and outputs, and its gradient by
/// backpropagation: dL/dw = dL/da * da/du * du/dw layer by layer.
double mlp_loss_and_gradients(const Mlp& net, const Eigen::MatrixXd& inputs,
                              const Eigen::MatrixXd& targets, MlpGradients* grads);

/// Full-batch gradient descent w <- w - eta dL/dw. Returns the loss before
/// each update (epochs entries). Throws training_diverged on a non-finite loss.
std::vector<double> mlp_train(Mlp& net, const Eigen::MatrixXd& inputs,
                              const Eigen::MatrixXd& targets, std::size_t epochs);

}  // namespace romkit
