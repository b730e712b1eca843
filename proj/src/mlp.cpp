#include "romkit/mlp.hpp"

#include <cmath>
#include <random>

#include "romkit/error.hpp"

namespace romkit {

namespace {

double activate(Activation a, double u) {
  switch (a) {
    case Activation::tanh: return std::tanh(u);
    case Activation::relu: return u > 0.0 ? u : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-u));
  }
  return u;
}

// Derivative expressed through the pre-activation u.
double activate_prime(Activation a, double u) {
  switch (a) {
    case Activation::tanh: {
      const double t = std::tanh(u);
      return 1.0 - t * t;
    }
    case Activation::relu: return u > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-u));
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

// Uniform double in [0, 1) from the top 53 bits; portable across standard
// libraries unlike std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "unknown";
}

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  fail(ErrorCode::invalid_argument, "unknown activation '" + name + "'");
}

Mlp make_mlp(std::vector<std::size_t> layer_sizes, Activation activation, double learning_rate,
             std::uint64_t seed) {
  if (layer_sizes.size() < 2) fail(ErrorCode::invalid_argument, "MLP needs at least two layers");
  Mlp net;
  net.layer_sizes = std::move(layer_sizes);
  net.activation = activation;
  net.learning_rate = learning_rate;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(net.layer_sizes[l]);
    const auto out = static_cast<Eigen::Index>(net.layer_sizes[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index j = 0; j < in; ++j) {
      for (Eigen::Index i = 0; i < out; ++i) w(i, j) = limit * (2.0 * unit_uniform(rng) - 1.0);
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  validate_mlp(net);
  return net;
}

void validate_mlp(const Mlp& net) {
  if (net.layer_sizes.size() < 2 || net.weights.size() + 1 != net.layer_sizes.size() ||
      net.biases.size() != net.weights.size()) {
    fail(ErrorCode::invalid_argument, "MLP: layer count mismatch");
  }
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(net.layer_sizes[l]);
    const auto out = static_cast<Eigen::Index>(net.layer_sizes[l + 1]);
    if (net.weights[l].rows() != out || net.weights[l].cols() != in ||
        net.biases[l].size() != out) {
      fail(ErrorCode::invalid_argument, "MLP: layer " + std::to_string(l) + " has wrong shape");
    }
    if (!net.weights[l].allFinite() || !net.biases[l].allFinite()) {
      fail(ErrorCode::invalid_argument, "MLP: non-finite parameters in layer " + std::to_string(l));
    }
  }
}

Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != static_cast<Eigen::Index>(net.input_dim())) {
    fail(ErrorCode::invalid_argument, "MLP forward: input dimension mismatch");
  }
  Eigen::MatrixXd y = inputs;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    Eigen::MatrixXd u = net.weights[l] * y;
    u.colwise() += net.biases[l];
    if (l + 1 < net.layer_count()) {
      y = u.unaryExpr([&](double v) { return activate(net.activation, v); });
    } else {
      y = std::move(u);
    }
  }
  return y;
}

Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& x) {
  return mlp_forward(net, Eigen::MatrixXd(x));
}

double mlp_loss_and_gradients(const Mlp& net, const Eigen::MatrixXd& inputs,
                              const Eigen::MatrixXd& targets, MlpGradients* grads) {
  const std::size_t layers = net.layer_count();
  if (inputs.cols() != targets.cols() ||
      targets.rows() != static_cast<Eigen::Index>(net.output_dim())) {
    fail(ErrorCode::invalid_argument, "MLP loss: inputs and targets disagree in shape");
  }
  // Forward pass keeping pre-activations u^l and layer outputs y^l.
  std::vector<Eigen::MatrixXd> outputs{inputs};
  std::vector<Eigen::MatrixXd> pre;
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd u = net.weights[l] * outputs.back();
    u.colwise() += net.biases[l];
    pre.push_back(u);
    if (l + 1 < layers) {
      outputs.push_back(u.unaryExpr([&](double v) { return activate(net.activation, v); }));
    } else {
      outputs.push_back(std::move(u));
    }
  }
  const Eigen::MatrixXd diff = outputs.back() - targets;
  const double count = static_cast<double>(diff.size());
  const double loss = diff.squaredNorm() / count;
  if (!grads) return loss;

  grads->weights.assign(layers, {});
  grads->biases.assign(layers, {});
  // delta = dL/du for the current layer; output layer is linear.
  Eigen::MatrixXd delta = (2.0 / count) * diff;
  for (std::size_t l = layers; l-- > 0;) {
    grads->weights[l] = delta * outputs[l].transpose();
    grads->biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    const Eigen::MatrixXd back = net.weights[l].transpose() * delta;
    delta = back.cwiseProduct(
        pre[l - 1].unaryExpr([&](double v) { return activate_prime(net.activation, v); }));
  }
  return loss;
}

std::vector<double> mlp_train(Mlp& net, const Eigen::MatrixXd& inputs,
                              const Eigen::MatrixXd& targets, std::size_t epochs) {
  validate_mlp(net);
  std::vector<double> history;
  history.reserve(epochs);
  MlpGradients grads;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const double loss = mlp_loss_and_gradients(net, inputs, targets, &grads);
    if (!std::isfinite(loss)) {
      fail(ErrorCode::training_diverged,
           "MLP training diverged at epoch " + std::to_string(epoch));
    }
    history.push_back(loss);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      net.weights[l] -= net.learning_rate * grads.weights[l];
      net.biases[l] -= net.learning_rate * grads.biases[l];
    }
  }
  return history;
}

}  // namespace romkit
