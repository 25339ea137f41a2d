#include "drspcrl/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace drspcrl {

void MlpSpec::validate() const {
    if (input_dim <= 0 || output_dim <= 0) {
        throw std::invalid_argument("MlpSpec: input and output dims must be positive");
    }
    for (int h : hidden_dims) {
        if (h <= 0) {
            throw std::invalid_argument("MlpSpec: hidden dims must be positive");
        }
    }
}

int MlpSpec::num_params() const {
    int total = 0;
    int fan_in = input_dim;
    for (int h : hidden_dims) {
        total += (fan_in + 1) * h;
        fan_in = h;
    }
    return total + (fan_in + 1) * output_dim;
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    int fan_in = spec_.input_dim;
    for (int h : spec_.hidden_dims) {
        weights_.push_back(Matrix::Zero(h, fan_in));
        biases_.push_back(Vector::Zero(h));
        fan_in = h;
    }
    weights_.push_back(Matrix::Zero(spec_.output_dim, fan_in));
    biases_.push_back(Vector::Zero(spec_.output_dim));
}

Mlp::Mlp(MlpSpec spec, std::mt19937_64& rng, double output_scale) : Mlp(std::move(spec)) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Matrix& w = weights_[l];
        const double scale = std::sqrt(1.0 / static_cast<double>(w.cols())) *
                             (l + 1 == weights_.size() ? output_scale : 1.0);
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            for (Eigen::Index i = 0; i < w.rows(); ++i) {
                w(i, j) = scale * normal(rng);
            }
        }
    }
}

Matrix Mlp::forward(const Matrix& inputs) const {
    Cache unused;
    return forward(inputs, unused);
}

Matrix Mlp::forward(const Matrix& inputs, Cache& cache) const {
    if (inputs.rows() != spec_.input_dim) {
        throw std::invalid_argument("Mlp::forward: input has " + std::to_string(inputs.rows()) +
                                    " rows, expected " + std::to_string(spec_.input_dim));
    }
    cache.activations.clear();
    cache.activations.push_back(inputs);
    const std::size_t last = weights_.size() - 1;
    for (std::size_t l = 0; l < last; ++l) {
        Matrix z = (weights_[l] * cache.activations.back()).colwise() + biases_[l];
        cache.activations.push_back(z.array().tanh().matrix());
    }
    Matrix out = (weights_[last] * cache.activations.back()).colwise() + biases_[last];
    return out;
}

Vector Mlp::backward(const Cache& cache, const Matrix& upstream) const {
    const std::size_t layers = weights_.size();
    if (cache.activations.size() != layers) {
        throw std::invalid_argument("Mlp::backward: cache does not belong to this network");
    }
    if (upstream.rows() != spec_.output_dim || upstream.cols() != cache.activations[0].cols()) {
        throw std::invalid_argument("Mlp::backward: upstream shape mismatch");
    }
    Vector grad(num_params());
    // Offsets of each layer's (weights, bias) block in the flat vector.
    std::vector<Eigen::Index> offset(layers);
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        offset[l] = pos;
        pos += weights_[l].size() + biases_[l].size();
    }
    Matrix delta = upstream;
    for (std::size_t l = layers; l-- > 0;) {
        const Matrix& a_in = cache.activations[l];
        Eigen::Map<Matrix>(grad.data() + offset[l], weights_[l].rows(), weights_[l].cols()) =
            delta * a_in.transpose();
        grad.segment(offset[l] + weights_[l].size(), biases_[l].size()) = delta.rowwise().sum();
        if (l > 0) {
            // a_in = tanh(z): d a / d z = 1 - a^2
            delta = ((weights_[l].transpose() * delta).array() * (1.0 - a_in.array().square())).matrix();
        }
    }
    return grad;
}

Vector Mlp::parameters() const {
    Vector flat(num_params());
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        flat.segment(pos, weights_[l].size()) = weights_[l].reshaped();
        pos += weights_[l].size();
        flat.segment(pos, biases_[l].size()) = biases_[l];
        pos += biases_[l].size();
    }
    return flat;
}

void Mlp::set_parameters(const Vector& flat) {
    if (flat.size() != num_params()) {
        throw std::invalid_argument("Mlp::set_parameters: expected " + std::to_string(num_params()) +
                                    " parameters, got " + std::to_string(flat.size()));
    }
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        weights_[l].reshaped() = flat.segment(pos, weights_[l].size());
        pos += weights_[l].size();
        biases_[l] = flat.segment(pos, biases_[l].size());
        pos += biases_[l].size();
    }
}

Vector mlp_gradients(const MlpSpec& spec, const Vector& params, const Matrix& inputs, const Matrix& upstream) {
    Mlp net(spec);
    net.set_parameters(params);
    Mlp::Cache cache;
    net.forward(inputs, cache);
    return net.backward(cache, upstream);
}

Adam::Adam(int n, double lr_, double beta1_, double beta2_, double eps_)
    : lr(lr_), beta1(beta1_), beta2(beta2_), eps(eps_), m(Vector::Zero(n)), v(Vector::Zero(n)) {
    if (!(lr > 0.0)) {
        throw std::invalid_argument("Adam: learning rate must be positive");
    }
}

void Adam::step(Vector& params, const Vector& grad) {
    if (grad.size() != params.size() || m.size() != params.size()) {
        throw std::invalid_argument("Adam::step: size mismatch");
    }
    ++t;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    params.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

double clip_grad_norm(Vector& g, double max_norm) {
    const double norm = g.norm();
    if (norm > max_norm && norm > 0.0) {
        g *= max_norm / norm;
    }
    return norm;
}

} // namespace drspcrl
