#pragma once

#include "drspcrl/tabular_mdp.hpp"

#include <random>
#include <vector>

namespace drspcrl {

struct MlpSpec {
    int input_dim = 1;
    std::vector<int> hidden_dims{64, 64};
    int output_dim = 1;

    void validate() const;
    int num_params() const;
    bool operator==(const MlpSpec&) const = default;
};

/// Fully connected network, tanh hidden layers, linear output.
/// Batches are column-major: one sample per column.
class Mlp {
public:
    struct Cache {
        std::vector<Matrix> activations; // activations[0] is the input
    };

    Mlp() = default;
    explicit Mlp(MlpSpec spec);
    /// Scaled Gaussian init; the last layer is multiplied by output_scale.
    Mlp(MlpSpec spec, std::mt19937_64& rng, double output_scale = 1.0);

    const MlpSpec& spec() const { return spec_; }
    int num_params() const { return spec_.num_params(); }

    Matrix forward(const Matrix& inputs) const;
    Matrix forward(const Matrix& inputs, Cache& cache) const;

    /// Gradient of sum(upstream .* outputs) w.r.t. the flattened parameters.
    Vector backward(const Cache& cache, const Matrix& upstream) const;

    Vector parameters() const;
    void set_parameters(const Vector& flat);

private:
    MlpSpec spec_;
    std::vector<Matrix> weights_;
    std::vector<Vector> biases_;
};

/// Parameter gradient of the network outputs contracted with `upstream`.
Vector mlp_gradients(const MlpSpec& spec, const Vector& params, const Matrix& inputs, const Matrix& upstream);

/// Adaptive-moment gradient descent over a flat parameter vector.
class Adam {
public:
    Adam() = default;
    Adam(int n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    /// params -= step(grad)
    void step(Vector& params, const Vector& grad);

    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    Vector m;
    Vector v;
    long t = 0;
};

/// Rescales g in place so that its norm is at most max_norm; returns the original norm.
double clip_grad_norm(Vector& g, double max_norm);

inline double softplus(double x) {
    return x > 20.0 ? x : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

} // namespace drspcrl
