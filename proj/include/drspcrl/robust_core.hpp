#pragma once

// KL-ball robust expectation over a finite support.
//
// For nominal probabilities p and future values v the robust expectation is
//
//     inf { E_P[v] : KL(P || p) <= eps }
//   = sup_{beta >= 0}  -beta * log E_p[exp(-v / beta)] - beta * eps
//
// The dual is concave in beta. solve_dual() maximizes it with a golden-section
// search on log(beta) and handles the two limits (eps = 0 and the point-mass
// boundary) analytically.

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace drspcrl {

using Vector = Eigen::VectorXd;

/// Finite next-state support: values V(s') with nominal probabilities P0(s'|s,a).
struct ValueSupport {
    Vector values;
    Vector probs;

    ValueSupport() = default;
    ValueSupport(Vector values_, Vector probs_);

    Eigen::Index size() const { return values.size(); }

    /// Throws std::invalid_argument when the support is malformed.
    void validate() const;

    double nominal_expectation() const { return probs.dot(values); }
    double min_value() const { return values.minCoeff(); }
    /// Nominal mass sitting on the minimizers of `values`.
    double argmin_mass() const;
};

struct DualSolution {
    double beta_star = 0.0;
    double robust_value = 0.0;
    Vector worst_case_probs;
    /// beta_star sits on the edge of the search interval (or at 0 / +inf analytically).
    bool at_boundary = false;
    int iterations = 0;
};

struct DualSolverConfig {
    double beta_min = 1e-6;
    double beta_max = 1e6;
    /// Width tolerance on log(beta) for the golden-section search.
    double tolerance = 1e-8;
    int max_iterations = 200;

    void validate() const;
};

// ---------------------------------------------------------------------------
// Expression-friendly primitives
// ---------------------------------------------------------------------------

/// KL(p || q) = sum_i p_i log(p_i / q_i) with 0 log 0 = 0.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar kl_divergence(const Eigen::MatrixBase<DerivedP>& p,
                                        const Eigen::MatrixBase<DerivedQ>& q) {
    using Scalar = typename DerivedP::Scalar;
    if (p.size() != q.size()) {
        throw std::invalid_argument("kl_divergence: length mismatch");
    }
    Scalar total(0);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const Scalar pi = p(i);
        const Scalar qi = q(i);
        if (pi <= Scalar(0)) {
            continue;
        }
        if (qi <= Scalar(0)) {
            throw std::invalid_argument("kl_divergence: p has mass where q has none");
        }
        total += pi * std::log(pi / qi);
    }
    // Rounding can leave a tiny negative residue for p == q.
    return total < Scalar(0) ? Scalar(0) : total;
}

/// log sum_i p_i exp(-(v_i - m) / beta), with m = min(v). Entries with p_i = 0 are skipped.
template <typename DerivedV, typename DerivedP>
typename DerivedV::Scalar shifted_log_mgf(const Eigen::MatrixBase<DerivedV>& values,
                                          const Eigen::MatrixBase<DerivedP>& probs,
                                          typename DerivedV::Scalar beta) {
    using Scalar = typename DerivedV::Scalar;
    const Scalar m = values.minCoeff();
    Scalar sum(0);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (probs(i) > Scalar(0)) {
            sum += probs(i) * std::exp(-(values(i) - m) / beta);
        }
    }
    return std::log(sum);
}

/// The dual objective -beta log E_p[exp(-v/beta)] - beta*eps, shifted at min(v).
template <typename DerivedV, typename DerivedP>
typename DerivedV::Scalar dual_objective(typename DerivedV::Scalar beta,
                                         const Eigen::MatrixBase<DerivedV>& values,
                                         const Eigen::MatrixBase<DerivedP>& probs,
                                         typename DerivedV::Scalar epsilon) {
    using Scalar = typename DerivedV::Scalar;
    if (!(beta > Scalar(0))) {
        throw std::invalid_argument("dual_objective: beta must be positive");
    }
    const Scalar m = values.minCoeff();
    return m - beta * shifted_log_mgf(values, probs, beta) - beta * epsilon;
}

double dual_objective(double beta, const ValueSupport& support, double epsilon);

/// Exponentially tilted distribution p_i exp(-v_i/beta) / Z.
Vector worst_case_distribution(const ValueSupport& support, double beta);

/// Exact robust expectation over the KL ball of radius epsilon.
DualSolution solve_dual(const ValueSupport& support, double epsilon,
                        const DualSolverConfig& config = {});

/// Brute-force oracle: enumerates the simplex grid with spacing grid_step and
/// returns the smallest expectation among grid points inside the KL ball.
/// Only intended for verification; supports of size at most 4.
double brute_force_inner_min(const ValueSupport& support, double epsilon, double grid_step);

/// Maximizes a unimodal function on [lo, hi] by golden-section search.
/// Returns the midpoint of the final bracket and the iteration count.
struct GoldenResult {
    double argmax;
    double lo;
    double hi;
    int iterations;
};

template <typename F>
GoldenResult golden_section_maximize(F&& f, double lo, double hi, double tolerance,
                                     int max_iterations) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    int it = 0;
    for (; it < max_iterations && (hi - lo) > tolerance; ++it) {
        if (fc >= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    return {0.5 * (lo + hi), lo, hi, it};
}

} // namespace drspcrl
