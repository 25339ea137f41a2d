#include "drspcrl/robust_core.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace drspcrl {

ValueSupport::ValueSupport(Vector values_, Vector probs_)
    : values(std::move(values_)), probs(std::move(probs_)) {}

void ValueSupport::validate() const {
    if (values.size() == 0) {
        throw std::invalid_argument("ValueSupport: empty support");
    }
    if (values.size() != probs.size()) {
        throw std::invalid_argument("ValueSupport: values and probs differ in length");
    }
    if (!values.allFinite()) {
        throw std::invalid_argument("ValueSupport: non-finite value");
    }
    if (!probs.allFinite() || (probs.array() < 0.0).any()) {
        throw std::invalid_argument("ValueSupport: probabilities must be finite and nonnegative");
    }
    if (std::abs(probs.sum() - 1.0) > 1e-9) {
        throw std::invalid_argument("ValueSupport: probabilities sum to " +
                                    std::to_string(probs.sum()));
    }
}

double ValueSupport::argmin_mass() const {
    const double m = min_value();
    double mass = 0.0;
    for (Eigen::Index i = 0; i < size(); ++i) {
        if (values(i) == m) {
            mass += probs(i);
        }
    }
    return mass;
}

void DualSolverConfig::validate() const {
    if (!(beta_min > 0.0) || !(beta_max > beta_min)) {
        throw std::invalid_argument("DualSolverConfig: need 0 < beta_min < beta_max");
    }
    if (!(tolerance > 0.0) || max_iterations <= 0) {
        throw std::invalid_argument("DualSolverConfig: tolerance and max_iterations must be positive");
    }
}

double dual_objective(double beta, const ValueSupport& support, double epsilon) {
    return dual_objective(beta, support.values, support.probs, epsilon);
}

Vector worst_case_distribution(const ValueSupport& support, double beta) {
    if (!(beta > 0.0)) {
        throw std::invalid_argument("worst_case_distribution: beta must be positive");
    }
    const double m = support.min_value();
    Vector w(support.size());
    for (Eigen::Index i = 0; i < support.size(); ++i) {
        w(i) = support.probs(i) > 0.0 ? support.probs(i) * std::exp(-(support.values(i) - m) / beta)
                                      : 0.0;
    }
    return w / w.sum();
}

namespace {

// KL(w_beta || p) - eps for the tilted distribution, in closed form.
double stationarity_gap(const ValueSupport& s, double beta, double epsilon) {
    const double m = s.min_value();
    double z = 0.0;
    double first = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s.probs(i) <= 0.0) {
            continue;
        }
        const double shifted = s.values(i) - m;
        const double w = s.probs(i) * std::exp(-shifted / beta);
        z += w;
        first += w * shifted;
    }
    const double kl = -(first / z) / beta - std::log(z);
    return std::max(kl, 0.0) - epsilon;
}

} // namespace

DualSolution solve_dual(const ValueSupport& support, double epsilon, const DualSolverConfig& config) {
    support.validate();
    config.validate();
    if (!(epsilon >= 0.0)) {
        throw std::invalid_argument("solve_dual: epsilon must be nonnegative");
    }

    DualSolution out;
    if (epsilon == 0.0) {
        out.beta_star = config.beta_max;
        out.robust_value = support.nominal_expectation();
        out.worst_case_probs = support.probs;
        out.at_boundary = true;
        return out;
    }

    // Point mass on the minimizers is feasible: the infimum is min(values).
    const double m = support.min_value();
    const double point_mass_radius = -std::log(support.argmin_mass());
    if (epsilon >= point_mass_radius) {
        out.beta_star = 0.0;
        out.robust_value = m;
        out.worst_case_probs = Vector::Zero(support.size());
        for (Eigen::Index i = 0; i < support.size(); ++i) {
            if (support.values(i) == m) {
                out.worst_case_probs(i) = support.probs(i);
            }
        }
        out.worst_case_probs /= out.worst_case_probs.sum();
        out.at_boundary = true;
        return out;
    }

    const double log_lo = std::log(config.beta_min);
    const double log_hi = std::log(config.beta_max);
    auto objective = [&](double log_beta) {
        return dual_objective(std::exp(log_beta), support.values, support.probs, epsilon);
    };
    const GoldenResult g =
        golden_section_maximize(objective, log_lo, log_hi, config.tolerance, config.max_iterations);
    out.iterations = g.iterations;

    // Near the optimum the objective is flat to rounding, so the golden bracket
    // pins log(beta) only to ~sqrt(machine eps). Polish on the first-order
    // condition KL(tilted || p) = eps, which is decreasing in beta.
    auto gap = [&](double log_beta) { return stationarity_gap(support, std::exp(log_beta), epsilon); };
    double lo = g.argmax;
    double hi = g.argmax;
    double step = std::max(g.hi - g.lo, 1e-6);
    while (lo > log_lo && gap(lo) < 0.0) {
        lo = std::max(log_lo, lo - step);
        step *= 2.0;
    }
    step = std::max(g.hi - g.lo, 1e-6);
    while (hi < log_hi && gap(hi) > 0.0) {
        hi = std::min(log_hi, hi + step);
        step *= 2.0;
    }

    double log_beta = g.argmax;
    if (gap(lo) < 0.0) {
        log_beta = log_lo;
        out.at_boundary = true;
    } else if (gap(hi) > 0.0) {
        log_beta = log_hi;
        out.at_boundary = true;
    } else {
        for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
            const double mid = 0.5 * (lo + hi);
            (gap(mid) > 0.0 ? lo : hi) = mid;
        }
        log_beta = 0.5 * (lo + hi);
    }

    out.beta_star = std::exp(log_beta);
    out.robust_value = dual_objective(out.beta_star, support.values, support.probs, epsilon);
    out.worst_case_probs = worst_case_distribution(support, out.beta_star);
    return out;
}

namespace {

struct GridSearch {
    int units = 0;
    double epsilon = 0.0;
    std::vector<double> values;              // sorted ascending
    std::vector<double> nominal;             // matching order
    std::vector<std::vector<double>> kl_term; // kl_term[i][n] = (n/k) log((n/k)/q_i)
    std::vector<double> nominal_suffix;      // sum of nominal mass from i on
    double best = std::numeric_limits<double>::infinity();

    void search(std::size_t i, int remaining, double kl, double value) {
        const std::size_t d = values.size();
        const double r = static_cast<double>(remaining) / units;
        // Log-sum inequality: the rest contributes at least r log(r / Q_rest).
        const double kl_floor = r > 0.0 ? r * std::log(r / nominal_suffix[i]) : 0.0;
        if (kl + kl_floor > epsilon + 1e-12) {
            return;
        }
        if (value + r * values[i] >= best) {
            return;
        }
        if (i + 1 == d) {
            const double total = kl + kl_term[i][remaining];
            if (total <= epsilon + 1e-12) {
                best = std::min(best, value + r * values[i]);
            }
            return;
        }
        const int top = nominal[i] > 0.0 ? remaining : 0;
        for (int n = top; n >= 0; --n) {
            search(i + 1, remaining - n, kl + kl_term[i][n],
                   value + static_cast<double>(n) / units * values[i]);
        }
    }
};

} // namespace

double brute_force_inner_min(const ValueSupport& support, double epsilon, double grid_step) {
    support.validate();
    if (support.size() > 4) {
        throw std::invalid_argument("brute_force_inner_min: support larger than 4");
    }
    if (!(grid_step > 0.0) || grid_step > 0.01) {
        throw std::invalid_argument("brute_force_inner_min: grid_step must lie in (0, 0.01]");
    }
    if (!(epsilon >= 0.0)) {
        throw std::invalid_argument("brute_force_inner_min: epsilon must be nonnegative");
    }

    const auto d = static_cast<std::size_t>(support.size());
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return support.values(a) < support.values(b); });

    GridSearch gs;
    gs.units = static_cast<int>(std::lround(1.0 / grid_step));
    gs.epsilon = epsilon;
    gs.nominal_suffix.assign(d + 1, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        gs.values.push_back(support.values(order[j]));
        gs.nominal.push_back(support.probs(order[j]));
    }
    for (std::size_t j = d; j-- > 0;) {
        gs.nominal_suffix[j] = gs.nominal_suffix[j + 1] + gs.nominal[j];
    }
    gs.kl_term.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        auto& row = gs.kl_term[j];
        row.assign(gs.units + 1, std::numeric_limits<double>::infinity());
        row[0] = 0.0;
        if (gs.nominal[j] > 0.0) {
            for (int n = 1; n <= gs.units; ++n) {
                const double p = static_cast<double>(n) / gs.units;
                row[n] = p * std::log(p / gs.nominal[j]);
            }
        }
    }

    // The nominal kernel is always feasible, even when it is off the grid.
    gs.best = support.nominal_expectation();
    gs.search(0, gs.units, 0.0, 0.0);
    return gs.best;
}

} // namespace drspcrl
