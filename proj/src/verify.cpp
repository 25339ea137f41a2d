#include "drspcrl/verify.hpp"

#include "drspcrl/agent.hpp"
#include "drspcrl/curriculum.hpp"
#include "drspcrl/tabular_mdp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

namespace drspcrl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

DualSolverFn solver_or_default(const VerifyOptions& options) {
    if (options.dual_solver) {
        return options.dual_solver;
    }
    return [](const ValueSupport& s, double eps) { return solve_dual(s, eps); };
}

Vector random_simplex(int n, double min_mass, std::mt19937_64& rng) {
    std::exponential_distribution<double> expo(1.0);
    Vector p(n);
    for (int i = 0; i < n; ++i) {
        p(i) = expo(rng);
    }
    p /= p.sum();
    // Mix toward uniform until every entry clears min_mass.
    const double lowest = p.minCoeff();
    if (lowest < min_mass) {
        const double u = 1.0 / n;
        const double t = (min_mass - lowest) / (u - lowest);
        p = (1.0 - t) * p + Vector::Constant(n, t * u);
    }
    return p / p.sum();
}

ValueSupport random_support(std::mt19937_64& rng, double min_mass) {
    const int n = std::uniform_int_distribution<int>(2, 4)(rng);
    std::uniform_real_distribution<double> value(-2.0, 2.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) {
        v(i) = value(rng);
    }
    return {v, random_simplex(n, min_mass, rng)};
}

PropertyResult make_result(const std::string& suite, const std::string& name, double max_error, double tol,
                           Clock::time_point start, std::string detail = {}) {
    PropertyResult r;
    r.suite = suite;
    r.name = name;
    r.max_error = max_error;
    r.tolerance = tol;
    r.passed = std::isfinite(max_error) && max_error <= tol;
    r.seconds = seconds_since(start);
    r.detail = std::move(detail);
    return r;
}

TabularMdp random_mdp(std::mt19937_64& rng, double gamma) {
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    TabularMdp mdp(n, 2, gamma);
    std::uniform_real_distribution<double> reward(0.0, 1.0);
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < 2; ++a) {
            mdp.rewards(s, a) = reward(rng);
            mdp.row(s, a) = random_simplex(n, 0.05, rng);
        }
    }
    mdp.validate();
    return mdp;
}

} // namespace

double max_relative_error(const Vector& a, const Vector& b, double floor) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("max_relative_error: length mismatch");
    }
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::abs(a(i)), std::abs(b(i)), floor});
        worst = std::max(worst, std::abs(a(i) - b(i)) / denom);
    }
    return worst;
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
    Vector g(x.size());
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + h;
        const double up = f(probe);
        probe(i) = x(i) - h;
        const double down = f(probe);
        probe(i) = x(i);
        g(i) = (up - down) / (2.0 * h);
    }
    return g;
}

const std::vector<std::string>& verify_scopes() {
    static const std::vector<std::string> scopes{"dual", "envelope", "vi", "scheduler", "gradients", "all"};
    return scopes;
}

// ---------------------------------------------------------------------------

std::vector<PropertyResult> verify_dual(const VerifyOptions& options) {
    const DualSolverFn solve = solver_or_default(options);
    std::vector<PropertyResult> out;
    std::mt19937_64 rng(options.seed);

    {
        const auto start = Clock::now();
        double worst = 0.0;
        std::string where;
        for (int k = 0; k < 200; ++k) {
            const ValueSupport s = random_support(rng, 1e-3);
            const double range = s.values.maxCoeff() - s.values.minCoeff();
            for (double eps : {0.01, 0.1, 0.5, 1.0}) {
                const double exact = solve(s, eps).robust_value;
                const double oracle = brute_force_inner_min(s, eps, 1e-3);
                const double err = std::abs(exact - oracle) / (1.0 + range);
                if (!(err <= worst)) {
                    worst = std::isnan(err) ? INFINITY : err;
                    where = "support " + std::to_string(k) + ", eps " + std::to_string(eps);
                }
            }
        }
        out.push_back(make_result("dual", "dual_oracle_agreement", worst, 5e-3, start,
                                  "200 supports x 4 radii, error / (1 + range); worst at " + where));
    }
    {
        const auto start = Clock::now();
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            const ValueSupport s = random_support(rng, 0.0);
            worst = std::max(worst, std::abs(solve(s, 0.0).robust_value - s.nominal_expectation()));
        }
        out.push_back(make_result("dual", "limit_eps_zero", worst, 1e-9, start, "robust value = nominal at eps = 0"));
    }
    {
        const auto start = Clock::now();
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            ValueSupport s = random_support(rng, 0.0);
            if (k % 4 == 0) {
                s.values(1) = s.values(0); // ties at the minimum
                s.values(0) = std::min(s.values(0), s.values(1));
            }
            const double radius = -std::log(s.argmin_mass());
            for (double eps : {radius, radius + 0.5, radius * 2.0 + 1.0}) {
                worst = std::max(worst, std::abs(solve(s, eps).robust_value - s.min_value()));
            }
        }
        out.push_back(make_result("dual", "limit_point_mass", worst, 1e-9, start,
                                  "robust value = min(values) once eps >= -log P0(argmin)"));
    }
    {
        const auto start = Clock::now();
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            const ValueSupport s = random_support(rng, 0.01);
            const double radius = -std::log(s.argmin_mass());
            const double eps = std::uniform_real_distribution<double>(0.05, 0.9)(rng) * radius;
            const DualSolution d = solve(s, eps);
            if (d.worst_case_probs.size() != s.size()) {
                worst = INFINITY;
                break;
            }
            const double kl = kl_divergence(d.worst_case_probs, s.probs);
            const double primal = d.worst_case_probs.dot(s.values);
            worst = std::max({worst, std::abs(kl - eps), std::abs(primal - d.robust_value)});
        }
        out.push_back(make_result("dual", "worst_case_primal_feasible", worst, 1e-6, start,
                                  "tilted distribution sits on the KL sphere and attains the robust value"));
    }
    return out;
}

std::vector<PropertyResult> verify_envelope(const VerifyOptions& options) {
    const DualSolverFn solve = solver_or_default(options);
    std::mt19937_64 rng(options.seed + 1);
    const auto start = Clock::now();
    double worst = 0.0;
    const double h = 1e-5;
    for (int k = 0; k < 100; ++k) {
        const ValueSupport s = random_support(rng, 0.02);
        if (s.values.maxCoeff() - s.values.minCoeff() < 0.1) {
            --k;
            continue;
        }
        const double radius = -std::log(s.argmin_mass());
        const double eps = std::uniform_real_distribution<double>(0.1, 0.8)(rng) * radius;
        const double slope = (solve(s, eps + h).robust_value - solve(s, eps - h).robust_value) / (2.0 * h);
        const double beta = solve(s, eps).beta_star;
        worst = std::max(worst, std::abs(slope + beta) / std::max(std::abs(beta), 1e-3));
    }
    return {make_result("envelope", "envelope_identity", worst, 1e-2, start,
                        "dV/deps by central differences vs -beta*, 100 interior instances")};
}

std::vector<PropertyResult> verify_vi(const VerifyOptions& options) {
    const DualSolverFn solve = solver_or_default(options);
    const InnerSolver dual_inner = [solve](const ValueSupport& s, double eps) { return solve(s, eps).robust_value; };
    const InnerSolver oracle = [](const ValueSupport& s, double eps) {
        return brute_force_inner_min(s, eps, 2e-3);
    };
    std::mt19937_64 rng(options.seed + 2);
    const auto start = Clock::now();
    double oracle_gap = 0.0;
    double nominal_excess = 0.0;
    double optimality_gap = 0.0;
    constexpr double gamma = 0.6;
    for (int k = 0; k < 50; ++k) {
        const TabularMdp mdp = random_mdp(rng, gamma);
        const double eps = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
        const RobustSolution robust = robust_value_iteration(mdp, eps, 1e-9, 10000, dual_inner);
        const RobustSolution brute = robust_value_iteration(mdp, eps, 1e-6, 10000, oracle);
        const RobustSolution nominal = robust_value_iteration(mdp, 0.0, 1e-9, 10000, dual_inner);
        oracle_gap = std::max(oracle_gap, (robust.values - brute.values).lpNorm<Eigen::Infinity>());
        nominal_excess = std::max(nominal_excess, (robust.values - nominal.values).maxCoeff());

        // Every deterministic policy: none beats the VI values, the greedy one attains them.
        const int n = mdp.n_states;
        Vector best = Vector::Constant(n, -INFINITY);
        for (int code = 0; code < (1 << n); ++code) {
            std::vector<int> pi(static_cast<std::size_t>(n));
            for (int s = 0; s < n; ++s) {
                pi[static_cast<std::size_t>(s)] = (code >> s) & 1;
            }
            const Vector v = robust_policy_evaluation(mdp, pi, eps, 1e-10, 100000, dual_inner);
            best = best.cwiseMax(v);
        }
        optimality_gap = std::max(optimality_gap, (best - robust.values).lpNorm<Eigen::Infinity>());
    }
    std::vector<PropertyResult> out;
    out.push_back(make_result("vi", "vi_dual_matches_oracle", oracle_gap, 1e-2, start,
                              "sup-norm gap to value iteration with the brute-force inner solver, 50 MDPs"));
    out.push_back(make_result("vi", "robust_below_nominal", std::max(nominal_excess, 0.0), 1e-9, start,
                              "robust values never exceed nominal values"));
    out.push_back(make_result("vi", "exhaustive_policy_optimality", optimality_gap, 1e-6, start,
                              "best deterministic policy's robust value equals the VI value"));
    return out;
}

std::vector<PropertyResult> verify_scheduler(const VerifyOptions& options) {
    std::vector<PropertyResult> out;
    std::mt19937_64 rng(options.seed + 3);
    {
        // Products 2*alpha*lambda_curr for which 1000 steps reach 1e-6.
        const auto start = Clock::now();
        double worst = 0.0;
        const std::pair<double, double> grid[] = {{1.0, 0.01}, {0.5, 0.1}, {2.5, 0.01}, {0.5, 0.5}, {4.95, 0.1}};
        for (const auto& [alpha, lambda] : grid) {
            for (double e0 : {0.0, 0.3, 0.9}) {
                CurriculumState s = CurriculumState::start(e0, 1.0, alpha, lambda);
                for (int t = 0; t < 1000; ++t) {
                    s = drspcrl_step(std::move(s), 0.0);
                }
                worst = std::max(worst, std::abs(s.epsilon_t - 1.0));
            }
        }
        out.push_back(make_result("scheduler", "fixed_point_beta_zero", worst, 1e-6, start,
                                  "1000 steps with beta = 0 from eps0 in {0, 0.3, 0.9}"));
    }
    {
        // The contraction itself holds for every 2*alpha*lambda in (0, 1).
        const auto start = Clock::now();
        double worst = 0.0;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int k = 0; k < 200; ++k) {
            const double product = std::max(unit(rng), 1e-4);
            const double alpha = 0.25 + 2.0 * unit(rng);
            const double lambda = product / (2.0 * alpha);
            const double e0 = unit(rng);
            CurriculumState s = CurriculumState::start(e0, 1.0, alpha, lambda);
            for (int t = 1; t <= 50; ++t) {
                s = drspcrl_step(std::move(s), 0.0);
                const double expected = 1.0 - std::pow(1.0 - product, t) * (1.0 - e0);
                worst = std::max(worst, std::abs(s.epsilon_t - expected));
            }
        }
        out.push_back(make_result("scheduler", "geometric_rate", worst, 1e-12, start,
                                  "|eps_t - budget| = (1 - 2 alpha lambda)^t |eps_0 - budget|"));
    }
    {
        const auto start = Clock::now();
        double worst = 0.0;
        const std::pair<double, double> grid[] = {{1.0, 0.01}, {0.5, 0.1}, {2.0, 0.05}};
        for (const auto& [alpha, lambda] : grid) {
            for (double b : {0.0, 0.1, 0.5, 1.0, 3.0, 10.0}) {
                CurriculumState s = CurriculumState::start(0.4, 1.0, alpha, lambda);
                for (int t = 0; t < 1000; ++t) {
                    s = drspcrl_step(std::move(s), b);
                }
                worst = std::max(worst, std::abs(s.epsilon_t - std::max(0.0, 1.0 - b / (2.0 * alpha))));
            }
        }
        out.push_back(make_result("scheduler", "stalling_point", worst, 1e-6, start,
                                  "constant beta = b settles at max(0, budget - b / (2 alpha))"));
    }
    {
        const auto start = Clock::now();
        double violation = 0.0;
        const std::vector<SchedulerConfig> configs{
            DrSpcrlSchedule{},
            FixedSchedule{0.7},
            LinearSchedule{0.013, 3},
            PlateauSchedule{3, 2, 0.1, 4, 0.02},
            RegretBufferSchedule{10, 0.8, 0.3, 0.4, 1},
        };
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (const auto& config : configs) {
            const double budget = 0.5 + unit(rng);
            Scheduler sched(config, CurriculumState::start(unit(rng) * budget, budget, 2.0 * unit(rng), 0.05),
                            rng());
            for (int t = 0; t < 100000; ++t) {
                const double beta = unit(rng) < 0.05 ? 1e6 * unit(rng) : 10.0 * unit(rng);
                const double value = (unit(rng) - 0.5) * std::pow(10.0, 4.0 * unit(rng) - 2.0);
                sched.update({t, beta, value, [&](double) { return 5.0 * unit(rng); }});
                const double e = sched.epsilon();
                violation = std::max({violation, -e, e - budget});
                if (std::isnan(e)) {
                    violation = INFINITY;
                }
            }
            for (const auto& h : sched.state().history) {
                violation = std::max({violation, -h.epsilon, h.epsilon - budget});
            }
        }
        out.push_back(make_result("scheduler", "schedulers_within_budget", std::max(violation, 0.0), 0.0, start,
                                  "5 schedulers x 1e5 fuzzed updates stay in [0, budget]"));
    }
    {
        const auto start = Clock::now();
        double violation = 0.0;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int k = 0; k < 10000; ++k) {
            const CurriculumState s = CurriculumState::start(unit(rng), 1.0, 2.0 * unit(rng), 0.5 * unit(rng) + 1e-3);
            const double b1 = 5.0 * unit(rng);
            const double b2 = b1 + 5.0 * unit(rng);
            violation = std::max(violation, drspcrl_step(s, b2).epsilon_t - drspcrl_step(s, b1).epsilon_t);
        }
        out.push_back(make_result("scheduler", "monotone_pressure", std::max(violation, 0.0), 0.0, start,
                                  "larger beta never yields a larger epsilon"));
    }
    {
        const auto start = Clock::now();
        double mismatch = 0.0;
        for (const SchedulerConfig& config :
             std::vector<SchedulerConfig>{PlateauSchedule{}, RegretBufferSchedule{50, 0.8, 0.01, 0.02, 5}}) {
            std::vector<double> runs[2];
            for (auto& eps : runs) {
                Scheduler sched(config, CurriculumState::start(0.2, 1.0, 1.0, 0.01), 99);
                std::mt19937_64 signal(7);
                for (int t = 0; t < 500; ++t) {
                    const double v = std::uniform_real_distribution<double>(0.0, 1.0)(signal);
                    sched.update({t, v, v, [v](double e) { return v + e; }});
                    eps.push_back(sched.epsilon());
                }
            }
            mismatch += runs[0] == runs[1] ? 0.0 : 1.0;
        }
        out.push_back(make_result("scheduler", "seeded_determinism", mismatch, 0.0, start,
                                  "plateau and regret-buffer replay identically under one seed"));
    }
    return out;
}

std::vector<PropertyResult> verify_gradients(const VerifyOptions& options) {
    std::vector<PropertyResult> out;
    std::mt19937_64 rng(options.seed + 4);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_matrix = [&](int r, int c, double scale) {
        Matrix m(r, c);
        for (int j = 0; j < c; ++j) {
            for (int i = 0; i < r; ++i) {
                m(i, j) = scale * normal(rng);
            }
        }
        return m;
    };
    constexpr double tol = 1e-5;
    constexpr int trials = 5;
    constexpr int batch = 7;

    {
        const auto start = Clock::now();
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            const MlpSpec spec{3, {5, 4}, 2};
            Mlp net(spec, rng);
            const Matrix x = random_matrix(3, batch, 1.0);
            const Matrix up = random_matrix(2, batch, 1.0);
            const Vector analytic = mlp_gradients(spec, net.parameters(), x, up);
            const Vector numeric = finite_difference_gradient(
                [&](const Vector& p) {
                    Mlp probe(spec);
                    probe.set_parameters(p);
                    return probe.forward(x).cwiseProduct(up).sum();
                },
                net.parameters());
            worst = std::max(worst, max_relative_error(analytic, numeric));
        }
        out.push_back(make_result("gradients", "mlp_backprop", worst, tol, start));
    }
    {
        const auto start = Clock::now();
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            PolicyNetwork pol(MlpSpec{3, {5, 4}, 2},
                              ActionSpace::box(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)), rng);
            Vector params = pol.parameters() + 0.3 * random_matrix(pol.num_params(), 1, 1.0);
            pol.set_parameters(params);
            const Matrix obs = random_matrix(3, batch, 1.0);
            const Matrix act = random_matrix(2, batch, 1.0);
            const Vector up = random_matrix(batch, 1, 1.0);
            const double ent = 0.3;
            const Vector analytic = pol.log_prob_grad(obs, act, up, ent);
            const Vector numeric = finite_difference_gradient(
                [&](const Vector& p) {
                    PolicyNetwork probe = pol;
                    probe.set_parameters(p);
                    return probe.log_prob(obs, act).dot(up) + ent * probe.entropy(obs).sum();
                },
                params);
            worst = std::max(worst, max_relative_error(analytic, numeric));
        }
        out.push_back(make_result("gradients", "gaussian_log_prob", worst, tol, start));
    }
    {
        const auto start = Clock::now();
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            PolicyNetwork pol(MlpSpec{4, {5, 4}, 3}, ActionSpace::discrete(3), rng);
            Vector params = pol.parameters() + 0.5 * random_matrix(pol.num_params(), 1, 1.0);
            pol.set_parameters(params);
            const Matrix obs = random_matrix(4, batch, 1.0);
            Matrix act(1, batch);
            for (int i = 0; i < batch; ++i) {
                act(0, i) = std::uniform_int_distribution<int>(0, 2)(rng);
            }
            const Vector up = random_matrix(batch, 1, 1.0);
            const double ent = 0.3;
            const Vector analytic = pol.log_prob_grad(obs, act, up, ent);
            const Vector numeric = finite_difference_gradient(
                [&](const Vector& p) {
                    PolicyNetwork probe = pol;
                    probe.set_parameters(p);
                    return probe.log_prob(obs, act).dot(up) + ent * probe.entropy(obs).sum();
                },
                params);
            worst = std::max(worst, max_relative_error(analytic, numeric));
        }
        out.push_back(make_result("gradients", "categorical_log_prob", worst, tol, start));
    }
    {
        const auto start = Clock::now();
        double worst = 0.0;
        const double clip = 0.2;
        for (int t = 0; t < trials; ++t) {
            const bool gaussian = t % 2 == 0;
            PolicyNetwork pol = gaussian ? PolicyNetwork(MlpSpec{3, {5, 4}, 1},
                                                         ActionSpace::box(Vector::Constant(1, -2.0),
                                                                          Vector::Constant(1, 2.0)),
                                                         rng)
                                         : PolicyNetwork(MlpSpec{3, {5, 4}, 3}, ActionSpace::discrete(3), rng);
            Vector params = pol.parameters() + 0.3 * random_matrix(pol.num_params(), 1, 1.0);
            pol.set_parameters(params);
            const Matrix obs = random_matrix(3, batch, 1.0);
            Matrix act = gaussian ? random_matrix(1, batch, 1.0) : Matrix(1, batch);
            if (!gaussian) {
                for (int i = 0; i < batch; ++i) {
                    act(0, i) = std::uniform_int_distribution<int>(0, 2)(rng);
                }
            }
            const Vector lp = pol.log_prob(obs, act);
            // Old log-probs put ratios both inside and outside the clip range, away from the kinks.
            Vector old(batch);
            for (int i = 0; i < batch; ++i) {
                double log_ratio = 0.0;
                do {
                    log_ratio = 0.5 * normal(rng);
                } while (std::abs(std::exp(log_ratio) - (1.0 - clip)) < 1e-3 ||
                         std::abs(std::exp(log_ratio) - (1.0 + clip)) < 1e-3);
                old(i) = lp(i) - log_ratio;
            }
            const Vector adv = random_matrix(batch, 1, 1.0);
            Vector analytic;
            ppo_policy_loss(pol, obs, act, old, adv, clip, 0.01, &analytic);
            const Vector numeric = finite_difference_gradient(
                [&](const Vector& p) {
                    PolicyNetwork probe = pol;
                    probe.set_parameters(p);
                    return ppo_policy_loss(probe, obs, act, old, adv, clip, 0.01, nullptr);
                },
                params);
            worst = std::max(worst, max_relative_error(analytic, numeric));
        }
        out.push_back(make_result("gradients", "clipped_surrogate", worst, tol, start));
    }
    {
        const auto start = Clock::now();
        double worst = 0.0;
        const double clip = 0.2;
        for (int t = 0; t < trials; ++t) {
            const MlpSpec spec{3, {5, 4}, 1};
            Mlp critic(spec, rng);
            const Matrix obs = random_matrix(3, batch, 1.0);
            const Vector v = critic.forward(obs).row(0).transpose();
            Vector old(batch);
            for (int i = 0; i < batch; ++i) {
                double d = 0.0;
                do {
                    d = 0.4 * normal(rng);
                } while (std::abs(std::abs(d) - clip) < 1e-3);
                old(i) = v(i) - d;
            }
            const Vector targets = v + random_matrix(batch, 1, 1.0);
            Vector analytic;
            clipped_value_loss(critic, obs, targets, old, clip, 0.5, &analytic);
            const Vector numeric = finite_difference_gradient(
                [&](const Vector& p) {
                    Mlp probe(spec);
                    probe.set_parameters(p);
                    return clipped_value_loss(probe, obs, targets, old, clip, 0.5, nullptr);
                },
                critic.parameters());
            worst = std::max(worst, max_relative_error(analytic, numeric));
        }
        out.push_back(make_result("gradients", "clipped_value_loss", worst, tol, start));
    }
    {
        const auto start = Clock::now();
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            DualNetwork dual(MlpSpec{4, {5, 4}, 1}, 1e-3, rng);
            dual.net.set_parameters(dual.net.parameters() + 0.3 * random_matrix(dual.net.num_params(), 1, 1.0));
            const Matrix inputs = random_matrix(4, batch, 1.0);
            std::vector<Vector> branches;
            for (int i = 0; i < batch; ++i) {
                branches.push_back(random_matrix(3, 1, 1.0));
            }
            const double eps = 0.05 + 0.5 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            Vector analytic;
            dual.loss_and_grad(inputs, branches, eps, &analytic);
            const Vector numeric = finite_difference_gradient(
                [&](const Vector& p) {
                    DualNetwork probe = dual;
                    probe.net.set_parameters(p);
                    return probe.loss_and_grad(inputs, branches, eps, nullptr);
                },
                dual.net.parameters());
            worst = std::max(worst, max_relative_error(analytic, numeric));
        }
        out.push_back(make_result("gradients", "dual_loss", worst, tol, start));
    }
    return out;
}

std::vector<PropertyResult> run_verify(const std::string& scope, const VerifyOptions& options) {
    std::vector<PropertyResult> out;
    auto add = [&out](std::vector<PropertyResult> r) { out.insert(out.end(), r.begin(), r.end()); };
    const bool all = scope == "all";
    if (!all && std::find(verify_scopes().begin(), verify_scopes().end(), scope) == verify_scopes().end()) {
        throw std::invalid_argument("unknown verify scope '" + scope +
                                    "' (expected dual, envelope, vi, scheduler, gradients or all)");
    }
    if (all || scope == "dual") {
        add(verify_dual(options));
    }
    if (all || scope == "envelope") {
        add(verify_envelope(options));
    }
    if (all || scope == "vi") {
        add(verify_vi(options));
    }
    if (all || scope == "scheduler") {
        add(verify_scheduler(options));
    }
    if (all || scope == "gradients") {
        add(verify_gradients(options));
    }
    return out;
}

bool print_results(const std::vector<PropertyResult>& results, std::ostream& out) {
    bool ok = true;
    for (const auto& r : results) {
        char line[256];
        std::snprintf(line, sizeof line, "%s %s/%s max_error=%.3e tol=%.1e (%.2fs)", r.passed ? "PASS" : "FAIL",
                      r.suite.c_str(), r.name.c_str(), r.max_error, r.tolerance, r.seconds);
        out << line;
        if (!r.detail.empty()) {
            out << "  " << r.detail;
        }
        out << '\n';
        ok = ok && r.passed;
    }
    return ok;
}

} // namespace drspcrl
