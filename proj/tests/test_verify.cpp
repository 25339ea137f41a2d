#include "drspcrl/verify.hpp"

#include "doctest.h"

#include <sstream>
#include <stdexcept>

using namespace drspcrl;

TEST_CASE("correct solver passes the dual and envelope suites") {
    std::ostringstream out;
    auto results = verify_dual({});
    const auto env = verify_envelope({});
    results.insert(results.end(), env.begin(), env.end());
    CHECK(print_results(results, out));
    CHECK(out.str().find("PASS dual/dual_oracle_agreement") != std::string::npos);
    CHECK(out.str().find("FAIL") == std::string::npos);
}

TEST_CASE("a corrupted solver is caught and named") {
    VerifyOptions opts;
    opts.dual_solver = [](const ValueSupport& s, double eps) {
        DualSolution d = solve_dual(s, eps);
        d.robust_value += 0.05 * eps;
        return d;
    };
    const auto results = verify_dual(opts);
    std::ostringstream out;
    CHECK_FALSE(print_results(results, out));
    CHECK(out.str().find("FAIL dual/dual_oracle_agreement") != std::string::npos);
    CHECK(out.str().find("PASS dual/limit_eps_zero") != std::string::npos);

    VerifyOptions wrong_beta;
    wrong_beta.dual_solver = [](const ValueSupport& s, double eps) {
        DualSolution d = solve_dual(s, eps);
        d.beta_star *= 1.5;
        return d;
    };
    const auto env = verify_envelope(wrong_beta);
    CHECK_FALSE(env[0].passed);
}

TEST_CASE("scheduler and gradient suites pass") {
    std::ostringstream out;
    CHECK(print_results(run_verify("scheduler"), out));
    CHECK(print_results(run_verify("gradients"), out));
}

TEST_CASE("unknown scope") {
    CHECK_THROWS_AS(run_verify("nope"), std::invalid_argument);
    CHECK(verify_scopes().back() == "all");
}

TEST_CASE("finite difference helpers") {
    Vector x(2);
    x << 1.0, -2.0;
    const Vector g = finite_difference_gradient([](const Vector& v) { return v.squaredNorm(); }, x);
    CHECK(g(0) == doctest::Approx(2.0));
    CHECK(g(1) == doctest::Approx(-4.0));
    Vector a(2);
    a << 1.0, 1e-6;
    Vector b(2);
    b << 1.01, 2e-6;
    CHECK(max_relative_error(a, b) == doctest::Approx(0.01 / 1.01));
    CHECK_THROWS_AS(max_relative_error(a, Vector::Zero(3)), std::invalid_argument);
}
