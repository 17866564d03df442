#include "maskem/markov_error.hpp"

#include <cmath>

namespace maskem::markov {

ErrorModel::ErrorModel(double mu_) : mu(mu_) {
    if (!(mu >= 0.0 && mu <= 1.0))
        throw InvariantError("ErrorModel: mu must lie in [0, 1]");
}

gf2::BitVector sample_error(std::size_t n, const ErrorModel& model, Rng& rng) {
    if (n == 0) throw InvariantError("sample_error: n >= 1 required");
    if (!(model.mu > 0.0 && model.mu < 1.0))
        throw InvariantError("sample_error: sampling requires 0 < mu < 1");
    gf2::BitVector f(n);
    int state = 0;  // 0 = state 00, 1 = state 01, 2 = state 10
    for (std::size_t i = 0; i < n; ++i) {
        switch (state) {
            case 0:
                if (!rng.bernoulli(model.mu)) {
                    f.set(i, true);
                    state = 1;
                }
                break;
            case 1:
                state = 2;
                break;
            default:
                state = 0;
                break;
        }
    }
    return f;
}

Stationary stationary(const ErrorModel& model) {
    const double denom = 3.0 - 2.0 * model.mu;
    return {1.0 / denom, (1.0 - model.mu) / denom, (1.0 - model.mu) / denom};
}

double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double entropy_per_bit(const ErrorModel& model) {
    return binary_entropy(model.mu) / (3.0 - 2.0 * model.mu);
}

double max_entropy() {
    // Largest real root of x^3 - x^2 - 1 by bisection; the polynomial is
    // negative at 1 and positive at 2, and has a single real root there.
    static const double log2_lambda = [] {
        double lo = 1.0, hi = 2.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double v = mid * mid * mid - mid * mid - 1.0;
            if (v < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return std::log2(0.5 * (lo + hi));
    }();
    return log2_lambda;
}

double prob_one(const ErrorModel& model) {
    return (1.0 - model.mu) / (3.0 - 2.0 * model.mu);
}

double expected_weight(std::size_t n, const ErrorModel& model) {
    return static_cast<double>(n) * prob_one(model);
}

bool is_valid_error(const gf2::BitVector& f) {
    std::size_t last_one = 0;
    bool seen = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!f.get(i)) continue;
        if (seen && i - last_one < 3) return false;
        last_one = i;
        seen = true;
    }
    return true;
}

}  // namespace maskem::markov
