#include "maskem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <boost/multiprecision/cpp_int.hpp>

#include "maskem/markov_error.hpp"

namespace maskem::analysis {

using boost::multiprecision::cpp_int;

namespace {

// log2 of a positive big integer: shift down to a 62-bit head, log that, add
// back the shift. Exact integers up to 2^62 take the direct path.
double log2_cpp_int(const cpp_int& x) {
    const std::size_t top_bit = boost::multiprecision::msb(x);
    if (top_bit < 62) return std::log2(x.convert_to<double>());
    const std::size_t shift = top_bit - 61;
    const cpp_int head = x >> shift;
    return std::log2(head.convert_to<double>()) + static_cast<double>(shift);
}

cpp_int binomial_exact(std::uint64_t n, std::uint64_t k) {
    if (k > n) throw InvariantError("binomial: k > n");
    if (k > n - k) k = n - k;
    cpp_int c = 1;
    // c stays a binomial after every step, so each division is exact.
    for (std::uint64_t i = 1; i <= k; ++i) {
        c *= n - k + i;
        c /= i;
    }
    return c;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

double log2_binomial(std::uint64_t n, std::uint64_t k) {
    return log2_cpp_int(binomial_exact(n, k));
}

double log2_factorial(std::uint64_t n) {
    cpp_int f = 1;
    for (std::uint64_t i = 2; i <= n; ++i) f *= i;
    return log2_cpp_int(f);
}

double stirling_log2_factorial(std::uint64_t n) {
    if (n == 0) return 0.0;
    const double nd = static_cast<double>(n);
    return 0.5 * std::log2(2.0 * std::numbers::pi * nd) +
           nd * (std::log2(nd) - std::numbers::log2e) +
           std::numbers::log2e / (12.0 * nd + 1.0);
}

double discard_entropy(std::size_t d, std::size_t p) {
    if (p >= d) throw InvariantError("discard_entropy: p < d required");
    return log2_binomial(d, p);
}

double isd_entropy(const kem::ParamSet& params, double t) {
    // Weaker precondition than ParamSet::validate: only the quantities the
    // product touches matter, and m = 0 is a legitimate ablation here.
    if (params.d == 0 || params.p + params.m >= params.d)
        throw InvariantError("isd_entropy: requires d - p - m >= 1");
    const double n = static_cast<double>(params.n());
    if (t < 0.0 || t >= n)
        throw InvariantError("isd_entropy: t must lie in [0, n)");
    const std::size_t q = params.d - params.p - params.m;
    double bits = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        const double num = n - t - static_cast<double>(i);
        if (num <= 0.0)
            throw InvariantError("isd_entropy: parameters infeasible (n - t - i <= 0)");
        bits -= std::log2(num / (n - static_cast<double>(i)));
    }
    return bits;
}

namespace {

// min(curve_A, curve_B) without the shared additive E term.
double min_curve_core(const kem::ParamSet& params, double mu) {
    const markov::ErrorModel model(mu);
    const double t = markov::expected_weight(params.n(), model);
    const double a = isd_entropy(params, t);
    const double b = static_cast<double>(params.n()) * markov::entropy_per_bit(model);
    return std::min(a, b);
}

}  // namespace

double curve_A(const kem::ParamSet& params, double mu) {
    const markov::ErrorModel model(mu);
    const double t = markov::expected_weight(params.n(), model);
    return discard_entropy(params.d, params.p) + isd_entropy(params, t);
}

double curve_B(const kem::ParamSet& params, double mu) {
    const markov::ErrorModel model(mu);
    return discard_entropy(params.d, params.p) +
           static_cast<double>(params.n()) * markov::entropy_per_bit(model);
}

SecurityReport compute_sec(const kem::ParamSet& params, BinomialVariant variant,
                           double grid_step) {
    params.validate();
    if (!(grid_step > 0.0 && grid_step < 0.5))
        throw InvariantError("compute_sec: grid step must lie in (0, 0.5)");

    double best_mu = grid_step, best = -1.0;
    for (double mu = grid_step; mu < 1.0; mu += grid_step) {
        const double v = min_curve_core(params, mu);
        if (v > best) {
            best = v;
            best_mu = mu;
        }
    }

    // Golden-section refinement inside the winning cell.
    double lo = std::max(best_mu - grid_step, grid_step * 0.5);
    double hi = std::min(best_mu + grid_step, 1.0 - grid_step * 0.5);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = min_curve_core(params, x1), f2 = min_curve_core(params, x2);
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = min_curve_core(params, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = min_curve_core(params, x1);
        }
    }
    const double mu_star = (lo + hi) / 2.0;

    SecurityReport rep;
    rep.params = params;
    rep.variant = variant;
    rep.mu_star = mu_star;
    const std::size_t n = params.n();
    const double e_table = discard_entropy(params.d, params.p);
    const double e_used =
        variant == BinomialVariant::Table ? e_table : log2_binomial(n, params.p);
    rep.discard_entropy_E = e_used;
    rep.sec_bits = e_used + min_curve_core(params, mu_star);
    const markov::ErrorModel model(mu_star);
    rep.isd_entropy_bits = isd_entropy(params, markov::expected_weight(n, model));
    rep.error_entropy = static_cast<double>(n) * markov::entropy_per_bit(model);
    rep.key_entropy_K = static_cast<double>(params.d - params.p) + e_used;
    rep.extended_key_entropy =
        static_cast<double>(params.d - params.p) +
        (variant == BinomialVariant::Table
             ? e_table
             : log2_binomial(params.d - params.p, params.p));
    rep.pubkey_bits = static_cast<std::uint64_t>(n + params.m) * params.d;
    rep.encap_mac_count =
        static_cast<std::uint64_t>(n + params.m) * (params.d - params.p);
    return rep;
}

namespace {

// Sum over i < r of log2(1 - 2^(i-s)), the exact correction below r*s.
double exact_delta(std::size_t s, std::size_t r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r; ++i)
        sum += std::numbers::log2e *
               std::log1p(-std::exp2(static_cast<double>(i) - static_cast<double>(s)));
    return sum;
}

double upper_delta(std::size_t s, std::size_t r) {
    // sum_i 2^(i-s) = 2^(r-s) - 2^(-s), exact in double for r <= 53.
    const double sd = static_cast<double>(s), rd = static_cast<double>(r);
    return -std::numbers::log2e * (std::exp2(rd - sd) - std::exp2(-sd));
}

double lower_delta(std::size_t s, std::size_t r) {
    const double x = std::exp2(static_cast<double>(r) - 1.0 - static_cast<double>(s));
    return -std::numbers::log2e * (static_cast<double>(r) * x / (1.0 - x));
}

}  // namespace

MaskEntropyReport mask_count_bounds(std::size_t s1, std::size_t s2,
                                    std::size_t r) {
    if (r < 1 || s1 < r || s2 < r)
        throw InvariantError("mask_count_bounds: min(s1, s2) >= r >= 1 required");
    MaskEntropyReport rep;
    rep.s1 = s1;
    rep.s2 = s2;
    rep.r = r;
    const double rs1 = static_cast<double>(r) * static_cast<double>(s1);
    const double rs2 = static_cast<double>(r) * static_cast<double>(s2);
    rep.log_count_exact = rs1 + exact_delta(s1, r);
    rep.log_count_lower = rs1 + lower_delta(s1, r);
    rep.log_count_upper = rs1 + upper_delta(s1, r);
    rep.gap = upper_delta(s1, r) - lower_delta(s1, r);
    const double x = std::exp2(static_cast<double>(r) - 1.0 - static_cast<double>(s1));
    rep.gap_closed_form =
        std::numbers::log2e *
        (std::exp2(-static_cast<double>(s1)) -
         std::exp2(static_cast<double>(r) - static_cast<double>(s1)) +
         static_cast<double>(r) * x / (1.0 - x));
    const double log2_r_fact = log2_factorial(r);
    rep.ground_set_log =
        (rs1 + exact_delta(s1, r)) + (rs2 + exact_delta(s2, r)) - log2_r_fact;
    rep.mask_entropy_approx = static_cast<double>(r) *
                                  (static_cast<double>(s1) + static_cast<double>(s2)) -
                              log2_r_fact;
    return rep;
}

MaskEntropyReport mask_count_bounds(std::size_t s, std::size_t r) {
    return mask_count_bounds(s, s, r);
}

MaskMarginReport mask_margin_check(const kem::ParamSet& params, double sec_bits) {
    params.validate();
    MaskMarginReport rep;
    const double m = static_cast<double>(params.m);
    rep.mask_entropy_bits =
        m * (m + static_cast<double>(params.n()) + static_cast<double>(params.d)) -
        stirling_log2_factorial(params.m);
    rep.sec_bits = sec_bits;
    rep.margin_bits = rep.mask_entropy_bits - sec_bits;
    rep.exceeds_sec = rep.margin_bits > 0.0;
    return rep;
}

MaskMarginReport mask_margin_check(const kem::ParamSet& params) {
    return mask_margin_check(params, compute_sec(params).sec_bits);
}

ComplexityReport complexity_table(const kem::ParamSet& params) {
    params.validate();
    ComplexityReport rep;
    rep.params = params;
    const std::uint64_t rows = params.n() + params.m;
    const std::uint64_t dhat = params.d - params.p;
    rep.mac_count = rows * dhat;
    rep.bit_ops = rows * dhat * dhat;
    rep.pubkey_bits = rows * params.d;
    rep.goppa = {
        {1632, 1269, 80, 0.46, "0.0215e10", "0.26e10", 0, 0},
        {2960, 2288, 128, 1.53, "0.1337e10", "1.55e10", 0, 0},
        {6624, 5129, 256, 7.67, "1.4805e10", "17.43e10", 0, 0},
    };
    for (GoppaRow& row : rep.goppa) {
        row.n_k_squared = row.n * row.k * row.k;
        row.n_nk_squared = row.n * (row.n - row.k) * (row.n - row.k);
    }
    return rep;
}

void emit_curves_csv(const kem::ParamSet& params,
                     const std::vector<double>& mu_grid, std::ostream& out) {
    params.validate();
    if (mu_grid.empty()) throw InvariantError("emit_curves_csv: empty grid");
    out << "mu,curve_A_bits,curve_B_bits,entropy_per_bit,prob_one\n";
    for (double mu : mu_grid) {
        if (!(mu > 0.0 && mu < 1.0))
            throw InvariantError("emit_curves_csv: grid point outside (0, 1)");
        const markov::ErrorModel model(mu);
        char line[192];
        std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%.9f,%.9f\n", mu,
                      curve_A(params, mu), curve_B(params, mu),
                      markov::entropy_per_bit(model), markov::prob_one(model));
        out << line;
    }
}

void write_report(const SecurityReport& rep, std::ostream& out) {
    out << "d=" << rep.params.d << "\n";
    out << "p=" << rep.params.p << "\n";
    out << "m=" << rep.params.m << "\n";
    out << "n=" << rep.params.n() << "\n";
    out << "variant=" << (rep.variant == BinomialVariant::Table ? "table" : "printed")
        << "\n";
    out << "mu_star=" << fmt("%.6f", rep.mu_star) << "\n";
    out << "SEC=" << fmt("%.3f", rep.sec_bits) << "\n";
    out << "E=" << fmt("%.3f", rep.discard_entropy_E) << "\n";
    out << "isd_entropy=" << fmt("%.3f", rep.isd_entropy_bits) << "\n";
    out << "error_entropy=" << fmt("%.3f", rep.error_entropy) << "\n";
    out << "K=" << fmt("%.3f", rep.key_entropy_K) << "\n";
    out << "extended_key_entropy=" << fmt("%.3f", rep.extended_key_entropy) << "\n";
    out << "pubkey_bits=" << rep.pubkey_bits << "\n";
    out << "encap_mac_count=" << rep.encap_mac_count << "\n";
}

void write_report(const MaskEntropyReport& rep, std::ostream& out) {
    out << "s1=" << rep.s1 << "\n";
    out << "s2=" << rep.s2 << "\n";
    out << "r=" << rep.r << "\n";
    out << "log_count_exact=" << fmt("%.9f", rep.log_count_exact) << "\n";
    out << "log_count_lower=" << fmt("%.9f", rep.log_count_lower) << "\n";
    out << "log_count_upper=" << fmt("%.9f", rep.log_count_upper) << "\n";
    out << "gap=" << fmt("%.15e", rep.gap) << "\n";
    out << "gap_closed_form=" << fmt("%.15e", rep.gap_closed_form) << "\n";
    out << "ground_set_log=" << fmt("%.9f", rep.ground_set_log) << "\n";
    out << "mask_entropy_approx=" << fmt("%.9f", rep.mask_entropy_approx) << "\n";
}

void write_report(const MaskMarginReport& rep, std::ostream& out) {
    out << "mask_entropy_bits=" << fmt("%.3f", rep.mask_entropy_bits) << "\n";
    out << "sec_bits=" << fmt("%.3f", rep.sec_bits) << "\n";
    out << "margin_bits=" << fmt("%.3f", rep.margin_bits) << "\n";
    out << "exceeds_sec=" << (rep.exceeds_sec ? "true" : "false") << "\n";
}

void write_report(const ComplexityReport& rep, std::ostream& out) {
    out << "mac_count=" << rep.mac_count << "\n";
    out << "bit_ops=" << rep.bit_ops << "\n";
    out << "pubkey_bits=" << rep.pubkey_bits << "\n";
    for (std::size_t i = 0; i < rep.goppa.size(); ++i) {
        const GoppaRow& g = rep.goppa[i];
        out << "goppa_row=" << (i + 1) << " n=" << g.n << " k=" << g.k
            << " sec=" << g.sec << " pubkey_mbits=" << fmt("%.2f", g.pubkey_mbits)
            << " mceliece_published=" << g.mceliece_published
            << " niederreiter_published=" << g.niederreiter_published
            << " n_k_squared=" << g.n_k_squared
            << " n_nk_squared=" << g.n_nk_squared << "\n";
    }
}

}  // namespace maskem::analysis
