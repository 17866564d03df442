#ifndef MASKEM_ANALYSIS_HPP
#define MASKEM_ANALYSIS_HPP

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "maskem/kem.hpp"

namespace maskem::analysis {

// Which binomial enters the discard-entropy term E and the extended-key
// entropy. Table uses E = log2 C(d, p) and extended key = (d-p) + log2 C(d, p),
// the forms that reproduce the published parameter tables. Printed follows the
// displayed formulas instead: E = log2 C(n, p) and extended key =
// (d-p) + log2 C(d-p, p). Both stay available because the two sources
// disagree; reports label which one they used.
enum class BinomialVariant { Table, Printed };

// log2 C(n, k). The binomial is computed exactly as a big integer and the log
// is taken last, so the result is correct to double precision even where the
// binomial itself overflows a double's mantissa.
double log2_binomial(std::uint64_t n, std::uint64_t k);

// log2 n!, exact big-integer factorial, log taken last.
double log2_factorial(std::uint64_t n);

// log2 of the factorial upper bound sqrt(2 pi n) (n/e)^n exp(1/(12n+1)).
double stirling_log2_factorial(std::uint64_t n);

// E = log2 C(d, p): entropy of the discarded-column positions. p < d.
double discard_entropy(std::size_t d, std::size_t p);

// Cost exponent of information-set decoding: the attacker needs q = d-p-m
// error-free equations among n of which t carry errors, succeeding with
// probability prod_{i=0}^{q-1} (n-t-i)/(n-i); returns -log2 of that product,
// evaluated in log space with real-valued (average) t. Throws InvariantError
// when t < 0, t >= n, or a numerator factor is not positive.
double isd_entropy(const kem::ParamSet& params, double t);

// Security curves over the error parameter mu. Both include the additive
// discard term E = log2 C(d, p).
// curve_A: E + isd_entropy at t = expected_weight(n, mu)  (decoding attack)
// curve_B: E + n * entropy_per_bit(mu)                    (exhaustive search)
double curve_A(const kem::ParamSet& params, double mu);
double curve_B(const kem::ParamSet& params, double mu);

struct SecurityReport {
    kem::ParamSet params;
    BinomialVariant variant = BinomialVariant::Table;
    double mu_star = 0.0;       // argmax of min(curve_A, curve_B)
    double sec_bits = 0.0;      // min(curve_A, curve_B) at mu_star
    double discard_entropy_E = 0.0;
    double isd_entropy_bits = 0.0;  // at t = expected_weight(n, mu_star)
    double error_entropy = 0.0;     // n * entropy_per_bit(mu_star)
    double key_entropy_K = 0.0;     // (d - p) + E
    double extended_key_entropy = 0.0;
    std::uint64_t pubkey_bits = 0;      // (n + m) * d
    std::uint64_t encap_mac_count = 0;  // (n + m) * (d - p)
};

// Grid search for mu_star over (0, 1) at the given step, then golden-section
// refinement inside the winning grid cell. The curves cross once where both
// are rising toward the crossing from opposite sides, so min(A, B) is
// unimodal around the optimum and the refinement is exact.
SecurityReport compute_sec(const kem::ParamSet& params,
                           BinomialVariant variant = BinomialVariant::Table,
                           double grid_step = 1e-4);

// Counting full-rank binary matrices: hbar = prod_{i=0}^{r-1} (2^s - 2^i) is
// the number of s x r matrices with independent columns (equally, r x s with
// independent rows). All log2 quantities below are computed as r*s plus a
// small delta so the bounds stay comparable even when the deltas are far
// below one ulp of r*s; `gap` in particular is the exact difference of the
// upper and lower deltas, not a difference of rounded totals.
struct MaskEntropyReport {
    std::size_t s1 = 0, s2 = 0, r = 0;  // square case: s1 == s2
    double log_count_exact = 0.0;       // log2 hbar at s = s1
    double log_count_lower = 0.0;       // r*s - log2(e) * r*2^(r-1-s)/(1-2^(r-1-s))
    double log_count_upper = 0.0;       // r*s - log2(e) * sum_i 2^(i-s)
    double gap = 0.0;                   // upper - lower, delta-space
    double gap_closed_form = 0.0;       // log2(e)*(2^-s - 2^(r-s) + r*2^(r-1-s)/(1-2^(r-1-s)))
    double ground_set_log = 0.0;        // log2 hbar(s1) + log2 hbar(s2) - log2(r!)
    double mask_entropy_approx = 0.0;   // r*(s1+s2) - log2(r!)
};

// Requires s >= r >= 1 (rectangular form: min(s1, s2) >= r >= 1).
MaskEntropyReport mask_count_bounds(std::size_t s, std::size_t r);
MaskEntropyReport mask_count_bounds(std::size_t s1, std::size_t s2,
                                    std::size_t r);

struct MaskMarginReport {
    double mask_entropy_bits = 0.0;  // m(m+n+d) - log2(m!), Stirling bound
    double sec_bits = 0.0;
    double margin_bits = 0.0;  // mask_entropy_bits - sec_bits
    bool exceeds_sec = false;
};

// Checks that recovering the masking matrix costs more than the security
// level itself. The second overload reuses a precomputed SEC value.
MaskMarginReport mask_margin_check(const kem::ParamSet& params);
MaskMarginReport mask_margin_check(const kem::ParamSet& params,
                                   double sec_bits);

// One published Goppa-code comparison row: the classic parameter set, its
// security level and public-key size, the complexity figures exactly as
// published (echoed strings, never recomputed), and both candidate products
// so readers can see which formula each published column actually matches.
struct GoppaRow {
    std::uint64_t n = 0, k = 0;
    std::uint64_t sec = 0;
    double pubkey_mbits = 0.0;            // systematic form, k(n-k) bits
    std::string mceliece_published;       // complexity column, verbatim
    std::string niederreiter_published;   // complexity column, verbatim
    std::uint64_t n_k_squared = 0;        // n * k^2
    std::uint64_t n_nk_squared = 0;       // n * (n-k)^2
};

struct ComplexityReport {
    kem::ParamSet params;
    std::uint64_t mac_count = 0;    // (n + m)(d - p), the tabulated model
    std::uint64_t bit_ops = 0;      // (n + m)(d - p)^2, the prose model
    std::uint64_t pubkey_bits = 0;  // (n + m) d
    std::vector<GoppaRow> goppa;    // three published comparison rows
};

// Emits both encapsulation-cost models (the published table and prose
// disagree on the exponent) next to the published Goppa-code constants.
ComplexityReport complexity_table(const kem::ParamSet& params);

// CSV with header mu,curve_A_bits,curve_B_bits,entropy_per_bit,prob_one and
// one row per grid point; LF line endings. Grid must be non-empty and inside
// (0, 1).
void emit_curves_csv(const kem::ParamSet& params,
                     const std::vector<double>& mu_grid, std::ostream& out);

// Line-oriented key=value renderings for machine diffing.
void write_report(const SecurityReport& report, std::ostream& out);
void write_report(const MaskEntropyReport& report, std::ostream& out);
void write_report(const MaskMarginReport& report, std::ostream& out);
void write_report(const ComplexityReport& report, std::ostream& out);

}  // namespace maskem::analysis

#endif
