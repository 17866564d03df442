#include "maskem/attack.hpp"

#include <array>
#include <cstdio>
#include <unordered_map>
#include <utility>

#include "maskem/analysis.hpp"
#include "maskem/markov_error.hpp"

namespace maskem::attack {

using gf2::BitMatrix;
using gf2::BitVector;

VerifyResult verify_candidate(const kem::PublicKey& pk, const kem::Ciphertext& ct,
                              const BitVector& candidate,
                              const std::vector<std::size_t>& discard_guess,
                              const GroundTruth* truth) {
    const kem::ParamSet& pr = pk.params;
    const std::size_t n = pr.n();
    if (candidate.size() != pr.d - discard_guess.size())
        throw DimensionError("verify_candidate: candidate length mismatch");
    if (ct.c.size() != n + pr.m)
        throw DimensionError("verify_candidate: ciphertext length mismatch");

    const BitMatrix phat = discard_guess.empty()
                               ? pk.P
                               : gf2::remove_columns(pk.P, discard_guess);
    BitVector residual = gf2::mul_vec(phat, candidate);
    for (std::size_t w = 0; w < residual.word_count(); ++w)
        residual.data()[w] ^= ct.c.data()[w];

    for (std::size_t i = n; i < n + pr.m; ++i)
        if (residual.get(i)) return VerifyResult::FastReject;
    BitVector first_n(n);
    for (std::size_t i = 0; i < n; ++i)
        if (residual.get(i)) first_n.set(i, true);
    if (!markov::is_valid_error(first_n)) return VerifyResult::FastReject;

    if (truth != nullptr && truth->shared_key != nullptr) {
        const BitVector extended =
            kem::detail::extend_with_zeros(candidate, discard_guess);
        return extended == truth->shared_key->bits ? VerifyResult::Accept
                                                   : VerifyResult::SyndromeReject;
    }
    return VerifyResult::Accept;
}

namespace {

struct AffineSolution {
    bool consistent = false;
    BitVector particular;
    std::vector<BitVector> null_basis;
};

// Reduced row echelon form of the augmented system [M | rhs], unknowns in
// columns 0..vars-1.
AffineSolution solve_affine(BitMatrix aug, std::size_t vars) {
    const std::size_t rows = aug.rows();
    std::vector<std::size_t> pivot_row_of_col(vars, SIZE_MAX);
    std::size_t rank = 0;
    for (std::size_t col = 0; col < vars && rank < rows; ++col) {
        std::size_t pivot = SIZE_MAX;
        for (std::size_t row = rank; row < rows; ++row)
            if (aug.get(row, col)) {
                pivot = row;
                break;
            }
        if (pivot == SIZE_MAX) continue;
        aug.swap_rows(rank, pivot);
        for (std::size_t row = 0; row < rows; ++row)
            if (row != rank && aug.get(row, col)) aug.xor_row(row, aug, rank);
        pivot_row_of_col[col] = rank;
        ++rank;
    }

    AffineSolution sol;
    for (std::size_t row = rank; row < rows; ++row)
        if (aug.get(row, vars)) return sol;  // 0 = 1: inconsistent
    sol.consistent = true;

    sol.particular = BitVector(vars);
    for (std::size_t col = 0; col < vars; ++col)
        if (pivot_row_of_col[col] != SIZE_MAX)
            sol.particular.set(col, aug.get(pivot_row_of_col[col], vars));

    for (std::size_t free_col = 0; free_col < vars; ++free_col) {
        if (pivot_row_of_col[free_col] != SIZE_MAX) continue;
        BitVector v(vars);
        v.set(free_col, true);
        for (std::size_t col = 0; col < vars; ++col)
            if (pivot_row_of_col[col] != SIZE_MAX)
                v.set(col, aug.get(pivot_row_of_col[col], free_col));
        sol.null_basis.push_back(std::move(v));
    }
    return sol;
}

std::size_t prefix_weight(const BitVector& v, std::size_t n) {
    std::size_t w = 0;
    for (std::size_t i = 0; i < n; ++i) w += v.get(i);
    return w;
}

}  // namespace

AttackOutcome isd_attack(const kem::PublicKey& pk, const kem::Ciphertext& ct,
                         const AttackConfig& cfg, Rng& rng,
                         const GroundTruth* truth) {
    const kem::ParamSet& pr = pk.params;
    pr.validate();
    const std::size_t n = pr.n(), m = pr.m, dp = pr.d - pr.p;
    if (ct.c.size() != n + m)
        throw DimensionError("isd_attack: ciphertext length mismatch");
    if (cfg.max_iterations < 1)
        throw InvariantError("isd_attack: max_iterations >= 1 required");
    if (cfg.know_discard_set && (truth == nullptr || truth->discard == nullptr))
        throw InvariantError("isd_attack: know_discard_set needs ground-truth discard");
    if (cfg.know_error_weight && (truth == nullptr || truth->error == nullptr))
        throw InvariantError("isd_attack: know_error_weight needs ground-truth error");
    if (!cfg.use_free_rows && dp > n)
        throw InvariantError("isd_attack: not enough error-prone rows without free rows");

    // Feasibility guard on the expected search space: clean-subset odds plus,
    // when the discard set is unknown, the discard-position entropy.
    const double t_guard =
        truth != nullptr && truth->error != nullptr
            ? static_cast<double>(truth->error->weight())
            : markov::expected_weight(n, markov::ErrorModel(pr.mu));
    double space_bits = analysis::isd_entropy(pr, t_guard);
    if (!cfg.know_discard_set)
        space_bits += analysis::log2_binomial(pr.d, pr.p);
    if (space_bits > 30.0)
        throw GuardError("isd_attack: search space exceeds 2^30");

    const std::size_t top_rows = cfg.use_free_rows ? dp - m : dp;
    const std::size_t truth_weight =
        cfg.know_error_weight ? truth->error->weight() : 0;
    constexpr std::size_t kMaxFreeVars = 12;

    AttackOutcome out;
    for (std::uint64_t iter = 1; iter <= cfg.max_iterations; ++iter) {
        out.iterations_used = iter;

        const std::vector<std::size_t> guess =
            cfg.know_discard_set ? *truth->discard
                                 : sample_distinct_sorted(pr.p, pr.d, rng);
        const BitMatrix phat =
            guess.empty() ? pk.P : gf2::remove_columns(pk.P, guess);

        std::vector<std::size_t> rows = sample_distinct_sorted(top_rows, n, rng);
        if (cfg.use_free_rows)
            for (std::size_t i = 0; i < m; ++i) rows.push_back(n + i);

        BitMatrix aug(dp, dp + 1);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            for (std::size_t col = 0; col < dp; ++col)
                if (phat.get(rows[k], col)) aug.set(k, col, true);
            aug.set(k, dp, ct.c.get(rows[k]));
        }

        const AffineSolution sol = solve_affine(std::move(aug), dp);
        if (!sol.consistent) {
            ++out.fast_rejects;
            continue;
        }

        const bool truncated = sol.null_basis.size() > kMaxFreeVars;
        const std::uint64_t combos =
            std::uint64_t{1} << std::min(sol.null_basis.size(), kMaxFreeVars);
        if (truncated) ++out.truncated_enumerations;

        bool any_syndrome = false, accepted = false;
        for (std::uint64_t combo = 0; combo < combos && !accepted; ++combo) {
            BitVector cand = sol.particular;
            for (std::size_t b = 0; b < sol.null_basis.size(); ++b)
                if ((combo >> b) & 1)
                    for (std::size_t w = 0; w < cand.word_count(); ++w)
                        cand.data()[w] ^= sol.null_basis[b].data()[w];

            ++out.candidates_tested;
            if (cfg.know_error_weight) {
                BitVector residual = gf2::mul_vec(phat, cand);
                for (std::size_t w = 0; w < residual.word_count(); ++w)
                    residual.data()[w] ^= ct.c.data()[w];
                if (prefix_weight(residual, n) != truth_weight) continue;
            }
            switch (verify_candidate(pk, ct, cand, guess, truth)) {
                case VerifyResult::Accept:
                    accepted = true;
                    break;
                case VerifyResult::SyndromeReject:
                    any_syndrome = true;
                    break;
                case VerifyResult::FastReject:
                    break;
            }
        }

        if (accepted) {
            out.success = true;
            break;
        }
        if (any_syndrome)
            ++out.syndrome_rejects;
        else
            ++out.fast_rejects;
    }
    return out;
}

BitVector sample_spaced_error(std::size_t n, std::size_t weight, Rng& rng) {
    BitVector f(n);
    if (weight == 0) return f;
    if (n + 2 < 3 * weight)
        throw InvariantError("sample_spaced_error: weight too large for spacing");
    // Bijection: y_1 < ... < y_w drawn from [0, n - 2(w-1)) map to positions
    // y_j + 2j (0-indexed j), which makes consecutive gaps >= 3.
    const std::vector<std::size_t> ys =
        sample_distinct_sorted(weight, n - 2 * (weight - 1), rng);
    for (std::size_t j = 0; j < weight; ++j) f.set(ys[j] + 2 * j, true);
    return f;
}

namespace {

// Dense packings for the exhaustive censuses: matrices as row arrays of
// uint32 (row bit j = column j), masks as fixed 192-bit keys.
using MaskKey = std::array<std::uint64_t, 3>;

struct MaskKeyHash {
    std::size_t operator()(const MaskKey& k) const noexcept {
        std::uint64_t h = 0x9E3779B97F4A7C15ULL;
        for (std::uint64_t w : k) {
            h ^= w + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
            h *= 0xBF58476D1CE4E5B9ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

// Rank of a list of bit-vectors (each an unsigned word) by basis reduction.
std::size_t span_rank(std::vector<std::uint32_t> vecs) {
    std::uint32_t basis[32] = {0};
    std::size_t rank = 0;
    for (std::uint32_t v : vecs) {
        for (std::size_t b = 32; b-- > 0;)
            if ((v >> b) & 1u) {
                if (basis[b]) {
                    v ^= basis[b];
                } else {
                    basis[b] = v;
                    ++rank;
                    break;
                }
            }
    }
    return rank;
}

// All s x r matrices (as s rows of r bits), optionally only those with
// independent columns.
std::vector<std::vector<std::uint32_t>> enumerate_matrices(std::size_t rows,
                                                           std::size_t cols,
                                                           bool full_rank) {
    std::vector<std::vector<std::uint32_t>> result;
    const std::uint64_t total = std::uint64_t{1} << (rows * cols);
    for (std::uint64_t code = 0; code < total; ++code) {
        std::vector<std::uint32_t> mat(rows);
        for (std::size_t i = 0; i < rows; ++i)
            mat[i] = static_cast<std::uint32_t>(
                (code >> (i * cols)) & ((std::uint64_t{1} << cols) - 1));
        if (full_rank) {
            // Column vectors: bit i of column j is row i's bit j.
            std::vector<std::uint32_t> colv(cols, 0);
            for (std::size_t j = 0; j < cols; ++j)
                for (std::size_t i = 0; i < rows; ++i)
                    colv[j] |= ((mat[i] >> j) & 1u) << i;
            if (span_rank(colv) < std::min(rows, cols)) continue;
        }
        result.push_back(std::move(mat));
    }
    return result;
}

MaskKey product_key(const std::vector<std::uint32_t>& z,
                    const std::vector<std::uint32_t>& u, std::size_t s,
                    std::size_t r) {
    MaskKey key{0, 0, 0};
    for (std::size_t i = 0; i < s; ++i) {
        std::uint32_t row = 0;
        for (std::size_t j = 0; j < r; ++j)
            if ((z[i] >> j) & 1u) row ^= u[j];
        // Row-major packing of the s x s mask, bit index i*s + j.
        for (std::size_t j = 0; j < s; ++j)
            if ((row >> j) & 1u) {
                const std::size_t bit = i * s + j;
                key[bit / 64] |= std::uint64_t{1} << (bit % 64);
            }
    }
    return key;
}

void check_census_guard(std::size_t s, std::size_t r) {
    if (r < 1 || s < r)
        throw InvariantError("mask experiment: s >= r >= 1 required");
    if (2 * r * s > 24)
        throw GuardError("mask experiment: 2^(2rs) exceeds the 2^24 guard");
}

}  // namespace

MaskUniquenessReport mask_uniqueness_experiment(std::size_t s, std::size_t r) {
    check_census_guard(s, r);
    MaskUniquenessReport rep;
    rep.s = s;
    rep.r = r;

    const auto full_z = enumerate_matrices(s, r, true);
    // U (r x s, independent rows) is the transpose census of Z, so reuse the
    // Z enumeration and transpose each entry.
    std::vector<std::vector<std::uint32_t>> full_u;
    full_u.reserve(full_z.size());
    for (const auto& zt : full_z) {
        std::vector<std::uint32_t> u(r, 0);
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < r; ++j)
                if ((zt[i] >> j) & 1u) u[j] |= std::uint32_t{1} << i;
        full_u.push_back(std::move(u));
    }

    rep.full_rank_z = full_z.size();
    rep.full_rank_u = full_u.size();
    rep.full_rank_pairs = rep.full_rank_z * rep.full_rank_u;

    std::unordered_map<MaskKey, std::uint64_t, MaskKeyHash> census;
    census.reserve(rep.full_rank_pairs);
    for (const auto& z : full_z)
        for (const auto& u : full_u) ++census[product_key(z, u, s, r)];

    rep.full_rank_distinct = census.size();
    rep.min_multiplicity = UINT64_MAX;
    for (const auto& [key, count] : census) {
        (void)key;
        rep.min_multiplicity = std::min(rep.min_multiplicity, count);
        rep.max_multiplicity = std::max(rep.max_multiplicity, count);
        ++rep.multiplicity_histogram[count];
    }

    const auto all_z = enumerate_matrices(s, r, false);
    std::unordered_map<MaskKey, std::uint64_t, MaskKeyHash> all_census;
    std::vector<std::vector<std::uint32_t>> all_u;
    all_u.reserve(all_z.size());
    for (const auto& zt : all_z) {
        std::vector<std::uint32_t> u(r, 0);
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < r; ++j)
                if ((zt[i] >> j) & 1u) u[j] |= std::uint32_t{1} << i;
        all_u.push_back(std::move(u));
    }
    rep.all_pairs = static_cast<std::uint64_t>(all_z.size()) * all_u.size();
    all_census.reserve(rep.all_pairs);
    for (const auto& z : all_z)
        for (const auto& u : all_u) ++all_census[product_key(z, u, s, r)];
    rep.all_distinct = all_census.size();
    rep.extra_collisions = (rep.all_pairs - rep.all_distinct) -
                           (rep.full_rank_pairs - rep.full_rank_distinct);
    return rep;
}

IntersectionUniformityReport intersection_uniformity_experiment(std::size_t s,
                                                                std::size_t r) {
    check_census_guard(s, r);
    IntersectionUniformityReport rep;
    rep.s = s;
    rep.r = r;

    const auto full_z = enumerate_matrices(s, r, true);
    std::vector<std::vector<std::uint32_t>> full_u;
    full_u.reserve(full_z.size());
    for (const auto& zt : full_z) {
        std::vector<std::uint32_t> u(r, 0);
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < r; ++j)
                if ((zt[i] >> j) & 1u) u[j] |= std::uint32_t{1} << i;
        full_u.push_back(std::move(u));
    }

    std::unordered_map<MaskKey, char, MaskKeyHash> ground_set;
    ground_set.reserve(full_z.size() * full_u.size());
    for (const auto& z : full_z)
        for (const auto& u : full_u) ground_set.emplace(product_key(z, u, s, r), 0);
    rep.ground_set_size = ground_set.size();

    rep.gl_size = 1;
    for (std::size_t i = 0; i < r; ++i)
        rep.gl_size *= (std::uint64_t{1} << r) - (std::uint64_t{1} << i);

    for (const auto& [key, unused] : ground_set) {
        (void)unused;
        // Intersection of the first r rows and first r columns.
        std::vector<std::uint32_t> inter(r, 0);
        std::uint64_t packed = 0;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) {
                const std::size_t bit = i * s + j;
                if ((key[bit / 64] >> (bit % 64)) & 1u) {
                    inter[i] |= std::uint32_t{1} << j;
                    packed |= std::uint64_t{1} << (i * r + j);
                }
            }
        if (span_rank(inter) == r) {
            ++rep.invertible_intersections;
            ++rep.histogram[packed];
        }
    }

    const double expected = static_cast<double>(rep.invertible_intersections) /
                            static_cast<double>(rep.gl_size);
    double chi = 0.0;
    std::uint64_t seen = 0;
    for (const auto& [packed, count] : rep.histogram) {
        (void)packed;
        const double diff = static_cast<double>(count) - expected;
        chi += diff * diff / expected;
        ++seen;
    }
    // Invertible matrices that never appeared still contribute their full
    // expected mass.
    chi += static_cast<double>(rep.gl_size - seen) * expected;
    rep.chi_square = chi;
    return rep;
}

void write_report(const AttackOutcome& outcome, std::ostream& out) {
    out << "success=" << (outcome.success ? "true" : "false") << "\n";
    out << "iterations_used=" << outcome.iterations_used << "\n";
    out << "fast_rejects=" << outcome.fast_rejects << "\n";
    out << "syndrome_rejects=" << outcome.syndrome_rejects << "\n";
    out << "candidates_tested=" << outcome.candidates_tested << "\n";
    out << "truncated_enumerations=" << outcome.truncated_enumerations << "\n";
}

void write_report(const MaskUniquenessReport& rep, std::ostream& out) {
    out << "s=" << rep.s << "\n";
    out << "r=" << rep.r << "\n";
    out << "full_rank_z=" << rep.full_rank_z << "\n";
    out << "full_rank_u=" << rep.full_rank_u << "\n";
    out << "full_rank_pairs=" << rep.full_rank_pairs << "\n";
    out << "full_rank_distinct=" << rep.full_rank_distinct << "\n";
    out << "min_multiplicity=" << rep.min_multiplicity << "\n";
    out << "max_multiplicity=" << rep.max_multiplicity << "\n";
    for (const auto& [mult, count] : rep.multiplicity_histogram)
        out << "hist_multiplicity_" << mult << "=" << count << "\n";
    out << "all_pairs=" << rep.all_pairs << "\n";
    out << "all_distinct=" << rep.all_distinct << "\n";
    out << "extra_collisions=" << rep.extra_collisions << "\n";
}

void write_report(const IntersectionUniformityReport& rep, std::ostream& out) {
    out << "s=" << rep.s << "\n";
    out << "r=" << rep.r << "\n";
    out << "ground_set_size=" << rep.ground_set_size << "\n";
    out << "invertible_intersections=" << rep.invertible_intersections << "\n";
    out << "gl_size=" << rep.gl_size << "\n";
    for (const auto& [packed, count] : rep.histogram)
        out << "hist_intersection_" << packed << "=" << count << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", rep.chi_square);
    out << "chi_square=" << buf << "\n";
}

}  // namespace maskem::attack
