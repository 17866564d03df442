#ifndef MASKEM_ATTACK_HPP
#define MASKEM_ATTACK_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <vector>

#include "maskem/kem.hpp"

namespace maskem::attack {

// Optional instrumentation handed to the attacker by the experiment harness:
// the planted values a real adversary would not have. shared_key upgrades the
// verification apparatus from a structural check to exact-recovery scoring;
// error enables the weight filter; discard serves known-discard runs.
struct GroundTruth {
    const kem::SharedKey* shared_key = nullptr;
    const gf2::BitVector* error = nullptr;  // length n
    const std::vector<std::size_t>* discard = nullptr;
};

struct AttackConfig {
    std::uint64_t max_iterations = 1;
    bool know_discard_set = false;  // requires GroundTruth::discard
    bool know_error_weight = false;  // requires GroundTruth::error
    // Use the m error-free bottom equations for free instead of sampling all
    // d-p equations from the error-prone top rows. On by default (the
    // attacker accounting assumed everywhere); off for ablation runs.
    bool use_free_rows = true;
};

struct AttackOutcome {
    bool success = false;
    std::uint64_t iterations_used = 0;
    // Per-iteration classification of failed iterations: fast_rejects
    // iterations died before any candidate survived the structural stage
    // (inconsistent system, or every candidate fast-rejected);
    // syndrome_rejects iterations produced a structurally plausible candidate
    // that failed exact verification. fast + syndrome + (success ? 1 : 0)
    // == iterations_used.
    std::uint64_t fast_rejects = 0;
    std::uint64_t syndrome_rejects = 0;
    // Informational: total candidates run through the verifier, and
    // iterations whose solution space exceeded the enumeration cap.
    std::uint64_t candidates_tested = 0;
    std::uint64_t truncated_enumerations = 0;
};

enum class VerifyResult { FastReject, SyndromeReject, Accept };

// Two-stage verification apparatus. Computes the residual
// e' = ct + remove_columns(P, discard_guess) * candidate, then:
// FastReject when the last m residual bits are nonzero or the first n bits
// are not a valid error sequence. Otherwise, with truth->shared_key present,
// Accept exactly when the candidate extends to the true shared key, else
// SyndromeReject; without ground truth the structural pass is an Accept.
VerifyResult verify_candidate(const kem::PublicKey& pk, const kem::Ciphertext& ct,
                              const gf2::BitVector& candidate,
                              const std::vector<std::size_t>& discard_guess,
                              const GroundTruth* truth = nullptr);

// Information-set-decoding attacker. Per iteration: guess the discard set
// (or take the known one), pick d-p-m random equations from the n error-prone
// rows plus the m error-free bottom rows (all d-p from the top when
// use_free_rows is off), solve the square GF(2) system, and run every
// solution of its affine solution space through verify_candidate. Success
// means a candidate was Accepted. Refuses runs whose total search space
// exceeds 2^30 (discard choices times the clean-subset odds); enumeration of
// one iteration's solution space is capped at 2^12 candidates.
AttackOutcome isd_attack(const kem::PublicKey& pk, const kem::Ciphertext& ct,
                         const AttackConfig& cfg, Rng& rng,
                         const GroundTruth* truth = nullptr);

// Uniform random error vector of exactly the given weight whose 1s are
// pairwise at least three positions apart (stars-and-bars bijection with
// C(n - 2(weight-1), weight) patterns). Requires weight == 0 or
// n >= 3*weight - 2.
gf2::BitVector sample_spaced_error(std::size_t n, std::size_t weight, Rng& rng);

// Exhaustive product census over s x r and r x s binary matrix pairs.
// full_rank_* counts restrict Z to independent columns and U to independent
// rows; the all_* figures rerun the census with every matrix admitted.
// extra_collisions = (all_pairs - all_distinct) - (full_rank_pairs -
// full_rank_distinct): the colliding pairs added by rank-deficient matrices.
struct MaskUniquenessReport {
    std::size_t s = 0, r = 0;
    std::uint64_t full_rank_z = 0;
    std::uint64_t full_rank_u = 0;
    std::uint64_t full_rank_pairs = 0;
    std::uint64_t full_rank_distinct = 0;
    std::uint64_t min_multiplicity = 0;
    std::uint64_t max_multiplicity = 0;
    std::map<std::uint64_t, std::uint64_t> multiplicity_histogram;
    std::uint64_t all_pairs = 0;
    std::uint64_t all_distinct = 0;
    std::uint64_t extra_collisions = 0;
};

// Guard: 2^(2rs) <= 2^24.
MaskUniquenessReport mask_uniqueness_experiment(std::size_t s, std::size_t r);

// Over the distinct full-rank products (one Ground Set), fixes the first r
// rows and first r columns and tallies which invertible r x r matrix appears
// as that intersection. chi_square is the exhaustive Pearson statistic
// against the uniform distribution over GL(r, 2); the census is exact, so
// any nonzero value falsifies the uniformity claim.
struct IntersectionUniformityReport {
    std::size_t s = 0, r = 0;
    std::uint64_t ground_set_size = 0;
    std::uint64_t invertible_intersections = 0;
    std::uint64_t gl_size = 0;  // |GL(r, 2)|
    std::map<std::uint64_t, std::uint64_t> histogram;  // row-major packed bits
    double chi_square = 0.0;
};

// Guard: 2^(2rs) <= 2^24.
IntersectionUniformityReport intersection_uniformity_experiment(std::size_t s,
                                                                std::size_t r);

// Line-oriented key=value renderings (histograms as hist_<key>=<count>).
void write_report(const AttackOutcome& outcome, std::ostream& out);
void write_report(const MaskUniquenessReport& report, std::ostream& out);
void write_report(const IntersectionUniformityReport& report, std::ostream& out);

}  // namespace maskem::attack

#endif
