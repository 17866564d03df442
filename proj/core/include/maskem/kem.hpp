#ifndef MASKEM_KEM_HPP
#define MASKEM_KEM_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "maskem/gf2.hpp"
#include "maskem/markov_error.hpp"
#include "maskem/rng.hpp"

namespace maskem::kem {

// d data bits, p columns discarded per encapsulation, m random rows appended
// to the code, mu the error-model parameter. The codeword part has n = 3d bits
// (one length-3 repetition block per data bit).
struct ParamSet {
    std::size_t d = 0;
    std::size_t p = 0;
    std::size_t m = 0;
    double mu = 0.0;

    std::size_t n() const { return 3 * d; }

    // d > p >= 0, m >= 1, d - p - m > 0, 0 < mu < 1.
    void validate() const;

    bool operator==(const ParamSet& o) const {
        return d == o.d && p == o.p && m == o.m && mu == o.mu;
    }
};

struct PrivateKey {
    ParamSet params;
    gf2::BitMatrix S;  // n x m
    gf2::BitMatrix R;  // m x n
    gf2::BitMatrix Q;  // m x m, invertible
    std::vector<std::uint32_t> sigma;  // data index -> repetition-block index
};

struct PublicKey {
    ParamSet params;
    gf2::BitMatrix P;  // (n+m) x d
};

struct Ciphertext {
    gf2::BitVector c;  // length n+m
};

// Extended key: the d - p encapsulated bits with zeros at the discarded
// positions, so both sides hold the same length-d stream.
struct SharedKey {
    gf2::BitVector bits;  // length d
};

struct KeyPair {
    PublicKey pk;
    PrivateKey sk;
};

// Builds the structured generator, samples the masking matrices, and verifies
// the block identity A*B == diag(I_n, E) before emitting P = B*G. Resamples
// R, Q, D1, D2 when the masked inverse does not exist; throws KeygenError
// after 64 attempts.
KeyPair keygen(const ParamSet& params, Rng& rng);

struct EncapsResult {
    Ciphertext ct;
    SharedKey key;
    std::vector<std::size_t> discard;  // sorted; stays on the encapsulating side
    std::uint64_t mac_count = 0;       // MACs of the punctured-matrix product
};

// Samples the discard set, the data word and the error vector, and forms
// c = P_hat * d_hat + e with e = [f; 0_m].
EncapsResult encapsulate(const PublicKey& pk, Rng& rng);

// y = A*c with A = [I_n S; R Q]; the first n bits decode the data word by
// per-block majority vote. Equals the encapsulated SharedKey with certainty:
// the error never flips two bits of one block, and discarded positions decode
// as all-zero blocks.
SharedKey decapsulate(const PrivateKey& sk, const Ciphertext& ct);

// Caller-supplied deterministic reducer; empty means identity (the shared
// key's packed bytes, MSB-first within each byte, the same rendering the CLI
// prints as hex).
using Kdf = std::function<std::vector<std::uint8_t>(const gf2::BitVector&)>;

std::vector<std::uint8_t> derive_session_key(const SharedKey& key,
                                             const Kdf& kdf = {});

// File format: "MKEM" | version u8=1 | kind u8 (1=pk, 2=sk, 3=ct) |
// d u32-LE | p u32-LE | m u32-LE | mu f64-LE, then the payload in matrix
// serialization order: pk = P; sk = S, R, Q, sigma (d u32-LE entries);
// ct = c. Malformed input throws ParseError with the byte offset.
std::vector<std::uint8_t> serialize_public(const PublicKey& pk);
std::vector<std::uint8_t> serialize_private(const PrivateKey& sk);
std::vector<std::uint8_t> serialize_ciphertext(const ParamSet& params,
                                               const Ciphertext& ct);
PublicKey deserialize_public(const std::vector<std::uint8_t>& in);
PrivateKey deserialize_private(const std::vector<std::uint8_t>& in);
std::pair<ParamSet, Ciphertext> deserialize_ciphertext(
    const std::vector<std::uint8_t>& in);

namespace detail {

// n x d generator of d disjoint repetition blocks: column j has ones exactly
// at rows 3*sigma[j], 3*sigma[j]+1, 3*sigma[j]+2.
gf2::BitMatrix make_g1(std::size_t d, const std::vector<std::uint32_t>& sigma);

// Majority vote of each sigma-aligned 3-block of the first n decoded bits.
gf2::BitVector decode_blocks(const gf2::BitVector& y_first_n,
                             const std::vector<std::uint32_t>& sigma);

// Deterministic encapsulation core used by encapsulate and by tests that pin
// the data word, error vector and discard set.
EncapsResult encapsulate_with(const PublicKey& pk, const gf2::BitVector& dhat,
                              const gf2::BitVector& f,
                              const std::vector<std::size_t>& discard);

// A = [I_n S; R Q].
gf2::BitMatrix assemble_a(const PrivateKey& sk);

// Copies src into dst with its top-left corner at (row_off, col_off).
// The target region must be zero beforehand.
void paste(gf2::BitMatrix& dst, const gf2::BitMatrix& src, std::size_t row_off,
           std::size_t col_off);

// Inserts zeros into v at the listed positions (sorted, distinct), producing
// a vector of size v.size() + positions.size().
gf2::BitVector extend_with_zeros(const gf2::BitVector& v,
                                 const std::vector<std::size_t>& positions);

}  // namespace detail

}  // namespace maskem::kem

#endif
