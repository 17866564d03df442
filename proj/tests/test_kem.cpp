#include <doctest.h>

#include <maskem/errors.hpp>
#include <maskem/gf2.hpp>
#include <maskem/kem.hpp>
#include <maskem/markov_error.hpp>
#include <maskem/rng.hpp>

#include <algorithm>
#include <cstdint>
#include <vector>

using maskem::DimensionError;
using maskem::InvariantError;
using maskem::ParseError;
using maskem::Rng;
using maskem::gf2::BitMatrix;
using maskem::gf2::BitVector;
namespace kem = maskem::kem;

namespace {

const kem::ParamSet kToy{4, 1, 2, 0.1};
const kem::ParamSet kMid{12, 3, 3, 0.1};

}  // namespace

TEST_CASE("ParamSet validation") {
    CHECK_NOTHROW(kToy.validate());
    CHECK(kToy.n() == 12);
    CHECK_THROWS_AS((kem::ParamSet{4, 4, 1, 0.1}.validate()), InvariantError);
    CHECK_THROWS_AS((kem::ParamSet{4, 1, 0, 0.1}.validate()), InvariantError);
    CHECK_THROWS_AS((kem::ParamSet{4, 2, 2, 0.1}.validate()), InvariantError);
    CHECK_THROWS_AS((kem::ParamSet{4, 1, 2, 0.0}.validate()), InvariantError);
    CHECK_THROWS_AS((kem::ParamSet{4, 1, 2, 1.0}.validate()), InvariantError);
    CHECK_THROWS_AS((kem::ParamSet{0, 0, 1, 0.1}.validate()), InvariantError);
}

TEST_CASE("keygen: dimensions and recovery structure") {
    Rng rng(301);
    const kem::KeyPair keys = kem::keygen(kToy, rng);
    CHECK(keys.pk.P.rows() == 14);
    CHECK(keys.pk.P.cols() == 4);
    CHECK(keys.sk.S.rows() == 12);
    CHECK(keys.sk.S.cols() == 2);
    CHECK(keys.sk.R.rows() == 2);
    CHECK(keys.sk.R.cols() == 12);
    CHECK(keys.sk.Q.rows() == 2);
    CHECK(keys.sk.Q.cols() == 2);

    // A*P = A*B*G = [G1; E*G2]: the first n rows must reproduce G1 exactly,
    // which pins the whole diag(I, E) structure from outside keygen.
    const BitMatrix a = kem::detail::assemble_a(keys.sk);
    const BitMatrix ap = maskem::gf2::mul(a, keys.pk.P);
    const BitMatrix g1 = kem::detail::make_g1(kToy.d, keys.sk.sigma);
    for (std::size_t r = 0; r < kToy.n(); ++r)
        for (std::size_t c = 0; c < kToy.d; ++c)
            CHECK(ap.get(r, c) == g1.get(r, c));
}

TEST_CASE("make_g1: one 1 per row, three aligned 1s per column") {
    Rng rng(302);
    std::vector<std::uint32_t> sigma(9);
    for (std::size_t i = 0; i < sigma.size(); ++i)
        sigma[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = sigma.size(); i > 1; --i)
        std::swap(sigma[i - 1], sigma[rng.below(i)]);

    const BitMatrix g1 = kem::detail::make_g1(9, sigma);
    CHECK(g1.rows() == 27);
    CHECK(g1.cols() == 9);
    for (std::size_t r = 0; r < g1.rows(); ++r) {
        int ones = 0;
        for (std::size_t c = 0; c < g1.cols(); ++c) ones += g1.get(r, c);
        CHECK(ones == 1);
    }
    for (std::size_t c = 0; c < g1.cols(); ++c) {
        for (std::size_t r = 0; r < g1.rows(); ++r) {
            const bool in_block = r / 3 == sigma[c];
            CHECK(g1.get(r, c) == in_block);
        }
    }
}

TEST_CASE("keygen at sec258 parameters: public key payload size") {
    Rng rng(303);
    const kem::ParamSet pr{205, 80, 10, 0.055};
    const kem::KeyPair keys = kem::keygen(pr, rng);
    CHECK(keys.pk.P.rows() == 625);
    CHECK(keys.pk.P.cols() == 205);
    CHECK(keys.pk.P.rows() * keys.pk.P.cols() == 128125);

    const auto bytes = kem::serialize_public(keys.pk);
    CHECK(bytes.size() == 26 + 13 + 625 * 26);

    const kem::EncapsResult enc = kem::encapsulate(keys.pk, rng);
    CHECK(enc.mac_count == 78125);
    const kem::SharedKey key = kem::decapsulate(keys.sk, enc.ct);
    CHECK(key.bits == enc.key.bits);
}

TEST_CASE("seeded determinism: keygen and roundtrip reproduce exactly") {
    Rng rng_a(42);
    Rng rng_b(42);
    const kem::KeyPair ka = kem::keygen(kToy, rng_a);
    const kem::KeyPair kb = kem::keygen(kToy, rng_b);
    CHECK(ka.pk.P == kb.pk.P);
    CHECK(ka.sk.S == kb.sk.S);
    CHECK(ka.sk.R == kb.sk.R);
    CHECK(ka.sk.Q == kb.sk.Q);
    CHECK(ka.sk.sigma == kb.sk.sigma);

    const kem::EncapsResult ea = kem::encapsulate(ka.pk, rng_a);
    const kem::EncapsResult eb = kem::encapsulate(kb.pk, rng_b);
    CHECK(ea.ct.c == eb.ct.c);
    CHECK(ea.key.bits == eb.key.bits);
    CHECK(ea.discard == eb.discard);
    CHECK(kem::decapsulate(ka.sk, ea.ct).bits == ea.key.bits);
}

TEST_CASE("encapsulate: zero data word and zero error give zero ciphertext") {
    Rng rng(304);
    const kem::KeyPair keys = kem::keygen(kToy, rng);
    const BitVector dhat(kToy.d - kToy.p);
    const BitVector f(kToy.n());
    const kem::EncapsResult enc =
        kem::detail::encapsulate_with(keys.pk, dhat, f, {2});
    CHECK(enc.ct.c.weight() == 0);
    CHECK(enc.key.bits.weight() == 0);
}

TEST_CASE("encapsulate: error never touches the last m bits") {
    Rng rng(305);
    const kem::KeyPair keys = kem::keygen(kMid, rng);
    for (int i = 0; i < 20; ++i) {
        const kem::EncapsResult enc = kem::encapsulate(keys.pk, rng);
        const BitMatrix phat =
            maskem::gf2::remove_columns(keys.pk.P, enc.discard);
        BitVector dhat(kMid.d - kMid.p);
        std::size_t k = 0;
        for (std::size_t j = 0; j < kMid.d; ++j) {
            const bool discarded =
                std::find(enc.discard.begin(), enc.discard.end(), j) !=
                enc.discard.end();
            if (!discarded) dhat.set(k++, enc.key.bits.get(j));
        }
        const BitVector clean = maskem::gf2::mul_vec(phat, dhat);
        for (std::size_t b = kMid.n(); b < kMid.n() + kMid.m; ++b)
            CHECK(enc.ct.c.get(b) == clean.get(b));
    }
}

TEST_CASE("encapsulate: p = 0 returns the data word verbatim") {
    Rng rng(306);
    const kem::ParamSet pr{5, 0, 2, 0.2};
    const kem::KeyPair keys = kem::keygen(pr, rng);
    const kem::EncapsResult enc = kem::encapsulate(keys.pk, rng);
    CHECK(enc.discard.empty());
    CHECK(enc.key.bits.size() == pr.d);
    CHECK(kem::decapsulate(keys.sk, enc.ct).bits == enc.key.bits);
}

TEST_CASE("shared key is zero at every discarded position") {
    Rng rng(307);
    const kem::KeyPair keys = kem::keygen(kMid, rng);
    for (int i = 0; i < 30; ++i) {
        const kem::EncapsResult enc = kem::encapsulate(keys.pk, rng);
        CHECK(enc.discard.size() == kMid.p);
        for (const std::size_t idx : enc.discard)
            CHECK_FALSE(enc.key.bits.get(idx));
    }
}

TEST_CASE("decapsulate: zero ciphertext, roundtrips, length check") {
    Rng rng(308);
    const kem::KeyPair keys = kem::keygen(kMid, rng);
    const kem::Ciphertext zero{BitVector(kMid.n() + kMid.m)};
    CHECK(kem::decapsulate(keys.sk, zero).bits.weight() == 0);

    for (int i = 0; i < 50; ++i) {
        const kem::EncapsResult enc = kem::encapsulate(keys.pk, rng);
        CHECK(kem::decapsulate(keys.sk, enc.ct).bits == enc.key.bits);
    }

    CHECK_THROWS_AS(kem::decapsulate(keys.sk, kem::Ciphertext{BitVector(7)}),
                    DimensionError);
}

TEST_CASE("decode_blocks: repetition-3 majority corrects one flip") {
    const std::vector<std::uint32_t> sigma = {1, 0, 2};
    for (std::size_t data_idx = 0; data_idx < 3; ++data_idx) {
        for (std::size_t flip = 0; flip < 3; ++flip) {
            BitVector y(9);
            const std::size_t block = sigma[data_idx];
            for (std::size_t k = 0; k < 3; ++k) y.set(3 * block + k, true);
            y.flip(3 * block + flip);
            const BitVector decoded = kem::detail::decode_blocks(y, sigma);
            CHECK(decoded.get(data_idx));
            for (std::size_t other = 0; other < 3; ++other)
                if (other != data_idx) CHECK_FALSE(decoded.get(other));
        }
    }
}

TEST_CASE("punctured product equals full product on the extended word") {
    Rng rng(309);
    const kem::KeyPair keys = kem::keygen(kMid, rng);
    for (int i = 0; i < 25; ++i) {
        const kem::EncapsResult enc = kem::encapsulate(keys.pk, rng);
        const BitMatrix phat =
            maskem::gf2::remove_columns(keys.pk.P, enc.discard);
        BitVector dhat(kMid.d - kMid.p);
        std::size_t k = 0;
        for (std::size_t j = 0; j < kMid.d; ++j)
            if (std::find(enc.discard.begin(), enc.discard.end(), j) ==
                enc.discard.end())
                dhat.set(k++, enc.key.bits.get(j));
        CHECK(maskem::gf2::mul_vec(phat, dhat) ==
              maskem::gf2::mul_vec(keys.pk.P, enc.key.bits));
    }
}

TEST_CASE("derive_session_key: MSB-first packing and pluggable kdf") {
    kem::SharedKey key{BitVector(10)};
    key.bits.set(0, true);
    key.bits.set(7, true);
    key.bits.set(9, true);
    const auto bytes = kem::derive_session_key(key);
    CHECK(bytes.size() == 2);
    CHECK(bytes[0] == 0x81);  // bits 0 and 7, MSB-first
    CHECK(bytes[1] == 0x40);  // bit 9 -> second bit of byte 1

    CHECK(kem::derive_session_key(key) == bytes);

    const kem::Kdf count_ones = [](const BitVector& bits) {
        return std::vector<std::uint8_t>{
            static_cast<std::uint8_t>(bits.weight())};
    };
    const auto reduced = kem::derive_session_key(key, count_ones);
    CHECK(reduced == std::vector<std::uint8_t>{3});
}

TEST_CASE("serialization: roundtrips for pk, sk, ct") {
    Rng rng(310);
    const kem::KeyPair keys = kem::keygen(kMid, rng);
    const kem::EncapsResult enc = kem::encapsulate(keys.pk, rng);

    const kem::PublicKey pk2 =
        kem::deserialize_public(kem::serialize_public(keys.pk));
    CHECK(pk2.params == keys.pk.params);
    CHECK(pk2.P == keys.pk.P);

    const kem::PrivateKey sk2 =
        kem::deserialize_private(kem::serialize_private(keys.sk));
    CHECK(sk2.params == keys.sk.params);
    CHECK(sk2.S == keys.sk.S);
    CHECK(sk2.R == keys.sk.R);
    CHECK(sk2.Q == keys.sk.Q);
    CHECK(sk2.sigma == keys.sk.sigma);

    const auto ct_bytes = kem::serialize_ciphertext(kMid, enc.ct);
    const auto [pr2, ct2] = kem::deserialize_ciphertext(ct_bytes);
    CHECK(pr2 == kMid);
    CHECK(ct2.c == enc.ct.c);
}

TEST_CASE("serialization: corruption detected") {
    Rng rng(311);
    const kem::KeyPair keys = kem::keygen(kToy, rng);
    const auto good = kem::serialize_public(keys.pk);

    auto bad = good;
    bad[0] = 'X';
    CHECK_THROWS_AS(kem::deserialize_public(bad), ParseError);

    bad = good;
    bad[4] = 9;  // version
    CHECK_THROWS_AS(kem::deserialize_public(bad), ParseError);

    bad = good;
    bad.push_back(0);  // trailing garbage
    CHECK_THROWS_AS(kem::deserialize_public(bad), ParseError);

    bad = good;
    bad.resize(bad.size() - 1);
    CHECK_THROWS_AS(kem::deserialize_public(bad), ParseError);

    // kind byte mismatch: a pk is not an sk.
    CHECK_THROWS_AS(kem::deserialize_private(good), ParseError);

    // Corrupt sigma into a non-permutation: for kToy the trailer holds d=4
    // u32 entries; forcing the last two to the same value must be rejected.
    auto sk_bytes = kem::serialize_private(keys.sk);
    const std::size_t sigma_off = sk_bytes.size() - 4 * 4;
    for (std::size_t b = 0; b < 8; ++b) sk_bytes[sigma_off + b] = 0;
    CHECK_THROWS_AS(kem::deserialize_private(sk_bytes), ParseError);

    try {
        bad = good;
        bad[1] = 'Q';
        kem::deserialize_public(bad);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.offset() == 0);
    }
}
