#ifndef MASKEM_EXCHANGE_HPP
#define MASKEM_EXCHANGE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "maskem/kem.hpp"

namespace maskem::exchange {

// Wire frame: "MKEX" | version u8 = 1 | msg_type u8 | length u32-LE |
// payload. Payloads are the kem serialization formats byte for byte.
enum class MsgType : std::uint8_t {
    PublicKey = 1,
    Ciphertext = 2,
    Fingerprint = 3,
};

struct Frame {
    MsgType msg_type = MsgType::PublicKey;
    std::vector<std::uint8_t> payload;
};

inline constexpr std::size_t kFrameHeaderBytes = 10;
inline constexpr std::uint32_t kMaxPayloadBytes = 1u << 24;

std::vector<std::uint8_t> encode_frame(const Frame& frame);

enum class SessionStatus {
    Ok,
    TransportError,       // socket-level failure or timeout
    MalformedFrame,       // bad magic, bad type, oversize, truncation
    UnsupportedVersion,   // version byte != 1
    ValidationError,      // well-formed payload with inconsistent contents
    FingerprintMismatch,  // both sides completed but the keys differ
};

const char* to_string(SessionStatus status);

struct SessionResult {
    SessionStatus status = SessionStatus::TransportError;
    std::string detail;
    std::vector<std::uint8_t> local_fingerprint;
    std::vector<std::uint8_t> remote_fingerprint;
};

struct ServeOptions {
    kem::Kdf kdf;  // empty = identity
    // Called with the bound port once listening; lets a caller bind port 0
    // and learn the ephemeral port before the accept blocks.
    std::function<void(std::uint16_t)> on_listening;
};

struct ConnectOptions {
    kem::Kdf kdf;
    // Test hook: mutate the serialized ciphertext payload before it is sent.
    std::function<void(std::vector<std::uint8_t>&)> tamper_ciphertext;
};

// One key-encapsulation session over a loopback/tcp byte stream. The server
// generates the key pair, sends the public key, receives a ciphertext,
// decapsulates, and both sides exchange 8-byte fingerprints (the first 8
// bytes of derive_session_key; fewer if the key is shorter) to confirm they
// hold the same key. The discard set and the data word never cross the wire.
// Addresses are "host:port" with IPv4 hosts ("localhost" accepted); the
// server may bind port 0 and report the real port via on_listening.
SessionResult serve(const kem::ParamSet& params, const std::string& bind_address,
                    Rng& rng, const ServeOptions& opts = {});
SessionResult connect(const std::string& address, Rng& rng,
                      const ConnectOptions& opts = {});

}  // namespace maskem::exchange

#endif
