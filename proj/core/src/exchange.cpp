#include "maskem/exchange.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <tuple>
#include <utility>

namespace maskem::exchange {

namespace {

constexpr char kMagic[4] = {'M', 'K', 'E', 'X'};
constexpr std::uint8_t kVersion = 1;

// RAII socket handle.
struct Socket {
    int fd = -1;
    Socket() = default;
    explicit Socket(int fd_) : fd(fd_) {}
    Socket(Socket&& other) noexcept : fd(std::exchange(other.fd, -1)) {}
    Socket& operator=(Socket&& other) noexcept {
        if (this != &other) {
            close_fd();
            fd = std::exchange(other.fd, -1);
        }
        return *this;
    }
    ~Socket() { close_fd(); }
    void close_fd() {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
};

void set_timeouts(int fd) {
    timeval tv{};
    tv.tv_sec = 10;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

// "host:port" with IPv4 dotted host or "localhost"; empty host means
// 127.0.0.1.
bool parse_address(const std::string& address, sockaddr_in& out,
                   std::string& error) {
    const std::size_t colon = address.rfind(':');
    if (colon == std::string::npos) {
        error = "address must be host:port";
        return false;
    }
    std::string host = address.substr(0, colon);
    const std::string port_str = address.substr(colon + 1);
    if (host.empty() || host == "localhost") host = "127.0.0.1";
    char* end = nullptr;
    const long port = std::strtol(port_str.c_str(), &end, 10);
    if (end == port_str.c_str() || *end != '\0' || port < 0 || port > 65535) {
        error = "bad port '" + port_str + "'";
        return false;
    }
    std::memset(&out, 0, sizeof out);
    out.sin_family = AF_INET;
    out.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &out.sin_addr) != 1) {
        error = "bad IPv4 host '" + host + "'";
        return false;
    }
    return true;
}

bool send_all(int fd, const std::uint8_t* data, std::size_t len) {
    std::size_t sent = 0;
    while (sent < len) {
        const ssize_t k = ::send(fd, data + sent, len - sent, MSG_NOSIGNAL);
        if (k <= 0) return false;
        sent += static_cast<std::size_t>(k);
    }
    return true;
}

enum class RecvStatus { Ok, Closed, Error };

RecvStatus recv_all(int fd, std::uint8_t* data, std::size_t len) {
    std::size_t got = 0;
    while (got < len) {
        const ssize_t k = ::recv(fd, data + got, len - got, 0);
        if (k == 0) return RecvStatus::Closed;
        if (k < 0) return RecvStatus::Error;
        got += static_cast<std::size_t>(k);
    }
    return RecvStatus::Ok;
}

bool send_frame(int fd, const Frame& frame) {
    const std::vector<std::uint8_t> bytes = encode_frame(frame);
    return send_all(fd, bytes.data(), bytes.size());
}

// Reads one frame; on failure fills result and returns nothing.
std::optional<Frame> recv_frame(int fd, SessionResult& result) {
    std::uint8_t header[kFrameHeaderBytes];
    switch (recv_all(fd, header, sizeof header)) {
        case RecvStatus::Ok:
            break;
        case RecvStatus::Closed:
            result = {SessionStatus::MalformedFrame, "truncated frame", {}, {}};
            return std::nullopt;
        case RecvStatus::Error:
            result = {SessionStatus::TransportError,
                      std::string("recv: ") + std::strerror(errno),
                      {},
                      {}};
            return std::nullopt;
    }
    if (std::memcmp(header, kMagic, 4) != 0) {
        result = {SessionStatus::MalformedFrame, "bad frame magic", {}, {}};
        return std::nullopt;
    }
    if (header[4] != kVersion) {
        result = {SessionStatus::UnsupportedVersion,
                  "unsupported frame version " + std::to_string(header[4]),
                  {},
                  {}};
        return std::nullopt;
    }
    const std::uint8_t type = header[5];
    if (type < 1 || type > 3) {
        result = {SessionStatus::MalformedFrame,
                  "unknown message type " + std::to_string(type),
                  {},
                  {}};
        return std::nullopt;
    }
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i)
        len |= static_cast<std::uint32_t>(header[6 + i]) << (8 * i);
    if (len > kMaxPayloadBytes) {
        result = {SessionStatus::MalformedFrame, "oversize frame", {}, {}};
        return std::nullopt;
    }
    Frame frame;
    frame.msg_type = static_cast<MsgType>(type);
    frame.payload.resize(len);
    if (len > 0) switch (recv_all(fd, frame.payload.data(), len)) {
            case RecvStatus::Ok:
                break;
            case RecvStatus::Closed:
                result = {SessionStatus::MalformedFrame, "truncated frame", {}, {}};
                return std::nullopt;
            case RecvStatus::Error:
                result = {SessionStatus::TransportError,
                          std::string("recv: ") + std::strerror(errno),
                          {},
                          {}};
                return std::nullopt;
        }
    return frame;
}

std::vector<std::uint8_t> fingerprint_of(const kem::SharedKey& key,
                                         const kem::Kdf& kdf) {
    std::vector<std::uint8_t> session = kem::derive_session_key(key, kdf);
    if (session.size() > 8) session.resize(8);
    return session;
}

SessionResult transport_fail(const char* op) {
    return {SessionStatus::TransportError,
            std::string(op) + ": " + std::strerror(errno),
            {},
            {}};
}

// Fingerprint exchange tail shared by both roles. The server sends first.
SessionResult finish_with_fingerprints(int fd, bool send_first,
                                       std::vector<std::uint8_t> local) {
    SessionResult result;
    Frame fp_frame{MsgType::Fingerprint, local};
    if (send_first && !send_frame(fd, fp_frame)) return transport_fail("send");
    std::optional<Frame> remote = recv_frame(fd, result);
    if (!remote) return result;
    if (remote->msg_type != MsgType::Fingerprint)
        return {SessionStatus::MalformedFrame, "expected fingerprint frame", {}, {}};
    if (!send_first && !send_frame(fd, fp_frame)) return transport_fail("send");

    result.local_fingerprint = std::move(local);
    result.remote_fingerprint = std::move(remote->payload);
    if (result.local_fingerprint == result.remote_fingerprint) {
        result.status = SessionStatus::Ok;
        result.detail = "fingerprints match";
    } else {
        result.status = SessionStatus::FingerprintMismatch;
        result.detail = "fingerprints differ";
    }
    return result;
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
    if (frame.payload.size() > kMaxPayloadBytes)
        throw InvariantError("encode_frame: payload exceeds frame limit");
    std::vector<std::uint8_t> out;
    out.reserve(kFrameHeaderBytes + frame.payload.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    out.push_back(static_cast<std::uint8_t>(frame.msg_type));
    const std::uint32_t len = static_cast<std::uint32_t>(frame.payload.size());
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
    out.insert(out.end(), frame.payload.begin(), frame.payload.end());
    return out;
}

const char* to_string(SessionStatus status) {
    switch (status) {
        case SessionStatus::Ok:
            return "ok";
        case SessionStatus::TransportError:
            return "transport_error";
        case SessionStatus::MalformedFrame:
            return "malformed_frame";
        case SessionStatus::UnsupportedVersion:
            return "unsupported_version";
        case SessionStatus::ValidationError:
            return "validation_error";
        case SessionStatus::FingerprintMismatch:
            return "fingerprint_mismatch";
    }
    return "unknown";
}

SessionResult serve(const kem::ParamSet& params, const std::string& bind_address,
                    Rng& rng, const ServeOptions& opts) {
    params.validate();
    sockaddr_in addr{};
    std::string addr_error;
    if (!parse_address(bind_address, addr, addr_error))
        return {SessionStatus::TransportError, addr_error, {}, {}};

    Socket listener(::socket(AF_INET, SOCK_STREAM, 0));
    if (listener.fd < 0) return transport_fail("socket");
    const int on = 1;
    ::setsockopt(listener.fd, SOL_SOCKET, SO_REUSEADDR, &on, sizeof on);
    if (::bind(listener.fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        return transport_fail("bind");
    if (::listen(listener.fd, 1) != 0) return transport_fail("listen");

    sockaddr_in bound{};
    socklen_t bound_len = sizeof bound;
    if (::getsockname(listener.fd, reinterpret_cast<sockaddr*>(&bound),
                      &bound_len) != 0)
        return transport_fail("getsockname");
    if (opts.on_listening) opts.on_listening(ntohs(bound.sin_port));

    Socket conn(::accept(listener.fd, nullptr, nullptr));
    if (conn.fd < 0) return transport_fail("accept");
    set_timeouts(conn.fd);

    const kem::KeyPair keys = kem::keygen(params, rng);
    if (!send_frame(conn.fd, {MsgType::PublicKey, kem::serialize_public(keys.pk)}))
        return transport_fail("send");

    SessionResult result;
    std::optional<Frame> ct_frame = recv_frame(conn.fd, result);
    if (!ct_frame) return result;
    if (ct_frame->msg_type != MsgType::Ciphertext)
        return {SessionStatus::MalformedFrame, "expected ciphertext frame", {}, {}};

    // Frame-level damage (magic, version, truncation) is MalformedFrame; a
    // well-framed payload the kem layer rejects is a validation failure.
    kem::ParamSet ct_params;
    kem::Ciphertext ct;
    try {
        std::tie(ct_params, ct) = kem::deserialize_ciphertext(ct_frame->payload);
    } catch (const ParseError& e) {
        return {SessionStatus::ValidationError, e.what(), {}, {}};
    }
    if (!(ct_params == params))
        return {SessionStatus::ValidationError,
                "ciphertext parameters do not match the session",
                {},
                {}};

    const kem::SharedKey key = kem::decapsulate(keys.sk, ct);
    return finish_with_fingerprints(conn.fd, true, fingerprint_of(key, opts.kdf));
}

SessionResult connect(const std::string& address, Rng& rng,
                      const ConnectOptions& opts) {
    sockaddr_in addr{};
    std::string addr_error;
    if (!parse_address(address, addr, addr_error))
        return {SessionStatus::TransportError, addr_error, {}, {}};

    Socket conn(::socket(AF_INET, SOCK_STREAM, 0));
    if (conn.fd < 0) return transport_fail("socket");
    set_timeouts(conn.fd);
    if (::connect(conn.fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        return transport_fail("connect");

    SessionResult result;
    std::optional<Frame> pk_frame = recv_frame(conn.fd, result);
    if (!pk_frame) return result;
    if (pk_frame->msg_type != MsgType::PublicKey)
        return {SessionStatus::MalformedFrame, "expected public-key frame", {}, {}};

    // As on the serve side: bad payloads (dimension or parameter mismatches
    // included) are validation failures, not framing errors.
    kem::PublicKey pk{kem::ParamSet{}, gf2::BitMatrix(1, 1)};
    try {
        pk = kem::deserialize_public(pk_frame->payload);
    } catch (const ParseError& e) {
        return {SessionStatus::ValidationError, e.what(), {}, {}};
    }

    const kem::EncapsResult enc = kem::encapsulate(pk, rng);
    std::vector<std::uint8_t> ct_bytes =
        kem::serialize_ciphertext(pk.params, enc.ct);
    if (opts.tamper_ciphertext) opts.tamper_ciphertext(ct_bytes);
    if (!send_frame(conn.fd, {MsgType::Ciphertext, std::move(ct_bytes)}))
        return transport_fail("send");

    return finish_with_fingerprints(conn.fd, false,
                                    fingerprint_of(enc.key, opts.kdf));
}

}  // namespace maskem::exchange
