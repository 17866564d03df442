#include <doctest.h>

#include <maskem/errors.hpp>
#include <maskem/exchange.hpp>
#include <maskem/kem.hpp>
#include <maskem/rng.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <future>
#include <string>
#include <thread>
#include <vector>

using maskem::Rng;
namespace exchange = maskem::exchange;
namespace kem = maskem::kem;

namespace {

const kem::ParamSet kToy{6, 1, 2, 0.2};

// Raw one-shot TCP server: accepts one connection, sends the given bytes,
// then closes. Used to feed the client hand-crafted broken frames.
std::uint16_t raw_server(const std::vector<std::uint8_t>& bytes,
                         std::thread& out_thread) {
    const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(listener >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    REQUIRE(::bind(listener, reinterpret_cast<sockaddr*>(&addr),
                   sizeof addr) == 0);
    REQUIRE(::listen(listener, 1) == 0);
    socklen_t len = sizeof addr;
    REQUIRE(::getsockname(listener, reinterpret_cast<sockaddr*>(&addr),
                          &len) == 0);
    const std::uint16_t port = ntohs(addr.sin_port);
    out_thread = std::thread([listener, bytes] {
        const int conn = ::accept(listener, nullptr, nullptr);
        if (conn >= 0) {
            ::send(conn, bytes.data(), bytes.size(), MSG_NOSIGNAL);
            ::close(conn);
        }
        ::close(listener);
    });
    return port;
}

std::string addr_of(std::uint16_t port) {
    return "127.0.0.1:" + std::to_string(port);
}

}  // namespace

TEST_CASE("honest loopback session ends in matching fingerprints") {
    auto promise = std::promise<std::uint16_t>();
    auto future = promise.get_future();
    exchange::ServeOptions opts;
    opts.on_listening = [&promise](std::uint16_t port) {
        promise.set_value(port);
    };
    exchange::SessionResult server_result;
    std::thread server([&] {
        Rng rng(501);
        server_result = exchange::serve(kToy, "127.0.0.1:0", rng, opts);
    });
    const std::uint16_t port = future.get();

    Rng client_rng(502);
    const exchange::SessionResult client =
        exchange::connect(addr_of(port), client_rng, {});
    server.join();

    CHECK(server_result.status == exchange::SessionStatus::Ok);
    CHECK(client.status == exchange::SessionStatus::Ok);
    CHECK(server_result.local_fingerprint == server_result.remote_fingerprint);
    CHECK(client.local_fingerprint == client.remote_fingerprint);
    CHECK(server_result.local_fingerprint == client.local_fingerprint);
    CHECK(server_result.local_fingerprint.size() == 1);  // d=6 bits -> 1 byte
}

TEST_CASE("tampered ciphertext bit is detected as fingerprint mismatch") {
    auto promise = std::promise<std::uint16_t>();
    auto future = promise.get_future();
    exchange::ServeOptions sopts;
    sopts.on_listening = [&promise](std::uint16_t port) {
        promise.set_value(port);
    };
    exchange::SessionResult server_result;
    std::thread server([&] {
        Rng rng(503);
        server_result = exchange::serve(kToy, "127.0.0.1:0", rng, sopts);
    });
    const std::uint16_t port = future.get();

    exchange::ConnectOptions copts;
    copts.tamper_ciphertext = [](std::vector<std::uint8_t>& bytes) {
        bytes.back() ^= 0x01;  // flip one ciphertext bit
    };
    Rng client_rng(504);
    const exchange::SessionResult client =
        exchange::connect(addr_of(port), client_rng, copts);
    server.join();

    CHECK(server_result.status ==
          exchange::SessionStatus::FingerprintMismatch);
    CHECK(client.status == exchange::SessionStatus::FingerprintMismatch);
    CHECK(server_result.local_fingerprint != server_result.remote_fingerprint);
}

TEST_CASE("tampered ciphertext parameters are a validation failure") {
    auto promise = std::promise<std::uint16_t>();
    auto future = promise.get_future();
    exchange::ServeOptions sopts;
    sopts.on_listening = [&promise](std::uint16_t port) {
        promise.set_value(port);
    };
    exchange::SessionResult server_result;
    std::thread server([&] {
        Rng rng(505);
        server_result = exchange::serve(kToy, "127.0.0.1:0", rng, sopts);
    });
    const std::uint16_t port = future.get();

    exchange::ConnectOptions copts;
    copts.tamper_ciphertext = [](std::vector<std::uint8_t>& bytes) {
        bytes[18] ^= 0x01;  // low byte of the mu field in the kem header
    };
    Rng client_rng(506);
    exchange::connect(addr_of(port), client_rng, copts);
    server.join();

    CHECK(server_result.status == exchange::SessionStatus::ValidationError);
}

TEST_CASE("client rejects broken frames from a raw server") {
    SUBCASE("garbage magic") {
        std::thread t;
        const std::uint16_t port = raw_server(
            {'X', 'X', 'X', 'X', 1, 1, 0, 0, 0, 0}, t);
        Rng rng(507);
        const auto res = exchange::connect(addr_of(port), rng, {});
        t.join();
        CHECK(res.status == exchange::SessionStatus::MalformedFrame);
    }
    SUBCASE("version byte 2") {
        std::thread t;
        const std::uint16_t port = raw_server(
            {'M', 'K', 'E', 'X', 2, 1, 0, 0, 0, 0}, t);
        Rng rng(508);
        const auto res = exchange::connect(addr_of(port), rng, {});
        t.join();
        CHECK(res.status == exchange::SessionStatus::UnsupportedVersion);
    }
    SUBCASE("unknown message type") {
        std::thread t;
        const std::uint16_t port = raw_server(
            {'M', 'K', 'E', 'X', 1, 9, 0, 0, 0, 0}, t);
        Rng rng(509);
        const auto res = exchange::connect(addr_of(port), rng, {});
        t.join();
        CHECK(res.status == exchange::SessionStatus::MalformedFrame);
    }
    SUBCASE("truncated frame") {
        std::thread t;
        const std::uint16_t port = raw_server({'M', 'K', 'E'}, t);
        Rng rng(510);
        const auto res = exchange::connect(addr_of(port), rng, {});
        t.join();
        CHECK(res.status == exchange::SessionStatus::MalformedFrame);
        CHECK(res.detail == "truncated frame");
    }
    SUBCASE("oversize declared length") {
        std::thread t;
        const std::uint16_t port = raw_server(
            {'M', 'K', 'E', 'X', 1, 1, 0xFF, 0xFF, 0xFF, 0xFF}, t);
        Rng rng(511);
        const auto res = exchange::connect(addr_of(port), rng, {});
        t.join();
        CHECK(res.status == exchange::SessionStatus::MalformedFrame);
    }
    SUBCASE("well-framed garbage public key payload") {
        std::vector<std::uint8_t> payload = {'J', 'U', 'N', 'K', 0, 0, 0, 0};
        std::vector<std::uint8_t> frame = {'M', 'K', 'E', 'X', 1, 1};
        const std::uint32_t len = static_cast<std::uint32_t>(payload.size());
        for (int i = 0; i < 4; ++i)
            frame.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
        frame.insert(frame.end(), payload.begin(), payload.end());
        std::thread t;
        const std::uint16_t port = raw_server(frame, t);
        Rng rng(512);
        const auto res = exchange::connect(addr_of(port), rng, {});
        t.join();
        CHECK(res.status == exchange::SessionStatus::ValidationError);
    }
}

TEST_CASE("transport errors: unreachable peer and bad addresses") {
    Rng rng(513);
    const auto refused = exchange::connect("127.0.0.1:1", rng, {});
    CHECK(refused.status == exchange::SessionStatus::TransportError);

    const auto no_port = exchange::connect("127.0.0.1", rng, {});
    CHECK(no_port.status == exchange::SessionStatus::TransportError);

    const auto bad_host = exchange::connect("999.0.0.1:2000", rng, {});
    CHECK(bad_host.status == exchange::SessionStatus::TransportError);

    const auto serve_bad = exchange::serve(kToy, "nonsense", rng, {});
    CHECK(serve_bad.status == exchange::SessionStatus::TransportError);
}

TEST_CASE("encode_frame: layout and oversize guard") {
    const exchange::Frame frame{exchange::MsgType::Fingerprint, {1, 2, 3}};
    const auto bytes = exchange::encode_frame(frame);
    REQUIRE(bytes.size() == exchange::kFrameHeaderBytes + 3);
    CHECK(bytes[0] == 'M');
    CHECK(bytes[1] == 'K');
    CHECK(bytes[2] == 'E');
    CHECK(bytes[3] == 'X');
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 3);
    CHECK(bytes[6] == 3);  // length LE
    CHECK(bytes[7] == 0);
    CHECK(bytes[8] == 0);
    CHECK(bytes[9] == 0);

    exchange::Frame huge{exchange::MsgType::Ciphertext, {}};
    huge.payload.resize(exchange::kMaxPayloadBytes + 1);
    CHECK_THROWS_AS(exchange::encode_frame(huge), maskem::InvariantError);
}
