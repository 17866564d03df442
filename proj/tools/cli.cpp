#include "cli.hpp"

#include <maskem/analysis.hpp>
#include <maskem/attack.hpp>
#include <maskem/errors.hpp>
#include <maskem/exchange.hpp>
#include <maskem/gf2.hpp>
#include <maskem/kem.hpp>
#include <maskem/markov_error.hpp>
#include <maskem/rng.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace maskem::cli {
namespace {

struct Preset {
    std::size_t d;
    std::size_t p;
    std::size_t m;
};

const std::map<std::string, Preset>& presets() {
    static const std::map<std::string, Preset> table = {
        {"sec258", {205, 80, 10}},
        {"sec388", {300, 118, 10}},
        {"sec524", {400, 155, 10}},
        {"sec1000", {750, 302, 10}},
    };
    return table;
}

// Parameter flags shared by every subcommand that needs a ParamSet. Explicit
// --d/--p/--m win over --preset; the preset default (if any) applies last.
struct ParamFlags {
    std::string preset;
    std::uint64_t d = 0;
    std::uint64_t p = 0;
    std::uint64_t m = 0;
    double mu = 0.055;
    CLI::Option* d_opt = nullptr;
    CLI::Option* p_opt = nullptr;
    CLI::Option* m_opt = nullptr;
};

void add_param_flags(CLI::App* sub, ParamFlags& f) {
    std::vector<std::string> names;
    names.reserve(presets().size());
    for (const auto& [name, ps] : presets()) names.push_back(name);
    auto* preset_opt =
        sub->add_option("--preset", f.preset, "named parameter set")
            ->check(CLI::IsMember(names));
    f.d_opt = sub->add_option("--d", f.d, "data word length d (n = 3d)");
    f.p_opt = sub->add_option("--p", f.p, "number of discarded columns");
    f.m_opt = sub->add_option("--m", f.m, "masking rows m");
    sub->add_option("--mu", f.mu, "error model parameter mu")
        ->capture_default_str();
    preset_opt->excludes(f.d_opt);
    preset_opt->excludes(f.p_opt);
    preset_opt->excludes(f.m_opt);
}

kem::ParamSet resolve_params(const ParamFlags& f) {
    kem::ParamSet pr{};
    if (f.d_opt->count() != 0 || f.p_opt->count() != 0 ||
        f.m_opt->count() != 0) {
        if (f.d_opt->count() == 0 || f.p_opt->count() == 0 ||
            f.m_opt->count() == 0) {
            throw CLI::ValidationError(
                "--d, --p and --m must be given together");
        }
        pr.d = static_cast<std::size_t>(f.d);
        pr.p = static_cast<std::size_t>(f.p);
        pr.m = static_cast<std::size_t>(f.m);
    } else if (!f.preset.empty()) {
        const Preset& ps = presets().at(f.preset);
        pr.d = ps.d;
        pr.p = ps.p;
        pr.m = ps.m;
    } else {
        throw CLI::ValidationError("--preset or all of --d, --p, --m required");
    }
    pr.mu = f.mu;
    pr.validate();
    return pr;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path);
    return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

std::string hex_bytes(const std::vector<std::uint8_t>& bytes) {
    static const char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xF]);
    }
    return s;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

int session_exit_code(exchange::SessionStatus status) {
    switch (status) {
        case exchange::SessionStatus::Ok:
            return 0;
        case exchange::SessionStatus::ValidationError:
            return 3;
        case exchange::SessionStatus::TransportError:
        case exchange::SessionStatus::MalformedFrame:
        case exchange::SessionStatus::UnsupportedVersion:
            return 4;
        case exchange::SessionStatus::FingerprintMismatch:
            return 5;
    }
    return 4;
}

void print_session(const exchange::SessionResult& res, std::ostream& out) {
    out << "status=" << exchange::to_string(res.status) << "\n"
        << "detail=" << res.detail << "\n"
        << "local_fingerprint=" << hex_bytes(res.local_fingerprint) << "\n"
        << "remote_fingerprint=" << hex_bytes(res.remote_fingerprint) << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
    CLI::App app{
        "masked code-based key encapsulation toolkit\n"
        "exit codes: 0 ok, 2 usage, 3 invariant violation, 4 I/O or "
        "transport, 5 fingerprint mismatch"};
    app.name("maskem");
    app.set_version_flag("--version", "maskem 0.1.0");
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int code = 0;

    // keygen
    auto* kg = app.add_subcommand("keygen", "generate a key pair");
    ParamFlags kg_params;
    add_param_flags(kg, kg_params);
    kg->add_option("--seed", seed, "RNG seed")->capture_default_str();
    std::string pk_out = "pk.bin";
    std::string sk_out = "sk.bin";
    kg->add_option("--pk-out", pk_out, "public key output path")
        ->capture_default_str();
    kg->add_option("--sk-out", sk_out, "private key output path")
        ->capture_default_str();
    kg->callback([&] {
        const kem::ParamSet pr = resolve_params(kg_params);
        Rng rng(seed);
        const kem::KeyPair keys = kem::keygen(pr, rng);
        const auto pk_bytes = kem::serialize_public(keys.pk);
        const auto sk_bytes = kem::serialize_private(keys.sk);
        write_file(pk_out, pk_bytes);
        write_file(sk_out, sk_bytes);
        out << "pk_file=" << pk_out << "\n"
            << "pk_bytes=" << pk_bytes.size() << "\n"
            << "sk_file=" << sk_out << "\n"
            << "sk_bytes=" << sk_bytes.size() << "\n";
    });

    // encap
    auto* en = app.add_subcommand("encap", "encapsulate against a public key");
    std::string en_pk = "pk.bin";
    std::string ct_out = "ct.bin";
    en->add_option("--pk", en_pk, "public key input path")
        ->capture_default_str();
    en->add_option("--ct-out", ct_out, "ciphertext output path")
        ->capture_default_str();
    en->add_option("--seed", seed, "RNG seed")->capture_default_str();
    en->callback([&] {
        const kem::PublicKey pk = kem::deserialize_public(read_file(en_pk));
        Rng rng(seed);
        const kem::EncapsResult enc = kem::encapsulate(pk, rng);
        const auto ct_bytes = kem::serialize_ciphertext(pk.params, enc.ct);
        write_file(ct_out, ct_bytes);
        out << "ct_file=" << ct_out << "\n"
            << "ct_bytes=" << ct_bytes.size() << "\n"
            << "mac_count=" << enc.mac_count << "\n"
            << "shared_key=" << hex_bytes(kem::derive_session_key(enc.key))
            << "\n";
    });

    // decap
    auto* de = app.add_subcommand("decap", "decapsulate a ciphertext");
    std::string de_sk = "sk.bin";
    std::string de_ct = "ct.bin";
    de->add_option("--sk", de_sk, "private key input path")
        ->capture_default_str();
    de->add_option("--ct", de_ct, "ciphertext input path")
        ->capture_default_str();
    de->callback([&] {
        const kem::PrivateKey sk = kem::deserialize_private(read_file(de_sk));
        const auto [ct_params, ct] =
            kem::deserialize_ciphertext(read_file(de_ct));
        if (!(ct_params == sk.params)) {
            throw InvariantError(
                "decap: ciphertext parameters do not match the private key");
        }
        const kem::SharedKey key = kem::decapsulate(sk, ct);
        out << "shared_key=" << hex_bytes(kem::derive_session_key(key))
            << "\n";
    });

    // analyze
    auto* an = app.add_subcommand(
        "analyze", "security, mask-entropy and complexity report");
    ParamFlags an_params;
    add_param_flags(an, an_params);
    std::string variant_str = "table";
    an->add_option("--binomial-variant", variant_str,
                   "discard entropy variant: table C(d,p), printed C(n,p)")
        ->check(CLI::IsMember({"table", "printed"}))
        ->capture_default_str();
    double grid_step = 1e-4;
    an->add_option("--grid-step", grid_step, "mu grid step in (0, 0.5)")
        ->capture_default_str();
    std::string curves_out;
    an->add_option("--curves-out", curves_out,
                   "write mu sweep of both attack-cost curves as CSV");
    an->callback([&] {
        const kem::ParamSet pr = resolve_params(an_params);
        const auto variant = variant_str == "printed"
                                 ? analysis::BinomialVariant::Printed
                                 : analysis::BinomialVariant::Table;
        const analysis::SecurityReport rep =
            analysis::compute_sec(pr, variant, grid_step);
        analysis::write_report(rep, out);
        analysis::write_report(analysis::mask_margin_check(pr, rep.sec_bits),
                               out);
        analysis::write_report(analysis::complexity_table(pr), out);
        if (!curves_out.empty()) {
            std::ofstream csv(curves_out, std::ios::binary | std::ios::trunc);
            if (!csv) {
                throw IoError("cannot open " + curves_out + " for writing");
            }
            std::vector<double> grid;
            for (double mu = grid_step; mu < 1.0; mu += grid_step) {
                grid.push_back(mu);
            }
            analysis::emit_curves_csv(pr, grid, csv);
            csv.flush();
            if (!csv) throw IoError("write failed: " + curves_out);
            out << "curves_file=" << curves_out << "\n"
                << "curves_rows=" << grid.size() << "\n";
        }
    });

    // attack-sim
    auto* at = app.add_subcommand(
        "attack-sim",
        "Monte Carlo ISD attack on toy parameters (guarded at 2^30)");
    ParamFlags at_params;
    add_param_flags(at, at_params);
    at->add_option("--seed", seed, "RNG seed")->capture_default_str();
    std::uint64_t trials = 100;
    std::uint64_t max_iterations = 1;
    std::int64_t fixed_weight = -1;
    bool know_discard = false;
    bool know_weight = false;
    bool no_free_rows = false;
    at->add_option("--trials", trials, "independent attack instances")
        ->capture_default_str();
    at->add_option("--max-iterations", max_iterations,
                   "ISD iterations per instance")
        ->capture_default_str();
    at->add_option("--fixed-weight", fixed_weight,
                   "plant a spacing-valid error of this exact weight "
                   "(default: sample from the Markov model)")
        ->check(CLI::NonNegativeNumber);
    at->add_flag("--know-discard", know_discard,
                 "oracle access to the true discard set");
    at->add_flag("--know-weight", know_weight,
                 "oracle access to the true error weight");
    at->add_flag("--no-free-rows", no_free_rows,
                 "select all d - p rows from the top block");
    at->callback([&] {
        const kem::ParamSet pr = resolve_params(at_params);
        Rng rng(seed);
        const kem::KeyPair keys = kem::keygen(pr, rng);
        attack::AttackConfig cfg;
        cfg.max_iterations = max_iterations;
        cfg.know_discard_set = know_discard;
        cfg.know_error_weight = know_weight;
        cfg.use_free_rows = !no_free_rows;
        const markov::ErrorModel model(pr.mu);

        std::uint64_t successes = 0;
        std::uint64_t total_iterations = 0;
        std::uint64_t fast = 0;
        std::uint64_t synd = 0;
        std::uint64_t cands = 0;
        std::uint64_t trunc = 0;
        std::uint64_t success_iterations = 0;
        for (std::uint64_t trial = 0; trial < trials; ++trial) {
            Rng trial_rng = rng.stream(trial + 1);
            const gf2::BitVector dhat =
                gf2::BitVector::random(pr.d - pr.p, trial_rng);
            const auto discard =
                sample_distinct_sorted(pr.p, pr.d, trial_rng);
            const gf2::BitVector f =
                fixed_weight >= 0
                    ? attack::sample_spaced_error(
                          pr.n(), static_cast<std::size_t>(fixed_weight),
                          trial_rng)
                    : markov::sample_error(pr.n(), model, trial_rng);
            const kem::EncapsResult enc =
                kem::detail::encapsulate_with(keys.pk, dhat, f, discard);
            const attack::GroundTruth truth{&enc.key, &f, &enc.discard};
            const attack::AttackOutcome outcome =
                attack::isd_attack(keys.pk, enc.ct, cfg, trial_rng, &truth);
            successes += outcome.success ? 1 : 0;
            total_iterations += outcome.iterations_used;
            fast += outcome.fast_rejects;
            synd += outcome.syndrome_rejects;
            cands += outcome.candidates_tested;
            trunc += outcome.truncated_enumerations;
            if (outcome.success) success_iterations += outcome.iterations_used;
        }
        const double t_ref = fixed_weight >= 0
                                 ? static_cast<double>(fixed_weight)
                                 : markov::expected_weight(pr.n(), model);
        const double isd_bits = analysis::isd_entropy(pr, t_ref);
        const double space_bits =
            isd_bits +
            (know_discard ? 0.0 : analysis::discard_entropy(pr.d, pr.p));
        out << "d=" << pr.d << "\n"
            << "p=" << pr.p << "\n"
            << "m=" << pr.m << "\n"
            << fmt("mu=%.6f\n", pr.mu)
            << "error_weight_mode="
            << (fixed_weight >= 0 ? "fixed" : "model") << "\n"
            << fmt("t_reference=%.6f\n", t_ref) << "trials=" << trials << "\n"
            << "max_iterations=" << max_iterations << "\n"
            << "successes=" << successes << "\n"
            << "total_iterations=" << total_iterations << "\n"
            << fmt("per_iteration_success_rate=%.9f\n",
                   total_iterations != 0
                       ? static_cast<double>(successes) /
                             static_cast<double>(total_iterations)
                       : 0.0)
            << fmt("isd_entropy_bits=%.6f\n", isd_bits)
            << fmt("search_space_bits=%.6f\n", space_bits)
            << fmt("predicted_success_rate=%.9e\n", std::exp2(-space_bits))
            << "fast_rejects=" << fast << "\n"
            << "syndrome_rejects=" << synd << "\n"
            << "candidates_tested=" << cands << "\n"
            << "truncated_enumerations=" << trunc << "\n";
        if (successes != 0) {
            out << fmt("mean_iterations_to_success=%.3f\n",
                       static_cast<double>(success_iterations) /
                           static_cast<double>(successes));
        }
    });

    // mask-exp
    auto* mx = app.add_subcommand(
        "mask-exp", "mask counting bounds and exhaustive census (2rs <= 24)");
    std::uint64_t mx_s = 0;
    std::uint64_t mx_s2 = 0;
    std::uint64_t mx_r = 0;
    bool mx_intersection = false;
    bool mx_bounds_only = false;
    mx->add_option("--s", mx_s, "mask side length s")->required();
    mx->add_option("--r", mx_r, "mask rank r")->required();
    auto* mx_s2_opt = mx->add_option(
        "--s2", mx_s2, "second side length for rectangular bounds only");
    mx->add_flag("--intersection", mx_intersection,
                 "also run the intersection uniformity census");
    mx->add_flag("--bounds-only", mx_bounds_only,
                 "skip the census (no guard; any s, r)");
    mx->callback([&] {
        const auto s = static_cast<std::size_t>(mx_s);
        const auto r = static_cast<std::size_t>(mx_r);
        if (mx_s2_opt->count() != 0) {
            analysis::write_report(
                analysis::mask_count_bounds(
                    s, static_cast<std::size_t>(mx_s2), r),
                out);
            return;
        }
        analysis::write_report(analysis::mask_count_bounds(s, r), out);
        if (mx_bounds_only) return;
        attack::write_report(attack::mask_uniqueness_experiment(s, r), out);
        if (mx_intersection) {
            attack::write_report(
                attack::intersection_uniformity_experiment(s, r), out);
        }
    });

    // exchange
    auto* ex = app.add_subcommand(
        "exchange", "two-party key exchange demo over TCP");
    ex->require_subcommand(1);

    auto* sv = ex->add_subcommand("serve",
                                  "listen for one client, run one session");
    ParamFlags sv_params;
    sv_params.preset = "sec258";
    add_param_flags(sv, sv_params);
    sv->add_option("--seed", seed, "RNG seed")->capture_default_str();
    std::string listen_addr;
    sv->add_option("--listen", listen_addr, "bind address host:port (port 0 picks a free port)")
        ->required();
    sv->callback([&] {
        const kem::ParamSet pr = resolve_params(sv_params);
        Rng rng(seed);
        exchange::ServeOptions opts;
        opts.on_listening = [&](std::uint16_t port) {
            out << "listening_port=" << port << "\n";
            out.flush();
        };
        const exchange::SessionResult res =
            exchange::serve(pr, listen_addr, rng, opts);
        print_session(res, out);
        code = session_exit_code(res.status);
    });

    auto* cn = ex->add_subcommand("connect", "connect to a serving peer");
    cn->add_option("--seed", seed, "RNG seed")->capture_default_str();
    std::string connect_addr;
    cn->add_option("--connect", connect_addr, "peer address host:port")
        ->required();
    cn->callback([&] {
        Rng rng(seed);
        const exchange::SessionResult res =
            exchange::connect(connect_addr, rng, {});
        print_session(res, out);
        code = session_exit_code(res.status);
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
    return code;
}

}  // namespace maskem::cli
