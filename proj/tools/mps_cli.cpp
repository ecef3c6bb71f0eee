// mps: multiparty shuffling simulator and analysis tool.
//
// Subcommands:
//   shuffle    run Shuffle-I / Shuffle-II on the simulated runtime
//   analyze    exact tables: dist, fpi, zeta, birthday, stats
//   adversary  view-indistinguishability experiment over corrupted views
//   topo       topology export (DOT) and configuration matrices
//
// Exit codes: 0 success, 1 failing verdict/error, 2 usage,
//             3 protocol abort, 4 enumeration budget exceeded.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mps/adversary.hpp"
#include "mps/analysis.hpp"
#include "mps/permnet.hpp"
#include "mps/shuffle.hpp"
#include "mps/tables.hpp"
#include "mps/version.hpp"

namespace {

using mps::u64;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAbort = 3;
constexpr int kExitBudget = 4;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    os << text;
    if (text.empty() || text.back() != '\n') os << '\n';
}

void write_json(const std::string& path, const ordered_json& j) {
    write_text(path, j.dump(2));
}

std::string csv_with_manifest(const ordered_json& manifest, const std::string& csv) {
    std::ostringstream os;
    os << "# manifest: " << manifest.dump() << '\n' << csv;
    return os.str();
}

ordered_json make_manifest(const std::string& command, const ordered_json& params,
                           const std::string& out_path) {
    ordered_json m;
    m["tool"] = "mps";
    m["version"] = mps::kVersion;
    m["command"] = command;
    m["parameters"] = params;
    m["output"] = out_path.empty() ? "-" : out_path;
    return m;
}

std::vector<std::uint32_t> parse_id_list(const std::string& csv) {
    std::vector<std::uint32_t> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(static_cast<std::uint32_t>(std::stoul(item)));
    }
    return out;
}

std::vector<u64> parse_u64_list(const std::string& csv) {
    std::vector<u64> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoull(item));
    }
    return out;
}

// ---------------------------------------------------------------- shuffle

struct ShuffleCliArgs {
    std::string protocol = "one";
    std::string topology = "auto";
    std::uint32_t n = 0, n1 = 0, n2 = 0, t = 0;
    u64 p = mps::kDefaultModulus;
    u64 seed = 1;
    std::string corrupt_csv, inputs_csv;
    std::uint32_t crash_party = 0, crash_round = 0;
    bool crash_set = false;
    std::string out, transcript;
};

int run_shuffle_cmd(const ShuffleCliArgs& args) {
    mps::ShuffleParams params;
    params.protocol = (args.protocol == "two") ? mps::Protocol::ShuffleII : mps::Protocol::ShuffleI;
    params.n = args.n;
    params.n1 = args.n1;
    params.n2 = args.n2;
    params.p = args.p;
    params.seed = args.seed;
    if (args.topology == "benes") params.topology = mps::TopologyChoice::Benes;
    else if (args.topology == "arbitrary") params.topology = mps::TopologyChoice::ArbitraryBenes;
    else if (args.topology == "sym") params.topology = mps::TopologyChoice::SymmetricNpi;
    else params.topology = mps::TopologyChoice::Auto;

    const std::uint32_t n_total =
        params.protocol == mps::Protocol::ShuffleII ? args.n1 * args.n2 : args.n;
    if (args.t > 0 && 3 * args.t >= n_total) {
        std::cerr << "error: corruption bound requires t < n/3\n";
        return kExitUsage;
    }
    if (!args.corrupt_csv.empty()) {
        params.corrupted = parse_id_list(args.corrupt_csv);
    } else {
        for (std::uint32_t i = 1; i <= args.t; ++i) params.corrupted.push_back(i);
    }
    if (params.corrupted.size() > args.t) {
        std::cerr << "error: corrupted set exceeds t\n";
        return kExitUsage;
    }
    if (!args.inputs_csv.empty()) params.inputs = parse_u64_list(args.inputs_csv);
    if (args.crash_set) params.crash = mps::CrashRule{args.crash_party, args.crash_round};
    params.record_transcript = !args.transcript.empty();

    ordered_json pj;
    pj["protocol"] = args.protocol;
    pj["topology"] = args.topology;
    pj["n"] = n_total;
    if (params.protocol == mps::Protocol::ShuffleII) {
        pj["n1"] = args.n1;
        pj["n2"] = args.n2;
    }
    pj["t"] = args.t;
    pj["corrupted"] = params.corrupted;
    pj["p"] = params.p;
    pj["seed"] = params.seed;
    if (params.crash) pj["crash"] = {{"party", args.crash_party}, {"round", args.crash_round}};

    auto outcome = mps::run_shuffle(params);

    ordered_json j;
    j["manifest"] = make_manifest("shuffle", pj, args.out);
    j["aborted"] = outcome.aborted;
    if (outcome.aborted) {
        j["abort_reason"] = outcome.abort_reason;
    } else {
        j["outputs"] = outcome.outputs;
        j["permutation"] = outcome.permutation.map;
        j["rounds_routing"] = outcome.rounds_routing;
        j["rounds_total"] = outcome.rounds_total;
        j["round_cost_model"] = mps::round_cost(outcome.topology);
    }
    write_json(args.out, j);

    if (!args.transcript.empty()) {
        std::ofstream ts(args.transcript, std::ios::binary);
        if (!ts) throw std::runtime_error("cannot open transcript file");
        outcome.net->transcript_jsonl(ts);
    }
    return outcome.aborted ? kExitAbort : kExitOk;
}

// ---------------------------------------------------------------- analyze

mps::NetworkTopology build_family(const std::string& family, std::uint32_t d, std::uint32_t n,
                                  std::uint32_t nc, std::uint32_t n1, std::uint32_t n2) {
    if (family == "benes") return mps::build_benes(d);
    if (family == "arbitrary") return mps::build_arbitrary_benes(n);
    if (family == "sym") return mps::build_symmetric_npi(nc);
    if (family == "reduced") return mps::build_reduced_npi(n1, n2);
    throw CLI::ValidationError("unknown family: " + family);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiparty shuffling simulator"};
    app.set_version_flag("--version", std::string(mps::kVersion));
    app.require_subcommand(1);

    // ---- shuffle
    ShuffleCliArgs sh;
    auto* shuffle_cmd = app.add_subcommand("shuffle", "run a shuffling protocol");
    shuffle_cmd->add_option("--protocol", sh.protocol, "one|two")->check(CLI::IsMember({"one", "two"}));
    shuffle_cmd->add_option("--topology", sh.topology, "auto|benes|arbitrary|sym (Shuffle-I)")
        ->check(CLI::IsMember({"auto", "benes", "arbitrary", "sym"}));
    shuffle_cmd->add_option("--n", sh.n, "number of inputs/parties");
    shuffle_cmd->add_option("--n1", sh.n1, "Shuffle-II block size");
    shuffle_cmd->add_option("--n2", sh.n2, "Shuffle-II block count (power of two)");
    shuffle_cmd->add_option("--t", sh.t, "corruption bound (t < n/3)");
    shuffle_cmd->add_option("--corrupt", sh.corrupt_csv, "corrupted party ids, comma separated");
    shuffle_cmd->add_option("--p", sh.p, "field modulus (prime)");
    shuffle_cmd->add_option("--seed", sh.seed, "master seed");
    shuffle_cmd->add_option("--inputs", sh.inputs_csv, "party inputs, comma separated");
    auto* cp = shuffle_cmd->add_option("--crash-party", sh.crash_party, "crash-inject this party");
    shuffle_cmd->add_option("--crash-round", sh.crash_round, "suppress its sends from this round")
        ->needs(cp);
    shuffle_cmd->add_option("--out", sh.out, "outcome JSON path (default stdout)");
    shuffle_cmd->add_option("--transcript", sh.transcript, "transcript JSONL path");

    // ---- analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "reproduce the analysis tables");
    analyze_cmd->require_subcommand(1);
    std::string format = "json", out;
    std::uint32_t budget = 24;

    std::uint32_t dist_d = 3, dist_n = 0, dist_nc = 0, dist_n1 = 0, dist_n2 = 0;
    std::string dist_family = "benes";
    auto* dist_cmd = analyze_cmd->add_subcommand("dist", "permutation occurrence distribution");
    dist_cmd->add_option("--d", dist_d, "Benes dimension (n = 2^d)");
    dist_cmd->add_option("--family", dist_family, "benes|arbitrary|sym|reduced")
        ->check(CLI::IsMember({"benes", "arbitrary", "sym", "reduced"}));
    dist_cmd->add_option("--n", dist_n, "wires (arbitrary)");
    dist_cmd->add_option("--nc", dist_nc, "component size (sym)");
    dist_cmd->add_option("--n1", dist_n1, "block size (reduced)");
    dist_cmd->add_option("--n2", dist_n2, "block count (reduced)");
    dist_cmd->add_option("--budget", budget, "max configuration bits");

    std::uint64_t fpi_max = 16;
    auto* fpi_cmd = analyze_cmd->add_subcommand("fpi", "f_pi recursion values");
    fpi_cmd->add_option("--max", fpi_max, "largest argument");

    auto* zeta_cmd = analyze_cmd->add_subcommand("zeta", "unlinkability parameters");
    std::string zeta_protocol;
    std::uint32_t zeta_n = 0, zeta_t = 0, zeta_n1 = 0, zeta_n2 = 0;
    zeta_cmd->add_option("--protocol", zeta_protocol, "one|two (custom row)")
        ->check(CLI::IsMember({"one", "two"}));
    zeta_cmd->add_option("--n", zeta_n, "inputs (custom row)");
    zeta_cmd->add_option("--t", zeta_t, "corruptions (custom row)");
    zeta_cmd->add_option("--n1", zeta_n1, "block size (custom Shuffle-II row)");
    zeta_cmd->add_option("--n2", zeta_n2, "block count (custom Shuffle-II row)");

    auto* birthday_cmd = analyze_cmd->add_subcommand("birthday", "seed-collision probabilities");
    (void)birthday_cmd;

    std::uint32_t stats_d = 3;
    auto* stats_cmd = analyze_cmd->add_subcommand("stats", "occurrence mean and stddev");
    stats_cmd->add_option("--d", stats_d, "Benes dimension");

    for (auto* c : {dist_cmd, fpi_cmd, zeta_cmd, birthday_cmd, stats_cmd}) {
        c->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
        c->add_option("--out", out, "output path (default stdout)");
    }

    // ---- adversary
    auto* adv_cmd = app.add_subcommand("adversary", "view-indistinguishability experiment");
    std::uint32_t adv_n = 8, adv_t = 2, adv_trials = 10000;
    u64 adv_p = 257, adv_seed = 1;
    double adv_alpha = 0.01;
    bool adv_negative = false;
    std::string adv_out;
    adv_cmd->add_option("--n", adv_n, "parties");
    adv_cmd->add_option("--t", adv_t, "corrupted parties (1..t)");
    adv_cmd->add_option("--p", adv_p, "small prime modulus");
    adv_cmd->add_option("--trials", adv_trials, "seeded runs per scenario");
    adv_cmd->add_option("--seed", adv_seed, "master seed");
    adv_cmd->add_option("--alpha", adv_alpha, "significance level");
    adv_cmd->add_flag("--negative-control", adv_negative,
                      "break input sharing (degree-0 polynomials) to demonstrate sensitivity");
    adv_cmd->add_option("--out", adv_out, "report JSON path (default stdout)");

    // ---- topo
    auto* topo_cmd = app.add_subcommand("topo", "topology export");
    std::string topo_family = "benes", topo_dot, topo_out;
    std::uint32_t topo_d = 3, topo_n = 0, topo_nc = 0, topo_n1 = 0, topo_n2 = 0;
    std::optional<u64> topo_sample_seed;
    topo_cmd->add_option("--family", topo_family, "benes|arbitrary|sym|reduced")
        ->check(CLI::IsMember({"benes", "arbitrary", "sym", "reduced"}));
    topo_cmd->add_option("--d", topo_d, "Benes dimension");
    topo_cmd->add_option("--n", topo_n, "wires (arbitrary)");
    topo_cmd->add_option("--nc", topo_nc, "component size (sym)");
    topo_cmd->add_option("--n1", topo_n1, "block size (reduced)");
    topo_cmd->add_option("--n2", topo_n2, "block count (reduced)");
    topo_cmd->add_option("--dot", topo_dot, "write DOT graph here");
    topo_cmd->add_option("--sample-config", topo_sample_seed,
                         "sample a configuration with this seed and print its matrix");
    topo_cmd->add_option("--out", topo_out, "summary JSON path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (shuffle_cmd->parsed()) return run_shuffle_cmd(sh);

        if (dist_cmd->parsed()) {
            auto net = build_family(dist_family, dist_d, dist_n, dist_nc, dist_n1, dist_n2);
            auto dist = mps::enumerate_distribution(net, budget);
            ordered_json pj{{"family", dist_family}, {"config_bits", net.config_bits()},
                            {"wires", net.n}, {"budget", budget}};
            if (format == "csv") {
                write_text(out, csv_with_manifest(make_manifest("analyze dist", pj, out),
                                                  mps::dist_table_csv(dist)));
            } else {
                ordered_json j;
                j["manifest"] = make_manifest("analyze dist", pj, out);
                j.update(mps::dist_table_json(dist));
                write_json(out, j);
            }
            return kExitOk;
        }
        if (fpi_cmd->parsed()) {
            ordered_json pj{{"max", fpi_max}};
            if (format == "csv") {
                write_text(out, csv_with_manifest(make_manifest("analyze fpi", pj, out),
                                                  mps::fpi_table_csv(fpi_max)));
            } else {
                ordered_json j;
                j["manifest"] = make_manifest("analyze fpi", pj, out);
                j.update(mps::fpi_table_json(fpi_max));
                write_json(out, j);
            }
            return kExitOk;
        }
        if (zeta_cmd->parsed()) {
            ordered_json pj = ordered_json::object();
            ordered_json j;
            if (!zeta_protocol.empty()) {
                pj = {{"protocol", zeta_protocol}, {"n", zeta_n}, {"t", zeta_t}};
                mps::UnlinkabilityReport r;
                if (zeta_protocol == "two") {
                    pj["n1"] = zeta_n1;
                    pj["n2"] = zeta_n2;
                    r = mps::zeta_shuffle_two(zeta_n1, zeta_n2, zeta_t);
                } else {
                    r = mps::zeta_shuffle_one(zeta_n, zeta_t);
                }
                j["manifest"] = make_manifest("analyze zeta", pj, out);
                j["row"] = mps::zeta_row_json(r, std::nullopt);
                write_json(out, j);
                return kExitOk;
            }
            if (format == "csv") {
                write_text(out, csv_with_manifest(make_manifest("analyze zeta", pj, out),
                                                  mps::zeta_table_csv()));
            } else {
                j["manifest"] = make_manifest("analyze zeta", pj, out);
                j.update(mps::zeta_table_json());
                write_json(out, j);
            }
            return kExitOk;
        }
        if (birthday_cmd->parsed()) {
            ordered_json pj = ordered_json::object();
            if (format == "csv") {
                write_text(out, csv_with_manifest(make_manifest("analyze birthday", pj, out),
                                                  mps::birthday_table_csv()));
            } else {
                ordered_json j;
                j["manifest"] = make_manifest("analyze birthday", pj, out);
                j.update(mps::birthday_table_json());
                write_json(out, j);
            }
            return kExitOk;
        }
        if (stats_cmd->parsed()) {
            auto net = mps::build_benes(stats_d);
            auto dist = mps::enumerate_distribution(net, budget);
            ordered_json pj{{"d", stats_d}};
            ordered_json j;
            j["manifest"] = make_manifest("analyze stats", pj, out);
            j.update(mps::stats_summary_json(dist));
            write_json(out, j);
            return kExitOk;
        }
        if (adv_cmd->parsed()) {
            if (3 * adv_t >= adv_n) {
                std::cerr << "error: adversary bound requires t < n/3\n";
                return kExitUsage;
            }
            mps::ShuffleParams base;
            base.protocol = mps::Protocol::ShuffleI;
            base.n = adv_n;
            base.p = adv_p;
            base.seed = adv_seed;
            for (std::uint32_t i = 1; i <= adv_t; ++i) base.corrupted.push_back(i);
            if (adv_negative) base.input_degree_override = 0;

            // scenario pair: honest parties' inputs rotated between a and b
            std::vector<u64> inputs_a(adv_n), inputs_b;
            std::iota(inputs_a.begin(), inputs_a.end(), 1);
            inputs_b = inputs_a;
            std::vector<std::uint32_t> honest;
            for (std::uint32_t i = 1; i <= adv_n; ++i) {
                if (i > adv_t) honest.push_back(i);
            }
            for (std::size_t k = 0; k < honest.size(); ++k) {
                inputs_b[honest[k] - 1] = inputs_a[honest[(k + 1) % honest.size()] - 1];
            }

            auto report = mps::view_indistinguishability_test(base, inputs_a, inputs_b, adv_trials,
                                                              adv_alpha);
            ordered_json pj{{"n", adv_n}, {"t", adv_t}, {"p", adv_p},
                            {"trials", adv_trials}, {"seed", adv_seed},
                            {"negative_control", adv_negative}};
            ordered_json j;
            j["manifest"] = make_manifest("adversary", pj, adv_out);
            j.update(mps::view_report_json(report));
            write_json(adv_out, j);
            return report.pass ? kExitOk : kExitFail;
        }
        if (topo_cmd->parsed()) {
            auto net = build_family(topo_family, topo_d, topo_n, topo_nc, topo_n1, topo_n2);
            if (!topo_dot.empty()) write_text(topo_dot, mps::to_dot(net));
            ordered_json pj{{"family", topo_family}};
            ordered_json j;
            j["manifest"] = make_manifest("topo", pj, topo_out);
            j["wires"] = net.n;
            j["layers"] = net.layers.size();
            j["gates"] = net.gate_count();
            j["config_bits"] = net.config_bits();
            j["round_cost"] = mps::round_cost(net);
            if (topo_sample_seed) {
                mps::SeededRng rng(*topo_sample_seed);
                auto cfg = mps::sample_configuration(net, rng);
                j["configuration_matrix"] = mps::configuration_matrix_string(net, cfg);
            }
            write_json(topo_out, j);
            return kExitOk;
        }
        std::cerr << "error: no subcommand\n";
        return kExitUsage;
    } catch (const mps::budget_exceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return kExitBudget;
    } catch (const mps::protocol_abort& e) {
        std::cerr << "protocol abort: " << e.what() << '\n';
        return kExitAbort;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFail;
    }
}
