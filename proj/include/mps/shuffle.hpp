#pragma once

#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mps/errors.hpp"
#include "mps/mpc_ops.hpp"
#include "mps/permnet.hpp"
#include "mps/runtime.hpp"

namespace mps {

enum class Protocol { ShuffleI, ShuffleII };
enum class TopologyChoice { Auto, Benes, ArbitraryBenes, SymmetricNpi };

struct ShuffleParams {
    Protocol protocol = Protocol::ShuffleI;
    std::uint32_t n = 0;                        // inputs/parties (Shuffle-I; derived for II)
    std::uint32_t n1 = 0, n2 = 0;               // Shuffle-II block structure
    TopologyChoice topology = TopologyChoice::Auto;
    u64 p = kDefaultModulus;
    u64 seed = 1;
    std::optional<u64> quorum_seed;             // pin quorum formation across runs
    std::vector<u64> inputs;                    // empty => party i contributes i
    std::vector<std::uint32_t> corrupted;
    std::optional<CrashRule> crash;
    std::optional<std::vector<std::uint8_t>> forced_coins; // one per configuration bit
    std::optional<std::uint32_t> input_degree_override;    // negative-control knob
    std::uint32_t quorum_size = 0, quorum_cap = 0;
    bool record_transcript = false;
    bool record_coins = false;
};

struct ShuffleOutcome {
    bool aborted = false;
    std::string abort_reason;
    std::vector<u64> outputs;          // outputs[j] = value on output line j; empty on abort
    std::vector<std::uint8_t> coins;   // realized coin per configuration bit
    Permutation permutation;           // realized permutation (simulator view)
    std::uint32_t rounds_routing = 0;  // gate operations + inter-layer reshares
    std::uint32_t rounds_total = 0;    // plus input sharing and final opening
    NetworkTopology topology;
    std::shared_ptr<Network> net;      // transcript and view access
};

inline NetworkTopology build_topology(const ShuffleParams& params) {
    if (params.protocol == Protocol::ShuffleII) {
        if (params.n1 < 2 || params.n2 < 2) throw std::invalid_argument("Shuffle-II needs n1 and n2");
        if (params.n != 0 && params.n != params.n1 * params.n2) {
            throw std::invalid_argument("n must equal n1*n2");
        }
        return build_reduced_npi(params.n1, params.n2);
    }
    if (params.n < 2) throw std::invalid_argument("need at least 2 inputs");
    switch (params.topology) {
        case TopologyChoice::Benes: {
            std::uint32_t d = 0;
            while ((std::uint32_t{1} << d) < params.n) ++d;
            if ((std::uint32_t{1} << d) != params.n) throw std::invalid_argument("n must be a power of two");
            return build_benes(d);
        }
        case TopologyChoice::ArbitraryBenes:
            return build_arbitrary_benes(params.n);
        case TopologyChoice::SymmetricNpi: {
            if (params.n < 6 || params.n % 2 != 0) throw std::invalid_argument("n must be 2*nc+2");
            std::uint32_t nc = (params.n - 2) / 2;
            return build_symmetric_npi(nc);
        }
        case TopologyChoice::Auto:
        default:
            if ((params.n & (params.n - 1)) == 0) {
                std::uint32_t d = 0;
                while ((std::uint32_t{1} << d) < params.n) ++d;
                return build_benes(d);
            }
            return build_arbitrary_benes(params.n);
    }
}

/// Predicted routing rounds: every layer costs 3 rounds per
/// Random-swap step (a 3-input gate runs its cycle as three steps),
/// plus one reshare round at each layer boundary.
inline std::uint32_t round_cost(const NetworkTopology& net) {
    std::uint32_t rounds = 0;
    for (const auto& l : net.layers) {
        bool three = false;
        for (const auto& g : l.gates) three = three || (g.arity == 3);
        rounds += three ? 9 : 3;
    }
    rounds += static_cast<std::uint32_t>(net.layers.size()) - 1;
    return rounds;
}

inline std::uint32_t round_cost(const ShuffleParams& params) {
    return round_cost(build_topology(params));
}

namespace detail {

struct GateRef {
    const Gate* gate;
    std::uint32_t quorum;   // 1-based
    std::uint32_t first_bit; // configuration bit index of the gate's first coin
};

} // namespace detail

/// Execute a shuffle on the simulated runtime. Layer-synchronous:
/// gates within a layer share rounds; any failure aborts the whole run
/// with no outputs.
inline ShuffleOutcome run_shuffle(const ShuffleParams& params) {
    ShuffleOutcome out;
    out.topology = build_topology(params);
    const NetworkTopology& topo = out.topology;
    const std::uint32_t n = topo.n;

    if (!params.inputs.empty() && params.inputs.size() != n) {
        throw std::invalid_argument("need one input per party");
    }
    if (params.forced_coins && params.forced_coins->size() != topo.config_bits()) {
        throw std::invalid_argument("forced coin count must match configuration bits");
    }

    NetConfig ncfg;
    ncfg.n = n;
    ncfg.p = params.p;
    ncfg.seed = params.seed;
    ncfg.quorum_seed = params.quorum_seed;
    ncfg.quorum_size = params.quorum_size;
    ncfg.quorum_cap = params.quorum_cap;
    ncfg.corrupted = params.corrupted;
    ncfg.crash = params.crash;
    ncfg.record_transcript = params.record_transcript;
    ncfg.record_coins = params.record_coins;
    out.net = std::make_shared<Network>(ncfg);
    Network& net = *out.net;

    std::vector<u64> inputs = params.inputs;
    if (inputs.empty()) {
        inputs.resize(n);
        std::iota(inputs.begin(), inputs.end(), 1);
    }
    for (u64 v : inputs) {
        if (v >= params.p) throw std::invalid_argument("input exceeds field modulus");
    }

    MpcEngine engine(net, net.build_quorums());

    // gate -> quorum by the layer-major gate id: G_j belongs to Q_i, i = j mod n
    std::vector<std::vector<detail::GateRef>> layer_gates(topo.layers.size());
    std::uint32_t gate_id = 0, bit_index = 0;
    for (std::size_t li = 0; li < topo.layers.size(); ++li) {
        for (const auto& g : topo.layers[li].gates) {
            detail::GateRef ref;
            ref.gate = &g;
            ref.quorum = (gate_id % n) + 1;
            ref.first_bit = bit_index;
            layer_gates[li].push_back(ref);
            ++gate_id;
            bit_index += g.bit_count();
        }
    }

    // quorum holding each position at a given layer, if touched there
    auto quorum_at = [&](std::uint32_t pos, std::size_t layer) -> std::uint32_t {
        for (const auto& ref : layer_gates[layer]) {
            for (std::uint32_t i = 0; i < ref.gate->arity; ++i) {
                if (ref.gate->pos[i] == pos) return ref.quorum;
            }
        }
        return 0;
    };
    auto next_touch_quorum = [&](std::uint32_t pos, std::size_t from_layer) -> std::uint32_t {
        for (std::size_t li = from_layer; li < topo.layers.size(); ++li) {
            if (std::uint32_t q = quorum_at(pos, li)) return q;
        }
        return 0;
    };

    out.coins.assign(topo.config_bits(), 0);
    std::vector<SharedSecret> lines(n);

    try {
        // ---- input sharing: every party deals to the quorum of the
        // first gate touching its line (one round, all dealers parallel)
        std::vector<u64> deal_ctx(n);
        std::vector<std::uint32_t> deal_quorum(n);
        for (std::uint32_t pos = 0; pos < n; ++pos) {
            std::uint32_t q = next_touch_quorum(pos, 0);
            if (q == 0) throw std::invalid_argument("line never reaches a gate");
            std::uint32_t party = pos + 1;
            net.record_input(party, inputs[pos]);
            std::uint32_t degree = params.input_degree_override
                                       ? *params.input_degree_override
                                       : engine.quorum(q).threshold - 1;
            deal_ctx[pos] = engine.emit_deal(party, q, inputs[pos], degree);
            deal_quorum[pos] = q;
        }
        net.deliver_round();
        for (std::uint32_t pos = 0; pos < n; ++pos) {
            lines[pos] = engine.collect_deal(deal_ctx[pos], pos + 1, deal_quorum[pos]);
        }

        const std::uint32_t routing_start = net.round();

        for (std::size_t li = 0; li < topo.layers.size(); ++li) {
            // ---- boundary reshare: every line moves to (or is
            // re-randomized within) the quorum operating it next
            if (li > 0) {
                std::vector<u64> rs_ctx(n);
                std::vector<std::uint32_t> rs_from(n), rs_to(n);
                for (std::uint32_t pos = 0; pos < n; ++pos) {
                    std::uint32_t target = next_touch_quorum(pos, li);
                    if (target == 0) target = lines[pos].quorum; // line idles to the output
                    rs_from[pos] = lines[pos].quorum;
                    rs_to[pos] = target;
                    rs_ctx[pos] = engine.emit_reshare(lines[pos], target);
                }
                net.deliver_round();
                for (std::uint32_t pos = 0; pos < n; ++pos) {
                    lines[pos] = engine.collect_reshare(rs_ctx[pos], rs_from[pos], rs_to[pos]);
                }
            }

            // ---- gate operations: 2-gates take one swap step; a
            // 3-input gate cycles through (a,b), (b,c), (a,c)
            std::uint32_t steps = 1;
            for (const auto& ref : layer_gates[li]) {
                if (ref.gate->arity == 3) steps = 3;
            }
            for (std::uint32_t step = 0; step < steps; ++step) {
                std::vector<MpcEngine::SwapItem> batch;
                std::vector<std::pair<std::uint32_t, std::uint32_t>> slots;
                std::vector<std::uint32_t> bits;
                for (const auto& ref : layer_gates[li]) {
                    std::uint32_t a, b;
                    if (ref.gate->arity == 2) {
                        if (step != 0) continue;
                        a = ref.gate->pos[0];
                        b = ref.gate->pos[1];
                    } else {
                        a = ref.gate->pos[step == 2 ? 0 : step];
                        b = ref.gate->pos[step == 0 ? 1 : 2];
                    }
                    MpcEngine::SwapItem item;
                    item.x = lines[a];
                    item.y = lines[b];
                    if (params.forced_coins) item.force = (*params.forced_coins)[ref.first_bit + step];
                    batch.push_back(std::move(item));
                    slots.emplace_back(a, b);
                    bits.push_back(ref.first_bit + step);
                }
                if (batch.empty()) continue;
                engine.random_swap_batch(batch);
                for (std::size_t i = 0; i < batch.size(); ++i) {
                    lines[slots[i].first] = std::move(batch[i].x);
                    lines[slots[i].second] = std::move(batch[i].y);
                    out.coins[bits[i]] = batch[i].coin;
                }
            }

            // fixed cross-connector wiring: relabels lines, no rounds
            for (const auto& [a, b] : topo.layers[li].exchanges) std::swap(lines[a], lines[b]);
        }

        out.rounds_routing = net.round() - routing_start;

        // ---- final opening: reconstruct-to-all, one round
        std::vector<u64> open_ctx(n);
        for (std::uint32_t pos = 0; pos < n; ++pos) open_ctx[pos] = engine.emit_open_to_all(lines[pos]);
        net.deliver_round();
        out.outputs.resize(n);
        for (std::uint32_t pos = 0; pos < n; ++pos) {
            out.outputs[pos] =
                engine.collect_open_to_all(open_ctx[pos], lines[pos].quorum, lines[pos].threshold)
                    .value();
        }
        out.rounds_total = net.round();

        Configuration cfg;
        cfg.bits = out.coins;
        out.permutation = apply_configuration(topo, cfg);
    } catch (const protocol_abort& e) {
        out.aborted = true;
        out.abort_reason = e.what();
        out.outputs.clear();
        out.rounds_total = net.round();
    }
    return out;
}

} // namespace mps
