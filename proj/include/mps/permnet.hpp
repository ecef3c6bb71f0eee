#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mps/rng.hpp"

namespace mps {

using u32 = std::uint32_t;

/// A configurable swap gate on absolute wire positions. A 2-input gate
/// consumes one configuration bit. A 3-input gate is three 2-input
/// swap gates in a cycle and consumes three bits; the cycle order is
/// fixed as (a,b), (b,c), (a,c).
struct Gate {
    std::uint8_t arity = 2;
    std::array<u32, 3> pos{};

    u32 bit_count() const { return arity == 2 ? 1 : 3; }
};

/// One layer: gates on pairwise-disjoint positions, then fixed wire
/// exchanges (unconditional swaps realizing cross-connector wiring;
/// they consume no configuration bits).
struct Layer {
    std::vector<Gate> gates;
    std::vector<std::pair<u32, u32>> exchanges;
};

enum class NetKind { Benes, ArbitraryBenes, SymmetricNpi, ReducedNpi };

struct NetworkTopology {
    u32 n = 0;
    NetKind kind = NetKind::Benes;
    std::vector<Layer> layers;
    u32 n1 = 0, n2 = 0; // reduced n_pi block parameters, 0 elsewhere

    u32 gate_count() const {
        u32 k = 0;
        for (const auto& l : layers) k += static_cast<u32>(l.gates.size());
        return k;
    }
    u32 config_bits() const {
        u32 k = 0;
        for (const auto& l : layers)
            for (const auto& g : l.gates) k += g.bit_count();
        return k;
    }
    bool has_three_gate() const {
        for (const auto& l : layers)
            for (const auto& g : l.gates)
                if (g.arity == 3) return true;
        return false;
    }
    /// True when the layout matches the paper's configuration-matrix
    /// shape: every layer holds n/2 two-input gates and no exchanges.
    bool pure_two_gate_grid() const {
        for (const auto& l : layers) {
            if (!l.exchanges.empty()) return false;
            if (l.gates.size() != n / 2) return false;
            for (const auto& g : l.gates)
                if (g.arity != 2) return false;
        }
        return true;
    }
};

/// One swap/pass bit per 2-gate, three per 3-gate, in layer-major gate
/// order. Indexable as a (gates-per-layer x layers) matrix for pure
/// Benes networks.
struct Configuration {
    std::vector<std::uint8_t> bits;
};

struct Permutation {
    std::vector<u32> map; // map[i] = output position of input i

    u32 size() const { return static_cast<u32>(map.size()); }
    bool is_bijection() const {
        std::vector<bool> seen(map.size(), false);
        for (u32 v : map) {
            if (v >= map.size() || seen[v]) return false;
            seen[v] = true;
        }
        return true;
    }
};

namespace detail {

inline void validate_topology(const NetworkTopology& net) {
    for (const auto& l : net.layers) {
        std::vector<bool> used(net.n, false);
        for (const auto& g : l.gates) {
            for (u32 i = 0; i < g.arity; ++i) {
                if (g.pos[i] >= net.n) throw std::invalid_argument("gate position out of range");
                if (used[g.pos[i]]) throw std::invalid_argument("position used twice in layer");
                used[g.pos[i]] = true;
            }
        }
        for (const auto& [a, b] : l.exchanges) {
            if (a >= net.n || b >= net.n) throw std::invalid_argument("exchange out of range");
        }
    }
}

/// Recursive Benes-style constructor over an explicit position list.
/// First-layer gate i pairs positions 2i and 2i+1; first outputs feed
/// the top sub-network, second outputs the bottom, mirrored on the
/// output side. An odd position count sends the spare wire to the
/// larger (top) half; 3 positions collapse to one 3-input gate.
inline std::vector<Layer> build_recursive(const std::vector<u32>& pos) {
    const std::size_t m = pos.size();
    if (m < 2) throw std::invalid_argument("need at least 2 positions");
    if (m == 2) {
        Layer l;
        l.gates.push_back(Gate{2, {pos[0], pos[1], 0}});
        return {l};
    }
    if (m == 3) {
        Layer l;
        l.gates.push_back(Gate{3, {pos[0], pos[1], pos[2]}});
        return {l};
    }
    const std::size_t q = m / 2;
    Layer in, out;
    std::vector<u32> top, bottom;
    top.reserve(q + 1);
    bottom.reserve(q);
    for (std::size_t i = 0; i < q; ++i) {
        in.gates.push_back(Gate{2, {pos[2 * i], pos[2 * i + 1], 0}});
        out.gates.push_back(Gate{2, {pos[2 * i], pos[2 * i + 1], 0}});
        top.push_back(pos[2 * i]);
        bottom.push_back(pos[2 * i + 1]);
    }
    if (m % 2 == 1) top.push_back(pos[m - 1]);

    auto top_layers = build_recursive(top);
    auto bottom_layers = build_recursive(bottom);
    const std::size_t depth = std::max(top_layers.size(), bottom_layers.size());
    std::vector<Layer> layers;
    layers.push_back(std::move(in));
    for (std::size_t i = 0; i < depth; ++i) {
        Layer mid;
        if (i < top_layers.size()) {
            for (auto& g : top_layers[i].gates) mid.gates.push_back(g);
        }
        if (i < bottom_layers.size()) {
            for (auto& g : bottom_layers[i].gates) mid.gates.push_back(g);
        }
        layers.push_back(std::move(mid));
    }
    layers.push_back(std::move(out));
    return layers;
}

} // namespace detail

/// Power-of-two Benes network: n = 2^d wires, 2d-1 layers of n/2 gates.
inline NetworkTopology build_benes(u32 d) {
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    if (d > 20) throw std::invalid_argument("dimension too large");
    NetworkTopology net;
    net.n = u32{1} << d;
    net.kind = NetKind::Benes;
    std::vector<u32> pos(net.n);
    std::iota(pos.begin(), pos.end(), 0);
    net.layers = detail::build_recursive(pos);
    detail::validate_topology(net);
    return net;
}

/// Arbitrary-size Benes network (any n >= 2); each odd-sized
/// subnetwork bottoms out in exactly one 3-input gate.
inline NetworkTopology build_arbitrary_benes(u32 n) {
    if (n < 2) throw std::invalid_argument("need at least 2 wires");
    NetworkTopology net;
    net.n = n;
    net.kind = NetKind::ArbitraryBenes;
    std::vector<u32> pos(n);
    std::iota(pos.begin(), pos.end(), 0);
    net.layers = detail::build_recursive(pos);
    detail::validate_topology(net);
    return net;
}

/// Symmetric n_pi network: two n_component-permute networks bound by a
/// cross-connector, N = 2*n_component + 2 wires.
///
/// Connector wiring constants (wires are 0-based; upper component
/// occupies [0, nc), lower [nc, 2nc), extras e1 = 2nc, e2 = 2nc+1):
///   - G1 acts on (e1, e2) immediately before the components' middle
///     layer; its outputs are pushed into the components by fixed
///     exchanges at upper wire 0 (beside x1,x2) and lower wire 2nc-1
///     (beside y_{n-1},y_n). The displaced values park on e1/e2.
///   - After the middle layer the parked values are pushed back at
///     upper wire nc-1 / lower wire nc, drawing one middle output from
///     each component onto the extra wires.
///   - G2 acts on the drawn pair (e1, e2), which exit at the extra
///     terminals.
inline NetworkTopology build_symmetric_npi(u32 n_component) {
    if (n_component < 2 || n_component % 2 != 0) {
        throw std::invalid_argument("component size must be even and >= 2");
    }
    const u32 nc = n_component;
    NetworkTopology net;
    net.n = 2 * nc + 2;
    net.kind = NetKind::SymmetricNpi;

    std::vector<u32> upper(nc), lower(nc);
    std::iota(upper.begin(), upper.end(), 0);
    std::iota(lower.begin(), lower.end(), nc);
    auto up = detail::build_recursive(upper);
    auto lo = detail::build_recursive(lower);
    const std::size_t L = up.size();
    const std::size_t M = (L - 1) / 2;
    const u32 e1 = 2 * nc, e2 = 2 * nc + 1;
    const u32 u_in = 0, u_out = nc - 1, l_in = 2 * nc - 1, l_out = nc;

    auto merged = [&](std::size_t i) {
        Layer l;
        for (auto& g : up[i].gates) l.gates.push_back(g);
        for (auto& g : lo[i].gates) l.gates.push_back(g);
        return l;
    };

    for (std::size_t i = 0; i < M; ++i) net.layers.push_back(merged(i));

    Layer g1;
    g1.gates.push_back(Gate{2, {e1, e2, 0}});
    g1.exchanges = {{e1, u_in}, {e2, l_in}};
    net.layers.push_back(std::move(g1));

    Layer middle = merged(M);
    middle.exchanges = {{e1, u_out}, {e2, l_out}};
    net.layers.push_back(std::move(middle));

    Layer g2;
    g2.gates.push_back(Gate{2, {e1, e2, 0}});
    net.layers.push_back(std::move(g2));

    for (std::size_t i = M + 1; i < L; ++i) net.layers.push_back(merged(i));
    detail::validate_topology(net);
    return net;
}

/// BinaryRiffle swap-pair layers for a span of n wires mixed to depth
/// log2(d2). Recursion halves span and d2 until d2 <= 1; the deeper
/// (smaller-span) pairings precede the span-wide layer, which pairs
/// element i+k with mid+k for each of the half-length pairs.
inline std::vector<std::vector<std::pair<u32, u32>>> binary_riffle_layers(u32 n, u32 d2) {
    if (d2 == 0 || (d2 & (d2 - 1)) != 0) throw std::invalid_argument("d2 must be a power of two");
    if (d2 == 1) return {};
    u32 levels = 0;
    for (u32 x = d2; x > 1; x >>= 1) ++levels;
    if (n % d2 != 0 || n % 2 != 0) throw std::invalid_argument("span not divisible for riffle");
    std::vector<std::vector<std::pair<u32, u32>>> out(levels);

    struct Rec {
        std::vector<std::vector<std::pair<u32, u32>>>& out;
        void operator()(u32 i, u32 j, u32 d) const {
            if (d <= 1) return;
            const u32 span = j - i + 1;
            if (span % 2 != 0) throw std::invalid_argument("odd span in riffle recursion");
            const u32 half = span / 2;
            const u32 mid = i + half;
            (*this)(i, mid - 1, d / 2);
            (*this)(mid, j, d / 2);
            u32 level = 0;
            for (u32 x = d; x > 1; x >>= 1) ++level;
            for (u32 k = 0; k < half; ++k) out[level - 1].emplace_back(i + k, mid + k);
        }
    } rec{out};
    rec(0, n - 1, d2);
    return out;
}

/// Reduced n_pi network: n2 parallel n1-input Benes blocks followed by
/// BinaryRiffle stages of depth log2(n2).
inline NetworkTopology build_reduced_npi(u32 n1, u32 n2) {
    if (n1 < 2) throw std::invalid_argument("n1 must be >= 2");
    if (n2 < 2 || (n2 & (n2 - 1)) != 0) throw std::invalid_argument("n2 must be a power of two >= 2");
    NetworkTopology net;
    net.n = n1 * n2;
    net.kind = NetKind::ReducedNpi;
    net.n1 = n1;
    net.n2 = n2;

    std::vector<std::vector<Layer>> blocks;
    blocks.reserve(n2);
    for (u32 b = 0; b < n2; ++b) {
        std::vector<u32> pos(n1);
        std::iota(pos.begin(), pos.end(), b * n1);
        blocks.push_back(detail::build_recursive(pos));
    }
    const std::size_t L = blocks[0].size();
    for (std::size_t i = 0; i < L; ++i) {
        Layer l;
        for (auto& blk : blocks)
            for (auto& g : blk[i].gates) l.gates.push_back(g);
        net.layers.push_back(std::move(l));
    }
    for (const auto& level : binary_riffle_layers(net.n, n2)) {
        Layer l;
        for (const auto& [a, b] : level) l.gates.push_back(Gate{2, {a, b, 0}});
        net.layers.push_back(std::move(l));
    }
    detail::validate_topology(net);
    return net;
}

/// Route `input` through the network under the given configuration.
template <typename T>
std::vector<T> route_values(const NetworkTopology& net, const Configuration& cfg,
                            std::vector<T> v) {
    if (v.size() != net.n) throw std::invalid_argument("input size mismatch");
    if (cfg.bits.size() != net.config_bits()) throw std::invalid_argument("configuration size mismatch");
    std::size_t k = 0;
    for (const auto& l : net.layers) {
        for (const auto& g : l.gates) {
            if (g.arity == 2) {
                if (cfg.bits[k]) std::swap(v[g.pos[0]], v[g.pos[1]]);
                ++k;
            } else {
                if (cfg.bits[k]) std::swap(v[g.pos[0]], v[g.pos[1]]);
                if (cfg.bits[k + 1]) std::swap(v[g.pos[1]], v[g.pos[2]]);
                if (cfg.bits[k + 2]) std::swap(v[g.pos[0]], v[g.pos[2]]);
                k += 3;
            }
        }
        for (const auto& [a, b] : l.exchanges) std::swap(v[a], v[b]);
    }
    return v;
}

/// The permutation realized by a configuration: map[i] = output
/// position of input line i.
inline Permutation apply_configuration(const NetworkTopology& net, const Configuration& cfg) {
    std::vector<u32> tokens(net.n);
    std::iota(tokens.begin(), tokens.end(), 0);
    auto out = route_values(net, cfg, std::move(tokens));
    Permutation perm;
    perm.map.assign(net.n, 0);
    for (u32 j = 0; j < net.n; ++j) perm.map[out[j]] = j;
    return perm;
}

/// Independent fair coin per configuration bit.
inline Configuration sample_configuration(const NetworkTopology& net, SeededRng& rng) {
    Configuration cfg;
    cfg.bits.resize(net.config_bits());
    for (auto& b : cfg.bits) b = rng.coin() ? 1 : 0;
    return cfg;
}

/// Configuration matrix in the paper's row-major layout (rows = gate
/// index within layer, columns = layers). Falls back to a per-layer
/// listing for non-grid networks.
inline std::string configuration_matrix_string(const NetworkTopology& net,
                                               const Configuration& cfg) {
    std::ostringstream os;
    if (net.pure_two_gate_grid()) {
        const u32 rows = net.n / 2;
        const auto cols = net.layers.size();
        for (u32 r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                os << static_cast<int>(cfg.bits[c * rows + r]);
                if (c + 1 < cols) os << ' ';
            }
            os << '\n';
        }
        return os.str();
    }
    std::size_t k = 0;
    for (std::size_t c = 0; c < net.layers.size(); ++c) {
        os << "layer " << c << ':';
        for (const auto& g : net.layers[c].gates) {
            for (u32 b = 0; b < g.bit_count(); ++b) os << ' ' << static_cast<int>(cfg.bits[k++]);
        }
        os << '\n';
    }
    return os.str();
}

/// DOT export of the layered gate graph.
inline std::string to_dot(const NetworkTopology& net) {
    std::ostringstream os;
    os << "digraph permnet {\n  rankdir=LR;\n  node [shape=box];\n";
    std::vector<std::string> producer(net.n);
    for (u32 i = 0; i < net.n; ++i) {
        os << "  in" << i << " [shape=plaintext,label=\"x" << i + 1 << "\"];\n";
        producer[i] = "in" + std::to_string(i);
    }
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const auto& l = net.layers[li];
        for (std::size_t gi = 0; gi < l.gates.size(); ++gi) {
            const auto& g = l.gates[gi];
            std::string name = "g" + std::to_string(li) + "_" + std::to_string(gi);
            os << "  " << name << " [label=\"" << (g.arity == 2 ? "swap" : "swap3") << "\"];\n";
            for (u32 i = 0; i < g.arity; ++i) {
                os << "  " << producer[g.pos[i]] << " -> " << name << ";\n";
                producer[g.pos[i]] = name;
            }
        }
        for (const auto& [a, b] : l.exchanges) std::swap(producer[a], producer[b]);
    }
    for (u32 i = 0; i < net.n; ++i) {
        os << "  out" << i << " [shape=plaintext,label=\"y" << i + 1 << "\"];\n";
        os << "  " << producer[i] << " -> out" << i << ";\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace mps
