#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <set>

#include "mps/analysis.hpp"
#include "mps/permnet.hpp"

using namespace mps;

namespace {

Configuration config_from_counter(const NetworkTopology& net, u64 counter) {
    Configuration cfg;
    cfg.bits.resize(net.config_bits());
    for (std::size_t k = 0; k < cfg.bits.size(); ++k) cfg.bits[k] = (counter >> k) & 1;
    return cfg;
}

std::set<std::vector<u32>> reachable_set(const NetworkTopology& net) {
    std::set<std::vector<u32>> out;
    const u64 total = u64{1} << net.config_bits();
    for (u64 c = 0; c < total; ++c) {
        out.insert(apply_configuration(net, config_from_counter(net, c)).map);
    }
    return out;
}

} // namespace

TEST_CASE("power-of-two Benes structure") {
    auto b1 = build_benes(1);
    CHECK(b1.n == 2);
    CHECK(b1.layers.size() == 1);
    CHECK(b1.gate_count() == 1);

    auto b3 = build_benes(3);
    CHECK(b3.n == 8);
    CHECK(b3.layers.size() == 5);  // 2d-1
    CHECK(b3.gate_count() == 20);  // (n/2)(2d-1)
    CHECK(b3.pure_two_gate_grid());

    for (u32 d = 1; d <= 6; ++d) {
        auto b = build_benes(d);
        CHECK(b.layers.size() == 2 * d - 1);
        CHECK(b.gate_count() == (b.n / 2) * (2 * d - 1));
        for (const auto& l : b.layers) CHECK(l.gates.size() == b.n / 2);
    }
    CHECK_THROWS_AS(build_benes(0), std::invalid_argument);
}

TEST_CASE("alternate-half routing: the first half of the network never mixes halves") {
    // structurally, layers 1..d-1 only pair positions of equal parity:
    // after layer 0 the two outputs of an input gate live in opposite
    // recursive halves until the mirrored output stages remix them
    auto b = build_benes(3);
    const std::size_t d = 3;
    for (std::size_t li = 1; li < d; ++li) {
        for (const auto& g : b.layers[li].gates) {
            CHECK(g.pos[0] % 2 == g.pos[1] % 2);
        }
    }
    for (const auto& g : b.layers[0].gates) {
        CHECK(g.pos[0] % 2 == 0);
        CHECK(g.pos[1] % 2 == 1);
    }
}

TEST_CASE("d=2 Benes reaches all 24 permutations") {
    auto net = build_benes(2);
    CHECK(reachable_set(net).size() == 24);
}

TEST_CASE("arbitrary-size Benes") {
    SECTION("n=4 collapses to the power-of-two construction") {
        auto a = build_arbitrary_benes(4);
        auto b = build_benes(2);
        REQUIRE(a.layers.size() == b.layers.size());
        for (std::size_t li = 0; li < a.layers.size(); ++li) {
            REQUIRE(a.layers[li].gates.size() == b.layers[li].gates.size());
            for (std::size_t gi = 0; gi < a.layers[li].gates.size(); ++gi) {
                CHECK(a.layers[li].gates[gi].pos == b.layers[li].gates[gi].pos);
            }
        }
    }

    SECTION("n=3 is one 3-input gate reaching all 6 permutations") {
        auto net = build_arbitrary_benes(3);
        CHECK(net.layers.size() == 1);
        CHECK(net.gate_count() == 1);
        CHECK(net.layers[0].gates[0].arity == 3);
        CHECK(net.config_bits() == 3);
        CHECK(reachable_set(net).size() == 6);
    }

    SECTION("n=5 and n=6 are rearrangeable") {
        CHECK(reachable_set(build_arbitrary_benes(5)).size() == 120);
        CHECK(reachable_set(build_arbitrary_benes(6)).size() == 720);
    }

    SECTION("odd sizes carry exactly one 3-input gate per odd subnetwork") {
        auto n5 = build_arbitrary_benes(5);
        u32 three = 0;
        for (const auto& l : n5.layers) {
            for (const auto& g : l.gates) three += (g.arity == 3);
        }
        CHECK(three == 1);
    }

    CHECK_THROWS_AS(build_arbitrary_benes(1), std::invalid_argument);
}

TEST_CASE("symmetric n_pi network") {
    SECTION("N=6: blocking, bounded by f_pi(6)") {
        auto net = build_symmetric_npi(2);
        CHECK(net.n == 6);
        auto reach = reachable_set(net);
        CHECK(reach.size() <= 48); // f_pi(6)
        CHECK(reach.size() < 720); // blocking witness: some permutation unreachable
    }

    SECTION("N=10: every sampled output is bijective") {
        auto net = build_symmetric_npi(4);
        CHECK(net.n == 10);
        SeededRng rng(31);
        for (int i = 0; i < 100000; ++i) {
            auto cfg = sample_configuration(net, rng);
            CHECK(apply_configuration(net, cfg).is_bijection());
        }
    }

    CHECK_THROWS_AS(build_symmetric_npi(3), std::invalid_argument);
    CHECK_THROWS_AS(build_symmetric_npi(0), std::invalid_argument);
}

TEST_CASE("binary riffle layers") {
    CHECK(binary_riffle_layers(8, 1).empty());

    auto l42 = binary_riffle_layers(4, 2);
    REQUIRE(l42.size() == 1);
    CHECK(l42[0] == std::vector<std::pair<u32, u32>>{{0, 2}, {1, 3}});

    auto l84 = binary_riffle_layers(8, 4);
    REQUIRE(l84.size() == 2);
    CHECK(l84[0] == std::vector<std::pair<u32, u32>>{{0, 2}, {1, 3}, {4, 6}, {5, 7}});
    CHECK(l84[1] == std::vector<std::pair<u32, u32>>{{0, 4}, {1, 5}, {2, 6}, {3, 7}});
    CHECK(l84[0].size() + l84[1].size() == 8);

    CHECK_THROWS_AS(binary_riffle_layers(8, 3), std::invalid_argument);
    CHECK_THROWS_AS(binary_riffle_layers(6, 4), std::invalid_argument);

    SECTION("reachable outputs equal the distinct products of the layer transpositions") {
        NetworkTopology net;
        net.n = 8;
        for (const auto& level : l84) {
            Layer layer;
            for (auto [a, b] : level) layer.gates.push_back(Gate{2, {a, b, 0}});
            net.layers.push_back(layer);
        }
        auto reach = reachable_set(net);

        // independent oracle: compose subsets of transpositions level by level
        std::set<std::vector<u32>> oracle;
        for (u32 m0 = 0; m0 < 16; ++m0) {
            for (u32 m1 = 0; m1 < 16; ++m1) {
                std::vector<u32> v(8);
                std::iota(v.begin(), v.end(), 0);
                for (int k = 0; k < 4; ++k) {
                    if ((m0 >> k) & 1) std::swap(v[l84[0][k].first], v[l84[0][k].second]);
                }
                for (int k = 0; k < 4; ++k) {
                    if ((m1 >> k) & 1) std::swap(v[l84[1][k].first], v[l84[1][k].second]);
                }
                std::vector<u32> perm(8);
                for (u32 j = 0; j < 8; ++j) perm[v[j]] = j;
                oracle.insert(perm);
            }
        }
        CHECK(reach == oracle);
    }
}

TEST_CASE("reduced n_pi network") {
    SECTION("n1=4, n2=2: 8 wires and 3+1 layers") {
        auto net = build_reduced_npi(4, 2);
        CHECK(net.n == 8);
        CHECK(net.layers.size() == 4);
    }

    SECTION("n1=2, n2=2: at most f_pi(2)^2 * 2^2 = 16 permutations") {
        auto net = build_reduced_npi(2, 2);
        CHECK(reachable_set(net).size() <= 16);
    }

    SECTION("n1=64, n2=4: four 64-permute blocks and a depth-2 riffle") {
        auto net = build_reduced_npi(64, 4);
        CHECK(net.n == 256);
        CHECK(net.layers.size() == (2 * 6 - 1) + 2);
        // riffle stages carry n/2 gates each
        CHECK(net.layers[11].gates.size() == 128);
        CHECK(net.layers[12].gates.size() == 128);
    }

    CHECK_THROWS_AS(build_reduced_npi(4, 3), std::invalid_argument);
    CHECK_THROWS_AS(build_reduced_npi(1, 2), std::invalid_argument);
}

TEST_CASE("configuration application") {
    auto net = build_benes(3);

    SECTION("all-zero configuration is the identity") {
        Configuration cfg;
        cfg.bits.assign(net.config_bits(), 0);
        auto perm = apply_configuration(net, cfg);
        for (u32 i = 0; i < 8; ++i) CHECK(perm.map[i] == i);
    }

    SECTION("all-ones equals an independent per-layer composition") {
        Configuration cfg;
        cfg.bits.assign(net.config_bits(), 1);
        auto perm = apply_configuration(net, cfg);

        // oracle: compose layer maps computed independently
        std::vector<u32> v(8);
        std::iota(v.begin(), v.end(), 0);
        for (const auto& l : net.layers) {
            std::vector<u32> next = v;
            for (const auto& g : l.gates) std::swap(next[g.pos[0]], next[g.pos[1]]);
            v = next;
        }
        std::vector<u32> expect(8);
        for (u32 j = 0; j < 8; ++j) expect[v[j]] = j;
        CHECK(perm.map == expect);
    }

    SECTION("size mismatches are rejected") {
        Configuration cfg;
        cfg.bits.assign(3, 0);
        CHECK_THROWS_AS(apply_configuration(net, cfg), std::invalid_argument);
        Configuration ok;
        ok.bits.assign(net.config_bits(), 0);
        std::vector<u64> short_input(4, 0);
        CHECK_THROWS_AS(route_values(net, ok, short_input), std::invalid_argument);
    }

    SECTION("bijectivity fuzz across families") {
        SeededRng rng(77);
        for (const auto& net2 : {build_benes(4), build_arbitrary_benes(7), build_symmetric_npi(4),
                                 build_reduced_npi(4, 4)}) {
            for (int i = 0; i < 2000; ++i) {
                auto cfg = sample_configuration(net2, rng);
                CHECK(apply_configuration(net2, cfg).is_bijection());
            }
        }
    }
}

TEST_CASE("configuration sampling") {
    auto net = build_benes(2);

    SECTION("seed replay identity, different seeds differ") {
        SeededRng a(5), b(5), c(6);
        auto ca = sample_configuration(net, a);
        auto cb = sample_configuration(net, b);
        CHECK(ca.bits == cb.bits);
        bool any_diff = false;
        for (int i = 0; i < 20 && !any_diff; ++i) {
            any_diff = sample_configuration(net, c).bits != sample_configuration(net, b).bits;
        }
        CHECK(any_diff);
    }

    SECTION("marginal bit frequency 0.5 within 0.5% over 1e6 draws") {
        SeededRng rng(11);
        const int draws = 1000000;
        std::vector<u64> ones(net.config_bits(), 0);
        for (int i = 0; i < draws; ++i) {
            auto cfg = sample_configuration(net, rng);
            for (std::size_t k = 0; k < cfg.bits.size(); ++k) ones[k] += cfg.bits[k];
        }
        for (auto o : ones) {
            double f = static_cast<double>(o) / draws;
            CHECK(f > 0.495);
            CHECK(f < 0.505);
        }
    }
}

TEST_CASE("configuration matrix layout") {
    auto net = build_benes(3);
    Configuration cfg;
    cfg.bits.assign(net.config_bits(), 0);
    cfg.bits[0] = 1; // layer 0, gate row 0
    auto s = configuration_matrix_string(net, cfg);
    // 4 rows (gates per layer), 5 columns (layers)
    CHECK(std::count(s.begin(), s.end(), '\n') == 4);
    CHECK(s.substr(0, 9) == "1 0 0 0 0");
}

TEST_CASE("DOT export") {
    auto net = build_benes(2);
    auto dot = to_dot(net);
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("in0") != std::string::npos);
    CHECK(dot.find("out3") != std::string::npos);
    CHECK(dot.find("swap") != std::string::npos);
}
