#include <catch2/catch_amalgamated.hpp>

#include <memory>

#include "mps/mpc_ops.hpp"
#include "mps/stats.hpp"

using namespace mps;

namespace {

/// Harness: n parties, n quorums, each quorum containing everyone.
struct Harness {
    std::unique_ptr<Network> net;
    std::unique_ptr<MpcEngine> engine;

    Harness(std::uint32_t n, u64 p = kDefaultModulus, u64 seed = 1,
            std::vector<std::uint32_t> corrupted = {}) {
        NetConfig cfg;
        cfg.n = n;
        cfg.p = p;
        cfg.seed = seed;
        cfg.quorum_size = n;
        cfg.corrupted = std::move(corrupted);
        net = std::make_unique<Network>(cfg);
        engine = std::make_unique<MpcEngine>(*net, net->build_quorums());
    }

    SharedSecret deal(u64 secret, std::uint32_t q = 1) { return engine->deal(1, q, secret); }
    u64 open(const SharedSecret& x) { return engine->god_reconstruct(x).value(); }
    std::uint32_t rounds() const { return net->round(); }
};

} // namespace

TEST_CASE("addition is local and exact") {
    Harness h(4);
    const u64 p = kDefaultModulus;
    auto x = h.deal(123456);
    auto zero = h.deal(0);
    auto minus = h.deal(p - 123456);

    std::uint32_t before = h.rounds();
    auto a = h.engine->mpc_add(x, zero);
    auto b = h.engine->mpc_add(x, minus);
    CHECK(h.rounds() == before); // zero communication rounds
    CHECK(h.open(a) == 123456);
    CHECK(h.open(b) == 0);

    SeededRng rng(5);
    for (int i = 0; i < 100; ++i) {
        u64 u = rng.below(p), v = rng.below(p);
        auto s = h.engine->mpc_add(h.deal(u), h.deal(v));
        CHECK(h.open(s) == (Fp(u, p) + Fp(v, p)).value());
    }
}

TEST_CASE("addition requires matching quorums") {
    Harness h(4);
    auto x = h.deal(1, 1);
    auto y = h.deal(2, 2);
    CHECK_THROWS_AS(h.engine->mpc_add(x, y), std::invalid_argument);
}

TEST_CASE("constant multiplication") {
    Harness h(4);
    const u64 p = kDefaultModulus;
    auto y = h.deal(987);
    CHECK(h.open(h.engine->mpc_cmul(Fp::one(p), y)) == 987);
    CHECK(h.open(h.engine->mpc_cmul(Fp::zero(p), y)) == 0);
    SeededRng rng(6);
    for (int i = 0; i < 100; ++i) {
        u64 c = rng.below(p), v = rng.below(p);
        auto z = h.engine->mpc_cmul(Fp(c, p), h.deal(v));
        CHECK(h.open(z) == (Fp(c, p) * Fp(v, p)).value());
    }
}

TEST_CASE("multiplication with degree reduction") {
    Harness h(4);
    const u64 p = kDefaultModulus;
    auto y = h.deal(31337);
    CHECK(h.open(h.engine->mpc_mul(h.deal(0), y)) == 0);
    CHECK(h.open(h.engine->mpc_mul(h.deal(1), y)) == 31337);

    SeededRng rng(7);
    for (int i = 0; i < 200; ++i) {
        u64 u = rng.below(p), v = rng.below(p);
        auto a = h.deal(u);
        auto b = h.deal(v);
        std::uint32_t before = h.rounds();
        auto c = h.engine->mpc_mul(a, b);
        CHECK(h.rounds() == before + 1); // exactly one round
        CHECK(h.open(c) == (Fp(u, p) * Fp(v, p)).value());
    }
}

TEST_CASE("rand sums the members' private contributions") {
    SECTION("all contributions forced to zero") {
        Harness h(4);
        for (std::uint32_t pi = 1; pi <= 4; ++pi) h.engine->rand_override[pi] = 0;
        auto r = h.engine->mpc_rand(1);
        CHECK(h.open(r) == 0);
    }

    SECTION("one round of communication") {
        Harness h(4);
        std::uint32_t before = h.rounds();
        h.engine->mpc_rand(1);
        CHECK(h.rounds() == before + 1);
    }

    SECTION("single honest contributor keeps the output uniform") {
        // adversarial members contributing fixed zeros must not bias
        // the sum while one honest contributor stays uniform
        const u64 p = 257;
        std::vector<double> observed(p, 0.0);
        const int trials = 10000;
        for (int i = 0; i < trials; ++i) {
            Harness h(4, p, 5000 + i);
            h.engine->rand_override[1] = 0;
            h.engine->rand_override[2] = 0;
            h.engine->rand_override[3] = 0;
            observed[h.open(h.engine->mpc_rand(1))] += 1.0;
        }
        std::vector<double> expected(p, static_cast<double>(trials) / static_cast<double>(p));
        auto r = chi_square_gof(observed, expected);
        CHECK(r.p_value > 0.01);
    }

    SECTION("deterministic replay under a fixed seed") {
        Harness a(4, kDefaultModulus, 77), b(4, kDefaultModulus, 77);
        CHECK(a.open(a.engine->mpc_rand(1)) == b.open(b.engine->mpc_rand(1)));
    }
}

TEST_CASE("rand2 produces unbiased shared bits") {
    SECTION("output is always a bit, 2000 seeded runs") {
        for (int i = 0; i < 2000; ++i) {
            Harness h(4, 257, 42 + i);
            u64 b = h.open(h.engine->mpc_rand2(1));
            CHECK((b == 0 || b == 1));
        }
    }

    SECTION("two rounds when no retry occurs") {
        Harness h(4, kDefaultModulus, 5);
        std::uint32_t before = h.rounds();
        h.engine->mpc_rand2(1);
        CHECK(h.rounds() == before + 2);
    }

    SECTION("frequency of 1 within 1% of 0.5 over 1e5 runs") {
        const int trials = 100000;
        int ones = 0;
        Harness h(4, 257, 99);
        for (int i = 0; i < trials; ++i) ones += static_cast<int>(h.open(h.engine->mpc_rand2(1)));
        double freq = static_cast<double>(ones) / trials;
        INFO("freq = " << freq);
        CHECK(freq > 0.495);
        CHECK(freq < 0.505);
    }

    SECTION("canonical root makes b the sign class of r") {
        const u64 p = 257;
        for (u64 r0 : {5ULL, 100ULL, 128ULL, 129ULL, 200ULL, 256ULL}) {
            Harness h(4, p, 3);
            h.engine->rand_override[1] = r0;
            h.engine->rand_override[2] = 0;
            h.engine->rand_override[3] = 0;
            h.engine->rand_override[4] = 0;
            u64 b = h.open(h.engine->mpc_rand2(1));
            u64 expect = (r0 >= 1 && r0 <= (p - 1) / 2) ? 1 : 0;
            CHECK(b == expect);
        }
    }
}

TEST_CASE("inverse by mask-and-open") {
    Harness h(4);
    const u64 p = kDefaultModulus;
    CHECK(h.open(h.engine->mpc_inv(h.deal(1))) == 1);

    SeededRng rng(8);
    for (int i = 0; i < 100; ++i) {
        u64 v = 1 + rng.below(p - 1);
        auto x = h.deal(v);
        std::uint32_t before = h.rounds();
        auto ix = h.engine->mpc_inv(x);
        CHECK(h.rounds() == before + 2);
        CHECK(h.open(h.engine->mpc_mul(x, ix)) == 1);
    }

    SECTION("secret zero aborts after the retry budget") {
        auto zero = h.deal(0);
        CHECK_THROWS_AS(h.engine->mpc_inv(zero), protocol_abort);
    }
}

TEST_CASE("random swap") {
    const u64 p = kDefaultModulus;

    SECTION("equal inputs are swap-invariant") {
        Harness h(4);
        auto [a, b] = h.engine->random_swap(h.deal(55), h.deal(55));
        CHECK(h.open(a) == 55);
        CHECK(h.open(b) == 55);
    }

    SECTION("forced coins produce the exact pair") {
        Harness h(4);
        auto x = h.deal(10);
        auto y = h.deal(20);
        auto [a0, b0] = h.engine->random_swap(x, y, std::uint8_t{0});
        CHECK(h.open(a0) == 10);
        CHECK(h.open(b0) == 20);
        auto [a1, b1] = h.engine->random_swap(x, y, std::uint8_t{1});
        CHECK(h.open(a1) == 20);
        CHECK(h.open(b1) == 10);
    }

    SECTION("three rounds exactly") {
        Harness h(4);
        auto x = h.deal(1);
        auto y = h.deal(2);
        std::uint32_t before = h.rounds();
        h.engine->random_swap(x, y);
        CHECK(h.rounds() == before + 3);
    }

    SECTION("multiset preserved and order swapped about half the time") {
        const int trials = 10000;
        int swapped = 0;
        Harness h(4, 257, 2024);
        for (int i = 0; i < trials; ++i) {
            auto x = h.deal(7);
            auto y = h.deal(9);
            std::uint8_t coin = 0;
            auto [a, b] = h.engine->random_swap(x, y, std::nullopt, &coin);
            u64 av = h.open(a), bv = h.open(b);
            if (coin) {
                CHECK(av == 9);
                CHECK(bv == 7);
                ++swapped;
            } else {
                CHECK(av == 7);
                CHECK(bv == 9);
            }
        }
        double freq = static_cast<double>(swapped) / trials;
        CHECK(freq > 0.48);
        CHECK(freq < 0.52);
    }
    (void)p;
}

TEST_CASE("resharing preserves the secret with fresh shares") {
    Harness h(6);
    const u64 p = kDefaultModulus;
    SeededRng rng(10);

    SECTION("round trip over 200 random secrets") {
        for (int i = 0; i < 200; ++i) {
            u64 v = rng.below(p);
            auto x = h.deal(v, 1);
            std::uint32_t before = h.rounds();
            auto y = h.engine->reshare(x, 2);
            CHECK(h.rounds() == before + 1);
            CHECK(h.open(y) == v);
        }
    }

    SECTION("reshare to the same quorum refreshes share values") {
        auto x = h.deal(4242, 1);
        auto y = h.engine->reshare(x, 1);
        CHECK(h.open(y) == 4242);
        for (std::size_t i = 0; i < x.shares.size(); ++i) CHECK(x.shares[i] != y.shares[i]);
    }

    SECTION("chained reshare across 5 quorums") {
        auto x = h.deal(31415, 1);
        for (std::uint32_t q = 2; q <= 6; ++q) x = h.engine->reshare(x, q);
        CHECK(h.open(x) == 31415);
    }
}

TEST_CASE("tampered sub-sharing is detected and aborts") {
    NetConfig cfg;
    cfg.n = 4;
    cfg.p = kDefaultModulus;
    cfg.seed = 3;
    cfg.quorum_size = 4;
    cfg.tamper = TamperRule{0, 1, 3, 0, 1}; // corrupt dealer 1's share to party 3 in round 0
    Network net(cfg);
    MpcEngine engine(net, net.build_quorums());
    u64 ctx = engine.emit_deal(1, 1, 1234, engine.quorum(1).threshold - 1);
    net.deliver_round();
    CHECK_THROWS_AS(engine.collect_deal(ctx, 1, 1), protocol_abort);
}

TEST_CASE("crash mid-protocol aborts the operation") {
    NetConfig cfg;
    cfg.n = 4;
    cfg.p = kDefaultModulus;
    cfg.seed = 3;
    cfg.quorum_size = 4;
    cfg.crash = CrashRule{2, 0};
    Network net(cfg);
    MpcEngine engine(net, net.build_quorums());
    u64 ctx = engine.emit_rand(1);
    net.deliver_round();
    CHECK_THROWS_AS(engine.collect_rand(ctx, 1), protocol_abort);
}

TEST_CASE("multiplication requires at least 2t-1 members") {
    Harness h(4);
    auto x = h.deal(3);
    auto y = h.deal(4);
    auto bad_x = x;
    auto bad_y = y;
    bad_x.threshold = 4; // 2t-1 = 7 > quorum size 4
    bad_y.threshold = 4;
    CHECK_THROWS_AS(h.engine->mpc_mul(bad_x, bad_y), std::invalid_argument);
}
