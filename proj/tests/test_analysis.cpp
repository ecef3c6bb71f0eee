#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mps/analysis.hpp"
#include "mps/tables.hpp"

using namespace mps;

TEST_CASE("distribution of a single gate") {
    auto dist = enumerate_distribution(build_benes(1));
    CHECK(dist.total_configs == 2);
    CHECK(dist.distinct_permutations == 2);
    REQUIRE(dist.histogram.size() == 1);
    CHECK(dist.histogram.at(1) == 2);
}

TEST_CASE("d=2 distribution covers all 24 permutations") {
    auto dist = enumerate_distribution(build_benes(2));
    CHECK(dist.total_configs == 64);
    CHECK(dist.distinct_permutations == 24);
    u64 mass = 0;
    for (const auto& [occ, nperm] : dist.histogram) mass += occ * nperm;
    CHECK(mass == 64);
}

TEST_CASE("d=3 distribution reproduces the reference table exactly") {
    auto dist = enumerate_distribution(build_benes(3));
    CHECK(dist.total_configs == 1048576);
    CHECK(dist.distinct_permutations == 40320);
    std::map<u64, u64> expect = {{8, 8192},  {16, 14336}, {32, 12288}, {40, 2048},
                                 {64, 2816}, {128, 512},  {256, 128}};
    CHECK(dist.histogram == expect);
}

TEST_CASE("histogram mass conservation across families") {
    for (const auto& net :
         {build_benes(2), build_arbitrary_benes(5), build_symmetric_npi(2), build_reduced_npi(2, 2)}) {
        auto dist = enumerate_distribution(net);
        u64 mass = 0;
        for (const auto& [occ, nperm] : dist.histogram) mass += occ * nperm;
        CHECK(mass == dist.total_configs);
        CHECK(dist.total_configs == (u64{1} << net.config_bits()));
    }
}

TEST_CASE("enumeration budget") {
    CHECK_THROWS_AS(enumerate_distribution(build_benes(3), 10), budget_exceeded);
    CHECK_THROWS_AS(enumerate_multiplicities(build_benes(5), 24), budget_exceeded);
}

TEST_CASE("distribution statistics") {
    auto dist = enumerate_distribution(build_benes(3));
    auto stats = distribution_stats(dist);
    CHECK(std::fabs(stats.mean - 26.0063) < 1e-4);

    // exact stddev from the enumerated histogram (the reported 1.622
    // does not follow from the table; ours is the direct computation)
    double mean = 1048576.0 / 40320.0;
    double var = 0.0;
    for (const auto& [occ, nperm] : dist.histogram) {
        var += static_cast<double>(nperm) * (occ - mean) * (occ - mean);
    }
    var /= 40320.0;
    CHECK(stats.stddev == Catch::Approx(std::sqrt(var)).epsilon(1e-12));
    CHECK(std::fabs(stats.stddev - kReportedOccurrenceStddev) > 1.0); // documented mismatch

    SECTION("uniform histogram has zero spread") {
        OccurrenceDistribution uniform;
        uniform.histogram[4] = 6;
        uniform.total_configs = 24;
        uniform.distinct_permutations = 6;
        auto s = distribution_stats(uniform);
        CHECK(s.mean == 4.0);
        CHECK(s.stddev == 0.0);
    }
}

TEST_CASE("f_pi recursion") {
    CHECK(f_pi(1) == 1);
    CHECK(f_pi(2) == 2);
    CHECK(f_pi(3) == 6);
    CHECK(f_pi(6) == 48);          // 2*4*f_pi(3)
    CHECK(f_pi(8) == 40320);       // power of two: 8!
    CHECK(f_pi(12) == 31933440);   // 12*11*10*9*8*7 * f_pi(6)

    SECTION("powers of two give the full factorial") {
        for (u64 k = 1; k <= 5; ++k) {
            CHECK(f_pi(u64{1} << k) == big_factorial(u64{1} << k));
        }
    }

    SECTION("bounded by N! for all N <= 64") {
        for (u64 n = 1; n <= 64; ++n) CHECK(f_pi(n) <= big_factorial(n));
    }
}

TEST_CASE("zeta for Shuffle-I") {
    CHECK(zeta_shuffle_one(128, 42).zeta == 433);
    CHECK(zeta_shuffle_one(256, 85).zeta == 1026);
    CHECK(zeta_shuffle_one(512, 170).zeta == 2391); // reference reports 2319; exact value differs

    SECTION("t = n-1 leaves one consistent permutation") {
        auto r = zeta_shuffle_one(8, 7);
        CHECK(r.count == 1);
        CHECK(r.zeta == 0);
    }

    SECTION("blocking topology uses f_pi") {
        auto r = zeta_shuffle_one(6, 0, false);
        CHECK(r.count == 48);
        CHECK(r.zeta == 5);
    }

    SECTION("monotone non-increasing in t") {
        u64 prev = zeta_shuffle_one(64, 0).zeta;
        for (std::uint32_t t = 1; t < 64; ++t) {
            u64 z = zeta_shuffle_one(64, t).zeta;
            CHECK(z <= prev);
            prev = z;
        }
    }

    SECTION("floating-point Stirling estimate agrees within one bit") {
        for (std::uint32_t n : {16u, 64u, 86u, 171u, 342u}) {
            auto r = zeta_shuffle_one(n, 0);
            double est = log2_factorial_stirling(n);
            CHECK(std::fabs(est - static_cast<double>(r.zeta)) <= 1.0);
        }
    }
}

TEST_CASE("zeta for Shuffle-II") {
    SECTION("no corruption, n1=4, n2=2") {
        auto r = zeta_shuffle_two(4, 2, 0);
        CHECK(r.theta1 == 0);
        CHECK(r.theta2 == 4);
        CHECK(r.count == 9216); // (4!)^2 * 2^4
        CHECK(r.zeta == 13);
    }

    SECTION("reference row n=128, n1=64, n2=2, t=42") {
        auto r = zeta_shuffle_two(64, 2, 42);
        CHECK(r.theta1 == 21);
        CHECK(r.theta2 == 43);
        CHECK(r.zeta == 393); // reference reports 413; mismatch is reported, not asserted
    }

    SECTION("fully corrupted degenerate case") {
        auto r = zeta_shuffle_two(4, 2, 8);
        CHECK(r.theta1 == 4);
        CHECK(r.theta2 == 0);
        CHECK(r.count == 1);
        CHECK(r.zeta == 0);
    }

    CHECK_THROWS_AS(zeta_shuffle_two(4, 3, 0), std::invalid_argument);
}

TEST_CASE("birthday probabilities") {
    auto r32 = birthday_probability(32, 7680);
    CHECK(std::fabs(r32.approx - 0.0625) <= 5e-4);
    auto r128 = birthday_probability(128, 172032);
    CHECK(std::fabs(r128.approx - 0.0461) <= 5e-4);
    auto r256 = birthday_probability(256, 786432);
    CHECK(std::fabs(r256.approx - 0.0406) <= 5e-4);

    // the n=64 row disagrees with the reference beyond the tolerance
    auto r64 = birthday_probability(64, 36864);
    CHECK(std::fabs(r64.approx - 0.0548) > 5e-4);

    SECTION("two samples in a large space collide with probability ~ 1/q") {
        auto r = birthday_probability(2, 1u << 20);
        CHECK(r.exact == Catch::Approx(1.0 / (1u << 20)).epsilon(1e-9));
        CHECK(r.approx == Catch::Approx(r.exact).margin(1e-9));
    }

    SECTION("approx and exact agree closely on the table rows") {
        for (u64 n : {32ULL, 64ULL, 128ULL, 256ULL}) {
            auto r = birthday_probability(n, birthday_seed_space(n));
            CHECK(std::fabs(r.approx - r.exact) < 2e-4);
        }
    }

    CHECK_THROWS_AS(birthday_probability(1, 100), std::invalid_argument);
    CHECK_THROWS_AS(birthday_probability(64, 63), std::invalid_argument);
}

TEST_CASE("seed space sizes") {
    CHECK(birthday_seed_space(32) == 7680);
    CHECK(birthday_seed_space(64) == 36864);
    CHECK(birthday_seed_space(128) == 172032);
    CHECK(birthday_seed_space(256) == 786432);
}

TEST_CASE("consistent permutation count at d=3") {
    auto net = build_benes(3);
    CHECK(consistent_permutation_count(net, {}) == 40320);
    CHECK(consistent_permutation_count(net, {0, 1, 2, 3, 4, 5, 6, 7}) == 1);
    CHECK(consistent_permutation_count(net, {0, 1}) == 720); // bounded by (n-t)! = 6!
}

TEST_CASE("table emitters") {
    SECTION("distribution table schema") {
        auto dist = enumerate_distribution(build_benes(2));
        auto j = dist_table_json(dist);
        REQUIRE(j.contains("table"));
        CHECK(j["total_configurations"] == 64);
        CHECK(j["distinct_permutations"] == 24);
        auto csv = dist_table_csv(dist);
        CHECK(csv.rfind("permutations,occurrences\n", 0) == 0);
    }

    SECTION("zeta table flags the documented mismatches") {
        auto j = zeta_table_json();
        const auto& rows = j["table"];
        REQUIRE(rows.size() == 9);
        CHECK(rows[0]["zeta"] == 433);
        CHECK(rows[0]["matches_reported"] == true);
        CHECK(rows[1]["matches_reported"] == true);
        CHECK(rows[2]["zeta"] == 2391);
        CHECK(rows[2]["matches_reported"] == false);
        // counts are serialized as decimal strings
        CHECK(rows[0]["count"].is_string());
    }

    SECTION("birthday table flags only the n=64 row") {
        auto j = birthday_table_json();
        const auto& rows = j["table"];
        REQUIRE(rows.size() == 4);
        CHECK(rows[0]["matches_reported"] == true);
        CHECK(rows[1]["matches_reported"] == false);
        CHECK(rows[2]["matches_reported"] == true);
        CHECK(rows[3]["matches_reported"] == true);
    }

    SECTION("stats summary") {
        auto j = stats_summary_json(enumerate_distribution(build_benes(3)));
        CHECK(j["mean_matches_reported"] == true);
        CHECK(j["stddev_matches_reported"] == false);
    }

    SECTION("f_pi table") {
        auto j = fpi_table_json(8);
        REQUIRE(j["table"].size() == 8);
        CHECK(j["table"][5]["f_pi"] == "48");
        CHECK(j["table"][7]["f_pi"] == "40320");
    }
}
