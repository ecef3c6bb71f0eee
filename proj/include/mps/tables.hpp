#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mps/analysis.hpp"

namespace mps {

using ordered_json = nlohmann::ordered_json;

/// Published reference values the analysis commands compare against.
struct ZetaReferenceRow {
    std::uint32_t n, t, n1, n2; // n1 = n2 = 0 for Shuffle-I rows
    std::uint64_t reported;
};

inline const std::vector<ZetaReferenceRow>& zeta_reference_rows() {
    static const std::vector<ZetaReferenceRow> rows = {
        {128, 42, 0, 0, 433},    {256, 85, 0, 0, 1026},   {512, 170, 0, 0, 2319},
        {128, 42, 64, 2, 413},   {256, 85, 64, 4, 908},   {256, 85, 128, 2, 944},
        {512, 170, 64, 8, 2074}, {512, 170, 128, 4, 2146}, {512, 170, 256, 2, 2224},
    };
    return rows;
}

struct BirthdayReferenceRow {
    std::uint64_t n;
    double reported;
};

inline const std::vector<BirthdayReferenceRow>& birthday_reference_rows() {
    static const std::vector<BirthdayReferenceRow> rows = {
        {32, 0.0625}, {64, 0.0548}, {128, 0.0461}, {256, 0.0406}};
    return rows;
}

inline constexpr double kReportedOccurrenceMean = 26.0063;
inline constexpr double kReportedOccurrenceStddev = 1.622;

// ---------------------------------------------------------------------

inline ordered_json dist_table_json(const OccurrenceDistribution& dist) {
    ordered_json rows = ordered_json::array();
    for (const auto& [occ, nperm] : dist.histogram) {
        ordered_json row;
        row["permutations"] = nperm;
        row["occurrences"] = occ;
        rows.push_back(row);
    }
    ordered_json j;
    j["table"] = rows;
    j["total_configurations"] = dist.total_configs;
    j["distinct_permutations"] = dist.distinct_permutations;
    auto stats = distribution_stats(dist);
    j["mean"] = stats.mean;
    j["stddev"] = stats.stddev;
    return j;
}

inline std::string dist_table_csv(const OccurrenceDistribution& dist) {
    std::ostringstream os;
    os << "permutations,occurrences\n";
    for (const auto& [occ, nperm] : dist.histogram) os << nperm << ',' << occ << '\n';
    return os.str();
}

inline ordered_json fpi_table_json(std::uint64_t max_n) {
    ordered_json rows = ordered_json::array();
    for (std::uint64_t n = 1; n <= max_n; ++n) {
        ordered_json row;
        row["n"] = n;
        row["f_pi"] = f_pi(n).str();
        row["factorial"] = big_factorial(n).str();
        rows.push_back(row);
    }
    ordered_json j;
    j["table"] = rows;
    return j;
}

inline std::string fpi_table_csv(std::uint64_t max_n) {
    std::ostringstream os;
    os << "n,f_pi,factorial\n";
    for (std::uint64_t n = 1; n <= max_n; ++n) {
        os << n << ',' << f_pi(n).str() << ',' << big_factorial(n).str() << '\n';
    }
    return os.str();
}

inline ordered_json zeta_row_json(const UnlinkabilityReport& r, std::optional<std::uint64_t> reported) {
    ordered_json row;
    row["protocol"] = r.n1 ? "shuffle-two" : "shuffle-one";
    row["n"] = r.n;
    row["t"] = r.t;
    if (r.n1) {
        row["n1"] = r.n1;
        row["n2"] = r.n2;
        row["theta1"] = r.theta1;
        row["theta2"] = r.theta2;
    }
    row["count"] = r.count.str();
    row["zeta"] = r.zeta;
    if (reported) {
        row["reported"] = *reported;
        row["matches_reported"] = (*reported == r.zeta);
    }
    return row;
}

/// The full comparison table: every reference row evaluated exactly.
inline ordered_json zeta_table_json() {
    ordered_json rows = ordered_json::array();
    for (const auto& ref : zeta_reference_rows()) {
        UnlinkabilityReport r = ref.n1 ? zeta_shuffle_two(ref.n1, ref.n2, ref.t)
                                       : zeta_shuffle_one(ref.n, ref.t);
        rows.push_back(zeta_row_json(r, ref.reported));
    }
    ordered_json j;
    j["table"] = rows;
    return j;
}

inline std::string zeta_table_csv() {
    std::ostringstream os;
    os << "protocol,n,t,n1,n2,zeta,reported,matches_reported\n";
    for (const auto& ref : zeta_reference_rows()) {
        UnlinkabilityReport r = ref.n1 ? zeta_shuffle_two(ref.n1, ref.n2, ref.t)
                                       : zeta_shuffle_one(ref.n, ref.t);
        os << (ref.n1 ? "shuffle-two" : "shuffle-one") << ',' << ref.n << ',' << ref.t << ','
           << ref.n1 << ',' << ref.n2 << ',' << r.zeta << ',' << ref.reported << ','
           << (r.zeta == ref.reported ? "yes" : "no") << '\n';
    }
    return os.str();
}

inline ordered_json birthday_table_json() {
    ordered_json rows = ordered_json::array();
    for (const auto& ref : birthday_reference_rows()) {
        std::uint64_t q = birthday_seed_space(ref.n);
        auto r = birthday_probability(ref.n, q);
        ordered_json row;
        row["n"] = ref.n;
        row["q"] = q;
        row["p_approx"] = r.approx;
        row["p_exact"] = r.exact;
        row["reported"] = ref.reported;
        row["matches_reported"] = std::fabs(r.approx - ref.reported) <= 5e-4;
        rows.push_back(row);
    }
    ordered_json j;
    j["table"] = rows;
    return j;
}

inline std::string birthday_table_csv() {
    std::ostringstream os;
    os << "n,q,p_approx,p_exact,reported,matches_reported\n";
    for (const auto& ref : birthday_reference_rows()) {
        std::uint64_t q = birthday_seed_space(ref.n);
        auto r = birthday_probability(ref.n, q);
        os << ref.n << ',' << q << ',' << r.approx << ',' << r.exact << ',' << ref.reported << ','
           << (std::fabs(r.approx - ref.reported) <= 5e-4 ? "yes" : "no") << '\n';
    }
    return os.str();
}

inline ordered_json stats_summary_json(const OccurrenceDistribution& dist) {
    auto s = distribution_stats(dist);
    ordered_json j;
    j["mean"] = s.mean;
    j["stddev"] = s.stddev;
    j["reported_mean"] = kReportedOccurrenceMean;
    j["reported_stddev"] = kReportedOccurrenceStddev;
    j["mean_matches_reported"] = std::fabs(s.mean - kReportedOccurrenceMean) <= 1e-4;
    j["stddev_matches_reported"] = std::fabs(s.stddev - kReportedOccurrenceStddev) <= 1e-3;
    return j;
}

} // namespace mps
