#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mps/errors.hpp"
#include "mps/field.hpp"
#include "mps/rng.hpp"

namespace mps {

enum class MsgKind : std::uint8_t {
    InputDeal,
    RandDeal,
    Open,
    MulReshare,
    ReshareDeal,
    OutputShare,
};

/// Inline payload; protocol messages carry at most a couple of field
/// values, so no heap traffic on the hot path.
struct Payload {
    std::uint8_t count = 0;
    std::array<u64, 2> v{};

    void push_back(u64 x) {
        if (count >= v.size()) throw std::logic_error("payload overflow");
        v[count++] = x;
    }
    u64 operator[](std::size_t i) const { return v[i]; }
    std::uint8_t size() const { return count; }
};

struct Message {
    std::uint32_t from = 0; // 1-based party indices
    std::uint32_t to = 0;
    std::uint32_t round = 0; // round in which the message was sent
    MsgKind kind = MsgKind::InputDeal;
    u64 ctx = 0; // protocol context id, disambiguates concurrent ops
    Payload payload;
};

/// A committee operating gates on behalf of all parties. `threshold`
/// is the sharing threshold used inside the quorum: ceil(s/2), which
/// keeps any corrupted strict minority below the reconstruction bound
/// while leaving s >= 2t-1 members for multiplication.
struct Quorum {
    std::uint32_t id = 0; // 1-based
    std::vector<std::uint32_t> members;
    std::uint32_t threshold = 0;

    std::uint32_t size() const { return static_cast<std::uint32_t>(members.size()); }
};

/// Everything a party would see: its inputs, its own randomness
/// outcomes, and every message it received (with round tags).
struct PartyView {
    std::vector<u64> inputs;
    std::vector<u64> coins;
    std::vector<Message> received;
};

struct CrashRule {
    std::uint32_t party = 0;      // 1-based
    std::uint32_t from_round = 0; // sends are suppressed from this round on
};

struct TamperRule {
    std::uint32_t round = 0;
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    std::uint32_t value_index = 0;
    u64 delta = 1; // added mod p while the message is in transit
};

struct NetConfig {
    std::uint32_t n = 0;
    u64 p = kDefaultModulus;
    u64 seed = 1;
    std::optional<u64> quorum_seed;
    std::uint32_t quorum_size = 0; // 0 => min(n, 3 * ceil(log2 n))
    std::uint32_t quorum_cap = 0;  // 0 => 2 * quorum_size
    std::vector<std::uint32_t> corrupted;
    std::optional<CrashRule> crash;
    std::optional<TamperRule> tamper;
    bool record_transcript = false; // keep every delivered message
    bool record_coins = false;      // log parties' raw randomness draws into views
};

inline std::uint32_t default_quorum_size(std::uint32_t n) {
    std::uint32_t lg = 0;
    while ((std::uint32_t{1} << lg) < n) ++lg; // ceil(log2 n)
    if (lg == 0) lg = 1;
    return std::min(n, 3 * lg);
}

/// Seeded good-quorum assignment: n quorums of the given size such
/// that corrupted members are a strict minority in every quorum and no
/// party exceeds the load cap. Resamples until the constraints hold;
/// deterministic for a given seed.
inline std::vector<Quorum> quorum_gen(std::uint32_t n, const std::vector<bool>& corrupted,
                                      std::uint32_t size, std::uint32_t cap, u64 seed) {
    if (size == 0 || size > n) throw std::invalid_argument("bad quorum size");
    if (cap < size) throw std::invalid_argument("load cap below quorum size");
    SeededRng root(seed);
    for (std::uint32_t attempt = 0; attempt < 512; ++attempt) {
        SeededRng rng = root.derive(attempt);
        std::vector<std::uint32_t> load(n + 1, 0);
        std::vector<Quorum> quorums;
        quorums.reserve(n);
        bool ok = true;
        for (std::uint32_t q = 1; q <= n && ok; ++q) {
            bool formed = false;
            for (std::uint32_t tries = 0; tries < 256 && !formed; ++tries) {
                std::vector<std::uint32_t> candidates;
                for (std::uint32_t pi = 1; pi <= n; ++pi) {
                    if (load[pi] < cap) candidates.push_back(pi);
                }
                if (candidates.size() < size) break;
                // partial Fisher-Yates draw of `size` members
                std::vector<std::uint32_t> members;
                for (std::uint32_t k = 0; k < size; ++k) {
                    std::size_t j = k + static_cast<std::size_t>(rng.below(candidates.size() - k));
                    std::swap(candidates[k], candidates[j]);
                    members.push_back(candidates[k]);
                }
                std::uint32_t bad = 0;
                for (auto m : members) {
                    if (m - 1 < corrupted.size() && corrupted[m - 1]) ++bad;
                }
                if (2 * bad >= size) continue; // corrupted must be a strict minority
                std::sort(members.begin(), members.end());
                for (auto m : members) ++load[m];
                Quorum quo;
                quo.id = q;
                quo.members = std::move(members);
                quo.threshold = (size + 1) / 2;
                quorums.push_back(std::move(quo));
                formed = true;
            }
            if (!formed) ok = false;
        }
        if (ok) return quorums;
    }
    throw std::runtime_error("quorum constraints unsatisfiable after bounded retries");
}

/// Deterministic simulation of n synchronous parties with
/// authenticated-private pairwise channels and a global round barrier.
class Network {
public:
    explicit Network(NetConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.n == 0) throw std::invalid_argument("need at least one party");
        if (cfg_.p < 3 || !is_prime_u64(cfg_.p)) throw std::invalid_argument("modulus must be an odd prime");
        if (cfg_.p <= cfg_.n) throw std::invalid_argument("modulus must exceed party count");
        parties_.resize(cfg_.n);
        views_.resize(cfg_.n);
        SeededRng root(cfg_.seed);
        for (std::uint32_t i = 0; i < cfg_.n; ++i) {
            parties_[i].rng = root.derive(0x100 + i);
        }
        corrupted_.assign(cfg_.n, false);
        for (auto pi : cfg_.corrupted) mark_corrupted(pi);
        if (cfg_.crash) {
            if (cfg_.crash->party == 0 || cfg_.crash->party > cfg_.n) {
                throw std::invalid_argument("crash party out of range");
            }
            parties_[cfg_.crash->party - 1].crashed_from = cfg_.crash->from_round;
        }
    }

    const NetConfig& config() const { return cfg_; }
    std::uint32_t n() const { return cfg_.n; }
    u64 modulus() const { return cfg_.p; }
    std::uint32_t round() const { return round_; }
    bool started() const { return started_; }

    bool is_corrupted(std::uint32_t party) const { return corrupted_.at(party - 1); }
    const std::vector<bool>& corrupted_flags() const { return corrupted_; }
    std::uint32_t corrupted_count() const {
        return static_cast<std::uint32_t>(std::count(corrupted_.begin(), corrupted_.end(), true));
    }

    /// Static corruption marking; only before the protocol starts, and
    /// the total must stay strictly below n/3.
    void corrupt(const std::vector<std::uint32_t>& parties) {
        if (started_) throw std::logic_error("corruption after protocol start");
        for (auto pi : parties) mark_corrupted(pi);
    }

    void record_input(std::uint32_t party, u64 value) { views_.at(party - 1).inputs.push_back(value); }

    /// Party's private uniform draw from [0, p); logged as one of its
    /// coin outcomes when coin recording is on.
    u64 draw(std::uint32_t party) {
        u64 x = parties_.at(party - 1).rng.below(cfg_.p);
        if (cfg_.record_coins) views_[party - 1].coins.push_back(x);
        return x;
    }

    void send(std::uint32_t from, std::uint32_t to, MsgKind kind, u64 ctx, Payload payload) {
        if (from == 0 || from > cfg_.n || to == 0 || to > cfg_.n) {
            throw std::invalid_argument("send to unknown party");
        }
        started_ = true;
        const auto& p = parties_[from - 1];
        if (round_ >= p.crashed_from) return; // crashed parties stop sending
        Message m;
        m.from = from;
        m.to = to;
        m.round = round_;
        m.kind = kind;
        m.ctx = ctx;
        m.payload = payload;
        pending_.push_back(std::move(m));
    }

    /// Atomically move all sent messages to inboxes and advance the
    /// clock. Nothing sent in round r is readable before this barrier.
    void deliver_round() {
        started_ = true;
        for (auto& p : parties_) p.inbox.clear();
        for (auto& m : pending_) {
            if (cfg_.tamper && cfg_.tamper->round == m.round && cfg_.tamper->from == m.from &&
                cfg_.tamper->to == m.to && cfg_.tamper->value_index < m.payload.size()) {
                m.payload.v[cfg_.tamper->value_index] =
                    (m.payload.v[cfg_.tamper->value_index] + cfg_.tamper->delta) % cfg_.p;
            }
            if (cfg_.record_transcript) transcript_.push_back(m);
            if (corrupted_[m.to - 1] || cfg_.record_transcript) {
                views_[m.to - 1].received.push_back(m);
            }
            parties_[m.to - 1].inbox.push_back(std::move(m));
        }
        pending_.clear();
        ++round_;
    }

    const std::vector<Message>& inbox(std::uint32_t party) const { return parties_.at(party - 1).inbox; }

    /// Message from a specific sender in the current inbox, or null.
    const Message* find_message(std::uint32_t to, std::uint32_t from, MsgKind kind, u64 ctx) const {
        for (const auto& m : parties_.at(to - 1).inbox) {
            if (m.from == from && m.kind == kind && m.ctx == ctx) return &m;
        }
        return nullptr;
    }

    const std::vector<Message>& transcript() const { return transcript_; }
    const PartyView& view(std::uint32_t party) const { return views_.at(party - 1); }

    std::vector<Quorum> build_quorums() const {
        std::uint32_t size = cfg_.quorum_size ? cfg_.quorum_size : default_quorum_size(cfg_.n);
        std::uint32_t cap = cfg_.quorum_cap ? cfg_.quorum_cap : 2 * size;
        u64 qseed = cfg_.quorum_seed ? *cfg_.quorum_seed : SeededRng(cfg_.seed).derive(0x71).next_u64();
        return quorum_gen(cfg_.n, corrupted_, size, cap, qseed);
    }

    /// JSON-lines dump: one line per delivered message with a payload
    /// digest (requires record_transcript).
    void transcript_jsonl(std::ostream& os) const {
        for (const auto& m : transcript_) {
            os << "{\"round\":" << m.round << ",\"from\":" << m.from << ",\"to\":" << m.to
               << ",\"digest\":\"" << payload_digest(m.payload) << "\"}\n";
        }
    }

    static std::string payload_digest(const Payload& p) {
        u64 h = 0xcbf29ce484222325ULL; // FNV-1a over little-endian bytes
        for (std::uint8_t i = 0; i < p.size(); ++i) {
            u64 x = p[i];
            for (int b = 0; b < 8; ++b) {
                h ^= (x >> (8 * b)) & 0xff;
                h *= 0x100000001b3ULL;
            }
        }
        char buf[17];
        static const char* hex = "0123456789abcdef";
        for (int i = 0; i < 16; ++i) buf[15 - i] = hex[(h >> (4 * i)) & 0xf];
        buf[16] = '\0';
        return std::string(buf);
    }

private:
    struct PartyState {
        SeededRng rng;
        std::uint32_t crashed_from = std::numeric_limits<std::uint32_t>::max();
        std::vector<Message> inbox;
    };

    void mark_corrupted(std::uint32_t party) {
        if (party == 0 || party > cfg_.n) throw std::invalid_argument("corrupted party out of range");
        if (!corrupted_[party - 1]) {
            std::uint32_t t = corrupted_count() + 1;
            if (3 * t >= cfg_.n) throw std::invalid_argument("corruption bound t < n/3 exceeded");
            corrupted_[party - 1] = true;
        }
    }

    NetConfig cfg_;
    std::vector<PartyState> parties_;
    std::vector<PartyView> views_;
    std::vector<bool> corrupted_;
    std::vector<Message> pending_;
    std::vector<Message> transcript_;
    std::uint32_t round_ = 0;
    bool started_ = false;
};

} // namespace mps
