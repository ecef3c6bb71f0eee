#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mps/errors.hpp"
#include "mps/field.hpp"
#include "mps/runtime.hpp"
#include "mps/sharing.hpp"

namespace mps {

/// A secret shared inside one quorum. Shares are indexed by member
/// rank (parallel to Quorum::members); each share logically lives with
/// its member and every update to it travels through the network.
struct SharedSecret {
    std::uint32_t quorum = 0;
    std::uint32_t threshold = 0;
    std::vector<Fp> shares;
};

/// Shared-value arithmetic over the runtime. Operations come in
/// emit/collect halves so a layer of independent gates can share
/// rounds; the single-op wrappers drive one deliver per phase.
class MpcEngine {
public:
    MpcEngine(Network& net, std::vector<Quorum> quorums)
        : net_(net), quorums_(std::move(quorums)), p_(net.modulus()) {
        if (p_ < 3) throw std::invalid_argument("p=2 unsupported");
        inv2_ = inv_element(Fp(2, p_));
        rank_.resize(quorums_.size());
        points_.resize(quorums_.size());
        lambda0_.resize(quorums_.size());
        for (std::size_t qi = 0; qi < quorums_.size(); ++qi) {
            const auto& q = quorums_[qi];
            if (q.id != qi + 1) throw std::invalid_argument("quorum ids must be 1..n in order");
            rank_[qi].assign(net_.n() + 1, -1);
            for (std::size_t r = 0; r < q.members.size(); ++r) {
                rank_[qi][q.members[r]] = static_cast<std::int32_t>(r);
                points_[qi].emplace_back(q.members[r], p_);
            }
            lambda0_[qi] = lagrange_coefficients(points_[qi], Fp::zero(p_));
        }
    }

    Network& net() { return net_; }
    const Quorum& quorum(std::uint32_t id) const { return quorums_.at(id - 1); }
    std::size_t quorum_count() const { return quorums_.size(); }

    /// Test knob: pin specific parties' Rand contributions.
    std::map<std::uint32_t, u64> rand_override;

    // ---- local (zero-round) operations -------------------------------

    SharedSecret mpc_add(const SharedSecret& x, const SharedSecret& y) const {
        require_same(x, y);
        SharedSecret z = x;
        for (std::size_t i = 0; i < z.shares.size(); ++i) z.shares[i] += y.shares[i];
        return z;
    }

    SharedSecret mpc_sub(const SharedSecret& x, const SharedSecret& y) const {
        require_same(x, y);
        SharedSecret z = x;
        for (std::size_t i = 0; i < z.shares.size(); ++i) z.shares[i] -= y.shares[i];
        return z;
    }

    SharedSecret mpc_cmul(const Fp& c, const SharedSecret& y) const {
        SharedSecret z = y;
        for (auto& s : z.shares) s *= c;
        return z;
    }

    /// a*x + b for public constants (adding a constant keeps a valid
    /// degree <= t-1 sharing).
    SharedSecret mpc_affine(const Fp& a, const SharedSecret& x, const Fp& b) const {
        SharedSecret z = x;
        for (auto& s : z.shares) s = a * s + b;
        return z;
    }

    // ---- dealing ------------------------------------------------------

    /// Dealer VSS-shares `secret` to the quorum with a fresh polynomial
    /// of the given degree (threshold - 1 in normal operation).
    u64 emit_deal(std::uint32_t dealer, std::uint32_t quorum_id, u64 secret, std::uint32_t degree,
                  MsgKind kind = MsgKind::InputDeal) {
        const auto& q = quorum(quorum_id);
        u64 ctx = next_ctx_++;
        auto f = draw_polynomial(dealer, secret, degree);
        for (auto m : q.members) {
            Payload pl;
            pl.push_back(eval_poly(f, Fp(m, p_)).value());
            net_.send(dealer, m, kind, ctx, pl);
        }
        return ctx;
    }

    SharedSecret collect_deal(u64 ctx, std::uint32_t dealer, std::uint32_t quorum_id,
                              MsgKind kind = MsgKind::InputDeal) {
        const auto& q = quorum(quorum_id);
        SharedSecret out;
        out.quorum = quorum_id;
        out.threshold = q.threshold;
        out.shares.reserve(q.size());
        std::vector<Share> dealt;
        for (auto m : q.members) {
            const Message* msg = net_.find_message(m, dealer, kind, ctx);
            if (!msg) throw protocol_abort("missing share from party " + std::to_string(dealer));
            out.shares.emplace_back(msg->payload[0], p_);
            dealt.push_back({m, out.shares.back()});
        }
        if (!verify_consistency(dealt, q.threshold, p_)) {
            throw protocol_abort("inconsistent sharing detected; aborting");
        }
        return out;
    }

    // ---- Rand: one round ----------------------------------------------

    u64 emit_rand(std::uint32_t quorum_id) {
        const auto& q = quorum(quorum_id);
        u64 ctx = next_ctx_++;
        for (auto dealer : q.members) {
            u64 contribution;
            if (auto it = rand_override.find(dealer); it != rand_override.end()) {
                contribution = it->second;
            } else {
                contribution = net_.draw(dealer);
            }
            auto f = draw_polynomial(dealer, contribution, q.threshold - 1);
            for (auto m : q.members) {
                Payload pl;
                pl.push_back(eval_poly(f, Fp(m, p_)).value());
                net_.send(dealer, m, MsgKind::RandDeal, ctx, pl);
            }
        }
        return ctx;
    }

    SharedSecret collect_rand(u64 ctx, std::uint32_t quorum_id) {
        auto m = collect_matrix(ctx, quorum_id, quorum_id, MsgKind::RandDeal, true);
        const auto& q = quorum(quorum_id);
        SharedSecret out;
        out.quorum = quorum_id;
        out.threshold = q.threshold;
        out.shares.assign(q.size(), Fp::zero(p_));
        for (std::uint32_t d = 0; d < q.size(); ++d) {
            for (std::uint32_t j = 0; j < q.size(); ++j) out.shares[j] += m[d][j];
        }
        return out;
    }

    // ---- opening inside a quorum: one round ---------------------------

    /// Every member publishes its local point of a polynomial with the
    /// given degree bound (shares, or share products of degree
    /// 2(t-1)); everyone checks consistency and interpolates at 0.
    u64 emit_open(std::uint32_t quorum_id, const std::vector<Fp>& member_points) {
        const auto& q = quorum(quorum_id);
        if (member_points.size() != q.size()) throw std::invalid_argument("point count mismatch");
        u64 ctx = next_ctx_++;
        for (std::uint32_t i = 0; i < q.size(); ++i) {
            for (auto m : q.members) {
                Payload pl;
                pl.push_back(member_points[i].value());
                net_.send(q.members[i], m, MsgKind::Open, ctx, pl);
            }
        }
        return ctx;
    }

    Fp collect_open(u64 ctx, std::uint32_t quorum_id, std::uint32_t degree_bound) {
        const auto& q = quorum(quorum_id);
        if (degree_bound + 1 > q.size()) throw protocol_abort("quorum too small to open this degree");
        std::optional<Fp> value;
        for (auto receiver : q.members) {
            std::vector<Share> pts;
            pts.reserve(q.size());
            for (auto sender : q.members) {
                const Message* msg = net_.find_message(receiver, sender, MsgKind::Open, ctx);
                if (!msg) throw protocol_abort("missing opening from party " + std::to_string(sender));
                pts.push_back({sender, Fp(msg->payload[0], p_)});
            }
            if (!verify_consistency(pts, degree_bound + 1, p_)) {
                throw protocol_abort("inconsistent opening detected; aborting");
            }
            Fp v = reconstruct(pts, degree_bound + 1, p_);
            if (value && *value != v) throw protocol_abort("opening disagreement");
            value = v;
        }
        return *value;
    }

    // ---- multiplication with degree reduction: one round --------------

    u64 emit_mul(const SharedSecret& x, const SharedSecret& y) {
        require_same(x, y);
        const auto& q = quorum(x.quorum);
        if (q.size() < 2 * x.threshold - 1) {
            throw std::invalid_argument("quorum too small for multiplication (< 2t-1)");
        }
        u64 ctx = next_ctx_++;
        for (std::uint32_t i = 0; i < q.size(); ++i) {
            Fp product = x.shares[i] * y.shares[i]; // point on a degree-2(t-1) polynomial
            auto f = draw_polynomial(q.members[i], product.value(), x.threshold - 1);
            for (auto m : q.members) {
                Payload pl;
                pl.push_back(eval_poly(f, Fp(m, p_)).value());
                net_.send(q.members[i], m, MsgKind::MulReshare, ctx, pl);
            }
        }
        return ctx;
    }

    SharedSecret collect_mul(u64 ctx, std::uint32_t quorum_id) {
        auto m = collect_matrix(ctx, quorum_id, quorum_id, MsgKind::MulReshare, true);
        const auto& q = quorum(quorum_id);
        const auto& lambda = lambda0_[quorum_id - 1];
        SharedSecret out;
        out.quorum = quorum_id;
        out.threshold = q.threshold;
        out.shares.assign(q.size(), Fp::zero(p_));
        for (std::uint32_t d = 0; d < q.size(); ++d) {
            for (std::uint32_t j = 0; j < q.size(); ++j) out.shares[j] += lambda[d] * m[d][j];
        }
        return out;
    }

    // ---- resharing toward a (possibly different) quorum: one round ----

    u64 emit_reshare(const SharedSecret& x, std::uint32_t to_quorum) {
        const auto& from = quorum(x.quorum);
        const auto& to = quorum(to_quorum);
        u64 ctx = next_ctx_++;
        for (std::uint32_t i = 0; i < from.size(); ++i) {
            auto f = draw_polynomial(from.members[i], x.shares[i].value(), to.threshold - 1);
            for (auto m : to.members) {
                Payload pl;
                pl.push_back(eval_poly(f, Fp(m, p_)).value());
                net_.send(from.members[i], m, MsgKind::ReshareDeal, ctx, pl);
            }
        }
        return ctx;
    }

    SharedSecret collect_reshare(u64 ctx, std::uint32_t from_quorum, std::uint32_t to_quorum) {
        auto m = collect_matrix(ctx, from_quorum, to_quorum, MsgKind::ReshareDeal, true);
        const auto& from = quorum(from_quorum);
        const auto& to = quorum(to_quorum);
        const auto& lambda = lambda0_[from_quorum - 1];
        SharedSecret out;
        out.quorum = to_quorum;
        out.threshold = to.threshold;
        out.shares.assign(to.size(), Fp::zero(p_));
        for (std::uint32_t d = 0; d < from.size(); ++d) {
            for (std::uint32_t j = 0; j < to.size(); ++j) out.shares[j] += lambda[d] * m[d][j];
        }
        return out;
    }

    // ---- final opening to every party: one round ----------------------

    u64 emit_open_to_all(const SharedSecret& x) {
        const auto& q = quorum(x.quorum);
        u64 ctx = next_ctx_++;
        for (std::uint32_t i = 0; i < q.size(); ++i) {
            for (std::uint32_t party = 1; party <= net_.n(); ++party) {
                Payload pl;
                pl.push_back(x.shares[i].value());
                net_.send(q.members[i], party, MsgKind::OutputShare, ctx, pl);
            }
        }
        return ctx;
    }

    Fp collect_open_to_all(u64 ctx, std::uint32_t quorum_id, std::uint32_t threshold) {
        const auto& q = quorum(quorum_id);
        std::optional<Fp> value;
        for (std::uint32_t party = 1; party <= net_.n(); ++party) {
            std::vector<Share> pts;
            pts.reserve(q.size());
            for (auto sender : q.members) {
                const Message* msg = net_.find_message(party, sender, MsgKind::OutputShare, ctx);
                if (!msg) throw protocol_abort("missing output share from party " + std::to_string(sender));
                pts.push_back({sender, Fp(msg->payload[0], p_)});
            }
            if (!verify_consistency(pts, threshold, p_)) {
                throw protocol_abort("inconsistent output shares; aborting");
            }
            Fp v = reconstruct(pts, threshold, p_);
            if (value && *value != v) throw protocol_abort("output disagreement");
            value = v;
        }
        return *value;
    }

    // ---- single-op wrappers -------------------------------------------

    SharedSecret deal(std::uint32_t dealer, std::uint32_t quorum_id, u64 secret,
                      std::optional<std::uint32_t> degree_override = std::nullopt) {
        std::uint32_t degree = degree_override.value_or(quorum(quorum_id).threshold - 1);
        u64 ctx = emit_deal(dealer, quorum_id, secret, degree);
        net_.deliver_round();
        return collect_deal(ctx, dealer, quorum_id);
    }

    SharedSecret mpc_rand(std::uint32_t quorum_id) {
        u64 ctx = emit_rand(quorum_id);
        net_.deliver_round();
        return collect_rand(ctx, quorum_id);
    }

    SharedSecret mpc_mul(const SharedSecret& x, const SharedSecret& y) {
        u64 ctx = emit_mul(x, y);
        net_.deliver_round();
        return collect_mul(ctx, x.quorum);
    }

    SharedSecret reshare(const SharedSecret& x, std::uint32_t to_quorum) {
        u64 ctx = emit_reshare(x, to_quorum);
        net_.deliver_round();
        return collect_reshare(ctx, x.quorum, to_quorum);
    }

    Fp open_to_all(const SharedSecret& x) {
        u64 ctx = emit_open_to_all(x);
        net_.deliver_round();
        return collect_open_to_all(ctx, x.quorum, x.threshold);
    }

    /// Random shared bit via square-root masking: open s = r^2, scale
    /// [r] by the inverse of the canonical root (the one in
    /// [1,(p-1)/2]), then map +-1 to {1,0} with (c*[r]+1)/2. Two rounds
    /// per attempt; retries only on the p^-1-probability event s = 0.
    SharedSecret mpc_rand2(std::uint32_t quorum_id, std::optional<std::uint8_t> force = std::nullopt,
                           std::uint8_t* realized = nullptr) {
        for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
            u64 rctx = emit_rand(quorum_id);
            net_.deliver_round();
            SharedSecret r = collect_rand(rctx, quorum_id);
            std::vector<Fp> sq;
            sq.reserve(r.shares.size());
            for (const auto& s : r.shares) sq.push_back(s * s);
            u64 octx = emit_open(quorum_id, sq);
            net_.deliver_round();
            Fp s = collect_open(octx, quorum_id, 2 * (r.threshold - 1));
            if (s.is_zero()) continue;
            SharedSecret b = finish_rand2(r, s);
            apply_force(b, force, realized);
            return b;
        }
        throw protocol_abort("rand2 retry budget exhausted");
    }

    /// Mask-and-open inverse: open r*x, invert publicly, scale [r].
    /// Two rounds per attempt; a secret x = 0 keeps the opening at 0
    /// and aborts once the retry budget is spent.
    SharedSecret mpc_inv(const SharedSecret& x) {
        for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
            u64 rctx = emit_rand(x.quorum);
            net_.deliver_round();
            SharedSecret r = collect_rand(rctx, x.quorum);
            std::vector<Fp> prod;
            prod.reserve(r.shares.size());
            for (std::size_t i = 0; i < r.shares.size(); ++i) prod.push_back(r.shares[i] * x.shares[i]);
            u64 octx = emit_open(x.quorum, prod);
            net_.deliver_round();
            Fp c = collect_open(octx, x.quorum, 2 * (x.threshold - 1));
            if (c.is_zero()) continue;
            return mpc_cmul(inv_element(c), r);
        }
        throw protocol_abort("inverse of zero secret (opening stayed 0)");
    }

    /// One oblivious swap: alpha = b*y + (1-b)*x, beta = (x+y) - alpha.
    /// Three rounds: two for Rand2 and one for the two parallel Muls.
    std::pair<SharedSecret, SharedSecret> random_swap(const SharedSecret& x, const SharedSecret& y,
                                                      std::optional<std::uint8_t> force = std::nullopt,
                                                      std::uint8_t* realized = nullptr) {
        require_same(x, y);
        SwapItem item;
        item.x = x;
        item.y = y;
        item.force = force;
        std::vector<SwapItem> batch{item};
        random_swap_batch(batch);
        if (realized) *realized = batch[0].coin;
        return {batch[0].x, batch[0].y};
    }

    struct SwapItem {
        SharedSecret x, y;                 // in: the pair; out: (alpha, beta)
        std::optional<std::uint8_t> force; // test-mode coin forcing
        std::uint8_t coin = 0;             // realized coin
    };

    /// Lockstep execution of many independent swaps: the whole batch
    /// consumes three rounds (plus the rare s=0 retry).
    void random_swap_batch(std::vector<SwapItem>& items) {
        if (items.empty()) return;
        std::vector<u64> ctx(items.size());
        std::vector<SharedSecret> r(items.size());
        std::vector<Fp> s(items.size(), Fp::zero(p_));
        std::vector<bool> done(items.size(), false);

        for (std::size_t i = 0; i < items.size(); ++i) ctx[i] = emit_rand(items[i].x.quorum);
        net_.deliver_round();
        for (std::size_t i = 0; i < items.size(); ++i) {
            r[i] = collect_rand(ctx[i], items[i].x.quorum);
            ctx[i] = emit_square_open(r[i]);
        }
        net_.deliver_round();
        bool all_done = true;
        for (std::size_t i = 0; i < items.size(); ++i) {
            s[i] = collect_open(ctx[i], items[i].x.quorum, 2 * (r[i].threshold - 1));
            done[i] = !s[i].is_zero();
            all_done = all_done && done[i];
        }
        for (int attempt = 0; !all_done && attempt < kRetryBudget; ++attempt) {
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (!done[i]) ctx[i] = emit_rand(items[i].x.quorum);
            }
            net_.deliver_round();
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (!done[i]) {
                    r[i] = collect_rand(ctx[i], items[i].x.quorum);
                    ctx[i] = emit_square_open(r[i]);
                }
            }
            net_.deliver_round();
            all_done = true;
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (!done[i]) {
                    s[i] = collect_open(ctx[i], items[i].x.quorum, 2 * (r[i].threshold - 1));
                    done[i] = !s[i].is_zero();
                }
                all_done = all_done && done[i];
            }
        }
        if (!all_done) throw protocol_abort("rand2 retry budget exhausted");

        std::vector<u64> mul_b(items.size()), mul_c(items.size());
        std::vector<SharedSecret> b(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
            b[i] = finish_rand2(r[i], s[i]);
            apply_force(b[i], items[i].force, &items[i].coin);
            SharedSecret bc = mpc_affine(Fp(p_ - 1, p_), b[i], Fp::one(p_)); // [1-b]
            mul_b[i] = emit_mul(b[i], items[i].y);
            mul_c[i] = emit_mul(bc, items[i].x);
        }
        net_.deliver_round();
        for (std::size_t i = 0; i < items.size(); ++i) {
            SharedSecret u = collect_mul(mul_b[i], items[i].x.quorum);
            SharedSecret v = collect_mul(mul_c[i], items[i].x.quorum);
            SharedSecret alpha = mpc_add(u, v);
            SharedSecret beta = mpc_sub(mpc_add(items[i].x, items[i].y), alpha);
            items[i].x = alpha;
            items[i].y = beta;
        }
    }

    /// Simulator-side reconstruction of a handle (consistency-checked).
    Fp god_reconstruct(const SharedSecret& x) const {
        const auto& q = quorums_.at(x.quorum - 1);
        std::vector<Share> pts;
        pts.reserve(q.size());
        for (std::uint32_t i = 0; i < q.size(); ++i) pts.push_back({q.members[i], x.shares[i]});
        if (!verify_consistency(pts, x.threshold, p_)) {
            throw protocol_abort("inconsistent sharing under reconstruction");
        }
        return reconstruct(pts, x.threshold, p_);
    }

private:
    static constexpr int kRetryBudget = 16;

    void require_same(const SharedSecret& x, const SharedSecret& y) const {
        if (x.quorum != y.quorum) throw std::invalid_argument("quorum mismatch");
        if (x.threshold != y.threshold) throw std::invalid_argument("threshold mismatch");
        if (x.shares.size() != y.shares.size()) throw std::invalid_argument("share count mismatch");
    }

    SecretPolynomial draw_polynomial(std::uint32_t dealer, u64 constant, std::uint32_t degree) {
        SecretPolynomial f;
        f.coefficients.reserve(degree + 1);
        f.coefficients.emplace_back(constant, p_);
        for (std::uint32_t i = 0; i < degree; ++i) f.coefficients.emplace_back(net_.draw(dealer), p_);
        return f;
    }

    u64 emit_square_open(const SharedSecret& r) {
        std::vector<Fp> sq;
        sq.reserve(r.shares.size());
        for (const auto& sh : r.shares) sq.push_back(sh * sh);
        return emit_open(r.quorum, sq);
    }

    SharedSecret finish_rand2(const SharedSecret& r, const Fp& s) {
        Fp root = Fp::zero(p_);
        try {
            root = sqrt_element(s);
        } catch (const std::invalid_argument&) {
            throw protocol_abort("opened square is a non-residue; aborting");
        }
        Fp c = inv_element(root);
        // b = (c*r + 1) / 2 maps r = +-root to {1, 0}
        return mpc_affine(c * inv2_, r, inv2_);
    }

    void apply_force(SharedSecret& b, std::optional<std::uint8_t> force, std::uint8_t* realized) {
        u64 val = god_reconstruct(b).value();
        if (val > 1) throw protocol_abort("rand2 produced a non-bit");
        if (force && val != *force) {
            b = mpc_affine(Fp(p_ - 1, p_), b, Fp::one(p_));
            val = *force;
        }
        if (realized) *realized = static_cast<std::uint8_t>(val);
    }

    /// Gather an all-pairs deal: matrix[d][j] = value dealt by sender
    /// rank d (in from_quorum) to receiver rank j (in to_quorum), with
    /// per-dealer consistency checks at the receiving threshold.
    std::vector<std::vector<Fp>> collect_matrix(u64 ctx, std::uint32_t from_quorum,
                                                std::uint32_t to_quorum, MsgKind kind,
                                                bool check_consistency) {
        const auto& from = quorum(from_quorum);
        const auto& to = quorum(to_quorum);
        std::vector<std::vector<Fp>> m(from.size(), std::vector<Fp>(to.size(), Fp::zero(p_)));
        std::vector<std::vector<bool>> seen(from.size(), std::vector<bool>(to.size(), false));
        const auto& ranks = rank_[from_quorum - 1];
        for (std::uint32_t j = 0; j < to.size(); ++j) {
            for (const auto& msg : net_.inbox(to.members[j])) {
                if (msg.kind != kind || msg.ctx != ctx) continue;
                std::int32_t d = ranks[msg.from];
                if (d < 0) continue;
                m[d][j] = Fp(msg.payload[0], p_);
                seen[d][j] = true;
            }
        }
        for (std::uint32_t d = 0; d < from.size(); ++d) {
            for (std::uint32_t j = 0; j < to.size(); ++j) {
                if (!seen[d][j]) {
                    throw protocol_abort("missing message from party " +
                                         std::to_string(from.members[d]));
                }
            }
            if (check_consistency) {
                std::vector<Share> pts;
                pts.reserve(to.size());
                for (std::uint32_t j = 0; j < to.size(); ++j) pts.push_back({to.members[j], m[d][j]});
                if (!verify_consistency(pts, to.threshold, p_)) {
                    throw protocol_abort("inconsistent sub-sharing detected; aborting");
                }
            }
        }
        return m;
    }

    Network& net_;
    std::vector<Quorum> quorums_;
    u64 p_;
    Fp inv2_;
    u64 next_ctx_ = 1;
    std::vector<std::vector<std::int32_t>> rank_;
    std::vector<std::vector<Fp>> points_;
    std::vector<std::vector<Fp>> lambda0_;
};

} // namespace mps
