#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "tgmec/channel.hpp"
#include "tgmec/offload.hpp"

namespace tgmec {

// Two-sided one-to-one matching between users and resources. A resource is a
// (destination, sub-channel) pair; a sub-channel carries at most one user no
// matter which destination it serves.

struct ResourceKey {
    Destination destination = Destination::MR; // MR or BS, never Local
    int subchannel = -1;

    friend bool operator==(const ResourceKey&, const ResourceKey&) = default;
};

class MatchingState {
public:
    MatchingState() = default;
    MatchingState(int num_users, int num_subchannels)
        : user_key_(num_users), subchannel_user_(num_subchannels, -1)
    {
    }

    int num_users() const { return static_cast<int>(user_key_.size()); }
    int num_subchannels() const { return static_cast<int>(subchannel_user_.size()); }

    bool is_matched(int m) const { return user_key_.at(m).has_value(); }
    const std::optional<ResourceKey>& key_of(int m) const { return user_key_.at(m); }
    int user_on(int s) const { return subchannel_user_.at(s); }

    int matched_count() const
    {
        int n = 0;
        for (const auto& k : user_key_)
            n += k.has_value();
        return n;
    }

    int count_destination(Destination d) const
    {
        int n = 0;
        for (const auto& k : user_key_)
            n += k.has_value() && k->destination == d;
        return n;
    }

    std::vector<int> matched_users() const
    {
        std::vector<int> out;
        for (int m = 0; m < num_users(); ++m)
            if (user_key_[m])
                out.push_back(m);
        return out;
    }

    void match(int m, ResourceKey k)
    {
        if (user_key_.at(m))
            throw std::logic_error("match: user already matched");
        if (subchannel_user_.at(k.subchannel) != -1)
            throw std::logic_error("match: sub-channel already taken");
        user_key_[m] = k;
        subchannel_user_[k.subchannel] = m;
    }

    void unmatch(int m)
    {
        if (!user_key_.at(m))
            throw std::logic_error("unmatch: user not matched");
        subchannel_user_[user_key_[m]->subchannel] = -1;
        user_key_[m].reset();
    }

    void set_destination(int m, Destination d)
    {
        if (!user_key_.at(m))
            throw std::logic_error("set_destination: user not matched");
        user_key_[m]->destination = d;
    }

private:
    std::vector<std::optional<ResourceKey>> user_key_;
    std::vector<int> subchannel_user_; // -1 when free
};

// CPU shares implied by a state: the server capacity split evenly over the
// users it currently serves.
struct ServerShares {
    int n_mr = 0;
    int n_bs = 0;
    double f_mr_share = 0.0;
    double f_bs_share = 0.0;
};

inline ServerShares shares_of(const MatchingState& st, const SystemConfig& c)
{
    ServerShares sh;
    sh.n_mr = st.count_destination(Destination::MR);
    sh.n_bs = st.count_destination(Destination::BS);
    if (sh.n_mr > 0)
        sh.f_mr_share = c.f_mr_total / sh.n_mr;
    if (sh.n_bs > 0)
        sh.f_bs_share = c.f_bs_total / sh.n_bs;
    return sh;
}

// Hop-balancing relay power for user m on sub-channel s.
inline double hop_balanced_relay_power(const Scenario& scn, int m, int s)
{
    const auto& c = scn.config;
    const double a = user_relay_signal_power(scn, m, s);
    const double b = relay_bs_gain_per_watt(scn, s);
    const double n0w = noise_power(c.noise_density_dbm_per_mhz, c.subchannel_bandwidth());
    return optimal_relay_power(a, b, n0w, c.si_cancellation);
}

inline double bs_path_rate(const Scenario& scn, int m, int s, double p_relay)
{
    const auto first = sinr_first_hop(scn, m, s, p_relay);
    const auto second = sinr_second_hop(scn, s, p_relay);
    return rate_bs_path(first, second);
}

// Full decision of user m on a given resource with explicit CPU shares. BS
// users get the hop-balancing relay power unless one is forced.
inline SegmentationDecision decision_on(const Scenario& scn, int m, ResourceKey key,
                                        double f_share, const double* p_forced = nullptr)
{
    const auto& u = scn.users.at(m);
    const auto& c = scn.config;
    if (key.destination == Destination::MR) {
        const double rate = sinr_mr(scn, m, key.subchannel).rate;
        return decide_segmentation(u, rate, f_share, Destination::MR, c.xi_mr, 0.0,
                                   c.mu_local);
    }
    const double p =
        p_forced ? *p_forced : hop_balanced_relay_power(scn, m, key.subchannel);
    const double rate = bs_path_rate(scn, m, key.subchannel, p);
    return decide_segmentation(u, rate, f_share, Destination::BS, c.xi_mr, p, c.mu_local);
}

inline SegmentationDecision decision_under(const MatchingState& st, const Scenario& scn,
                                           int m)
{
    const auto& key = st.key_of(m);
    if (!key)
        throw std::logic_error("decision_under: user not matched");
    const auto sh = shares_of(st, scn.config);
    const double share =
        key->destination == Destination::MR ? sh.f_mr_share : sh.f_bs_share;
    return decision_on(scn, m, *key, share);
}

inline double latency_under(const MatchingState& st, const Scenario& scn, int m)
{
    return decision_under(st, scn, m).latency;
}

inline double served_total_latency(const MatchingState& st, const Scenario& scn)
{
    double sum = 0.0;
    for (int m : st.matched_users())
        sum += latency_under(st, scn, m);
    return sum;
}

inline MatchingState apply_swap(const MatchingState& st, int m, int m2)
{
    const auto& k = st.key_of(m);
    const auto& k2 = st.key_of(m2);
    if (!k || !k2)
        throw std::logic_error("apply_swap: both users must be matched");
    if (m == m2)
        throw std::logic_error("apply_swap: users must differ");
    MatchingState out = st;
    const ResourceKey a = *k;
    const ResourceKey b = *k2;
    out.unmatch(m);
    out.unmatch(m2);
    out.match(m, b);
    out.match(m2, a);
    return out;
}

// A pair blocks the matching when exchanging resources strictly improves
// both users and strictly lowers the served-side total. Set sizes are
// unchanged by a swap, so shares stay fixed and only the two swapped users'
// latencies move.
inline bool is_swap_blocking(const MatchingState& st, const Scenario& scn, int m, int m2)
{
    if (m == m2)
        throw std::logic_error("is_swap_blocking: users must differ");
    const MatchingState swapped = apply_swap(st, m, m2);
    const double t_m_old = latency_under(st, scn, m);
    const double t_m2_old = latency_under(st, scn, m2);
    const double t_m_new = latency_under(swapped, scn, m);
    const double t_m2_new = latency_under(swapped, scn, m2);
    if (!(t_m_new < t_m_old))
        return false;
    if (!(t_m2_new < t_m2_old))
        return false;
    return t_m_new + t_m2_new < t_m_old + t_m2_old;
}

} // namespace tgmec
