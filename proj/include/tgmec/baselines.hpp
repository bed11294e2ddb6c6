#pragma once

#include <cstdint>
#include <vector>

#include "tgmec/energy_guard.hpp"

namespace tgmec {

// Comparison schemes. All of them run on the same scenario object as the
// main scheme; their own randomness comes from a separate seed so paired
// comparisons share the channel draws.

namespace detail {

// Override the stored local fraction of a served user with a forced value
// (clamped to its feasible interval), keeping the path and remote share.
// Demotes the user when nothing feasible remains.
inline void force_fraction(Assignment& a, const Scenario& scn, int m, double wanted)
{
    const auto& c = scn.config;
    const auto& u = scn.users[m];
    const double rate = stored_rate(scn, a, m);
    const auto iv = feasible_fraction_interval(u.task_bits, u.cycles_per_bit,
                                               u.f_local_max, rate, u.tx_power,
                                               u.energy_budget, c.mu_local);
    if (!iv) {
        a.set_local_only(m, u, c.mu_local);
        return;
    }
    const double lam = iv->clamp(wanted);
    if (lam >= 1.0 - 1e-12) {
        a.set_local_only(m, u, c.mu_local);
        return;
    }
    const double f_loc = capped_local_frequency(u.f_local_max, u.energy_budget,
                                                c.mu_local, lam, u.task_bits,
                                                u.cycles_per_bit);
    const auto off = offload_latency_energy(lam, u, rate, a.f_remote[m],
                                            a.destination[m], c.xi_mr, a.p_relay[m]);
    SegmentationDecision dec;
    dec.local_fraction = lam;
    dec.f_local = f_loc;
    dec.destination = a.destination[m];
    dec.latency = total_latency(local_latency(lam, u.task_bits, u.cycles_per_bit, f_loc),
                                off.t_upload + off.t_exec);
    dec.user_energy =
        local_energy(lam, u.task_bits, u.cycles_per_bit, f_loc, c.mu_local)
        + off.user_energy;
    dec.mr_energy = off.mr_energy;
    a.set_decision(m, a.subchannel[m], dec, a.f_remote[m], a.p_relay[m]);
}

} // namespace detail

// usra: admission order is random, the matching game is kept, and each
// served user picks relay or base station by a fair coin on its matched
// sub-channel. Budget enforcement uses the greedy branch only.
inline Assignment run_usra(const Scenario& scn, std::uint64_t seed)
{
    Rng rng(derive_seed(seed, 0x75u));
    std::vector<int> order(scn.users.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<int>(i);
    rng.shuffle(order);

    auto adm = admit_users_ordered(scn, order);
    MatchingState st = swap_phase(adm.state, scn);
    for (int m : st.matched_users())
        if (rng.uniform() < 0.5)
            st.set_destination(m, Destination::BS);
    Assignment a = assignment_from_state(st, scn);
    return enforce_budget_detailed(a, scn, /*use_t2=*/false).assignment;
}

// runp: the served set is a random draw sized by the number of sub-channels,
// and the relay transmit power of BS users is drawn uniformly instead of
// balancing the hops. Everything else follows the main scheme.
inline Assignment run_runp(const Scenario& scn, std::uint64_t seed)
{
    const auto& c = scn.config;
    Rng rng(derive_seed(seed, 0x12u));
    std::vector<int> ids(scn.users.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
        ids[i] = static_cast<int>(i);
    rng.shuffle(ids);
    const int take = std::min(c.num_users, c.num_subchannels);

    MatchingState st(c.num_users, c.num_subchannels);
    std::vector<char> free_ch(c.num_subchannels, 1);
    for (int i = 0; i < take; ++i) {
        const int m = ids[i];
        int best = -1;
        double best_rate = -1.0;
        for (int s = 0; s < c.num_subchannels; ++s) {
            if (!free_ch[s])
                continue;
            const double r = sinr_mr(scn, m, s).rate;
            if (r > best_rate) {
                best_rate = r;
                best = s;
            }
        }
        st.match(m, {Destination::MR, best});
        free_ch[best] = 0;
    }

    std::vector<double> p_draw(c.num_users, 0.0);
    for (int m = 0; m < c.num_users; ++m)
        p_draw[m] = rng.uniform(c.runp_power_range.lo, c.runp_power_range.hi);

    st = swap_phase(st, scn);
    SplitOptions opts;
    opts.power = [p_draw](const Scenario&, int m, int) { return p_draw[m]; };
    Assignment a = split_association(st, scn, opts);
    return enforce_budget_detailed(a, scn, /*use_t2=*/true).assignment;
}

// ro: association and matching as in the main scheme, but each served user's
// local fraction is drawn uniformly at random (clamped to its energy
// feasibility). Budget enforcement uses the greedy branch only.
inline Assignment run_ro(const Scenario& scn, std::uint64_t seed)
{
    Rng rng(derive_seed(seed, 0xF0u));
    std::vector<double> draw(scn.users.size());
    for (auto& d : draw)
        d = rng.uniform();

    const auto adm = admit_users(scn);
    Assignment a(scn.config.num_users, scn.config.num_subchannels);
    if (adm.served.empty()) {
        a = assignment_from_state(adm.state, scn);
    } else {
        const MatchingState stable = swap_phase(adm.state, scn);
        a = split_association(stable, scn);
    }
    for (int m = 0; m < a.num_users(); ++m)
        if (a.served(m))
            detail::force_fraction(a, scn, m, draw[m]);
    return enforce_budget_detailed(a, scn, /*use_t2=*/false).assignment;
}

// jpora: association by base-station coverage radius, sub-channel by best
// marginal rate, and one offload fraction shared by all served users, tuned
// until the average local and average offload delays meet.
inline Assignment run_jpora(const Scenario& scn)
{
    const auto& c = scn.config;
    MatchingState st(c.num_users, c.num_subchannels);
    std::vector<char> free_ch(c.num_subchannels, 1);
    int free_left = c.num_subchannels;

    for (int m = 0; m < c.num_users; ++m) {
        if (free_left == 0)
            break;
        const Destination dest = scn.dist_user_bs(scn.users[m]) <= c.jpora_bs_radius_m
            ? Destination::BS
            : Destination::MR;
        int best = -1;
        double best_rate = -1.0;
        for (int s = 0; s < c.num_subchannels; ++s) {
            if (!free_ch[s])
                continue;
            const double r = dest == Destination::MR
                ? sinr_mr(scn, m, s).rate
                : bs_path_rate(scn, m, s, hop_balanced_relay_power(scn, m, s));
            if (r > best_rate) {
                best_rate = r;
                best = s;
            }
        }
        st.match(m, {dest, best});
        free_ch[best] = 0;
        --free_left;
    }

    Assignment a = assignment_from_state(st, scn);
    std::vector<int> served;
    for (int m = 0; m < a.num_users(); ++m)
        if (a.served(m))
            served.push_back(m);
    if (served.empty())
        return a;

    // cache per-user path data and feasibility at f_max
    struct Entry {
        int user;
        double rate;
        FractionInterval iv;
    };
    std::vector<Entry> entries;
    for (int m : served) {
        const auto& u = scn.users[m];
        const double rate = detail::stored_rate(scn, a, m);
        const auto iv = feasible_fraction_interval(u.task_bits, u.cycles_per_bit,
                                                   u.f_local_max, rate, u.tx_power,
                                                   u.energy_budget, c.mu_local);
        if (iv)
            entries.push_back({m, rate, *iv});
    }
    if (!entries.empty()) {
        auto gap = [&](double lam_u) {
            double local_sum = 0.0, off_sum = 0.0;
            for (const auto& e : entries) {
                const auto& u = scn.users[e.user];
                const double lam = e.iv.clamp(lam_u);
                const double f_loc = capped_local_frequency(
                    u.f_local_max, u.energy_budget, c.mu_local, lam, u.task_bits,
                    u.cycles_per_bit);
                local_sum += local_latency(lam, u.task_bits, u.cycles_per_bit, f_loc);
                off_sum += (1.0 - lam) * u.task_bits / e.rate
                    + (1.0 - lam) * u.task_cycles() / a.f_remote[e.user];
            }
            const double n = static_cast<double>(entries.size());
            return local_sum / n - off_sum / n;
        };
        double lo = 0.0, hi = 1.0, mid = 0.5;
        for (int iter = 0; iter < 1000; ++iter) {
            mid = 0.5 * (lo + hi);
            const double g = gap(mid);
            if (std::abs(g) <= 1e-4)
                break;
            if (g < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        for (int m : served)
            detail::force_fraction(a, scn, m, mid);
    } else {
        for (int m : served)
            a.set_local_only(m, scn.users[m], c.mu_local);
    }
    return enforce_budget_detailed(a, scn, /*use_t2=*/false).assignment;
}

} // namespace tgmec
