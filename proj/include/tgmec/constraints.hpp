#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tgmec/assignment.hpp"

namespace tgmec {

// Independent feasibility checker. Everything is recomputed from the
// scenario and the raw decision variables rather than trusted from the
// Assignment caches, so optimizer bugs cannot hide behind their own
// bookkeeping.

struct ConstraintViolation {
    std::string constraint;
    int user = -1; // -1 for aggregate constraints
    std::string detail;
};

namespace detail {

inline bool leq(double value, double limit)
{
    return value <= limit + 1e-9 * std::max(1.0, std::abs(limit));
}

inline double recomputed_rate(const Scenario& scn, const Assignment& a, int m)
{
    const int s = a.subchannel[m];
    if (a.destination[m] == Destination::MR)
        return sinr_mr(scn, m, s).rate;
    const auto first = sinr_first_hop(scn, m, s, a.p_relay[m]);
    const auto second = sinr_second_hop(scn, s, a.p_relay[m]);
    return rate_bs_path(first, second);
}

} // namespace detail

inline std::vector<ConstraintViolation>
check_assignment(const Scenario& scn, const Assignment& a, bool check_mr_budget)
{
    using detail::leq;
    std::vector<ConstraintViolation> out;
    auto bad = [&out](std::string name, int user, std::string detail) {
        out.push_back({std::move(name), user, std::move(detail)});
    };

    const auto& c = scn.config;
    const int m_count = a.num_users();
    if (m_count != c.num_users) {
        bad("shape", -1, "assignment size differs from scenario");
        return out;
    }

    std::vector<int> channel_users(c.num_subchannels, 0);
    double f_mr_sum = 0.0, f_bs_sum = 0.0, mr_energy_sum = 0.0;

    for (int m = 0; m < m_count; ++m) {
        const auto& u = scn.users[m];
        const double lam = a.local_fraction[m];
        if (!(lam >= 0.0 && lam <= 1.0))
            bad("fraction_range", m, "local fraction outside [0,1]");
        if (!(a.f_local[m] >= 0.0 && leq(a.f_local[m], u.f_local_max)))
            bad("f_local_range", m, "local frequency outside [0, f_max]");

        if (!a.served(m)) {
            if (lam != 1.0)
                bad("association_required", m, "unserved user with fraction != 1");
            if (a.subchannel[m] != -1 || a.mr_energy[m] != 0.0)
                bad("unserved_state", m, "unserved user holds resources");
            const double e_loc =
                local_energy(lam, u.task_bits, u.cycles_per_bit, a.f_local[m], c.mu_local);
            if (!leq(e_loc, u.energy_budget))
                bad("user_energy", m, "local energy above budget");
            continue;
        }

        // served user: exactly one destination, one sub-channel, in range
        const int s = a.subchannel[m];
        if (s < 0 || s >= c.num_subchannels) {
            bad("subchannel_range", m, "sub-channel index out of range");
            continue;
        }
        channel_users[s] += 1;
        if (!(lam < 1.0))
            bad("association_required", m, "served user offloads nothing");
        if (!a.matching.is_matched(m) || a.matching.key_of(m)->subchannel != s
            || a.matching.key_of(m)->destination != a.destination[m])
            bad("matching_consistency", m, "matching state disagrees with assignment");

        const double rate = detail::recomputed_rate(scn, a, m);
        if (!(rate > 0.0)) {
            bad("rate", m, "non-positive rate");
            continue;
        }
        const double e_loc =
            local_energy(lam, u.task_bits, u.cycles_per_bit, a.f_local[m], c.mu_local);
        const double e_tx = u.tx_power * (1.0 - lam) * u.task_bits / rate;
        if (!leq(e_loc + e_tx, u.energy_budget))
            bad("user_energy", m, "offloading energy above budget");

        if (!(a.f_remote[m] > 0.0))
            bad("f_remote", m, "served user with no remote CPU share");
        if (a.destination[m] == Destination::MR) {
            f_mr_sum += a.f_remote[m];
            mr_energy_sum += c.xi_mr * (1.0 - lam) * u.task_cycles() * a.f_remote[m]
                * a.f_remote[m];
        } else {
            f_bs_sum += a.f_remote[m];
            if (!(a.p_relay[m] > 0.0))
                bad("relay_power", m, "bs user with no relay power");
            mr_energy_sum += a.p_relay[m] * (1.0 - lam) * u.task_bits / rate;
        }

        // cached outputs must match a recomputation
        const double t_loc = local_latency(lam, u.task_bits, u.cycles_per_bit, a.f_local[m]);
        const double t_off = (1.0 - lam) * u.task_bits / rate
            + (1.0 - lam) * u.task_cycles() / a.f_remote[m];
        const double t = total_latency(t_loc, t_off);
        if (std::abs(t - a.latency[m]) > 1e-9 * std::max(1.0, t))
            bad("latency_cache", m, "stored latency differs from recomputation");
    }

    int total_channels = 0;
    for (int s = 0; s < c.num_subchannels; ++s) {
        total_channels += channel_users[s];
        if (channel_users[s] > 1)
            bad("subchannel_exclusive", -1,
                "sub-channel " + std::to_string(s) + " carries multiple users");
    }
    if (total_channels > c.num_subchannels)
        bad("subchannel_total", -1, "more assignments than sub-channels");

    if (!leq(f_mr_sum, c.f_mr_total))
        bad("mr_capacity", -1, "relay CPU over-committed");
    if (!leq(f_bs_sum, c.f_bs_total))
        bad("bs_capacity", -1, "base-station CPU over-committed");

    if (check_mr_budget && !(mr_energy_sum <= c.e_mr_budget + c.energy_eps))
        bad("mr_energy_budget", -1,
            "relay energy " + fmt_g(mr_energy_sum) + " above budget " + fmt_g(c.e_mr_budget));

    return out;
}

} // namespace tgmec
