#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tgmec/raco.hpp"

namespace tgmec {

// Relay energy budget enforcement. When the post-optimization relay energy
// exceeds the budget, served users are re-selected greedily by latency per
// joule, the first user that does not fit is squeezed in partially (branch
// T1), and alternatively relay frequencies are shaved uniformly to re-admit
// rejected relay users (branch T2). The cheaper branch wins.

struct KnapsackItem {
    int user = -1;
    double weight = 0.0;     // J of relay energy this user costs
    double value_rate = 0.0; // latency per joule; lower is packed first
};

struct GreedyFillResult {
    std::vector<int> accepted;
    std::vector<int> rejected; // in packing order, first non-fitting user first
    double remaining = 0.0;
};

// Scan in ascending value_rate: every item that still fits is packed, the
// others land in the rejected list in scan order. Stopping at the first
// non-fitting item instead would throw away arbitrarily many cheap items
// (relay-transmit users cost microjoules next to relay-compute users), which
// collapses the served set as soon as the budget binds.
inline GreedyFillResult greedy_fill(std::vector<KnapsackItem> items, double budget)
{
    if (budget < 0.0)
        throw std::domain_error("greedy_fill: budget must be >= 0");
    std::stable_sort(items.begin(), items.end(),
                     [](const KnapsackItem& a, const KnapsackItem& b) {
                         if (a.value_rate != b.value_rate)
                             return a.value_rate < b.value_rate;
                         return a.user < b.user;
                     });
    GreedyFillResult out;
    double acc = 0.0;
    for (const auto& item : items) {
        if (acc + item.weight <= budget) {
            acc += item.weight;
            out.accepted.push_back(item.user);
        } else {
            out.rejected.push_back(item.user);
        }
    }
    out.remaining = budget - acc;
    return out;
}

struct EnforceOutcome {
    Assignment assignment;
    bool triggered = false;
    double t1_total = std::numeric_limits<double>::infinity();
    double t2_total = std::numeric_limits<double>::infinity();
    std::vector<std::string> log; // demotions, partial fits, promotions, decrements
};

namespace detail {

// Reconstruct the stored decision of user m so it can be re-applied later.
inline SegmentationDecision stored_decision(const Assignment& a, int m)
{
    SegmentationDecision dec;
    dec.local_fraction = a.local_fraction[m];
    dec.f_local = a.f_local[m];
    dec.destination = a.destination[m];
    dec.latency = a.latency[m];
    dec.user_energy = a.user_energy[m];
    dec.mr_energy = a.mr_energy[m];
    return dec;
}

inline double stored_rate(const Scenario& scn, const Assignment& a, int m)
{
    const int s = a.subchannel[m];
    if (a.destination[m] == Destination::MR)
        return sinr_mr(scn, m, s).rate;
    return bs_path_rate(scn, m, s, a.p_relay[m]);
}

// Branch T1, relay user: shrink its personal relay CPU rate until its relay
// compute energy lands in [target - eps1, target]; the local fraction is
// re-derived from the closed form after each frequency update.
inline bool partial_fit_mr(Assignment& a, int k, double target, const Assignment& orig,
                           const Scenario& scn, std::vector<std::string>& log)
{
    const auto& c = scn.config;
    const auto& u = scn.users[k];
    const int s = orig.subchannel[k];
    const double rate = sinr_mr(scn, k, s).rate;
    const double f_start = orig.f_remote[k];
    double lam = orig.local_fraction[k];
    for (int iter = 0; iter < 10000; ++iter) {
        const double denom = c.xi_mr * (1.0 - lam) * u.task_cycles();
        if (!(denom > 0.0))
            break;
        const double f = std::min(std::sqrt(target / denom), f_start);
        const auto dec = decide_segmentation(u, rate, f, Destination::MR, c.xi_mr, 0.0,
                                             c.mu_local);
        if (dec.destination == Destination::Local)
            break; // cannot be served at this little capacity
        lam = dec.local_fraction;
        const bool within_budget = dec.mr_energy <= target;
        const bool window_hit = within_budget && target - dec.mr_energy <= c.energy_eps;
        const bool fits_fully = within_budget && f >= f_start;
        if (window_hit || fits_fully) {
            a.matching.match(k, {Destination::MR, s});
            a.set_decision(k, s, dec, f, 0.0);
            log.push_back("partial-fit user " + std::to_string(k) + " (mr): f_remote="
                          + fmt_g(f) + " fraction=" + fmt_g(dec.local_fraction));
            return true;
        }
    }
    log.push_back("partial-fit user " + std::to_string(k) + " (mr): no fixed point, rejected");
    return false;
}

// Branch T1, BS user: raise the local fraction so the relay transmit energy
// equals the leftover budget; single-shot per the closed form, re-checking
// the user-side energy budget afterwards.
inline bool partial_fit_bs(Assignment& a, int k, double target, const Assignment& orig,
                           const Scenario& scn, std::vector<std::string>& log)
{
    const auto& c = scn.config;
    const auto& u = scn.users[k];
    const int s = orig.subchannel[k];
    const double p = orig.p_relay[k];
    const double rate = bs_path_rate(scn, k, s, p);
    double lam = 1.0 - target * rate / (p * u.task_bits);
    lam = std::min(1.0, std::max(orig.local_fraction[k], lam));
    if (lam >= 1.0 - 1e-12) {
        log.push_back("partial-fit user " + std::to_string(k) + " (bs): fraction hit 1, rejected");
        return false;
    }
    const double f_loc = capped_local_frequency(u.f_local_max, u.energy_budget,
                                                c.mu_local, lam, u.task_bits,
                                                u.cycles_per_bit);
    const double e_loc = local_energy(lam, u.task_bits, u.cycles_per_bit, f_loc, c.mu_local);
    const auto off = offload_latency_energy(lam, u, rate, orig.f_remote[k],
                                            Destination::BS, c.xi_mr, p);
    if (e_loc + off.user_energy > u.energy_budget * (1.0 + 1e-9)) {
        log.push_back("partial-fit user " + std::to_string(k) + " (bs): user budget violated, rejected");
        return false;
    }
    SegmentationDecision dec;
    dec.local_fraction = lam;
    dec.f_local = f_loc;
    dec.destination = Destination::BS;
    dec.latency = total_latency(local_latency(lam, u.task_bits, u.cycles_per_bit, f_loc),
                                off.t_upload + off.t_exec);
    dec.user_energy = e_loc + off.user_energy;
    dec.mr_energy = off.mr_energy;
    a.matching.match(k, {Destination::BS, s});
    a.set_decision(k, s, dec, orig.f_remote[k], p);
    log.push_back("partial-fit user " + std::to_string(k) + " (bs): fraction=" + fmt_g(lam));
    return true;
}

// One uniform decrement round over all relay users. Returns false when any
// relay user can no longer be served (frequency exhausted).
inline bool decrement_relay_users(Assignment& a, const Scenario& scn)
{
    const auto& c = scn.config;
    for (int m : a.served_mr()) {
        const double f = a.f_remote[m] - c.freq_eps;
        if (!(f > 0.0))
            return false;
        const double rate = sinr_mr(scn, m, a.subchannel[m]).rate;
        const auto dec = decide_segmentation(scn.users[m], rate, f, Destination::MR,
                                             c.xi_mr, 0.0, c.mu_local);
        if (dec.destination == Destination::Local)
            return false;
        a.set_decision(m, a.subchannel[m], dec, f, 0.0);
    }
    return true;
}

} // namespace detail

struct FrequencyReductionResult {
    Assignment assignment;
    double total = std::numeric_limits<double>::infinity(); // T2 marker when skipped
    bool ran = false;
};

// Branch T2: re-admit rejected relay users one at a time (in rejection
// order), shaving every relay user's frequency uniformly until the energy
// fits again. A promotion that no longer lowers the total latency, or that
// exhausts someone's frequency, is reverted and ends the branch. `original`
// supplies the rejected users' pre-demotion decisions.
inline FrequencyReductionResult
frequency_reduction(const Assignment& base, const std::vector<int>& rejected,
                    const Assignment& original, const Scenario& scn,
                    std::vector<std::string>* log = nullptr)
{
    FrequencyReductionResult out;
    out.assignment = base;
    std::vector<int> pending;
    for (int m : rejected)
        if (original.destination[m] == Destination::MR)
            pending.push_back(m);
    if (pending.empty())
        return out;

    const double budget = scn.config.e_mr_budget;
    out.ran = true;
    double prev_total = base.total_latency();
    for (int m2 : pending) {
        Assignment candidate = out.assignment;
        candidate.matching.match(m2, {Destination::MR, original.subchannel[m2]});
        candidate.set_decision(m2, original.subchannel[m2],
                               detail::stored_decision(original, m2),
                               original.f_remote[m2], original.p_relay[m2]);
        bool ok = true;
        int rounds = 0;
        while (candidate.total_mr_energy() > budget) {
            if (!detail::decrement_relay_users(candidate, scn)) {
                ok = false;
                break;
            }
            ++rounds;
        }
        if (!ok) {
            if (log)
                log->push_back("promotion of user " + std::to_string(m2)
                               + " reverted: frequency exhausted");
            break;
        }
        const double total = candidate.total_latency();
        if (total < prev_total) {
            out.assignment = std::move(candidate);
            prev_total = total;
            if (log)
                log->push_back("promote user " + std::to_string(m2) + " after "
                               + std::to_string(rounds) + " decrement rounds");
        } else {
            if (log)
                log->push_back("promotion of user " + std::to_string(m2)
                               + " reverted: total latency did not improve");
            break;
        }
    }
    out.total = prev_total;
    return out;
}

inline EnforceOutcome enforce_budget_detailed(const Assignment& input,
                                              const Scenario& scn, bool use_t2 = true)
{
    const auto& c = scn.config;
    const double budget = c.e_mr_budget;
    EnforceOutcome out;
    if (input.total_mr_energy() <= budget) {
        out.assignment = input;
        return out;
    }
    out.triggered = true;

    std::vector<KnapsackItem> items;
    for (int m = 0; m < input.num_users(); ++m)
        if (input.served(m))
            items.push_back({m, input.mr_energy[m], input.latency[m] / input.mr_energy[m]});
    const auto fill = greedy_fill(items, budget);

    Assignment base = input;
    for (int m : fill.rejected) {
        base.set_local_only(m, scn.users[m], c.mu_local);
        out.log.push_back("demote user " + std::to_string(m) + " (knapsack)");
    }

    // branch T1: squeeze the first rejected user into the leftover capacity
    Assignment t1 = base;
    if (fill.remaining > 0.0 && !fill.rejected.empty()) {
        const int k = fill.rejected.front();
        if (input.mr_energy[k] <= fill.remaining) {
            t1.matching.match(k, {input.destination[k], input.subchannel[k]});
            t1.set_decision(k, input.subchannel[k], detail::stored_decision(input, k),
                            input.f_remote[k], input.p_relay[k]);
        } else if (input.destination[k] == Destination::MR) {
            detail::partial_fit_mr(t1, k, fill.remaining, input, scn, out.log);
        } else {
            detail::partial_fit_bs(t1, k, fill.remaining, input, scn, out.log);
        }
    }
    out.t1_total = t1.total_latency();

    // branch T2: shave relay frequencies to readmit rejected relay users
    if (use_t2) {
        auto t2 = frequency_reduction(base, fill.rejected, input, scn, &out.log);
        if (t2.ran) {
            out.t2_total = t2.total;
            if (out.t2_total < out.t1_total) {
                out.assignment = std::move(t2.assignment);
                return out;
            }
        }
    }
    out.assignment = std::move(t1);
    return out;
}

inline Assignment enforce_budget(const Assignment& input, const Scenario& scn)
{
    return enforce_budget_detailed(input, scn, true).assignment;
}

} // namespace tgmec
