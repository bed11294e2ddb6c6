#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tgmec/assignment.hpp"
#include "tgmec/constraints.hpp"

namespace tgmec {

// Admission, swap-matching optimization, and the relay/base-station
// association split. Baselines reuse the same pieces with different knobs.

// Optional override for the relay transmit power of a BS user (the runp
// baseline draws it at random). Null means hop-balanced power.
using RelayPowerPolicy = std::function<double(const Scenario&, int m, int s)>;

namespace detail {

inline double relay_power_for(const Scenario& scn, int m, int s,
                              const RelayPowerPolicy& policy)
{
    return policy ? policy(scn, m, s) : hop_balanced_relay_power(scn, m, s);
}

inline SegmentationDecision decision_with_policy(const Scenario& scn, int m,
                                                 ResourceKey key, double f_share,
                                                 const RelayPowerPolicy& policy,
                                                 double* p_out)
{
    if (key.destination == Destination::BS) {
        const double p = relay_power_for(scn, m, key.subchannel, policy);
        if (p_out)
            *p_out = p;
        return decision_on(scn, m, key, f_share, &p);
    }
    if (p_out)
        *p_out = 0.0;
    return decision_on(scn, m, key, f_share);
}

} // namespace detail

// Builds a full assignment from a matching state with uniform CPU shares.
// Users whose decision collapses to local-only are demoted and the shares of
// the survivors recomputed; a demotion never causes another one, but the
// loop guards against surprises anyway.
inline Assignment assignment_from_state(MatchingState st, const Scenario& scn,
                                        const RelayPowerPolicy& policy = {})
{
    const auto& c = scn.config;
    Assignment a(c.num_users, c.num_subchannels);

    std::vector<SegmentationDecision> dec(c.num_users);
    std::vector<double> p_relay(c.num_users, 0.0);
    ServerShares sh;
    for (int round = 0; round < c.num_users + 1; ++round) {
        sh = shares_of(st, c);
        bool demoted = false;
        for (int m : st.matched_users()) {
            const ResourceKey key = *st.key_of(m);
            const double share =
                key.destination == Destination::MR ? sh.f_mr_share : sh.f_bs_share;
            dec[m] = detail::decision_with_policy(scn, m, key, share, policy,
                                                  &p_relay[m]);
            if (dec[m].destination == Destination::Local) {
                st.unmatch(m);
                demoted = true;
            }
        }
        if (!demoted)
            break;
    }

    a.matching = st;
    a.f_mr_share = sh.f_mr_share;
    a.f_bs_share = sh.f_bs_share;
    for (int m = 0; m < c.num_users; ++m) {
        if (st.is_matched(m)) {
            const ResourceKey key = *st.key_of(m);
            const double share =
                key.destination == Destination::MR ? sh.f_mr_share : sh.f_bs_share;
            a.set_decision(m, key.subchannel, dec[m], share, p_relay[m]);
        } else {
            a.set_local_only(m, scn.users[m], c.mu_local);
        }
    }
    return a;
}

struct AdmissionResult {
    MatchingState state;
    std::vector<int> served;
};

inline std::vector<int> admission_order(const Scenario& scn)
{
    std::vector<int> order(scn.users.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&scn](int a, int b) {
        if (scn.users[a].task_bits != scn.users[b].task_bits)
            return scn.users[a].task_bits > scn.users[b].task_bits;
        return a < b;
    });
    return order;
}

// Admission in a given priority order. With enough sub-channels everyone is
// admitted on their best free channel. Under deficit a user is admitted only
// if fully offloading to the relay (at the provisional per-user CPU rate
// f_mr_total / ceil(S/2)) beats fully local execution, and once channels run
// out a contender evicts the incumbent on its best channel iff its
// local-minus-remote gap is strictly larger.
inline AdmissionResult admit_users_ordered(const Scenario& scn,
                                           const std::vector<int>& order)
{
    const auto& c = scn.config;
    const int s_count = c.num_subchannels;
    MatchingState st(c.num_users, s_count);
    std::vector<char> free_ch(s_count, 1);
    const double provisional_share = c.f_mr_total / std::ceil(s_count / 2.0);
    int num_ac = 0;

    auto rate_on = [&scn](int m, int s) { return sinr_mr(scn, m, s).rate; };
    auto best_channel = [&](int m, bool only_free) {
        int best = -1;
        double best_rate = -1.0;
        for (int s = 0; s < s_count; ++s) {
            if (only_free && !free_ch[s])
                continue;
            const double r = rate_on(m, s);
            if (r > best_rate) {
                best_rate = r;
                best = s;
            }
        }
        return best;
    };
    auto gap = [&](int m, int s) {
        const auto& u = scn.users[m];
        const double t_local_full = u.task_cycles() / u.f_local_max;
        const double t_remote_full =
            u.task_bits / rate_on(m, s) + u.task_cycles() / provisional_share;
        return t_local_full - t_remote_full;
    };

    for (int m : order) {
        if (c.num_users <= s_count) {
            const int s = best_channel(m, true);
            st.match(m, {Destination::MR, s});
            free_ch[s] = 0;
        } else if (num_ac < s_count) {
            const int s = best_channel(m, true);
            if (gap(m, s) > 0.0) {
                st.match(m, {Destination::MR, s});
                free_ch[s] = 0;
                ++num_ac;
            }
        } else {
            const int s = best_channel(m, false);
            const int incumbent = st.user_on(s);
            if (gap(m, s) > gap(incumbent, s)) {
                st.unmatch(incumbent);
                st.match(m, {Destination::MR, s});
            }
        }
    }
    return {st, st.matched_users()};
}

inline AdmissionResult admit_users(const Scenario& scn)
{
    return admit_users_ordered(scn, admission_order(scn));
}

// Repeated full scans over ordered served pairs; every blocking pair found
// is swapped in place. Stops after a scan with no swap.
inline MatchingState swap_phase(MatchingState st, const Scenario& scn,
                                int max_scans = 10000, int* scans_used = nullptr)
{
    const auto users = st.matched_users();
    int scans = 0;
    if (users.size() >= 2) {
        bool swapped = true;
        while (swapped) {
            if (++scans > max_scans)
                throw std::runtime_error("swap_phase: scan limit exceeded");
            swapped = false;
            for (int m : users) {
                for (int m2 : users) {
                    if (m == m2)
                        continue;
                    if (is_swap_blocking(st, scn, m, m2)) {
                        st = apply_swap(st, m, m2);
                        swapped = true;
                    }
                }
            }
        }
    }
    if (scans_used)
        *scans_used = scans;
    return st;
}

struct SplitOptions {
    bool use_binary_search = false;
    RelayPowerPolicy power;
};

struct SplitDebug {
    std::vector<double> candidate_total; // indexed by candidate bs count
    int chosen = 0;
};

namespace detail {

// Membership selection for one candidate bs count, following the
// latency-difference and relay-energy rules with trim/pad to the target.
// Users whose bs-side decision collapses to local-only are not bs-eligible.
struct SplitCandidate {
    std::vector<int> bs_users;
    double total = 0.0; // served users under this membership
};

inline SplitCandidate select_bs_users(const Scenario& scn, const MatchingState& base,
                                      const std::vector<int>& users, int nb,
                                      const RelayPowerPolicy& policy)
{
    const auto& c = scn.config;
    const int n = static_cast<int>(users.size());
    const int nr = n - nb;
    const double fr = nr > 0 ? c.f_mr_total / nr : 0.0;
    const double fb = nb > 0 ? c.f_bs_total / nb : 0.0;

    struct Cand {
        int user;
        double t_mr;
        double t_bs;
        double delta;      // t_mr - t_bs, > 0 prefers the bs
        double e_relay_mr; // relay compute energy when staying
        double e_relay_bs; // relay transmit energy when moving
        bool bs_ok;
    };
    std::vector<Cand> cand;
    cand.reserve(users.size());
    for (int m : users) {
        const int s = base.key_of(m)->subchannel;
        Cand cd;
        cd.user = m;
        SegmentationDecision dr;
        if (nr > 0) {
            dr = decision_with_policy(scn, m, {Destination::MR, s}, fr, policy, nullptr);
        } else {
            dr = local_only_decision(scn.users[m], c.mu_local);
        }
        cd.t_mr = dr.latency;
        cd.e_relay_mr = dr.mr_energy;
        cd.bs_ok = false;
        cd.t_bs = std::numeric_limits<double>::infinity();
        cd.e_relay_bs = 0.0;
        if (nb > 0) {
            const auto db =
                decision_with_policy(scn, m, {Destination::BS, s}, fb, policy, nullptr);
            if (db.destination == Destination::BS) {
                cd.bs_ok = true;
                cd.t_bs = db.latency;
                cd.e_relay_bs = db.mr_energy;
            } else {
                cd.t_bs = db.latency; // local fallback, not a real bs option
            }
        }
        cd.delta = cd.t_mr - cd.t_bs;
        cand.push_back(cd);
    }

    std::vector<Cand> to_bs, staying;
    for (const auto& cd : cand) {
        if (cd.bs_ok && cd.delta > 0.0 && cd.e_relay_mr > cd.e_relay_bs)
            to_bs.push_back(cd);
        else
            staying.push_back(cd);
    }
    if (static_cast<int>(to_bs.size()) > nb) {
        // return the least-gaining users to the relay
        std::stable_sort(to_bs.begin(), to_bs.end(), [](const Cand& a, const Cand& b) {
            if (a.delta != b.delta)
                return a.delta > b.delta;
            return a.user < b.user;
        });
        to_bs.resize(nb);
    } else if (static_cast<int>(to_bs.size()) < nb) {
        std::vector<Cand> pool1, pool2;
        for (const auto& cd : staying) {
            if (!cd.bs_ok)
                continue;
            (cd.delta >= 0.0 ? pool1 : pool2).push_back(cd);
        }
        std::stable_sort(pool1.begin(), pool1.end(), [](const Cand& a, const Cand& b) {
            if (a.t_bs != b.t_bs)
                return a.t_bs < b.t_bs;
            return a.user < b.user;
        });
        std::stable_sort(pool2.begin(), pool2.end(), [](const Cand& a, const Cand& b) {
            if (a.delta != b.delta)
                return a.delta > b.delta; // closest to indifferent first
            return a.user < b.user;
        });
        for (const auto& cd : pool1) {
            if (static_cast<int>(to_bs.size()) == nb)
                break;
            to_bs.push_back(cd);
        }
        for (const auto& cd : pool2) {
            if (static_cast<int>(to_bs.size()) == nb)
                break;
            to_bs.push_back(cd);
        }
    }

    SplitCandidate out;
    std::vector<char> is_bs(c.num_users, 0);
    for (const auto& cd : to_bs) {
        out.bs_users.push_back(cd.user);
        is_bs[cd.user] = 1;
    }
    if (static_cast<int>(to_bs.size()) == nb) {
        for (const auto& cd : cand)
            out.total += is_bs[cd.user] ? cd.t_bs : cd.t_mr;
        return out;
    }
    // The eligible pool ran short of the target count: rescore the achieved
    // membership at its actual shares so candidates stay comparable.
    const int nb2 = static_cast<int>(to_bs.size());
    const int nr2 = n - nb2;
    const double fr2 = nr2 > 0 ? c.f_mr_total / nr2 : 0.0;
    const double fb2 = nb2 > 0 ? c.f_bs_total / nb2 : 0.0;
    for (const auto& cd : cand) {
        const int s = base.key_of(cd.user)->subchannel;
        const ResourceKey key{is_bs[cd.user] ? Destination::BS : Destination::MR, s};
        const double share = is_bs[cd.user] ? fb2 : fr2;
        out.total += decision_with_policy(scn, cd.user, key, share, policy, nullptr)
                         .latency;
    }
    return out;
}

} // namespace detail

// Association split: search the number of BS users that minimizes the total
// latency of the served set, scoring each candidate count by the membership
// the selection rules would actually realize under its uniform shares.
inline Assignment split_association(const MatchingState& stable, const Scenario& scn,
                                    const SplitOptions& opts = {},
                                    SplitDebug* debug = nullptr)
{
    const auto users = stable.matched_users();
    const int n = static_cast<int>(users.size());

    MatchingState base = stable;
    for (int m : users)
        base.set_destination(m, Destination::MR);
    if (n == 0)
        return assignment_from_state(base, scn, opts.power);

    auto candidate = [&](int nb) {
        return detail::select_bs_users(scn, base, users, nb, opts.power);
    };
    auto candidate_total = [&](int nb) { return candidate(nb).total; };

    int best_nb = 0;
    std::vector<double> totals;
    if (opts.use_binary_search) {
        int lo = 0, hi = n;
        while (lo < hi) {
            const int mid = lo + (hi - lo) / 2;
            if (candidate_total(mid) <= candidate_total(mid + 1))
                hi = mid;
            else
                lo = mid + 1;
        }
        best_nb = lo;
    } else {
        double best_v = std::numeric_limits<double>::infinity();
        totals.reserve(n + 1);
        for (int nb = 0; nb <= n; ++nb) {
            const double v = candidate_total(nb);
            totals.push_back(v);
            if (v < best_v) {
                best_v = v;
                best_nb = nb;
            }
        }
    }
    if (debug) {
        debug->candidate_total = totals;
        debug->chosen = best_nb;
    }

    MatchingState chosen = base;
    if (best_nb > 0)
        for (int m : candidate(best_nb).bs_users)
            chosen.set_destination(m, Destination::BS);
    return assignment_from_state(chosen, scn, opts.power);
}

// Full pipeline: admission, swap-matching on the all-relay state, the
// association split, then one more swap-stabilization over the mixed state
// so no swap-blocking pair survives in the returned assignment.
inline Assignment run_raco(const Scenario& scn, const SplitOptions& opts = {})
{
    const auto adm = admit_users(scn);
    if (adm.served.empty())
        return assignment_from_state(adm.state, scn, opts.power);
    const MatchingState stable = swap_phase(adm.state, scn);
    Assignment split = split_association(stable, scn, opts);
    const MatchingState final_state = swap_phase(split.matching, scn);
    return assignment_from_state(final_state, scn, opts.power);
}

} // namespace tgmec
