#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "tgmec/scenario.hpp"

namespace tgmec {

// Per-user latency/energy formulas and the closed-form decisions: how much of
// a task stays on the device (the local fraction), the capped local CPU
// frequency, and the relay transmit power that balances the two hops of the
// full-duplex path.

enum class Destination { Local, MR, BS };

inline const char* to_string(Destination d)
{
    switch (d) {
    case Destination::Local: return "local";
    case Destination::MR: return "mr";
    case Destination::BS: return "bs";
    }
    return "?";
}

struct SegmentationDecision {
    double local_fraction = 1.0;           // lambda, share of bits computed on the device
    double f_local = 0.0;                  // cycles/s actually used locally
    Destination destination = Destination::Local;
    double latency = 0.0;                  // s, max of the two parallel processes
    double user_energy = 0.0;              // J, local compute + uplink transmission
    double mr_energy = 0.0;                // J, relay compute (MR) or relay transmit (BS)
};

inline double local_latency(double fraction, double d_bits, double cycles_per_bit,
                            double f_local)
{
    if (!(f_local > 0.0))
        throw std::domain_error("local_latency: f_local must be > 0");
    return fraction * d_bits * cycles_per_bit / f_local;
}

inline double local_energy(double fraction, double d_bits, double cycles_per_bit,
                           double f_local, double mu)
{
    if (f_local < 0.0)
        throw std::domain_error("local_energy: f_local must be >= 0");
    return mu * fraction * d_bits * cycles_per_bit * f_local * f_local;
}

struct OffloadCost {
    double t_upload = 0.0;
    double t_exec = 0.0;
    double user_energy = 0.0; // uplink transmission energy of the user
    double mr_energy = 0.0;   // relay-side energy attributable to this user
};

// Costs of the offloaded portion. For MR execution the relay pays compute
// energy xi*(1-lambda)*d*c*f_remote^2; for BS execution it pays transmit
// energy p_relay * t_upload, with t_upload taken over the min-rate pipe.
inline OffloadCost offload_latency_energy(double fraction, const UserInstance& u,
                                          double rate, double f_remote,
                                          Destination dest, double xi,
                                          double p_relay)
{
    if (!(rate > 0.0))
        throw std::domain_error("offload_latency_energy: rate must be > 0");
    if (!(f_remote > 0.0))
        throw std::domain_error("offload_latency_energy: f_remote must be > 0");
    if (fraction >= 1.0)
        throw std::logic_error(
            "offload_latency_energy: nothing to offload, caller must go local-only");
    const double bits = (1.0 - fraction) * u.task_bits;
    OffloadCost c;
    c.t_upload = bits / rate;
    c.t_exec = bits * u.cycles_per_bit / f_remote;
    c.user_energy = u.tx_power * c.t_upload;
    if (dest == Destination::MR)
        c.mr_energy = xi * bits * u.cycles_per_bit * f_remote * f_remote;
    else if (dest == Destination::BS)
        c.mr_energy = p_relay * c.t_upload;
    return c;
}

// Local compute and offloading run in parallel; the task finishes with the
// slower of the two.
inline double total_latency(double t_local, double t_offload_path)
{
    return std::max(t_local, t_offload_path);
}

struct FractionInterval {
    double lo = 0.0;
    double hi = 1.0;
    double clamp(double x) const { return std::min(hi, std::max(lo, x)); }
};

// Feasible local fractions under the user energy budget:
//   mu*lam*d*c*f_local^2 + p*(1-lam)*d/rate <= e_budget.
// The cost is linear in lam, so the feasible set is an interval (possibly
// empty). Solving the inequality directly instead of the quotient form keeps
// the sign right when the transmission term dominates the local term.
inline std::optional<FractionInterval>
feasible_fraction_interval(double d_bits, double cycles_per_bit, double f_local,
                           double rate, double p_tx, double e_budget, double mu)
{
    if (!(rate > 0.0) || !(f_local > 0.0))
        throw std::domain_error("feasible_fraction_interval: rate and f_local must be > 0");
    const double local_full = mu * d_bits * cycles_per_bit * f_local * f_local;
    const double tx_full = p_tx * d_bits / rate;
    const double slope = local_full - tx_full;
    // cost(lam) = tx_full + slope*lam
    if (std::abs(slope) < 1e-300) {
        if (tx_full <= e_budget)
            return FractionInterval{0.0, 1.0};
        return std::nullopt;
    }
    const double crossing = (e_budget - tx_full) / slope;
    if (slope > 0.0) {
        if (tx_full > e_budget)
            return std::nullopt; // even the cheapest end (lam=0) busts the budget
        return FractionInterval{0.0, std::min(1.0, crossing)};
    }
    if (local_full > e_budget)
        return std::nullopt; // even lam=1 busts the budget
    return FractionInterval{std::max(0.0, crossing), 1.0};
}

// Largest feasible local fraction, or nothing when no fraction fits.
inline std::optional<double> max_feasible_fraction(double d_bits, double cycles_per_bit,
                                                   double f_local, double rate,
                                                   double p_tx, double e_budget,
                                                   double mu)
{
    const auto iv =
        feasible_fraction_interval(d_bits, cycles_per_bit, f_local, rate, p_tx, e_budget, mu);
    if (!iv)
        return std::nullopt;
    return iv->hi;
}

// Fraction at which local compute time equals upload plus remote compute
// time; the unconstrained latency minimizer.
inline double equal_time_fraction(double f_local, double f_remote, double cycles_per_bit,
                                  double rate)
{
    if (!(f_local > 0.0 && f_remote > 0.0 && cycles_per_bit > 0.0 && rate > 0.0))
        throw std::domain_error("equal_time_fraction: all inputs must be > 0");
    const double num = f_local * (f_remote + cycles_per_bit * rate);
    return num / (num + cycles_per_bit * rate * f_remote);
}

// Latency-minimizing feasible fraction at a fixed local frequency: the
// unconstrained minimizer clamped into the feasible interval.
inline std::optional<double> optimal_fraction(double d_bits, double cycles_per_bit,
                                              double f_local, double f_remote,
                                              double rate, double p_tx,
                                              double e_budget, double mu)
{
    const auto iv =
        feasible_fraction_interval(d_bits, cycles_per_bit, f_local, rate, p_tx, e_budget, mu);
    if (!iv)
        return std::nullopt;
    return iv->clamp(equal_time_fraction(f_local, f_remote, cycles_per_bit, rate));
}

// Highest local frequency whose local-compute energy stays within budget.
inline double capped_local_frequency(double f_max, double e_budget, double mu,
                                     double fraction, double d_bits,
                                     double cycles_per_bit)
{
    if (fraction < 0.0)
        throw std::domain_error("capped_local_frequency: fraction must be >= 0");
    const double work = mu * fraction * d_bits * cycles_per_bit;
    if (work <= 0.0)
        return f_max;
    return std::min(f_max, std::sqrt(e_budget / work));
}

// Relay transmit power that equalizes the two hop SINRs of the full-duplex
// path. a is the received signal power of the first hop (W), b the
// second-hop channel gain per watt. Written in the cancellation-free form
//   p = 2*a*n0w / (n0w*b + sqrt((n0w*b)^2 + 4*beta*n0w*a*b)),
// which tends to a/b as beta -> 0.
inline double optimal_relay_power(double a, double b, double n0w, double beta)
{
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("optimal_relay_power: a and b must be > 0");
    if (beta < 0.0)
        throw std::domain_error("optimal_relay_power: beta must be >= 0");
    if (beta < 1e-18)
        return a / b;
    const double x = n0w * b;
    return 2.0 * a * n0w / (x + std::sqrt(x * x + 4.0 * beta * n0w * a * b));
}

// Local-only decision: all bits on the device, frequency capped so the local
// energy fits the budget.
inline SegmentationDecision local_only_decision(const UserInstance& u, double mu)
{
    SegmentationDecision dec;
    dec.local_fraction = 1.0;
    dec.destination = Destination::Local;
    dec.f_local = capped_local_frequency(u.f_local_max, u.energy_budget, mu, 1.0,
                                         u.task_bits, u.cycles_per_bit);
    dec.latency = local_latency(1.0, u.task_bits, u.cycles_per_bit, dec.f_local);
    dec.user_energy = local_energy(1.0, u.task_bits, u.cycles_per_bit, dec.f_local, mu);
    dec.mr_energy = 0.0;
    return dec;
}

// Full per-user decision for a given path (rate) and remote CPU share.
// Two-pass order: pick the fraction at f_max, cap the local frequency for
// that fraction, and re-pick the fraction once if the cap bound. Falls back
// to local-only when no fraction fits the budget or the offloaded share
// vanishes.
inline SegmentationDecision decide_segmentation(const UserInstance& u, double rate,
                                                double f_remote, Destination dest,
                                                double xi, double p_relay, double mu)
{
    if (dest == Destination::Local)
        return local_only_decision(u, mu);
    if (!(rate > 0.0) || !(f_remote > 0.0))
        return local_only_decision(u, mu);

    double f_loc = u.f_local_max;
    auto lam = optimal_fraction(u.task_bits, u.cycles_per_bit, f_loc, f_remote, rate,
                                u.tx_power, u.energy_budget, mu);
    if (!lam)
        return local_only_decision(u, mu);

    const double cap = capped_local_frequency(u.f_local_max, u.energy_budget, mu, *lam,
                                              u.task_bits, u.cycles_per_bit);
    if (cap < f_loc) {
        f_loc = cap;
        lam = optimal_fraction(u.task_bits, u.cycles_per_bit, f_loc, f_remote, rate,
                               u.tx_power, u.energy_budget, mu);
        if (!lam)
            return local_only_decision(u, mu);
    }
    if (*lam >= 1.0 - 1e-12)
        return local_only_decision(u, mu); // nothing worth offloading

    SegmentationDecision dec;
    dec.local_fraction = *lam;
    dec.f_local = f_loc;
    dec.destination = dest;
    const double t_loc = local_latency(*lam, u.task_bits, u.cycles_per_bit, f_loc);
    const auto off = offload_latency_energy(*lam, u, rate, f_remote, dest, xi, p_relay);
    dec.latency = total_latency(t_loc, off.t_upload + off.t_exec);
    dec.user_energy =
        local_energy(*lam, u.task_bits, u.cycles_per_bit, f_loc, mu) + off.user_energy;
    dec.mr_energy = off.mr_energy;

    // A latency-minimizing user never accepts a served split that loses to
    // plain local execution (possible when the budget caps the fraction on a
    // poor channel).
    const auto local = local_only_decision(u, mu);
    if (dec.latency > local.latency)
        return local;
    return dec;
}

} // namespace tgmec
