#pragma once

#include <cmath>
#include <stdexcept>

#include "tgmec/scenario.hpp"

namespace tgmec {

// Link-budget pieces for the relay path and both hops of the full-duplex
// base-station path. All gains are linear, all rates bits/s.

inline double path_loss(double distance_m, double alpha)
{
    if (!(distance_m > 0.0))
        throw std::domain_error("path_loss: distance must be > 0");
    return std::pow(distance_m, -alpha);
}

// Main-lobe boresight gain of the reference directional antenna model,
// parameterized by the half-power beamwidth.
inline double antenna_gain(double hpbw_deg)
{
    if (!(hpbw_deg > 0.0 && hpbw_deg < 180.0))
        throw std::domain_error("antenna_gain: hpbw must lie in (0, 180) degrees");
    const double half_rad = 0.5 * hpbw_deg * 3.14159265358979323846 / 180.0;
    const double g = 1.6162 / std::sin(half_rad);
    return g * g;
}

// Noise power over a band of w_hz, from a density given in dBm/MHz.
inline double noise_power(double n0_dbm_per_mhz, double w_hz)
{
    if (!(w_hz > 0.0))
        throw std::domain_error("noise_power: bandwidth must be > 0");
    const double watt_per_hz = std::pow(10.0, (n0_dbm_per_mhz - 30.0 - 60.0) / 10.0);
    return watt_per_hz * w_hz;
}

struct LinkBudget {
    double sinr = 0.0;              // linear
    double rate = 0.0;              // bits/s
    int subchannel = -1;
    double residual_si_power = 0.0; // W, zero on relay-path links
};

inline double shannon_rate(double bandwidth_hz, double sinr)
{
    return bandwidth_hz * std::log2(1.0 + sinr);
}

namespace detail {

inline double tx_rx_gain(const SystemConfig& c)
{
    const double g = antenna_gain(c.hpbw_deg);
    return g * g; // transmit and receive ends both at boresight
}

inline double noise_floor(const SystemConfig& c)
{
    return noise_power(c.noise_density_dbm_per_mhz, c.subchannel_bandwidth());
}

} // namespace detail

// Received signal power of user m at the relay on sub-channel s, i.e. the
// numerator shared by the relay-path SINR and the first hop.
inline double user_relay_signal_power(const Scenario& scn, int m, int s)
{
    const auto& u = scn.users.at(m);
    const double h = scn.user_relay_gain.at(m).at(s);
    return h * detail::tx_rx_gain(scn.config)
        * path_loss(u.dist_to_relay(), scn.config.pathloss_exponent) * u.tx_power;
}

// Second-hop channel gain per watt of relay transmit power.
inline double relay_bs_gain_per_watt(const Scenario& scn, int s)
{
    const double h = scn.relay_bs_gain.at(s);
    return h * detail::tx_rx_gain(scn.config)
        * path_loss(scn.dist_relay_bs(), scn.config.pathloss_exponent);
}

inline LinkBudget sinr_mr(const Scenario& scn, int m, int s)
{
    const double n0w = detail::noise_floor(scn.config);
    LinkBudget b;
    b.subchannel = s;
    b.sinr = user_relay_signal_power(scn, m, s) / n0w;
    b.rate = shannon_rate(scn.config.subchannel_bandwidth(), b.sinr);
    return b;
}

// First hop of the base-station path: same signal as the relay path, but the
// relay's own transmission leaks into the receiver as residual
// self-interference beta * p_relay.
inline LinkBudget sinr_first_hop(const Scenario& scn, int m, int s, double p_relay)
{
    if (p_relay < 0.0)
        throw std::domain_error("sinr_first_hop: relay power must be >= 0");
    const double n0w = detail::noise_floor(scn.config);
    const double si = scn.config.si_cancellation * p_relay;
    LinkBudget b;
    b.subchannel = s;
    b.residual_si_power = si;
    b.sinr = user_relay_signal_power(scn, m, s) / (n0w + si);
    b.rate = shannon_rate(scn.config.subchannel_bandwidth(), b.sinr);
    return b;
}

inline LinkBudget sinr_second_hop(const Scenario& scn, int s, double p_relay)
{
    if (p_relay < 0.0)
        throw std::domain_error("sinr_second_hop: relay power must be >= 0");
    const double n0w = detail::noise_floor(scn.config);
    LinkBudget b;
    b.subchannel = s;
    b.sinr = relay_bs_gain_per_watt(scn, s) * p_relay / n0w;
    b.rate = shannon_rate(scn.config.subchannel_bandwidth(), b.sinr);
    return b;
}

// The decode-and-forward pipe runs at the slower hop.
inline double rate_bs_path(const LinkBudget& first, const LinkBudget& second)
{
    if (first.subchannel != second.subchannel)
        throw std::logic_error("rate_bs_path: hops on different sub-channels");
    return std::min(first.rate, second.rate);
}

} // namespace tgmec
