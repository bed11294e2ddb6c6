#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tgmec/config.hpp"
#include "tgmec/rng.hpp"

namespace tgmec {

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

struct UserInstance {
    int id = 0;
    double x = 0.0; // m, relay at origin
    double y = 0.0;
    double task_bits = 0.0;      // d_m
    double cycles_per_bit = 0.0; // c_m
    double f_local_max = 0.0;    // f_m^max, cycles/s
    double energy_budget = 0.0;  // E_m, J
    double tx_power = 0.0;       // P_m, W

    double task_cycles() const { return task_bits * cycles_per_bit; }
    double dist_to_relay() const { return std::hypot(x, y); }
};

// One realized problem instance: user population plus the quasistatic
// channel power gains, one per (link, sub-channel). Immutable once built.
struct Scenario {
    SystemConfig config;
    std::vector<UserInstance> users;
    double bs_x = 0.0;
    double bs_y = 0.0;
    std::vector<std::vector<double>> user_relay_gain; // [user][subchannel], H > 0
    std::vector<double> relay_bs_gain;                // [subchannel]
    std::uint64_t seed = 0;

    double dist_relay_bs() const { return std::hypot(bs_x, bs_y); }
    double dist_user_bs(const UserInstance& u) const
    {
        return std::hypot(u.x - bs_x, u.y - bs_y);
    }
};

inline Scenario generate_scenario(const SystemConfig& config, std::uint64_t seed)
{
    require_valid(config);

    Scenario scn;
    scn.config = config;
    scn.seed = seed;
    scn.bs_x = config.bs_distance_m;
    scn.bs_y = 0.0;

    Rng rng(seed);
    const double p_tx_w = dbm_to_watt(config.user_tx_power_dbm);

    scn.users.reserve(config.num_users);
    for (int m = 0; m < config.num_users; ++m) {
        UserInstance u;
        u.id = m;
        // uniform over the disc
        const double r = config.cell_radius_m * std::sqrt(rng.uniform());
        const double th = 2.0 * 3.14159265358979323846 * rng.uniform();
        u.x = r * std::cos(th);
        u.y = r * std::sin(th);
        u.task_bits = rng.uniform(config.task_bits_range.lo, config.task_bits_range.hi);
        u.cycles_per_bit =
            rng.uniform(config.cycles_per_bit_range.lo, config.cycles_per_bit_range.hi);
        u.f_local_max =
            rng.uniform(config.f_local_max_range.lo, config.f_local_max_range.hi);
        u.energy_budget = config.user_energy_choices[static_cast<std::size_t>(
            rng.below(config.user_energy_choices.size()))];
        u.tx_power = p_tx_w;
        scn.users.push_back(u);
    }

    // Channel power gains are gamma distributed: the power envelope of a
    // Nakagami-m amplitude with spread w has shape m and mean w.
    const double shape = config.nakagami_m;
    const double scale = config.nakagami_w / config.nakagami_m;
    scn.user_relay_gain.assign(config.num_users,
                               std::vector<double>(config.num_subchannels, 0.0));
    for (int m = 0; m < config.num_users; ++m)
        for (int s = 0; s < config.num_subchannels; ++s)
            scn.user_relay_gain[m][s] = rng.gamma(shape, scale);
    scn.relay_bs_gain.assign(config.num_subchannels, 0.0);
    for (int s = 0; s < config.num_subchannels; ++s)
        scn.relay_bs_gain[s] = rng.gamma(shape, scale);

    return scn;
}

} // namespace tgmec
