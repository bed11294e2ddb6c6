#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace tgmec {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

// All physical and algorithmic constants of one experiment. Defaults are the
// simulation parameters the presets build on; every field can be overridden
// from a JSON config file.
struct SystemConfig {
    int num_users = 30;                        // M
    int num_subchannels = 10;                  // S
    double total_bandwidth = 2e9;              // Hz, split evenly over sub-channels
    double carrier = 28e9;                     // Hz, informational only
    double noise_density_dbm_per_mhz = -134.0; // N0
    double user_tx_power_dbm = 5.0;            // P_m
    double pathloss_exponent = 3.0;            // alpha
    double si_cancellation = 3.162e-12;        // beta, residual self-interference factor
    double hpbw_deg = 30.0;                    // half-power beamwidth of every antenna
    double nakagami_m = 3.0;                   // fading depth
    double nakagami_w = 1.0 / 3.0;             // mean channel power gain
    double mu_local = 5e-27;                   // user CPU effective capacitance, J*s^2/cycle^3
    double xi_mr = 5e-27;                      // relay CPU effective capacitance
    double f_mr_total = 8e9;                   // relay CPU capacity, cycles/s
    double f_bs_total = 24e9;                  // base-station CPU capacity, cycles/s
    double e_mr_budget = 5.0;                  // relay energy budget per epoch, J
    double energy_eps = 0.001;                 // eps1, J, budget-fit window
    double freq_eps = 2e6;                     // eps2, cycles/s, frequency decrement step
    double cell_radius_m = 120.0;              // users fall in this disc around the relay
    double bs_distance_m = 500.0;              // relay to base-station distance
    Range task_bits_range{1e6, 4e6};           // d_m
    Range cycles_per_bit_range{300.0, 500.0};  // c_m
    Range f_local_max_range{0.3e9, 0.5e9};     // f_m^max
    std::vector<double> user_energy_choices{0.5, 1.2, 1.8}; // E_m drawn from this set
    Range runp_power_range{0.1, 0.6};          // W, runp baseline only
    double jpora_bs_radius_m = 200.0;          // jpora baseline only

    double subchannel_bandwidth() const
    {
        return total_bandwidth / static_cast<double>(num_subchannels);
    }
};

struct ConfigViolation {
    std::string field;
    std::string message;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error("config error [" + field + "]: " + message),
          field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

inline std::vector<ConfigViolation> validate_config(const SystemConfig& c)
{
    std::vector<ConfigViolation> out;
    auto bad = [&out](const std::string& field, const std::string& msg) {
        out.push_back({field, msg});
    };
    if (c.num_users < 1)
        bad("num_users", "must be >= 1");
    if (c.num_subchannels < 1)
        bad("num_subchannels", "must be >= 1");
    auto positive = [&bad](double v, const std::string& field) {
        if (!(v > 0.0))
            bad(field, "must be > 0");
    };
    positive(c.total_bandwidth, "total_bandwidth");
    positive(c.carrier, "carrier");
    positive(c.pathloss_exponent, "pathloss_exponent");
    positive(c.mu_local, "mu_local");
    positive(c.xi_mr, "xi_mr");
    positive(c.f_mr_total, "f_mr_total");
    positive(c.f_bs_total, "f_bs_total");
    positive(c.e_mr_budget, "e_mr_budget");
    positive(c.energy_eps, "energy_eps");
    positive(c.freq_eps, "freq_eps");
    positive(c.cell_radius_m, "cell_radius_m");
    positive(c.bs_distance_m, "bs_distance_m");
    positive(c.nakagami_m, "nakagami_m");
    positive(c.nakagami_w, "nakagami_w");
    positive(c.jpora_bs_radius_m, "jpora_bs_radius_m");
    if (c.si_cancellation < 0.0)
        bad("si_cancellation", "must be >= 0");
    if (!(c.hpbw_deg > 0.0 && c.hpbw_deg < 180.0))
        bad("hpbw_deg", "must lie in (0, 180)");
    auto range_ok = [&bad, &positive](const Range& r, const std::string& field) {
        positive(r.lo, field + ".lo");
        if (r.lo > r.hi)
            bad(field, "lo must be <= hi");
    };
    range_ok(c.task_bits_range, "task_bits_range");
    range_ok(c.cycles_per_bit_range, "cycles_per_bit_range");
    range_ok(c.f_local_max_range, "f_local_max_range");
    range_ok(c.runp_power_range, "runp_power_range");
    if (c.user_energy_choices.empty())
        bad("user_energy_choices", "must not be empty");
    for (double e : c.user_energy_choices)
        if (!(e > 0.0)) {
            bad("user_energy_choices", "all entries must be > 0");
            break;
        }
    return out;
}

inline void require_valid(const SystemConfig& c)
{
    const auto violations = validate_config(c);
    if (!violations.empty())
        throw ConfigError(violations.front().field, violations.front().message);
}

// --- JSON round trip ------------------------------------------------------

inline nlohmann::json config_to_json(const SystemConfig& c)
{
    nlohmann::json j;
    j["num_users"] = c.num_users;
    j["num_subchannels"] = c.num_subchannels;
    j["total_bandwidth"] = c.total_bandwidth;
    j["carrier"] = c.carrier;
    j["noise_density_dbm_per_mhz"] = c.noise_density_dbm_per_mhz;
    j["user_tx_power_dbm"] = c.user_tx_power_dbm;
    j["pathloss_exponent"] = c.pathloss_exponent;
    j["si_cancellation"] = c.si_cancellation;
    j["hpbw_deg"] = c.hpbw_deg;
    j["nakagami_m"] = c.nakagami_m;
    j["nakagami_w"] = c.nakagami_w;
    j["mu_local"] = c.mu_local;
    j["xi_mr"] = c.xi_mr;
    j["f_mr_total"] = c.f_mr_total;
    j["f_bs_total"] = c.f_bs_total;
    j["e_mr_budget"] = c.e_mr_budget;
    j["energy_eps"] = c.energy_eps;
    j["freq_eps"] = c.freq_eps;
    j["cell_radius_m"] = c.cell_radius_m;
    j["bs_distance_m"] = c.bs_distance_m;
    j["task_bits_range"] = {c.task_bits_range.lo, c.task_bits_range.hi};
    j["cycles_per_bit_range"] = {c.cycles_per_bit_range.lo, c.cycles_per_bit_range.hi};
    j["f_local_max_range"] = {c.f_local_max_range.lo, c.f_local_max_range.hi};
    j["user_energy_choices"] = c.user_energy_choices;
    j["runp_power_range"] = {c.runp_power_range.lo, c.runp_power_range.hi};
    j["jpora_bs_radius_m"] = c.jpora_bs_radius_m;
    return j;
}

inline SystemConfig config_from_json(const nlohmann::json& j)
{
    SystemConfig c;
    auto get_range = [](const nlohmann::json& v, const std::string& key) {
        if (!v.is_array() || v.size() != 2)
            throw ConfigError(key, "expected a [lo, hi] pair");
        return Range{v[0].get<double>(), v[1].get<double>()};
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const nlohmann::json& v = it.value();
        try {
            if (key == "num_users")
                c.num_users = v.get<int>();
            else if (key == "num_subchannels")
                c.num_subchannels = v.get<int>();
            else if (key == "total_bandwidth")
                c.total_bandwidth = v.get<double>();
            else if (key == "carrier")
                c.carrier = v.get<double>();
            else if (key == "noise_density_dbm_per_mhz")
                c.noise_density_dbm_per_mhz = v.get<double>();
            else if (key == "user_tx_power_dbm")
                c.user_tx_power_dbm = v.get<double>();
            else if (key == "pathloss_exponent")
                c.pathloss_exponent = v.get<double>();
            else if (key == "si_cancellation")
                c.si_cancellation = v.get<double>();
            else if (key == "hpbw_deg")
                c.hpbw_deg = v.get<double>();
            else if (key == "nakagami_m")
                c.nakagami_m = v.get<double>();
            else if (key == "nakagami_w")
                c.nakagami_w = v.get<double>();
            else if (key == "mu_local")
                c.mu_local = v.get<double>();
            else if (key == "xi_mr")
                c.xi_mr = v.get<double>();
            else if (key == "f_mr_total")
                c.f_mr_total = v.get<double>();
            else if (key == "f_bs_total")
                c.f_bs_total = v.get<double>();
            else if (key == "e_mr_budget")
                c.e_mr_budget = v.get<double>();
            else if (key == "energy_eps")
                c.energy_eps = v.get<double>();
            else if (key == "freq_eps")
                c.freq_eps = v.get<double>();
            else if (key == "cell_radius_m")
                c.cell_radius_m = v.get<double>();
            else if (key == "bs_distance_m")
                c.bs_distance_m = v.get<double>();
            else if (key == "task_bits_range")
                c.task_bits_range = get_range(v, key);
            else if (key == "cycles_per_bit_range")
                c.cycles_per_bit_range = get_range(v, key);
            else if (key == "f_local_max_range")
                c.f_local_max_range = get_range(v, key);
            else if (key == "user_energy_choices")
                c.user_energy_choices = v.get<std::vector<double>>();
            else if (key == "runp_power_range")
                c.runp_power_range = get_range(v, key);
            else if (key == "jpora_bs_radius_m")
                c.jpora_bs_radius_m = v.get<double>();
            else
                throw ConfigError(key, "unknown key");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(key, e.what());
        }
    }
    return c;
}

inline SystemConfig load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path, "cannot open config file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path, std::string("parse failure: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigError(path, "top level must be an object");
    return config_from_json(j);
}

} // namespace tgmec
