#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tgmec/baselines.hpp"

namespace tgmec {

// Monte-Carlo harness: seeded, paired across schemes, and deterministic in
// its output bytes no matter how many worker threads run the trials.

enum class Scheme { Jraco, Usra, Runp, Ro, Jpora };

inline const char* scheme_name(Scheme s)
{
    switch (s) {
    case Scheme::Jraco: return "jraco";
    case Scheme::Usra: return "usra";
    case Scheme::Runp: return "runp";
    case Scheme::Ro: return "ro";
    case Scheme::Jpora: return "jpora";
    }
    return "?";
}

inline std::optional<Scheme> parse_scheme(const std::string& name)
{
    if (name == "jraco")
        return Scheme::Jraco;
    if (name == "usra")
        return Scheme::Usra;
    if (name == "runp")
        return Scheme::Runp;
    if (name == "ro")
        return Scheme::Ro;
    if (name == "jpora")
        return Scheme::Jpora;
    return std::nullopt;
}

inline std::vector<Scheme> all_schemes()
{
    return {Scheme::Jraco, Scheme::Usra, Scheme::Runp, Scheme::Ro, Scheme::Jpora};
}

inline Assignment run_scheme(Scheme s, const Scenario& scn, std::uint64_t scheme_seed)
{
    switch (s) {
    case Scheme::Jraco: return enforce_budget(run_raco(scn), scn);
    case Scheme::Usra: return run_usra(scn, scheme_seed);
    case Scheme::Runp: return run_runp(scn, scheme_seed);
    case Scheme::Ro: return run_ro(scn, scheme_seed);
    case Scheme::Jpora: return run_jpora(scn);
    }
    throw std::logic_error("run_scheme: unknown scheme");
}

struct SweepSpec {
    std::string name = "custom";
    std::string parameter;      // num_subchannels | num_users | task_size_max |
                                // f_mr_total | e_mr_budget
    std::vector<double> values; // non-empty, ascending
    int trials = 100;
    SystemConfig base;
    std::vector<Scheme> schemes = all_schemes();
    double bs_capacity_ratio = 0.0; // if > 0, ties f_bs_total to the swept f_mr_total
};

inline SystemConfig apply_sweep_value(const SweepSpec& spec, double value)
{
    SystemConfig c = spec.base;
    if (spec.parameter == "num_subchannels")
        c.num_subchannels = static_cast<int>(std::lround(value));
    else if (spec.parameter == "num_users")
        c.num_users = static_cast<int>(std::lround(value));
    else if (spec.parameter == "task_size_max")
        c.task_bits_range.hi = value;
    else if (spec.parameter == "f_mr_total") {
        c.f_mr_total = value;
        if (spec.bs_capacity_ratio > 0.0)
            c.f_bs_total = spec.bs_capacity_ratio * value;
    } else if (spec.parameter == "e_mr_budget")
        c.e_mr_budget = value;
    else
        throw ConfigError("parameter", "unknown sweep parameter '" + spec.parameter + "'");
    return c;
}

inline void validate_spec(const SweepSpec& spec)
{
    if (spec.values.empty())
        throw ConfigError("values", "sweep needs at least one value");
    for (std::size_t i = 1; i < spec.values.size(); ++i)
        if (spec.values[i] < spec.values[i - 1])
            throw ConfigError("values", "sweep values must be ascending");
    if (spec.trials < 1)
        throw ConfigError("trials", "trials must be >= 1");
    if (spec.schemes.empty())
        throw ConfigError("schemes", "at least one scheme required");
    apply_sweep_value(spec, spec.values.front()); // rejects unknown parameter names
}

// --- statistics -------------------------------------------------------------

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    bool ci_valid = false;
};

inline Aggregate aggregate(const std::vector<double>& xs)
{
    Aggregate a;
    const std::size_t n = xs.size();
    if (n == 0)
        return a;
    double sum = 0.0;
    for (double x : xs)
        sum += x;
    a.mean = sum / static_cast<double>(n);
    if (n < 2)
        return a;
    double sq = 0.0;
    for (double x : xs)
        sq += (x - a.mean) * (x - a.mean);
    a.stddev = std::sqrt(sq / static_cast<double>(n - 1));
    const double half = 1.96 * a.stddev / std::sqrt(static_cast<double>(n));
    a.ci_lo = a.mean - half;
    a.ci_hi = a.mean + half;
    a.ci_valid = true;
    return a;
}

// --- sweep ------------------------------------------------------------------

struct TrialReport {
    Scheme scheme = Scheme::Jraco;
    double sweep_value = 0.0;
    int trial = 0;
    double avg_latency = 0.0;
    int served_count = 0;
    std::uint64_t seed = 0;
};

struct CellStats {
    Aggregate latency;
    double mean_served = 0.0;
    int trials = 0;
};

struct SweepReport {
    SweepSpec spec;
    std::uint64_t master_seed = 0;
    std::vector<TrialReport> raw;             // (value, trial, scheme) order
    std::vector<std::vector<CellStats>> cells; // [value index][scheme index]

    const CellStats& cell(std::size_t value_idx, Scheme s) const
    {
        for (std::size_t k = 0; k < spec.schemes.size(); ++k)
            if (spec.schemes[k] == s)
                return cells.at(value_idx).at(k);
        throw std::logic_error("cell: scheme not in sweep");
    }

    std::string raw_csv() const
    {
        std::string out = "scheme,sweep_value,trial,avg_latency_s,served_count,seed\n";
        for (const auto& r : raw) {
            out += scheme_name(r.scheme);
            out += ",";
            out += fmt_g(r.sweep_value);
            out += ",";
            out += std::to_string(r.trial);
            out += ",";
            out += fmt_g(r.avg_latency);
            out += ",";
            out += std::to_string(r.served_count);
            out += ",";
            out += std::to_string(r.seed);
            out += "\n";
        }
        return out;
    }

    std::string summary_csv() const
    {
        std::string out = "scheme,sweep_value,mean,std,ci_lo,ci_hi\n";
        for (std::size_t v = 0; v < spec.values.size(); ++v) {
            for (std::size_t k = 0; k < spec.schemes.size(); ++k) {
                const auto& st = cells[v][k].latency;
                out += scheme_name(spec.schemes[k]);
                out += ",";
                out += fmt_g(spec.values[v]);
                out += ",";
                out += fmt_g(st.mean);
                if (st.ci_valid) {
                    out += "," + fmt_g(st.stddev) + "," + fmt_g(st.ci_lo) + ","
                        + fmt_g(st.ci_hi);
                } else {
                    out += ",na,na,na";
                }
                out += "\n";
            }
        }
        return out;
    }
};

class TrialFailure : public std::runtime_error {
public:
    TrialFailure(std::uint64_t seed, const std::string& what)
        : std::runtime_error("trial with seed " + std::to_string(seed) + " failed: " + what),
          seed_(seed)
    {
    }
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

inline std::uint64_t trial_seed(std::uint64_t master, std::size_t value_idx, int trial)
{
    return derive_seed(master, value_idx + 1, static_cast<std::uint64_t>(trial) + 1);
}

inline std::uint64_t scheme_seed(std::uint64_t tseed, Scheme s)
{
    return derive_seed(tseed, 0x9000 + static_cast<std::uint64_t>(s));
}

inline SweepReport run_sweep(const SweepSpec& spec, std::uint64_t master_seed,
                             int parallel = 1)
{
    validate_spec(spec);
    SweepReport rep;
    rep.spec = spec;
    rep.master_seed = master_seed;

    const std::size_t n_values = spec.values.size();
    const std::size_t n_schemes = spec.schemes.size();
    const std::size_t n_tasks = n_values * static_cast<std::size_t>(spec.trials);

    struct Slot {
        std::vector<double> avg_latency;
        std::vector<int> served;
        std::uint64_t seed = 0;
    };
    std::vector<Slot> slots(n_tasks);

    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;

    auto worker = [&]() {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= n_tasks)
                return;
            {
                std::lock_guard<std::mutex> lk(failure_mutex);
                if (failure)
                    return;
            }
            const std::size_t value_idx = t / static_cast<std::size_t>(spec.trials);
            const int trial = static_cast<int>(t % static_cast<std::size_t>(spec.trials));
            const std::uint64_t seed = trial_seed(master_seed, value_idx, trial);
            try {
                const SystemConfig cfg = apply_sweep_value(spec, spec.values[value_idx]);
                const Scenario scn = generate_scenario(cfg, seed);
                Slot& slot = slots[t];
                slot.seed = seed;
                slot.avg_latency.resize(n_schemes);
                slot.served.resize(n_schemes);
                for (std::size_t k = 0; k < n_schemes; ++k) {
                    const Assignment a =
                        run_scheme(spec.schemes[k], scn, scheme_seed(seed, spec.schemes[k]));
                    slot.avg_latency[k] = a.avg_latency();
                    slot.served[k] = a.served_count();
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(failure_mutex);
                if (!failure)
                    failure = std::make_exception_ptr(TrialFailure(seed, e.what()));
                return;
            }
        }
    };

    const int n_threads = std::max(1, parallel);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    rep.raw.reserve(n_tasks * n_schemes);
    rep.cells.assign(n_values, std::vector<CellStats>(n_schemes));
    for (std::size_t v = 0; v < n_values; ++v) {
        std::vector<std::vector<double>> lat(n_schemes);
        std::vector<std::vector<double>> served(n_schemes);
        for (int trial = 0; trial < spec.trials; ++trial) {
            const Slot& slot = slots[v * spec.trials + trial];
            for (std::size_t k = 0; k < n_schemes; ++k) {
                rep.raw.push_back({spec.schemes[k], spec.values[v], trial,
                                   slot.avg_latency[k], slot.served[k], slot.seed});
                lat[k].push_back(slot.avg_latency[k]);
                served[k].push_back(slot.served[k]);
            }
        }
        for (std::size_t k = 0; k < n_schemes; ++k) {
            CellStats cs;
            cs.latency = aggregate(lat[k]);
            cs.trials = spec.trials;
            double s = 0.0;
            for (double x : served[k])
                s += x;
            cs.mean_served = served[k].empty() ? 0.0 : s / served[k].size();
            rep.cells[v][k] = cs;
        }
    }
    return rep;
}

// --- presets ----------------------------------------------------------------

inline std::vector<std::string> preset_names()
{
    return {"fig1", "fig2", "fig3", "fig4", "fig5_deficit", "fig5_surplus"};
}

inline SweepSpec preset_spec(const std::string& name, SystemConfig base = {})
{
    SweepSpec s;
    s.name = name;
    s.base = base;
    if (name == "fig1") {
        s.base.num_users = 30;
        s.parameter = "num_subchannels";
        s.values = {10, 15, 20, 25, 30, 35, 40};
    } else if (name == "fig2") {
        s.base.num_subchannels = 30;
        s.base.f_mr_total = 12e9;
        s.base.f_bs_total = 36e9;
        s.parameter = "num_users";
        s.values = {15, 20, 25, 30, 35, 40, 45};
    } else if (name == "fig3") {
        s.base.num_users = 30;
        s.base.num_subchannels = 20;
        s.parameter = "task_size_max";
        s.values = {1.5e6, 2e6, 2.5e6, 3e6, 3.5e6, 4e6};
    } else if (name == "fig4") {
        s.base.num_users = 30;
        s.base.num_subchannels = 20;
        s.parameter = "f_mr_total";
        // below ~5 GHz the admission screen's provisional per-user share
        // drops under every device's own cpu rate and nobody qualifies
        s.values = {6e9, 8e9, 10e9, 12e9, 14e9, 16e9};
        s.bs_capacity_ratio = 3.0;
    } else if (name == "fig5" || name == "fig5_deficit") {
        s.name = "fig5_deficit";
        s.base.num_users = 30;
        s.base.num_subchannels = 20;
        s.parameter = "e_mr_budget";
        s.values = {0.5, 1, 2, 3, 4, 5, 6, 7, 8};
    } else if (name == "fig5_surplus") {
        s.base.num_users = 20;
        s.base.num_subchannels = 25;
        s.parameter = "e_mr_budget";
        s.values = {0.5, 1, 2, 3, 4, 5, 6, 7, 8};
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    return s;
}

} // namespace tgmec
