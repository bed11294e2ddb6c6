#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "tgmec/matching.hpp"

namespace tgmec {

inline std::string fmt_g(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// Full decision state for one scenario: who is served where, on which
// sub-channel, with which split, frequencies, relay power, and the resulting
// per-user latency and energies.
struct Assignment {
    MatchingState matching;
    std::vector<Destination> destination; // Local means unserved
    std::vector<int> subchannel;          // -1 when unserved
    std::vector<double> local_fraction;   // 1.0 when unserved
    std::vector<double> f_local;
    std::vector<double> f_remote;         // personal remote CPU rate, 0 when unserved
    std::vector<double> p_relay;          // relay transmit power, BS users only
    std::vector<double> latency;
    std::vector<double> user_energy;
    std::vector<double> mr_energy;
    double f_mr_share = 0.0; // uniform shares the remote rates started from
    double f_bs_share = 0.0;

    explicit Assignment(int num_users = 0, int num_subchannels = 0)
        : matching(num_users, num_subchannels),
          destination(num_users, Destination::Local),
          subchannel(num_users, -1),
          local_fraction(num_users, 1.0),
          f_local(num_users, 0.0),
          f_remote(num_users, 0.0),
          p_relay(num_users, 0.0),
          latency(num_users, 0.0),
          user_energy(num_users, 0.0),
          mr_energy(num_users, 0.0)
    {
    }

    int num_users() const { return static_cast<int>(destination.size()); }

    bool served(int m) const { return destination.at(m) != Destination::Local; }

    std::vector<int> served_mr() const { return users_at(Destination::MR); }
    std::vector<int> served_bs() const { return users_at(Destination::BS); }

    int served_count() const
    {
        int n = 0;
        for (int m = 0; m < num_users(); ++m)
            n += served(m);
        return n;
    }

    double avg_latency() const
    {
        double sum = 0.0;
        for (double t : latency)
            sum += t;
        return destination.empty() ? 0.0 : sum / static_cast<double>(num_users());
    }

    double total_latency() const
    {
        double sum = 0.0;
        for (double t : latency)
            sum += t;
        return sum;
    }

    double total_mr_energy() const
    {
        double sum = 0.0;
        for (double e : mr_energy)
            sum += e;
        return sum;
    }

    void set_local_only(int m, const UserInstance& u, double mu)
    {
        if (matching.is_matched(m))
            matching.unmatch(m);
        const auto dec = local_only_decision(u, mu);
        destination[m] = Destination::Local;
        subchannel[m] = -1;
        local_fraction[m] = 1.0;
        f_local[m] = dec.f_local;
        f_remote[m] = 0.0;
        p_relay[m] = 0.0;
        latency[m] = dec.latency;
        user_energy[m] = dec.user_energy;
        mr_energy[m] = 0.0;
    }

    void set_decision(int m, int s, const SegmentationDecision& dec, double f_rem,
                      double p_rel)
    {
        destination[m] = dec.destination;
        subchannel[m] = dec.destination == Destination::Local ? -1 : s;
        local_fraction[m] = dec.local_fraction;
        f_local[m] = dec.f_local;
        f_remote[m] = dec.destination == Destination::Local ? 0.0 : f_rem;
        p_relay[m] = dec.destination == Destination::BS ? p_rel : 0.0;
        latency[m] = dec.latency;
        user_energy[m] = dec.user_energy;
        mr_energy[m] = dec.mr_energy;
    }

    // One record per user, deterministic bytes.
    std::string dump() const
    {
        std::string out;
        for (int m = 0; m < num_users(); ++m) {
            out += "user " + std::to_string(m);
            out += " served=" + std::string(served(m) ? "1" : "0");
            out += " dest=" + std::string(to_string(destination[m]));
            out += " subchannel=" + std::to_string(subchannel[m]);
            out += " local_fraction=" + fmt_g(local_fraction[m]);
            out += " f_local=" + fmt_g(f_local[m]);
            out += " f_remote=" + fmt_g(f_remote[m]);
            out += " p_relay=" + fmt_g(p_relay[m]);
            out += " latency=" + fmt_g(latency[m]);
            out += " user_energy=" + fmt_g(user_energy[m]);
            out += " mr_energy=" + fmt_g(mr_energy[m]);
            out += "\n";
        }
        out += "avg_latency=" + fmt_g(avg_latency());
        out += " served=" + std::to_string(served_count());
        out += " mr_energy_total=" + fmt_g(total_mr_energy());
        out += "\n";
        return out;
    }

private:
    std::vector<int> users_at(Destination d) const
    {
        std::vector<int> out;
        for (int m = 0; m < num_users(); ++m)
            if (destination[m] == d)
                out.push_back(m);
        return out;
    }
};

} // namespace tgmec
