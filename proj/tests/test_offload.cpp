#include <catch2/catch.hpp>

#include "tgmec/offload.hpp"
#include "tgmec/rng.hpp"
#include "test_support.hpp"

using namespace tgmec;
using tgmec_test::make_user;

namespace {

// Independent check for the optimal fraction: scan a fine grid of feasible
// fractions and return the best latency found.
struct GridBest {
    double fraction = 1.0;
    double latency = std::numeric_limits<double>::infinity();
};

GridBest grid_scan(const UserInstance& u, double rate, double f_local, double f_remote,
                   double mu, double step)
{
    GridBest best;
    const long n = std::lround(1.0 / step);
    for (long i = 0; i <= n; ++i) {
        const double lam = static_cast<double>(i) * step;
        const double cost = mu * lam * u.task_bits * u.cycles_per_bit * f_local * f_local
            + u.tx_power * (1.0 - lam) * u.task_bits / rate;
        if (cost > u.energy_budget)
            continue;
        const double t_loc = lam * u.task_bits * u.cycles_per_bit / f_local;
        const double t_off = (1.0 - lam) * u.task_bits / rate
            + (1.0 - lam) * u.task_bits * u.cycles_per_bit / f_remote;
        const double t = std::max(t_loc, t_off);
        if (t < best.latency) {
            best.latency = t;
            best.fraction = lam;
        }
    }
    return best;
}

UserInstance random_user(Rng& rng, int id = 0)
{
    return make_user(id, 1.0 + 119.0 * rng.uniform(), rng.uniform(1e6, 4e6),
                     rng.uniform(300.0, 500.0), rng.uniform(0.3e9, 0.5e9),
                     std::vector<double>{0.5, 1.2, 1.8}[rng.below(3)]);
}

} // namespace

TEST_CASE("local latency and energy formulas")
{
    CHECK(local_latency(0.5, 2e6, 400.0, 0.4e9) == Approx(1.0));
    CHECK(local_latency(0.0, 2e6, 400.0, 0.4e9) == 0.0);
    CHECK(local_latency(1.0, 1e6, 300.0, 0.3e9) == Approx(1.0));
    CHECK_THROWS_AS(local_latency(0.5, 1e6, 300.0, 0.0), std::domain_error);

    CHECK(local_energy(1.0, 1e6, 300.0, 0.3e9, 5e-27) == Approx(0.135));
    CHECK(local_energy(0.0, 1e6, 300.0, 0.3e9, 5e-27) == 0.0);
    const double e1 = local_energy(1.0, 1e6, 300.0, 0.2e9, 5e-27);
    const double e2 = local_energy(1.0, 1e6, 300.0, 0.4e9, 5e-27);
    CHECK(e2 == Approx(4.0 * e1));
}

TEST_CASE("offload latency and energy")
{
    auto u = make_user(0, 10.0, 1e6, 1.0, 1e6, 100.0, 1.0);
    const auto c = offload_latency_energy(0.0, u, 1e6, 1e6, Destination::MR, 1.0, 0.0);
    CHECK(c.t_upload == Approx(1.0));
    CHECK(c.t_exec == Approx(1.0));
    CHECK(c.user_energy == Approx(1.0));
    CHECK(c.mr_energy == Approx(1.0 * 1e6 * 1.0 * 1e12));

    const auto near_one =
        offload_latency_energy(1.0 - 1e-12, u, 1e6, 1e6, Destination::MR, 1.0, 0.0);
    CHECK(near_one.t_upload == Approx(0.0).margin(1e-9));
    CHECK(near_one.t_exec == Approx(0.0).margin(1e-9));

    // bs destination charges the relay for transmission at p_relay
    const auto bs = offload_latency_energy(0.5, u, 1e6, 1e6, Destination::BS, 1.0, 0.25);
    CHECK(bs.mr_energy == Approx(0.25 * bs.t_upload));

    CHECK_THROWS_AS(offload_latency_energy(1.0, u, 1e6, 1e6, Destination::MR, 1.0, 0.0),
                    std::logic_error);
    CHECK_THROWS_AS(offload_latency_energy(0.5, u, 0.0, 1e6, Destination::MR, 1.0, 0.0),
                    std::domain_error);
    CHECK_THROWS_AS(offload_latency_energy(0.5, u, 1e6, 0.0, Destination::MR, 1.0, 0.0),
                    std::domain_error);
}

TEST_CASE("total latency is the max of the parallel branches")
{
    CHECK(total_latency(1.0, 0.8) == Approx(1.0));
    CHECK(total_latency(0.8, 1.0) == Approx(1.0));
}

TEST_CASE("equal-time fraction")
{
    CHECK(equal_time_fraction(1.0, 1.0, 1.0, 1.0) == Approx(2.0 / 3.0));
    CHECK(equal_time_fraction(1e9, 2e9, 500.0, 1e8)
          == Approx(0.34210526315789475).epsilon(1e-12));

    // plugging the fraction back makes the branch times equal
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        const auto u = random_user(rng);
        const double rate = std::pow(10.0, rng.uniform(5.0, 10.0));
        const double f_rem = std::pow(10.0, rng.uniform(8.0, 10.5));
        const double lam =
            equal_time_fraction(u.f_local_max, f_rem, u.cycles_per_bit, rate);
        const double t_loc =
            local_latency(lam, u.task_bits, u.cycles_per_bit, u.f_local_max);
        const double t_off = (1.0 - lam) * u.task_bits / rate
            + (1.0 - lam) * u.task_bits * u.cycles_per_bit / f_rem;
        CHECK(std::abs(t_loc - t_off) / t_loc <= 1e-9);
    }
}

TEST_CASE("largest feasible fraction against a fine grid")
{
    SECTION("slack budget clamps to one")
    {
        auto u = make_user(0, 10, 1e6, 300, 0.3e9, 1e9);
        const auto got = max_feasible_fraction(u.task_bits, u.cycles_per_bit,
                                               u.f_local_max, 1e8, u.tx_power,
                                               u.energy_budget, 5e-27);
        REQUIRE(got.has_value());
        CHECK(*got == Approx(1.0));
    }
    SECTION("budget exactly the transmit-only cost with dominant local term")
    {
        // cost(lam) = lam*A + (1-lam)*B with A = 1.5 > B = 1 and budget = B
        auto u = make_user(0, 10, 1e6, 300, 1e9, 0.0, 1.0);
        const double rate = 1e6;
        u.energy_budget = u.tx_power * u.task_bits / rate; // = B = 1.0
        const auto got = max_feasible_fraction(u.task_bits, u.cycles_per_bit,
                                               u.f_local_max, rate, u.tx_power,
                                               u.energy_budget, 5e-27);
        REQUIRE(got.has_value());
        CHECK(*got == Approx(0.0).margin(1e-12));
    }
    SECTION("random instances agree with a 1e-6 grid of the inequality")
    {
        Rng rng(11);
        for (int i = 0; i < 40; ++i) {
            auto u = random_user(rng);
            u.energy_budget = rng.uniform(0.01, 0.6);
            const double rate = std::pow(10.0, rng.uniform(4.5, 9.0));
            const auto got = max_feasible_fraction(u.task_bits, u.cycles_per_bit,
                                                   u.f_local_max, rate, u.tx_power,
                                                   u.energy_budget, 5e-27);
            // grid version
            double best = -1.0;
            const double step = 1e-6;
            for (long k = 1000000; k >= 0; --k) {
                const double lam = k * step;
                const double cost = 5e-27 * lam * u.task_bits * u.cycles_per_bit
                        * u.f_local_max * u.f_local_max
                    + u.tx_power * (1.0 - lam) * u.task_bits / rate;
                if (cost <= u.energy_budget) {
                    best = lam;
                    break;
                }
            }
            if (best < 0.0) {
                CHECK_FALSE(got.has_value());
            } else {
                REQUIRE(got.has_value());
                CHECK(*got == Approx(best).margin(2e-6));
            }
        }
    }
}

TEST_CASE("optimal fraction beats every grid point")
{
    SECTION("interior and capped hand cases")
    {
        // interior: generous budget, the equal-time split wins
        auto u = make_user(0, 10, 2e6, 400, 0.4e9, 1e9);
        const double rate = 1e8, f_rem = 1e9;
        const auto lam = optimal_fraction(u.task_bits, u.cycles_per_bit, u.f_local_max,
                                          f_rem, rate, u.tx_power, u.energy_budget,
                                          5e-27);
        REQUIRE(lam.has_value());
        CHECK(*lam == Approx(equal_time_fraction(u.f_local_max, f_rem, u.cycles_per_bit,
                                                 rate)));
        // capped: budget below the equal-time cost
        auto v = make_user(0, 10, 2e6, 400, 0.5e9, 0.0, 1.0);
        const double cap_budget = 0.6 * (5e-27 * v.task_bits * v.cycles_per_bit
                                         * v.f_local_max * v.f_local_max);
        v.energy_budget = cap_budget; // lam <= 0.6-ish once tx cost is tiny
        const double fast_rate = 1e12; // negligible transmit cost
        const auto capped = optimal_fraction(v.task_bits, v.cycles_per_bit,
                                             v.f_local_max, 1e8, fast_rate, v.tx_power,
                                             v.energy_budget, 5e-27);
        REQUIRE(capped.has_value());
        const double star =
            equal_time_fraction(v.f_local_max, 1e8, v.cycles_per_bit, fast_rate);
        CHECK(star > *capped); // the cap bound
        CHECK(*capped == Approx(0.6).epsilon(1e-3));
    }
    SECTION("500 random instances vs the 1e-4 grid")
    {
        Rng rng(17);
        for (int i = 0; i < 500; ++i) {
            auto u = random_user(rng);
            u.energy_budget = rng.uniform(0.02, 1.8);
            const double rate = std::pow(10.0, rng.uniform(4.5, 9.5));
            const double f_rem = std::pow(10.0, rng.uniform(8.0, 10.5));
            const auto lam = optimal_fraction(u.task_bits, u.cycles_per_bit,
                                              u.f_local_max, f_rem, rate, u.tx_power,
                                              u.energy_budget, 5e-27);
            const auto best = grid_scan(u, rate, u.f_local_max, f_rem, 5e-27, 1e-4);
            if (!lam.has_value()) {
                CHECK(best.latency == std::numeric_limits<double>::infinity());
                continue;
            }
            const double t_loc =
                local_latency(*lam, u.task_bits, u.cycles_per_bit, u.f_local_max);
            const double t_off = (1.0 - *lam) * u.task_bits / rate
                + (1.0 - *lam) * u.task_bits * u.cycles_per_bit / f_rem;
            const double t = std::max(t_loc, t_off);
            CHECK(t <= best.latency + 1e-6);
            // and it is energy feasible
            const double cost = 5e-27 * *lam * u.task_bits * u.cycles_per_bit
                    * u.f_local_max * u.f_local_max
                + u.tx_power * (1.0 - *lam) * u.task_bits / rate;
            CHECK(cost <= u.energy_budget + 1e-9);
        }
    }
}

TEST_CASE("capped local frequency")
{
    CHECK(capped_local_frequency(0.5e9, 1.8, 5e-27, 1.0, 1e6, 300.0) == Approx(0.5e9));
    CHECK(capped_local_frequency(0.5e9, 0.135, 5e-27, 1.0, 1e6, 300.0) == Approx(0.3e9));
    CHECK(capped_local_frequency(0.5e9, 1.8, 5e-27, 0.0, 1e6, 300.0) == Approx(0.5e9));

    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto u = random_user(rng);
        const double lam = rng.uniform();
        const double f = capped_local_frequency(u.f_local_max, u.energy_budget, 5e-27,
                                                lam, u.task_bits, u.cycles_per_bit);
        CHECK(local_energy(lam, u.task_bits, u.cycles_per_bit, f, 5e-27)
              <= u.energy_budget + 1e-12);
        CHECK(f <= u.f_local_max);
    }
}

TEST_CASE("hop-balancing relay power")
{
    CHECK(optimal_relay_power(2.0, 1.0, 1.0, 1.0) == Approx(1.0));
    CHECK(optimal_relay_power(2.0, 1.0, 1.0, 0.0) == Approx(2.0));
    CHECK(optimal_relay_power(2.0, 1.0, 1.0, 1e-20) == Approx(2.0));
    CHECK_THROWS_AS(optimal_relay_power(0.0, 1.0, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(optimal_relay_power(1.0, 0.0, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(optimal_relay_power(1.0, 1.0, 1.0, -1.0), std::domain_error);

    // the two hop SINRs agree at the returned power
    Rng rng(23);
    for (int i = 0; i < 1000; ++i) {
        const double a = std::pow(10.0, rng.uniform(-9.0, -3.0));
        const double b = std::pow(10.0, rng.uniform(-9.0, -3.0));
        const double n0w = std::pow(10.0, rng.uniform(-16.0, -12.0));
        const double beta = std::pow(10.0, rng.uniform(-12.0, -10.0));
        const double p = optimal_relay_power(a, b, n0w, beta);
        const double g1 = a / (n0w + beta * p);
        const double g2 = b * p / n0w;
        CHECK(std::abs(g1 - g2) / g1 <= 1e-9);
    }
}

TEST_CASE("two-pass segmentation decision")
{
    SystemConfig cfg;
    SECTION("uncapped case equalizes the branch times")
    {
        auto u = make_user(0, 10, 2e6, 400, 0.4e9, 1e9);
        const auto dec =
            decide_segmentation(u, 1e8, 1e9, Destination::MR, cfg.xi_mr, 0.0, cfg.mu_local);
        CHECK(dec.destination == Destination::MR);
        const double t_loc =
            local_latency(dec.local_fraction, u.task_bits, u.cycles_per_bit, dec.f_local);
        CHECK(std::abs(t_loc - dec.latency) / dec.latency < 1e-6);
    }
    SECTION("budget forces the local frequency down but stays feasible")
    {
        auto u = make_user(0, 10, 4e6, 500, 0.5e9, 0.5);
        const auto dec =
            decide_segmentation(u, 1e8, 1e9, Destination::MR, cfg.xi_mr, 0.0, cfg.mu_local);
        CHECK(dec.user_energy <= u.energy_budget + 1e-9);
        CHECK(dec.f_local <= u.f_local_max);
    }
    SECTION("hopeless budget falls back to local-only")
    {
        auto u = make_user(0, 10, 4e6, 500, 0.5e9, 1e-6, 10.0);
        const auto dec =
            decide_segmentation(u, 1e3, 1e9, Destination::MR, cfg.xi_mr, 0.0, cfg.mu_local);
        CHECK(dec.destination == Destination::Local);
        CHECK(dec.local_fraction == 1.0);
        CHECK(dec.mr_energy == 0.0);
        CHECK(local_energy(1.0, u.task_bits, u.cycles_per_bit, dec.f_local, cfg.mu_local)
              <= u.energy_budget * (1 + 1e-12));
    }
    SECTION("energy feasibility holds over random draws")
    {
        Rng rng(31);
        for (int i = 0; i < 500; ++i) {
            auto u = random_user(rng);
            const double rate = std::pow(10.0, rng.uniform(4.0, 9.5));
            const double f_rem = std::pow(10.0, rng.uniform(8.0, 10.5));
            const auto dec = decide_segmentation(u, rate, f_rem, Destination::MR,
                                                 cfg.xi_mr, 0.0, cfg.mu_local);
            if (dec.destination == Destination::Local)
                continue;
            // recompute the user energy from scratch
            const double cost = local_energy(dec.local_fraction, u.task_bits,
                                             u.cycles_per_bit, dec.f_local, cfg.mu_local)
                + u.tx_power * (1.0 - dec.local_fraction) * u.task_bits / rate;
            CHECK(cost <= u.energy_budget + 1e-9);
            CHECK(dec.local_fraction < 1.0);
            CHECK(dec.latency
                  <= local_only_decision(u, cfg.mu_local).latency * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("branch-time monotonicity in the fraction")
{
    auto u = make_user(0, 10, 2e6, 400, 0.4e9, 1e9);
    const double rate = 1e8, f_rem = 1e9;
    double prev_loc = -1.0, prev_off = std::numeric_limits<double>::infinity();
    for (double lam = 0.0; lam < 1.0; lam += 0.05) {
        const double t_loc =
            local_latency(lam, u.task_bits, u.cycles_per_bit, u.f_local_max);
        const double t_off = (1.0 - lam) * u.task_bits / rate
            + (1.0 - lam) * u.task_bits * u.cycles_per_bit / f_rem;
        CHECK(t_loc >= prev_loc);
        CHECK(t_off <= prev_off);
        prev_loc = t_loc;
        prev_off = t_off;
    }
}
