#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "bellsim/dynamics/brownian.hpp"
#include "bellsim/dynamics/ensemble.hpp"
#include "bellsim/dynamics/evolve.hpp"
#include "bellsim/dynamics/exchange.hpp"
#include "bellsim/dynamics/fields.hpp"
#include "bellsim/dynamics/io.hpp"
#include "bellsim/dynamics/langevin.hpp"
#include "bellsim/dynamics/packet.hpp"
#include "bellsim/dynamics/params.hpp"

using namespace bellsim;
using namespace bellsim::dynamics;

namespace {

Trajectory make(std::uint64_t id, double vx, Ensemble e, double x = 0.0) {
    Trajectory t;
    t.id = id;
    t.position = {x, 0, 0};
    t.velocity = {vx, 0, 0};
    t.ensemble = e;
    return t;
}

double mean_speed(const EnsembleState& s, Ensemble e) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& t : s.trajectories)
        if (t.ensemble == e) {
            sum += norm(t.velocity);
            ++n;
        }
    return sum / static_cast<double>(n);
}

std::map<BinKey, std::pair<std::size_t, std::size_t>> bin_counts(const EnsembleState& s) {
    std::map<BinKey, std::pair<std::size_t, std::size_t>> m;
    for (const auto& t : s.trajectories) {
        auto& c = m[s.bins.key(t.position)];
        (t.ensemble == Ensemble::A ? c.first : c.second)++;
    }
    return m;
}

/// Two spatially separated Gaussian clusters with thermal velocities.
PacketEnsemble two_clusters(std::size_t per_cluster, const PhysParams& p, std::uint64_t seed) {
    PacketSpec spec;
    spec.trajectories = 2 * per_cluster;
    spec.bin_width = 1.0;
    auto pk = make_gaussian_packet(spec, p, seed);
    for (std::size_t i = per_cluster; i < 2 * per_cluster; ++i) pk.state.trajectories[i].position.x += 1000.0;
    return pk;
}

}  // namespace

TEST(PhysParams, NaturalUnitsAreConsistent) {
    const auto p = PhysParams::natural(2.0, 3.0, 5.0, 0.5);
    EXPECT_DOUBLE_EQ(p.nu(), 0.75);
    EXPECT_NEAR(p.nu_thermal(), p.nu(), 1e-15);
    EXPECT_DOUBLE_EQ(p.c_max, 100.0 * p.thermal_speed());
    PhysParams bad = p;
    bad.temperature *= 1.01;
    EXPECT_THROW(bad.validate(), PreconditionError);
    const auto newton = PhysParams::natural(1, 1, std::numeric_limits<double>::infinity(), 0.1);
    EXPECT_EQ(newton.force_sigma(), 0.0);
    EXPECT_FALSE(newton.friction_enabled());
}

TEST(Brownian, MomentsOverOneMillionDraws) {
    const auto p = PhysParams::natural(1.3, 1.0, 0.8, 0.05);
    const BrownianSource src(77, p);
    const double var_expected = p.m0 * p.kB * p.temperature / (2.0 * p.tau_coll * p.tau_coll);
    const std::size_t n = 1'000'000;
    double s[3] = {0, 0, 0}, ss[3] = {0, 0, 0}, sxy = 0, sxz = 0, syz = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const Vec3 f = sample_brownian_force(src, t);
        for (int c = 0; c < 3; ++c) {
            s[c] += f[c];
            ss[c] += f[c] * f[c];
        }
        sxy += f.x * f.y;
        sxz += f.x * f.z;
        syz += f.y * f.z;
    }
    const double sigma = std::sqrt(var_expected);
    double var[3];
    for (int c = 0; c < 3; ++c) {
        const double m = s[c] / n;
        var[c] = ss[c] / n - m * m;
        EXPECT_LT(std::abs(m), 4.0 * sigma / 1000.0);
        EXPECT_NEAR(var[c] / var_expected, 1.0, 0.01);
    }
    auto corr = [&](double sab, int a, int b) {
        return (sab / n - s[a] / n * s[b] / n) / std::sqrt(var[a] * var[b]);
    };
    EXPECT_LT(std::abs(corr(sxy, 0, 1)), 0.005);
    EXPECT_LT(std::abs(corr(sxz, 0, 2)), 0.005);
    EXPECT_LT(std::abs(corr(syz, 1, 2)), 0.005);
}

TEST(Brownian, StreamIsPureFunctionOfSeedAndStep) {
    const BrownianSource a(5, 2.0), b(5, 2.0), c(6, 2.0);
    EXPECT_EQ(a.sample(123), b.sample(123));
    EXPECT_NE(a.sample(123), c.sample(123));
    EXPECT_NE(a.sample(123), a.sample(124));
}

TEST(Langevin, FrictionSignPerEnsemble) {
    const auto p = PhysParams::natural(1, 1, 1, 0.1);
    const auto b = step_langevin(make(0, 1.0, Ensemble::B), {}, {}, p, p.tau / 10);
    const auto a = step_langevin(make(0, 1.0, Ensemble::A), {}, {}, p, p.tau / 10);
    EXPECT_NEAR(b.velocity.x, 0.9, 1e-15);
    EXPECT_NEAR(a.velocity.x, 1.1, 1e-15);
    EXPECT_EQ(b.velocity.y, 0.0);
    EXPECT_NEAR(a.position.x, 0.11, 1e-15);
}

TEST(Langevin, NewtonianLimitAndErrors) {
    const auto p = PhysParams::natural(2.0, 1, std::numeric_limits<double>::infinity(), 0.1);
    const auto t = step_langevin(make(0, 1.0, Ensemble::B), {4, 0, -2}, {}, p, 0.5);
    EXPECT_EQ(t.velocity, (Vec3{2.0, 0.0, -0.5}));
    EXPECT_EQ(t.position, (Vec3{1.0, 0.0, -0.25}));
    const auto q = PhysParams::natural(1, 1, 1, 0.1);
    EXPECT_THROW(step_langevin(make(0, 1, Ensemble::A), {NAN, 0, 0}, {}, q, 0.1), PreconditionError);
    EXPECT_THROW(step_langevin(make(0, 1, Ensemble::A), {}, {0, INFINITY, 0}, q, 0.1), PreconditionError);
    EXPECT_THROW(step_langevin(make(0, 1, Ensemble::A), {}, {}, q, 0.0), PreconditionError);
    EXPECT_THROW(step_langevin(make(0, 1, Ensemble::A), {}, {}, q, 1.5), PreconditionError);
}

TEST(Langevin, SpeedCapIsCounted) {
    auto p = PhysParams::natural(1, 1, 1, 0.1, 1.0, 2.0);
    std::size_t capped = 0;
    const auto t = step_langevin(make(0, 1.0, Ensemble::A), {30, 40, 0}, {}, p, 0.1, &capped);
    EXPECT_EQ(capped, 1u);
    EXPECT_NEAR(norm(t.velocity), 2.0, 1e-14);
}

TEST(Fields, UniformDensityHasZeroOsmoticVelocity) {
    EnsembleState s;
    s.bins = BinGrid::along_x(1.0);
    for (int b = 0; b < 10; ++b)
        for (int k = 0; k < 7; ++k)
            s.trajectories.push_back(make(static_cast<std::uint64_t>(b * 7 + k), 1.0, Ensemble::A, b + 0.1 * k + 0.05));
    const auto f = estimate_fields(s, PhysParams::natural(1, 1, 1, 0.1));
    EXPECT_NEAR(f.mass(), 1.0, 1e-9);
    for (const auto& c : f.cells) {
        EXPECT_DOUBLE_EQ(c.rho, 0.1);
        ASSERT_TRUE(c.has_u);
        EXPECT_EQ(c.u, Vec3{});
    }
}

TEST(Fields, GaussianOsmoticVelocity) {
    const auto p = PhysParams::natural(1, 1, 1, 0.1);
    PacketSpec spec;
    spec.trajectories = 100'000;
    spec.sigma0 = 1.0;
    spec.x0 = 0.3;
    spec.bin_width = 0.5;
    const auto pk = make_gaussian_packet(spec, p, 11);
    double xbar = 0;
    for (const auto& t : pk.state.trajectories) xbar += t.position.x;
    xbar /= static_cast<double>(spec.trajectories);
    const auto f = estimate_fields(pk.state, p);
    EXPECT_NEAR(f.mass(), 1.0, 1e-9);
    std::size_t checked = 0;
    for (const auto& c : f.cells) {
        const double d = std::abs(c.center.x - xbar);
        if (d < 0.5 || d > 2.0) continue;
        ASSERT_TRUE(c.has_u);
        const double expected = p.nu() * (c.center.x - xbar) / (spec.sigma0 * spec.sigma0);
        EXPECT_NEAR(c.u.x / expected, 1.0, 0.05) << "bin at x=" << c.center.x;
        ++checked;
    }
    EXPECT_GE(checked, 4u);
}

TEST(Fields, EqualVelocitiesAndEmptyBins) {
    EnsembleState s;
    s.bins = BinGrid::along_x(1.0);
    const Vec3 w{0.3, -1.7, 2.25};
    for (std::uint64_t i = 0; i < 9; ++i) {
        auto t = make(i, 0, i % 2 ? Ensemble::A : Ensemble::B, i < 5 ? 0.5 : 3.5 + 0.01 * static_cast<double>(i));
        t.velocity = w;
        s.trajectories.push_back(t);
    }
    const auto f = estimate_fields(s, PhysParams::natural(1, 1, 1, 0.1));
    for (const auto& c : f.cells) {
        if (c.count == 0) {
            EXPECT_EQ(c.rho, 0.0);
            EXPECT_FALSE(c.has_v);
            EXPECT_FALSE(c.has_u);
        } else {
            ASSERT_TRUE(c.has_v);
            EXPECT_EQ(c.v, w);
        }
    }
    EXPECT_NEAR(f.mass(), 1.0, 1e-12);
    EXPECT_THROW(estimate_fields(EnsembleState{}, PhysParams::natural(1, 1, 1, 0.1)), NumericalError);
}

TEST(Exchange, PairsFastestAWithSlowerB) {
    EnsembleState s;
    s.trajectories = {make(0, 5, Ensemble::A), make(1, 3, Ensemble::A), make(2, 2, Ensemble::B),
                      make(3, 0, Ensemble::B)};
    const auto out = exchange_procedure(s, false);
    ASSERT_EQ(out.swap_log.size(), 1u);
    EXPECT_EQ(out.swap_log[0].a_id, 0u);
    EXPECT_EQ(out.swap_log[0].b_id, 2u);
    EXPECT_EQ(mean_speed(out.state, Ensemble::A), 2.5);
    EXPECT_EQ(mean_speed(out.state, Ensemble::B), 2.5);
}

TEST(Exchange, EqualMeansMeansNoSwap) {
    EnsembleState s;
    s.trajectories = {make(0, 4, Ensemble::A), make(1, 1, Ensemble::A), make(2, 3, Ensemble::B),
                      make(3, 2, Ensemble::B)};
    const auto out = exchange_procedure(s, true);
    EXPECT_TRUE(out.swap_log.empty());
    EXPECT_EQ(out.state.trajectories, s.trajectories);
}

TEST(Exchange, SuperpositionFlipsSpin) {
    EnsembleState s;
    s.trajectories = {make(0, 5, Ensemble::A), make(1, 3, Ensemble::A), make(2, 2, Ensemble::B),
                      make(3, 0, Ensemble::B)};
    s.trajectories[2].spin = Spin::Down;
    const auto out = exchange_procedure(s, true);
    EXPECT_EQ(out.state.trajectories[0].ensemble, Ensemble::B);
    EXPECT_EQ(out.state.trajectories[0].spin, Spin::Down);
    EXPECT_EQ(out.state.trajectories[2].ensemble, Ensemble::A);
    EXPECT_EQ(out.state.trajectories[2].spin, Spin::Up);
    const auto plain = exchange_procedure(s, false);
    EXPECT_EQ(plain.state.trajectories[0].spin, Spin::Up);
}

TEST(Exchange, TieBreakPrefersHigherId) {
    EnsembleState s;
    s.trajectories = {make(0, 5, Ensemble::A), make(7, 5, Ensemble::A), make(2, 1, Ensemble::B),
                      make(3, 1, Ensemble::B)};
    const auto out = exchange_procedure(s, false);
    ASSERT_FALSE(out.swap_log.empty());
    EXPECT_EQ(out.swap_log[0].a_id, 7u);
    EXPECT_EQ(out.swap_log[0].b_id, 3u);
}

TEST(Exchange, PreservesBinCountsAndNeverIncreasesResidual) {
    const auto p = PhysParams::natural(1, 1, 1, 0.1);
    for (auto sel : {ExchangeSelection::MinResidual, ExchangeSelection::ExtremePair}) {
        auto pk = make_gaussian_packet({5000, 1.0, 0.0, 0.0, 0.2}, p, 3);
        // Bias the A half so there is something to exchange.
        for (auto& t : pk.state.trajectories)
            if (t.ensemble == Ensemble::A) t.velocity.x *= 1.5;
        const auto before = bin_counts(pk.state);
        ExchangeOptions opt;
        opt.selection = sel;
        const auto x = exchange_in_place(pk.state, opt);
        EXPECT_GT(x.log.size(), 0u);
        EXPECT_EQ(bin_counts(pk.state), before);
        for (const auto& b : x.bins) EXPECT_LE(b.residual_after, b.residual_before);
        EXPECT_LT(x.weighted_residual(true), x.weighted_residual(false));
    }
}

TEST(Evolve, ResidualNonIncreasingEveryStep) {
    const auto p = PhysParams::natural(1, 1, 1, 0.1);
    auto pk = make_gaussian_packet({4000, 1.0, 0.0, 0.0, 0.2}, p, 9);
    EvolveOptions opt;
    opt.steps = 20;
    opt.dt = 0.1;
    const auto res = evolve(pk.state, pk.sources, zero_force(), p, opt, [](const EnsembleState&, const ExchangeResult& x) {
        for (const auto& b : x.bins) EXPECT_LE(b.residual_after, b.residual_before);
    });
    ASSERT_EQ(res.diagnostics.size(), 20u);
    for (const auto& d : res.diagnostics) EXPECT_LE(d.residual_after, d.residual_before);
    EXPECT_EQ(pk.state.step, 20u);
    EXPECT_NEAR(pk.state.time, 2.0, 1e-12);
    EXPECT_EQ(pk.state.trajectories.size(), 4000u);
}

TEST(Evolve, SpinFlipsExactlyWithEnsembleChange) {
    const auto p = PhysParams::natural(1, 1, 1, 0.1);
    auto pk = make_gaussian_packet({2000, 1.0, 0.0, 0.0, 0.25}, p, 21);
    EvolveOptions opt;
    opt.steps = 10;
    opt.dt = 0.1;
    opt.exchange.superposition = true;
    auto prev = pk.state.trajectories;
    std::size_t changes = 0;
    evolve(pk.state, pk.sources, zero_force(), p, opt, [&](const EnsembleState& s, const ExchangeResult& x) {
        std::set<std::uint64_t> swapped;
        for (const auto& r : x.log) {
            swapped.insert(r.a_id);
            swapped.insert(r.b_id);
        }
        for (std::size_t i = 0; i < s.trajectories.size(); ++i) {
            const bool ens = s.trajectories[i].ensemble != prev[i].ensemble;
            const bool spin = s.trajectories[i].spin != prev[i].spin;
            EXPECT_EQ(ens, spin);
            EXPECT_EQ(ens, swapped.count(s.trajectories[i].id) == 1);
            changes += ens;
        }
        prev = s.trajectories;
    });
    EXPECT_GT(changes, 0u);
}

TEST(Evolve, SwapsStayInsideBinsAndIgnoreRemoteClusters) {
    const auto p = PhysParams::natural(1, 1, 1, 0.1);
    auto base = two_clusters(1500, p, 4);
    auto perturbed = base;
    EvolveOptions opt;
    opt.steps = 1;
    opt.dt = 0.1;
    const ForceField remote_kick = [](const Trajectory& t, std::uint64_t, double) {
        return t.position.x > 500.0 ? Vec3{3.0, -1.0, 0.5} : Vec3{};
    };
    std::vector<Trajectory> after;
    const auto r0 = evolve(base.state, base.sources, zero_force(), p, opt,
                           [&](const EnsembleState& s, const ExchangeResult&) { after = s.trajectories; });
    const auto r1 = evolve(perturbed.state, perturbed.sources, remote_kick, p, opt);

    std::map<std::uint64_t, BinKey> key_of;
    for (const auto& t : after) key_of[t.id] = base.state.bins.key(t.position);
    auto near = [](const std::vector<SwapRecord>& log) {
        std::vector<SwapRecord> out;
        for (const auto& r : log)
            if (r.bin[0] < 500) out.push_back(r);
        return out;
    };
    ASSERT_FALSE(near(r0.swap_log).empty());
    EXPECT_EQ(near(r0.swap_log), near(r1.swap_log));
    EXPECT_NE(r0.swap_log, r1.swap_log);
    for (const auto& r : r0.swap_log) {
        EXPECT_EQ(key_of.at(r.a_id), r.bin);
        EXPECT_EQ(key_of.at(r.b_id), r.bin);
    }
}

TEST(Evolve, DeterministicAcrossThreadCounts) {
    const auto p = PhysParams::natural(1, 1, 1, 0.1);
    auto one = make_gaussian_packet({3000, 1.0, 0.0, 0.5, 0.2}, p, 99);
    auto four = one;
    EvolveOptions opt;
    opt.steps = 15;
    opt.dt = 0.1;
    opt.exchange.superposition = true;
    const auto r1 = evolve(one.state, one.sources, zero_force(), p, opt);
    opt.threads = 4;
    const auto r4 = evolve(four.state, four.sources, zero_force(), p, opt);
    EXPECT_EQ(r1.swap_log, r4.swap_log);
    EXPECT_EQ(one.state.trajectories, four.state.trajectories);
    EXPECT_EQ(snapshot_table(one.state).str(), snapshot_table(four.state).str());
    EXPECT_EQ(diagnostics_table(r1.diagnostics).str(), diagnostics_table(r4.diagnostics).str());
}

TEST(Evolve, NewtonianMotionWithoutFrictionOrNoise) {
    const auto p = PhysParams::natural(2.0, 1, std::numeric_limits<double>::infinity(), 0.1);
    EnsembleState s;
    s.trajectories = {make(0, 1.0, Ensemble::A), make(1, -0.5, Ensemble::B, 2.0)};
    std::vector<BrownianSource> src(2);
    const Vec3 f{1.0, 0.0, 0.0};
    EvolveOptions opt;
    opt.steps = 100;
    opt.dt = 0.01;
    opt.exchange_enabled = false;
    evolve(s, src, [&](const Trajectory&, std::uint64_t, double) { return f; }, p, opt);
    const double t = 1.0, a = f.x / p.m0;
    // Semi-implicit Euler: the position error is O(dt).
    EXPECT_NEAR(s.trajectories[0].velocity.x, 1.0 + a * t, 1e-12);
    EXPECT_NEAR(s.trajectories[0].position.x, 1.0 * t + 0.5 * a * t * t, 0.01);
    EXPECT_NEAR(s.trajectories[1].position.x, 2.0 - 0.5 * t + 0.5 * a * t * t, 0.01);
}

TEST(Evolve, RejectsBadInput) {
    const auto p = PhysParams::natural(1, 1, 1, 0.1);
    auto pk = make_gaussian_packet({10, 1.0, 0.0, 0.0, 0.0}, p, 1);
    EvolveOptions opt;
    opt.steps = 0;
    EXPECT_THROW(evolve(pk.state, pk.sources, zero_force(), p, opt), PreconditionError);
    opt.steps = 1;
    pk.sources.pop_back();
    EXPECT_THROW(evolve(pk.state, pk.sources, zero_force(), p, opt), PreconditionError);
    pk = make_gaussian_packet({10, 1.0, 0.0, 0.0, 0.0}, p, 1);
    pk.state.trajectories[3].id = pk.state.trajectories[4].id;
    EXPECT_THROW(evolve(pk.state, pk.sources, zero_force(), p, opt), PreconditionError);
}

TEST(Packet, InitialMomentsAndSizes) {
    const auto p = PhysParams::natural(1, 1, 1, 0.1);
    const auto pk = make_gaussian_packet({50'000, 2.0, 1.0, 3.0, 0.0}, p, 5);
    double mx = 0, mv = 0, sx = 0, sv = 0;
    for (const auto& t : pk.state.trajectories) {
        mx += t.position.x;
        mv += t.velocity.x;
    }
    mx /= 50'000;
    mv /= 50'000;
    for (const auto& t : pk.state.trajectories) {
        sx += (t.position.x - mx) * (t.position.x - mx);
        sv += (t.velocity.x - mv) * (t.velocity.x - mv);
    }
    EXPECT_NEAR(mx, 1.0, 0.05);
    EXPECT_NEAR(mv, 3.0, 0.01);
    EXPECT_NEAR(sx / 50'000, 4.0, 0.1);
    EXPECT_NEAR(sv / 50'000, 1.0 / 16.0, 0.002);
    EXPECT_DOUBLE_EQ(pk.state.bins.width.x, 0.4);
    EXPECT_EQ(pk.state.count(Ensemble::A), 25'000u);
    EXPECT_DOUBLE_EQ(free_packet_variance(1.0, 1.0, 1.0, 2.0), 2.0);

    EXPECT_EQ(superposition_sizes(10, {1.0, 1.0}), (std::vector<std::size_t>{5, 5}));
    EXPECT_EQ(superposition_sizes(100, {std::sqrt(0.3), std::sqrt(0.7)}), (std::vector<std::size_t>{30, 70}));
    EXPECT_EQ(superposition_sizes(7, {1.0, 1.0, 1.0}), (std::vector<std::size_t>{3, 2, 2}));
    EXPECT_THROW(superposition_sizes(7, {0.0, 0.0}), PreconditionError);
}

TEST(Io, SnapshotColumns) {
    EnsembleState s;
    s.trajectories = {make(4, 0.5, Ensemble::B, -1.25)};
    s.trajectories[0].spin = Spin::Down;
    EXPECT_EQ(snapshot_table(s).str(), "id,x,y,z,vx,vy,vz,ensemble,spin\n4,-1.25,0,0,0.5,0,0,B,down\n");
}
