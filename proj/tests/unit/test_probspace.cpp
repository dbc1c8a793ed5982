#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bellsim/probspace/bell.hpp"
#include "bellsim/probspace/finite_space.hpp"
#include "bellsim/probspace/lemma.hpp"
#include "bellsim/probspace/locality.hpp"
#include "bellsim/probspace/quantum_model.hpp"
#include "bellsim/probspace/random_models.hpp"
#include "bellsim/probspace/serialize.hpp"
#include "bellsim/probspace/setting_model.hpp"

using namespace bellsim;
using namespace bellsim::probspace;

namespace {

FiniteProbSpace four_equal() { return FiniteProbSpace({"a", "b", "c", "d"}, {0.25, 0.25, 0.25, 0.25}); }

/// Joint table from independent per-wing conditional probabilities of "up".
JointTable product_table(const std::vector<double>& w, const std::vector<double>& p1, const std::vector<double>& p2) {
    JointTable t(w.size());
    for (std::size_t k = 0; k < w.size(); ++k)
        t[k] = {w[k] * p1[k] * p2[k], w[k] * p1[k] * (1 - p2[k]), w[k] * (1 - p1[k]) * p2[k],
                w[k] * (1 - p1[k]) * (1 - p2[k])};
    return t;
}

}  // namespace

TEST(FiniteProbSpace, RejectsBadWeights) {
    EXPECT_THROW(FiniteProbSpace({"a", "b"}, {0.7, 0.7}), PreconditionError);
    EXPECT_THROW(FiniteProbSpace({"a", "b"}, {1.2, -0.2}), PreconditionError);
    EXPECT_THROW(FiniteProbSpace({"a"}, {0.5, 0.5}), PreconditionError);
}

TEST(Partition, RejectsOverlapAndGaps) {
    EXPECT_THROW(Partition({{0, 1}, {1, 2, 3}}).cell_of(4), PreconditionError);
    EXPECT_THROW(Partition({{0, 1}, {2}}).cell_of(4), PreconditionError);
}

TEST(ConditionalProbability, WholeSpaceAndEmptyEvent) {
    const auto sp = four_equal();
    const Partition part({{0, 1}, {2, 3}});
    for (double v : conditional_probability(sp, sp.everything(), part).values()) EXPECT_EQ(v, 1.0);
    for (double v : conditional_probability(sp, {}, part).values()) EXPECT_EQ(v, 0.0);
}

TEST(ConditionalProbability, RatioExample) {
    const auto c = conditional_probability(four_equal(), {0}, Partition({{0, 1}, {2, 3}}));
    EXPECT_EQ(c[0], 0.5);
    EXPECT_EQ(c[1], 0.5);
    EXPECT_EQ(c[2], 0.0);
    EXPECT_EQ(c[3], 0.0);
}

TEST(ConditionalProbability, ZeroCellIsNamed) {
    const FiniteProbSpace sp({"a", "b", "c"}, {0.5, 0.5, 0.0});
    try {
        conditional_probability(sp, {0}, Partition({{0, 1}, {2}}));
        FAIL() << "expected an error";
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("cell 1 {c}"), std::string::npos) << e.what();
    }
    Partition flagged({{0, 1}, {2}});
    flagged.degenerate = {false, true};
    EXPECT_EQ(conditional_probability(sp, {0}, flagged)[2], 0.0);
}

TEST(ConditionalProbability, FivePropertiesOnRandomSpaces) {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + gen() % 10;
        std::vector<double> w(n);
        double s = 0;
        for (auto& x : w) s += (x = u(gen));
        for (auto& x : w) x /= s;
        s = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) s += w[i];
        w.back() = 1 - s;
        std::vector<std::string> names(n);
        for (std::size_t i = 0; i < n; ++i) names[i] = "w" + std::to_string(i);
        const FiniteProbSpace sp(names, w);

        const std::size_t cut = 1 + gen() % (n - 1);
        Event c1, c2;
        for (std::size_t i = 0; i < n; ++i) (i < cut ? c1 : c2).push_back(i);
        const Partition part({c1, c2});

        Event a, b;
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = gen() % 3;
            if (r == 0) a.push_back(i);
            if (r == 1) b.push_back(i);
        }
        const auto pa = conditional_probability(sp, a, part);
        const auto pb = conditional_probability(sp, b, part);
        const auto pab = conditional_probability(sp, unite(a, b), part);

        EXPECT_TRUE(pa.measurable_wrt(part));
        for (double v : pa.values()) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(pab[i], pa[i] + pb[i], 1e-12);
        EXPECT_NEAR(pa.expectation(sp), sp.probability(a), 1e-12);
        // Intersection with a partition cell: P(a & c1 | F) = 1_{c1} P(a | F).
        const auto pac = conditional_probability(sp, intersect(a, c1), part);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(pac[i], (i < cut ? 1.0 : 0.0) * pa[i], 1e-12);
        // Direct ratio oracle.
        for (std::size_t i = 0; i < n; ++i) {
            const Event& cell = i < cut ? c1 : c2;
            EXPECT_NEAR(pa[i], sp.probability(intersect(a, cell)) / sp.probability(cell), 1e-12);
        }
    }
}

TEST(SettingPair, NormalizesDegrees) {
    const auto s = SettingPair::degrees(-45, 405);
    EXPECT_NEAR(s.mu, 7 * std::numbers::pi / 4, 1e-15);
    EXPECT_NEAR(s.nu, std::numbers::pi / 4, 1e-15);
    EXPECT_TRUE(SettingPair::degrees(0, 360).equal_axes());
}

TEST(SettingIndexedModel, SourceMarginalMustAgree) {
    SettingIndexedModel m({0.5, 0.5});
    m.add_setting(SettingPair::degrees(0, 0), {{0, 0.5, 0, 0}, {0, 0, 0.5, 0}});
    EXPECT_THROW(m.add_setting(SettingPair::degrees(0, 90), {{0, 0.6, 0, 0}, {0, 0, 0.4, 0}}), PreconditionError);
    EXPECT_THROW(m.add_setting(SettingPair::degrees(0, 0), {{0, 0.5, 0, 0}, {0, 0, 0.5, 0}}), PreconditionError);
}

TEST(ActiveLocality, ConstructedIgnoringRemoteAxis) {
    SettingIndexedModel m({0.5, 0.5});
    m.add_setting(SettingPair::degrees(0, 0), product_table({0.5, 0.5}, {0.9, 0.2}, {0.1, 0.7}));
    m.add_setting(SettingPair::degrees(0, 90), product_table({0.5, 0.5}, {0.9, 0.2}, {0.4, 0.4}));
    const auto r = is_actively_local(m);
    EXPECT_TRUE(r.ok) << r.witness;
    EXPECT_LE(r.max_deviation, 1e-15);
}

TEST(ActiveLocality, PlantedSignalingCounterexample) {
    SettingIndexedModel m({0.5, 0.5});
    m.add_setting(SettingPair::degrees(0, 0), product_table({0.5, 0.5}, {0.6, 0.6}, {0.5, 0.5}));
    m.add_setting(SettingPair::degrees(0, 90), product_table({0.5, 0.5}, {0.4, 0.4}, {0.5, 0.5}));
    const auto r = is_actively_local(m);
    EXPECT_FALSE(r.ok);
    EXPECT_NEAR(r.max_deviation, 0.2, 1e-12);
    EXPECT_NE(r.witness.find("wing 1"), std::string::npos);
}

TEST(ActiveLocality, NoSharedAxisIsReported) {
    SettingIndexedModel m({0.5, 0.5});
    m.add_setting(SettingPair::degrees(0, 10), product_table({0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}));
    m.add_setting(SettingPair::degrees(20, 30), product_table({0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}));
    EXPECT_FALSE(is_actively_local(m).ok);
}

TEST(PassiveLocality, ProductModelAndQuantumModel) {
    SettingIndexedModel m({0.3, 0.7});
    m.add_setting(SettingPair::degrees(0, 0), product_table({0.3, 0.7}, {0.2, 0.9}, {0.6, 0.1}));
    EXPECT_TRUE(is_passively_local(m).ok);
    EXPECT_LE(is_passively_local(m).max_deviation, 1e-15);

    const auto q45 = build_quantum_epr_model({SettingPair::degrees(0, 45)});
    const auto r45 = is_passively_local(q45);
    EXPECT_FALSE(r45.ok);
    const double c = std::cos(std::numbers::pi / 8);
    EXPECT_NEAR(r45.max_deviation, std::abs(0.5 * c * c - 0.25), 1e-12);
    EXPECT_NEAR(r45.max_deviation, 0.1767767, 1e-7);

    const auto q0 = build_quantum_epr_model({SettingPair::degrees(0, 0)});
    EXPECT_NEAR(is_passively_local(q0).max_deviation, 0.25, 1e-12);
}

TEST(Correlation, Examples) {
    SettingIndexedModel anti({0.5, 0.5});
    anti.add_setting(SettingPair::degrees(0, 0), {{0, 0.5, 0, 0}, {0, 0, 0.5, 0}});
    EXPECT_EQ(correlation_coefficient(anti, SettingPair::degrees(0, 0)), -1.0);
    SettingIndexedModel flat({1.0});
    flat.add_setting(SettingPair::degrees(0, 0), {{0.25, 0.25, 0.25, 0.25}});
    EXPECT_EQ(correlation_coefficient(flat, SettingPair::degrees(0, 0)), 0.0);
    EXPECT_THROW(correlation_coefficient(flat, SettingPair::degrees(0, 1)), PreconditionError);
    const auto q = build_quantum_epr_model({SettingPair::degrees(0, 60)});
    EXPECT_NEAR(correlation_coefficient(q, SettingPair::degrees(0, 60)), -0.5, 1e-12);
}

TEST(QuantumModel, TablesAtSpecialAngles) {
    const auto m = build_quantum_epr_model(
        {SettingPair::degrees(0, 0), SettingPair::degrees(0, 90), SettingPair::degrees(0, 180)});
    const auto j0 = m.joint(0);
    EXPECT_EQ(j0[0], 0.0);
    EXPECT_EQ(j0[3], 0.0);
    EXPECT_NEAR(j0[1], 0.5, 1e-15);
    for (double p : m.joint(1)) EXPECT_NEAR(p, 0.25, 1e-15);
    const auto j180 = m.joint(2);
    EXPECT_NEAR(j180[0], 0.5, 1e-15);
    EXPECT_NEAR(j180[1], 0.0, 1e-15);
    EXPECT_NEAR(correlation_coefficient(m, SettingPair::degrees(0, 180)), 1.0, 1e-15);
}

TEST(QuantumModel, MatchesHalfSineCosineTables) {
    std::vector<SettingPair> st;
    for (int a = 0; a < 360; a += 30)
        for (int b = 0; b < 360; b += 45) st.push_back(SettingPair::degrees(a, b));
    const auto m = build_quantum_epr_model(st);
    for (std::size_t i = 0; i < st.size(); ++i) {
        const double d = st[i].mu - st[i].nu;
        const auto j = m.joint(i);
        EXPECT_NEAR(j[0], 0.5 * std::pow(std::sin(d / 2), 2), 1e-14);
        EXPECT_NEAR(j[1], 0.5 * std::pow(std::cos(d / 2), 2), 1e-14);
        EXPECT_NEAR(j[0] + j[1], 0.5, 1e-14);
    }
    const auto r = is_actively_local(m);
    EXPECT_TRUE(r.ok) << r.witness << " " << r.max_deviation;
}

TEST(Chsh, QuantumValueAndBellOriginal) {
    const std::vector<SettingPair> st{SettingPair::degrees(0, 45), SettingPair::degrees(0, 315),
                                      SettingPair::degrees(90, 45), SettingPair::degrees(90, 315),
                                      SettingPair::degrees(0, 60), SettingPair::degrees(0, 120),
                                      SettingPair::degrees(60, 120)};
    const auto m = build_quantum_epr_model(st);
    const double r = std::numbers::pi / 180;
    EXPECT_NEAR(chsh(m, 0, 90 * r, 45 * r, 315 * r), 2 * std::numbers::sqrt2, 1e-10);
    EXPECT_NEAR(bell_original(m, 0, 60 * r, 120 * r), 1.5, 1e-12);
    EXPECT_THROW(chsh(m, 0, 10 * r, 45 * r, 315 * r), PreconditionError);
}

TEST(Chsh, LocalModelsStayBelowTwo) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0, 1);
    const std::vector<double> angles{0, 0.6, 1.1, 2.0};
    for (int trial = 0; trial < 200; ++trial) {
        // Hidden-variable model: wing responses depend on the local axis only.
        const std::size_t cells = 2 + gen() % 4;
        std::vector<double> w(cells);
        double s = 0;
        for (auto& x : w) s += (x = u(gen) + 0.01);
        for (auto& x : w) x /= s;
        s = 0;
        for (std::size_t k = 0; k + 1 < cells; ++k) s += w[k];
        w.back() = 1 - s;
        std::vector<std::vector<double>> resp(4, std::vector<double>(cells));
        for (auto& r : resp)
            for (auto& x : r) x = u(gen) < 0.3 ? double(gen() % 2) : u(gen);
        SettingIndexedModel m(w);
        for (int i : {0, 1})
            for (int j : {2, 3}) m.add_setting(SettingPair::radians(angles[i], angles[j]), product_table(w, resp[i], resp[j]));
        EXPECT_TRUE(is_actively_local(m).ok);
        EXPECT_TRUE(is_passively_local(m).ok);
        EXPECT_LE(chsh(m, angles[0], angles[1], angles[2], angles[3]), 2.0 + 1e-12);
    }
}

TEST(ChshScan, CoarseGridCorners) {
    const auto r = conditional_chsh_bound_scan(0.5);
    EXPECT_EQ(r.points, 81u);
    EXPECT_NEAR(r.max_value, 2.0, 1e-15);
    for (double p : r.argmax) EXPECT_TRUE(p == 0.0 || p == 1.0);
    EXPECT_EQ(conditional_chsh(0.5, 0.5, 0.5, 0.5), 0.0);
}

TEST(ChshScan, BoundedForSeveralSteps) {
    for (double h : {0.25, 0.2, 0.1, 0.07, 0.05}) EXPECT_LE(conditional_chsh_bound_scan(h).max_value, 2.0 + 1e-12);
    EXPECT_THROW(conditional_chsh_bound_scan(0.6), PreconditionError);
    EXPECT_THROW(conditional_chsh_bound_scan(0.0), PreconditionError);
    EXPECT_EQ(probability_grid(0.07).back(), 1.0);
}

TEST(Lemma, DeterministicSourceModel) {
    SettingIndexedModel m({0.4, 0.6});
    m.add_setting(SettingPair::degrees(30, 30), {{0, 0.4, 0, 0}, {0, 0, 0.6, 0}});
    const auto r = deterministic_passive_locality_check(m);
    EXPECT_TRUE(r.is_deterministic);
    ASSERT_EQ(r.witnesses.size(), 1u);
    EXPECT_EQ(r.witnesses[0].cells, std::vector<std::size_t>{0});
    EXPECT_NEAR(r.witnesses[0].p_witness, 0.4, 1e-15);
}

TEST(Lemma, PreconditionsAreNamed) {
    const auto q = build_quantum_epr_model({SettingPair::degrees(0, 0)});
    try {
        deterministic_passive_locality_check(q);
        FAIL();
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("passive locality"), std::string::npos);
    }
    const auto q2 = build_quantum_epr_model({SettingPair::degrees(0, 90)});
    try {
        deterministic_passive_locality_check(q2);
        FAIL();
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("equal-axis setting"), std::string::npos);
    }
    SettingIndexedModel flat({1.0});
    flat.add_setting(SettingPair::degrees(0, 0), {{0.25, 0.25, 0.25, 0.25}});
    try {
        deterministic_passive_locality_check(flat);
        FAIL();
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("anticorrelation"), std::string::npos);
    }
}

TEST(Lemma, RandomModelsAreDeterministic) {
    RandomModelStats stats;
    const auto models = random_lemma_models(2024, 300, &stats);
    EXPECT_GT(stats.rejected_passive, 0u);
    EXPECT_GT(stats.rejected_anticorrelation, 0u);
    for (const auto& m : models) {
        const auto r = deterministic_passive_locality_check(m);
        EXPECT_TRUE(r.is_deterministic);
        EXPECT_LE(r.max_indicator_deviation, 1e-9);
        // Oracle: the witness event and the detector event differ by a null set.
        const auto sp = m.space(0);
        for (std::size_t k = 0; k < m.source_events(); ++k) {
            const auto& cell = m.table(0)[k];
            const double up = (cell[0] + cell[1]) / m.source_weights()[k];
            const bool in_witness =
                std::find(r.witnesses[0].cells.begin(), r.witnesses[0].cells.end(), k) != r.witnesses[0].cells.end();
            EXPECT_NEAR(up, in_witness ? 1.0 : 0.0, 1e-12);
        }
    }
}

TEST(Serialize, RoundTripIsBitStable) {
    SettingIndexedModel m({0.25, 0.75});
    m.add_setting(SettingPair::degrees(12.5, 317.25), {{0.1, 0.05, 0.075, 0.025}, {0.3, 0.123456789012, 0.2, 0.126543210988}});
    m.add_setting(SettingPair::degrees(0, 0), {{0, 0.25, 0, 0}, {0, 0, 0.75, 0}});
    const std::string once = model_to_string(m);
    const auto back = model_from_string(once);
    EXPECT_EQ(model_to_string(back), once);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back.settings()[i].mu, m.settings()[i].mu);
        EXPECT_EQ(back.settings()[i].nu, m.settings()[i].nu);
        for (std::size_t k = 0; k < 2; ++k)
            for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(back.table(i)[k][j], m.table(i)[k][j]);
    }
    EXPECT_NE(once.find("\"mu_deg\": 12.5"), std::string::npos) << once;
}

TEST(Serialize, MalformedDocumentsAreConfigErrors) {
    EXPECT_THROW(model_from_string("{"), ConfigError);
    EXPECT_THROW(model_from_string(R"({"format":"other"})"), ConfigError);
    EXPECT_THROW(model_from_string(
                     R"({"format":"bellsim.setting_model/1","source_weights":[0.5,0.5],"settings":[{"mu_deg":0,"nu_deg":0,"table":[1,0,0,0]}]})"),
                 ConfigError);
}
