#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace sepcsc;
using namespace sepcsc::engine;

namespace {

const EngineCatalog &cat() {
    static const EngineCatalog c = default_catalog();
    return c;
}

void expect_rel(double got, double want, double rel) { EXPECT_NEAR(got, want, rel * std::abs(want)) << "want " << want; }

} // namespace

TEST(EngineModels, ThrustEndpoints) {
    expect_rel(thrust_at_power(cat().at(3), 4.839), 184.42, 5e-3);
    expect_rel(thrust_at_power(cat().at(3), 0.302), 14.523, 5e-3);
    expect_rel(thrust_at_power(cat().at(6), 2.6), 93.37, 5e-3);
}

TEST(EngineModels, MassFlowEndpoints) {
    expect_rel(mass_flow_at_power(cat().at(2), 4.839), 15.358, 5e-3);
    expect_rel(mass_flow_at_power(cat().at(3), 4.839), 7.235, 5e-3);
    expect_rel(mass_flow_at_power(cat().at(4), 0.638), 2.132, 5e-3);
}

TEST(EngineModels, HornerMatchesPowerSum) {
    for (const auto &[id, e] : cat()) {
        for (double p : {e.p_min_kw, 0.5 * (e.p_min_kw + e.p_max_kw), e.p_max_kw}) {
            EXPECT_NEAR(thrust_at_power(e, p), testsupport::horner_ref(e.thrust_coeffs, p), 1e-10);
            EXPECT_NEAR(mass_flow_at_power(e, p), testsupport::horner_ref(e.mdot_coeffs, p), 1e-10);
        }
    }
}

TEST(EngineModels, ExhaustVelocityCase1Constants) {
    expect_rel(exhaust_velocity_at_power(cat().at(3), 4.839), 25491.663, 5e-3);
    expect_rel(exhaust_velocity_at_power(cat().at(3), 0.302), 6158.059, 5e-3);
}

TEST(EngineModels, ExhaustVelocityTimesMassFlowIsThrust) {
    for (const auto &[id, e] : cat()) {
        const double p = 0.3 * e.p_min_kw + 0.7 * e.p_max_kw;
        const double c = exhaust_velocity_at_power(e, p);
        EXPECT_NEAR(c * mass_flow_at_power(e, p) * 1e-3, thrust_at_power(e, p), 1e-12 * thrust_at_power(e, p));
    }
}

TEST(EngineModels, SpecificImpulseUsesStandardGravity) {
    const auto &e = cat().at(3);
    EXPECT_DOUBLE_EQ(specific_impulse_at_power(e, 4.839), exhaust_velocity_at_power(e, 4.839) / 9.80665);
}

TEST(EngineModels, Efficiency) {
    EXPECT_NEAR(efficiency_at_power(cat().at(3), 4.839).value, 0.486, 0.01);
    EXPECT_NEAR(efficiency_at_power(cat().at(4), 7.266).value, 0.675, 0.01);
    EXPECT_NEAR(efficiency_at_power(cat().at(3), 4.839).value, 0.48576, 5e-3);
    EXPECT_NEAR(efficiency_at_power(cat().at(3), 0.302).value, 0.14806, 5e-3);
    for (const auto &[id, e] : cat()) {
        const double p = e.p_max_kw;
        const auto eta = efficiency_at_power(e, p);
        EXPECT_TRUE(eta.consistent);
        const double thrust_n = 2.0 * p * 1000.0 * eta.value / exhaust_velocity_at_power(e, p);
        EXPECT_NEAR(thrust_n * 1e3, thrust_at_power(e, p), 1e-12 * thrust_at_power(e, p));
    }
}

TEST(EngineModels, InconsistentEfficiencyIsFlaggedNotThrown) {
    EngineSpec e{99, "toy", {0, 0, 0, 0, 1000.0}, {0, 0, 0, 0, 1.0}, 0.1, 1.0};
    EXPECT_NO_THROW(efficiency_at_power(e, 0.5));
    EXPECT_FALSE(efficiency_at_power(e, 0.5).consistent);
}

TEST(EngineModels, PerformanceAtUsesSiUnits) {
    const auto s = performance_at(cat().at(3), 4.839);
    EXPECT_DOUBLE_EQ(s.power_w, 4839.0);
    EXPECT_NEAR(s.thrust_n, 0.18442, 1e-3);
    EXPECT_NEAR(s.mdot_kgs, 7.235e-6, 5e-8);
}

TEST(EngineModels, OutOfRangePowerThrows) {
    const auto &e = cat().at(3);
    EXPECT_THROW(thrust_at_power(e, 0.301), RangeError);
    EXPECT_THROW(mass_flow_at_power(e, 4.84), RangeError);
    EXPECT_THROW(thrust_at_power(e, std::nan("")), RangeError);
    EXPECT_THROW(exhaust_velocity_at_power(e, -1.0), RangeError);
    try {
        thrust_at_power(e, 5.0);
        FAIL();
    } catch (const RangeError &err) {
        EXPECT_NE(std::string(err.what()).find("above p_max"), std::string::npos);
    }
}

TEST(EngineModels, ZeroMassFlowIsDegenerate) {
    EngineSpec e{42, "no flow", {0, 0, 0, 0, 10.0}, {0, 0, 0, 0, 0.0}, 0.1, 1.0};
    EXPECT_THROW(exhaust_velocity_at_power(e, 0.5), ModelError);
}

TEST(EngineModels, SpecValidation) {
    EngineCatalog c;
    EXPECT_THROW(c.add({7, "bad", {0, 0, 0, 0, 1}, {0, 0, 0, 0, 1}, 2.0, 1.0}), ConfigError);
    EXPECT_THROW(c.add({7, "bad", {0, 0, 0, 0, 1}, {0, 0, 0, 0, 1}, 1.0, 1.0}), ConfigError);
    EXPECT_THROW(cat().at(17), ConfigError);
}

TEST(EngineModels, LoadCatalogDefaults) {
    EXPECT_EQ(load_catalog(nlohmann::json()).size(), 6u);
    EXPECT_EQ(load_catalog(nlohmann::json::object()).size(), 6u);
    EXPECT_EQ(load_catalog(nlohmann::json::array()).ids(), (std::vector<int>{1, 2, 3, 4, 5, 6}));
}

TEST(EngineModels, LoadCatalogOverride) {
    const auto c = load_catalog(nlohmann::json::parse(R"([{"id": 1, "p_max_kw": 4.0}])"));
    EXPECT_DOUBLE_EQ(c.at(1).p_max_kw, 4.0);
    EXPECT_DOUBLE_EQ(c.at(1).p_min_kw, 0.302);
    EXPECT_EQ(c.at(1).thrust_coeffs, cat().at(1).thrust_coeffs);
}

TEST(EngineModels, LoadCatalogErrors) {
    EXPECT_THROW(load_catalog(nlohmann::json::parse(R"([{"id": 3}, {"id": 3}])")), ConfigError);
    EXPECT_THROW(load_catalog(nlohmann::json::parse(R"([{"id": 9, "name": "x"}])")), ConfigError);
    EXPECT_THROW(load_catalog(nlohmann::json::parse(R"([{"id": 1, "p_min_kw": 5.0}])")), ConfigError);
    EXPECT_THROW(load_catalog(nlohmann::json::parse(R"([{"id": 1, "thrust_coeffs": [1, 2]}])")), ConfigError);
    EXPECT_THROW(load_catalog(nlohmann::json::parse(R"([{"name": "no id"}])")), ConfigError);
    EXPECT_THROW(load_catalog(nlohmann::json::parse(R"({"engines": 3})")), ConfigError);
    try {
        load_catalog(nlohmann::json::parse(R"([{"id": 9, "name": "x", "thrust_coeffs": [0,0,0,0,1]}])"));
        FAIL();
    } catch (const ConfigError &err) {
        EXPECT_NE(std::string(err.what()).find("mdot_coeffs"), std::string::npos);
    }
}

TEST(EngineModels, DataFileMatchesBuiltIn) {
    const auto c = load_catalog_file(testsupport::source_path("data/engines.json"));
    ASSERT_EQ(c.size(), 6u);
    for (const auto &[id, e] : cat()) {
        EXPECT_EQ(c.at(id).thrust_coeffs, e.thrust_coeffs);
        EXPECT_EQ(c.at(id).mdot_coeffs, e.mdot_coeffs);
        EXPECT_EQ(c.at(id).p_min_kw, e.p_min_kw);
        EXPECT_EQ(c.at(id).p_max_kw, e.p_max_kw);
    }
    EXPECT_THROW(load_catalog_file("/nonexistent/engines.json"), ConfigError);
}

// Sampled over the admissible range: positive thrust and flow, Isp bracketed by the endpoint rows, eta in (0,1).
TEST(EngineModelsProperty, PositiveAndBracketedOverRange) {
    std::mt19937_64 rng(20240617);
    for (const auto &[id, e] : cat()) {
        std::uniform_real_distribution<double> u(e.p_min_kw, e.p_max_kw);
        for (int i = 0; i < 1000; ++i) {
            const double p = u(rng);
            ASSERT_GT(thrust_at_power(e, p), 0.0) << "engine " << id << " P " << p;
            ASSERT_GT(mass_flow_at_power(e, p), 0.0) << "engine " << id << " P " << p;
            const double isp = specific_impulse_at_power(e, p);
            ASSERT_GE(isp, 400.0);
            ASSERT_LE(isp, 5500.0);
            const auto eta = efficiency_at_power(e, p);
            ASSERT_GT(eta.value, 0.0);
            ASSERT_LT(eta.value, 1.0);
        }
    }
}
