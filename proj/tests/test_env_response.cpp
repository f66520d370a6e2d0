#include "bsf/env_response.hpp"
#include "bsf/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

using namespace bsf;

namespace {

// Values at 25 degC from a 30-digit mpmath evaluation of the curve with the shipped coefficients.
constexpr double kEnergyAt25 = 0.975212084697971597;
constexpr double kStageAt25  = 5.50397668424967794;
constexpr double kEggAt25    = 0.789860284517518210;
constexpr double kLightAt16  = 1.87753329839076972;

} // namespace

TEST(Logan10, PresetValuesAt25)
{
    EXPECT_NEAR(logan10_rate(25.0, preset(ResponseKind::Energy)), kEnergyAt25, 1e-12);
    EXPECT_NEAR(logan10_rate(25.0, preset(ResponseKind::Stage)), kStageAt25, 1e-12);
    EXPECT_NEAR(logan10_rate(25.0, preset(ResponseKind::Egg)), kEggAt25, 1e-12);
}

TEST(Logan10, PresetRows)
{
    const auto e = preset(ResponseKind::Energy);
    EXPECT_EQ(e, (Logan10Params{0.08, -0.9753, -0.0157, 40.0, 15.0, 10.0}));
    const auto s = preset(ResponseKind::Stage);
    EXPECT_DOUBLE_EQ(s.alpha, 2.3823);
    EXPECT_DOUBLE_EQ(s.dT, 15.0);
    const auto g = preset(ResponseKind::Egg);
    EXPECT_DOUBLE_EQ(g.alpha, 0.511);
    EXPECT_DOUBLE_EQ(g.T_R, 20.0);
    EXPECT_DOUBLE_EQ(g.dT, 2.0);
}

TEST(Logan10, PositiveAndFiniteOnControlRange)
{
    for (auto kind : {ResponseKind::Energy, ResponseKind::Stage, ResponseKind::Egg}) {
        const auto q = preset(kind);
        for (int i = 0; i <= 250; ++i) {
            const double T = 15.0 + 0.1 * i;
            const double r = logan10_rate(T, q);
            EXPECT_TRUE(std::isfinite(r)) << to_string(kind) << " T=" << T;
            EXPECT_GT(r, 0.0) << to_string(kind) << " T=" << T;
        }
    }
}

TEST(Logan10, PureFunction)
{
    const auto q = preset(ResponseKind::Egg);
    const double a = logan10_rate(31.7, q);
    const double b = logan10_rate(31.7, q);
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
}

TEST(Logan10, DenominatorNearZeroIsReported)
{
    // 1 + k_L * exp(0) + exp(-(T_let - T_R)/dT) == 0 at T = T_R when k_L = -(1 + exp(-1))
    Logan10Params q{1.0, -(1.0 + std::exp(-1.0)), 0.0, 40.0, 15.0, 25.0};
    try {
        logan10_rate(15.0, q);
        FAIL() << "expected DenominatorNearZero";
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DenominatorNearZero);
    }
    EXPECT_THROW(validate(q), Error);
}

TEST(Logan10, ValidateRejectsBadStructure)
{
    auto q = preset(ResponseKind::Stage);
    q.dT   = 0.0;
    EXPECT_THROW(validate(q), Error);
    q       = preset(ResponseKind::Stage);
    q.T_let = q.T_R;
    EXPECT_THROW(validate(q), Error);
    q       = preset(ResponseKind::Stage);
    q.alpha = -1.0;
    EXPECT_THROW(validate(q), Error);
}

TEST(Logan10, AcceptsTemperaturesOutsideControlBox)
{
    EXPECT_TRUE(std::isfinite(logan10_rate(5.0, preset(ResponseKind::Stage))));
    EXPECT_TRUE(std::isfinite(logan10_rate(45.0, preset(ResponseKind::Stage))));
}

TEST(Light, ZeroHoursGivesZero)
{
    EXPECT_EQ(light_rate(0.0, light_preset()), 0.0);
}

TEST(Light, SixteenHours)
{
    EXPECT_NEAR(light_rate(16.0, light_preset()), kLightAt16, 1e-12);
}

TEST(Light, BelowSaturationAtFullDay)
{
    const auto q = light_preset();
    EXPECT_DOUBLE_EQ(q.a1, 1.8825);
    EXPECT_DOUBLE_EQ(q.a2, 0.3711);
    EXPECT_LT(light_rate(24.0, q), q.a1);
}

TEST(Light, OutOfRange)
{
    try {
        light_rate(-0.1, light_preset());
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OutOfRange);
    }
    EXPECT_THROW(light_rate(24.01, light_preset()), Error);
}

TEST(Light, MonotoneForRandomParameters)
{
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> a1(0.1, 5.0);
    std::uniform_real_distribution<double> a2(0.01, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const LightParams q{a1(gen), a2(gen)};
        double prev = light_rate(0.0, q);
        EXPECT_EQ(prev, 0.0);
        for (int i = 1; i <= 2400; ++i) {
            const double v = light_rate(0.01 * i, q);
            EXPECT_GE(v, prev - 1e-12);
            EXPECT_LT(v, q.a1);
            prev = v;
        }
    }
}

TEST(Feed, PresetRows)
{
    const auto water = feed_preset(Diet::Water);
    EXPECT_DOUBLE_EQ(water.k_fed1_f, 1.27);
    EXPECT_DOUBLE_EQ(water.k_fed1_m, 1.04);
    EXPECT_DOUBLE_EQ(water.k_fed2, 1.78);
    const auto agar = feed_preset("agar");
    EXPECT_DOUBLE_EQ(agar.k_fed1_f, 1.0);
    EXPECT_DOUBLE_EQ(agar.k_fed1_m, 1.0);
    EXPECT_DOUBLE_EQ(agar.k_fed2, 3.03);
    const auto milk = feed_preset("milk");
    EXPECT_DOUBLE_EQ(milk.k_fed1_f, 0.58);
    EXPECT_DOUBLE_EQ(milk.k_fed1_m, 0.87);
    EXPECT_DOUBLE_EQ(milk.k_fed2, 4.06);
    const auto none = feed_preset("none");
    EXPECT_DOUBLE_EQ(none.k_fed1_m, 3.12);
}

TEST(Feed, UnknownDiet)
{
    try {
        feed_preset("honey");
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownDiet);
    }
}

TEST(Presets, JsonMirrorsTables)
{
    const auto j = presets_json();
    EXPECT_DOUBLE_EQ(j["temperature"]["energy"]["alpha"].get<double>(), 0.08);
    EXPECT_DOUBLE_EQ(j["temperature"]["stage"]["kL"].get<double>(), -0.6729);
    EXPECT_DOUBLE_EQ(j["temperature"]["egg"]["TR"].get<double>(), 20.0);
    EXPECT_DOUBLE_EQ(j["temperature"]["egg"]["Tlet"].get<double>(), 40.0);
    EXPECT_DOUBLE_EQ(j["temperature"]["egg"]["p"].get<double>(), -0.0824);
    EXPECT_DOUBLE_EQ(j["temperature"]["egg"]["dT"].get<double>(), 2.0);
    EXPECT_DOUBLE_EQ(j["light"]["a1"].get<double>(), 1.8825);
    EXPECT_DOUBLE_EQ(j["feed"]["milk"]["kFed2"].get<double>(), 4.06);
    EXPECT_DOUBLE_EQ(j["feed"]["water"]["kFed1f"].get<double>(), 1.27);
    EXPECT_DOUBLE_EQ(j["feed"]["water"]["kFed1m"].get<double>(), 1.04);
    EXPECT_EQ(logan10_from_json(j["temperature"]["stage"]), preset(ResponseKind::Stage));
}
