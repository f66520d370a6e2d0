#include "bsf/env_response.hpp"

#include "bsf/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bsf {

namespace {

double logan10_denominator(double T, const Logan10Params& q)
{
    return 1.0 + q.k_L * std::exp(-q.p * (T - q.T_R)) + std::exp(-(q.T_let - T) / q.dT);
}

} // namespace

double logan10_rate(double T, const Logan10Params& params)
{
    const double denom = logan10_denominator(T, params);
    if (!(std::abs(denom) >= kDenominatorGuard)) {
        throw Error(ErrorCode::DenominatorNearZero, "Logan-10 denominator " + std::to_string(denom) +
                                                        " at T=" + std::to_string(T));
    }
    return params.alpha / denom;
}

double light_rate(double tau, const LightParams& params)
{
    if (!(tau >= 0.0 && tau <= 24.0)) {
        throw Error(ErrorCode::OutOfRange, "photoperiod " + std::to_string(tau) + " h outside [0, 24]");
    }
    // -expm1 keeps r_L(0) == 0 exactly; the cap keeps saturation strict once exp(-a2 tau) underflows
    const double r = -params.a1 * std::expm1(-params.a2 * tau);
    return std::min(r, std::nextafter(params.a1, 0.0));
}

void validate(const Logan10Params& q)
{
    const bool finite = std::isfinite(q.alpha) && std::isfinite(q.k_L) && std::isfinite(q.p) &&
                        std::isfinite(q.T_let) && std::isfinite(q.T_R) && std::isfinite(q.dT);
    if (!finite) {
        throw Error(ErrorCode::InvalidParameters, "Logan-10 coefficients must be finite");
    }
    if (!(q.dT > 0.0)) {
        throw Error(ErrorCode::InvalidParameters, "Logan-10 dT must be positive");
    }
    if (!(q.T_let > q.T_R)) {
        throw Error(ErrorCode::InvalidParameters, "Logan-10 requires T_let > T_R");
    }
    if (!(q.alpha > 0.0)) {
        throw Error(ErrorCode::InvalidParameters, "Logan-10 alpha must be positive");
    }
    const int steps = static_cast<int>(std::floor((q.T_let - q.T_R) * 10.0 + 1e-9));
    for (int i = 0; i <= steps; ++i) {
        const double T = q.T_R + 0.1 * i;
        if (!(std::abs(logan10_denominator(T, q)) > kDenominatorGuard)) {
            throw Error(ErrorCode::InvalidParameters,
                        "Logan-10 denominator vanishes near T=" + std::to_string(T));
        }
    }
}

void validate(const LightParams& q)
{
    if (!(q.a1 > 0.0) || !(q.a2 > 0.0) || !std::isfinite(q.a1) || !std::isfinite(q.a2)) {
        throw Error(ErrorCode::InvalidParameters, "light response needs a1 > 0 and a2 > 0");
    }
}

void validate(const FeedParams& q)
{
    if (!(q.k_fed1_f > 0.0) || !(q.k_fed1_m > 0.0) || !(q.k_fed2 > 0.0)) {
        throw Error(ErrorCode::InvalidParameters, "feed factors must be positive");
    }
}

Logan10Params preset(ResponseKind kind)
{
    Logan10Params q;
    switch (kind) {
    case ResponseKind::Energy:
        q = {0.08, -0.9753, -0.0157, 40.0, 15.0, 10.0};
        break;
    case ResponseKind::Stage:
        q = {2.3823, -0.6729, -0.0329, 40.0, 15.0, 15.0};
        break;
    case ResponseKind::Egg:
        q = {0.511, -0.2342, -0.0824, 40.0, 20.0, 2.0};
        break;
    }
    validate(q);
    return q;
}

LightParams light_preset()
{
    return {1.8825, 0.3711};
}

FeedParams feed_preset(Diet diet)
{
    switch (diet) {
    case Diet::None:
        return {diet, 1.69, 3.12, 2.26};
    case Diet::Water:
        return {diet, 1.27, 1.04, 1.78};
    case Diet::Agar:
        return {diet, 1.0, 1.0, 3.03};
    case Diet::Milk:
        return {diet, 0.58, 0.87, 4.06};
    }
    throw Error(ErrorCode::UnknownDiet, "unhandled diet");
}

FeedParams feed_preset(std::string_view diet)
{
    return feed_preset(parse_diet(diet));
}

Diet parse_diet(std::string_view name)
{
    if (name == "none") {
        return Diet::None;
    }
    if (name == "water") {
        return Diet::Water;
    }
    if (name == "agar") {
        return Diet::Agar;
    }
    if (name == "milk") {
        return Diet::Milk;
    }
    throw Error(ErrorCode::UnknownDiet, "unknown diet '" + std::string(name) + "'");
}

std::string_view to_string(Diet diet)
{
    switch (diet) {
    case Diet::None:
        return "none";
    case Diet::Water:
        return "water";
    case Diet::Agar:
        return "agar";
    case Diet::Milk:
        return "milk";
    }
    return "unknown";
}

std::string_view to_string(ResponseKind kind)
{
    switch (kind) {
    case ResponseKind::Energy:
        return "energy";
    case ResponseKind::Stage:
        return "stage";
    case ResponseKind::Egg:
        return "egg";
    }
    return "unknown";
}

nlohmann::json to_json(const Logan10Params& q)
{
    return {{"alpha", q.alpha}, {"kL", q.k_L}, {"p", q.p}, {"Tlet", q.T_let}, {"TR", q.T_R}, {"dT", q.dT}};
}

nlohmann::json to_json(const LightParams& q)
{
    return {{"a1", q.a1}, {"a2", q.a2}};
}

nlohmann::json to_json(const FeedParams& q)
{
    return {{"kFed1f", q.k_fed1_f}, {"kFed1m", q.k_fed1_m}, {"kFed2", q.k_fed2}};
}

Logan10Params logan10_from_json(const nlohmann::json& j)
{
    Logan10Params q;
    q.alpha = j.at("alpha").get<double>();
    q.k_L   = j.at("kL").get<double>();
    q.p     = j.at("p").get<double>();
    q.T_let = j.at("Tlet").get<double>();
    q.T_R   = j.at("TR").get<double>();
    q.dT    = j.at("dT").get<double>();
    return q;
}

LightParams light_from_json(const nlohmann::json& j)
{
    return {j.at("a1").get<double>(), j.at("a2").get<double>()};
}

nlohmann::json presets_json()
{
    nlohmann::json doc;
    for (auto kind : {ResponseKind::Energy, ResponseKind::Stage, ResponseKind::Egg}) {
        doc["temperature"][std::string(to_string(kind))] = to_json(preset(kind));
    }
    doc["light"] = to_json(light_preset());
    for (auto diet : {Diet::None, Diet::Water, Diet::Agar, Diet::Milk}) {
        doc["feed"][std::string(to_string(diet))] = to_json(feed_preset(diet));
    }
    return doc;
}

} // namespace bsf
