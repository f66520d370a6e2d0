#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

namespace bsf {

/**
 * Coefficients of a modified Logan temperature response curve (Logan-10).
 *
 *   r(T) = alpha / (1 + k_L * exp(-p * (T - T_R)) + exp(-(T_let - T) / dT))
 *
 * k_L relates to the minimum rate at the lower threshold through k_L = (alpha - k_base) / k_base;
 * only k_L is stored. Signs of k_L and p are taken as given (the shipped presets use negative values).
 */
struct Logan10Params {
    double alpha = 1.0; ///< maximum rate (1/day or unitless factor)
    double k_L   = 0.0; ///< shape coefficient
    double p     = 0.0; ///< temperature sensitivity (1/degC)
    double T_let = 40.0; ///< lethal maximum temperature (degC)
    double T_R   = 15.0; ///< reference temperature (degC)
    double dT    = 1.0; ///< boundary layer width (degC)

    bool operator==(const Logan10Params&) const = default;
};

/// Saturating photoperiod response r_L(tau) = a1 * (1 - exp(-a2 * tau)).
struct LightParams {
    double a1 = 1.0; ///< saturation level
    double a2 = 1.0; ///< saturation rate (1/h)

    bool operator==(const LightParams&) const = default;
};

enum class Diet { None, Water, Agar, Milk };

struct FeedParams {
    Diet diet       = Diet::Water;
    double k_fed1_f = 1.0; ///< female energy-drain factor
    double k_fed1_m = 1.0; ///< male energy-drain factor
    double k_fed2   = 1.0; ///< egg-output factor

    bool operator==(const FeedParams&) const = default;
};

enum class ResponseKind { Energy, Stage, Egg };

inline constexpr double kDenominatorGuard = 1e-9;

/// Evaluates the Logan-10 curve. Accepts any finite T.
/// Throws DenominatorNearZero if the bracketed denominator is below 1e-9 in magnitude.
double logan10_rate(double T, const Logan10Params& params);

/// Photoperiod factor for 0 <= tau <= 24 h/day; throws OutOfRange otherwise.
double light_rate(double tau, const LightParams& params);

/// Throws InvalidParameters unless dT > 0, T_let > T_R, alpha > 0 and the denominator stays above
/// the guard on a 0.1 degC grid covering [T_R, T_let].
void validate(const Logan10Params& params);
void validate(const LightParams& params);
void validate(const FeedParams& params);

/// Fitted temperature response rows (energy use / lifespan, stage transitions, egg output).
Logan10Params preset(ResponseKind kind);
LightParams light_preset();
FeedParams feed_preset(Diet diet);
/// Parses "none", "water", "agar" or "milk"; throws UnknownDiet otherwise.
FeedParams feed_preset(std::string_view diet);

Diet parse_diet(std::string_view name);
std::string_view to_string(Diet diet);
std::string_view to_string(ResponseKind kind);

nlohmann::json to_json(const Logan10Params& params);
nlohmann::json to_json(const LightParams& params);
nlohmann::json to_json(const FeedParams& params);
Logan10Params logan10_from_json(const nlohmann::json& j);
LightParams light_from_json(const nlohmann::json& j);

/// All shipped presets as one document: {"temperature": {...}, "light": {...}, "feed": {...}}.
nlohmann::json presets_json();

} // namespace bsf
