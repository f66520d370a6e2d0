#pragma once

#include "bsf/env_response.hpp"

#include <array>
#include <cstddef>
#include <string_view>

namespace bsf {

/// Number of ODE states: 8 compartments, 2 energy pools, cumulative egg mass.
inline constexpr std::size_t kNumStates = 11;

/// Flat record order used for serialization and the trajectory CSV.
inline constexpr std::array<std::string_view, kNumStates> kStateNames = {
    "N_f_y", "N_m_y", "N_f_act", "N_m_act", "N_mate", "N_fert", "N_f_old", "N_m_old", "E_f", "E_m", "m_e"};

/**
 * Population state of one breeding cage.
 * Compartments are in flies, except N_mate which counts mated pairs.
 * Energy pools are normalized so that one fly starts with 1. m_e is cumulative egg mass in mg.
 */
struct PopulationState {
    double N_f_y   = 0.0;
    double N_m_y   = 0.0;
    double N_f_act = 0.0;
    double N_m_act = 0.0;
    double N_mate  = 0.0;
    double N_fert  = 0.0;
    double N_f_old = 0.0;
    double N_m_old = 0.0;
    double E_f     = 0.0;
    double E_m     = 0.0;
    double m_e     = 0.0;

    std::array<double, kNumStates> to_array() const;
    static PopulationState from_array(const std::array<double, kNumStates>& values);

    /// Living females, counting each mated pair once.
    double total_females() const
    {
        return N_f_y + N_f_act + N_fert + N_f_old + N_mate;
    }
    /// Living males, counting each mated pair once.
    double total_males() const
    {
        return N_m_y + N_m_act + N_m_old + N_mate;
    }

    bool operator==(const PopulationState&) const = default;
};

/// How the hazard of the shared mated compartment is formed from the two sexes.
enum class MatedMortality { Mean, Female, Male, Max };

struct ModelParams {
    // base transition rates (1/day)
    double k1 = 0.34;
    double k2 = 0.35;
    double k3 = 1.84;
    double k4 = 0.3;
    double k5 = 0.79;
    double k_ovi = 0.79; ///< mg per fertilized fly per day

    double eps_f   = 0.0287;
    double eps_m   = 0.0404;
    double beta_f  = 1.22e-4;
    double beta_m  = 9.25e-5;
    double gamma_f = 0.3513;
    double gamma_m = 0.1773;

    FeedParams feed            = feed_preset(Diet::Water);
    Logan10Params temp_energy  = preset(ResponseKind::Energy);
    Logan10Params temp_stage   = preset(ResponseKind::Stage);
    Logan10Params temp_egg     = preset(ResponseKind::Egg);
    LightParams light          = light_preset();

    double N_f0 = 1.0;
    double N_m0 = 1.0;
    double E_f0 = 1.0;
    double E_m0 = 1.0;

    MatedMortality mated_mortality = MatedMortality::Mean;
    /// Test hook: when false every mortality term is dropped from the population equations.
    bool mortality_enabled = true;

    /// Sets N_f0, N_m0 and the matching initial energy pools.
    void set_initial_population(double females, double males);

    /// Copy with initial counts and pools multiplied by c.
    ModelParams scaled(double c) const;

    /// Throws InvalidParameters on negative rates, invalid response curves or E0 != N0.
    void validate() const;
};

/// Table parameters with the given diet and one fly of each sex.
ModelParams default_params(Diet diet = Diet::Water);

/// All flies start young with full reserves; other compartments and m_e are zero.
PopulationState initial_state(const ModelParams& params);

struct ControlInput {
    double T   = 25.0; ///< cage temperature (degC)
    double tau = 16.0; ///< photoperiod (h/day)
};

inline constexpr double kTempMin  = 15.0;
inline constexpr double kTempMax  = 40.0;
inline constexpr double kLightMin = 2.0;
inline constexpr double kLightMax = 24.0;

bool in_box(const ControlInput& u);

/// Energy-driven mortality clamp(1 - E/E0, 0, 1). Throws InvalidInitialEnergy if E0 <= 0.
double mortality(double E, double E0);

struct TransitionRates {
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0; ///< includes the photoperiod factor
    double k4 = 0.0;
    double k5 = 0.0;
};

TransitionRates transition_rates(double T, double tau, const ModelParams& params);

double mated_hazard(double mu_f, double mu_m, MatedMortality strategy);

/// Right-hand side of the combined population / energy / egg model (per day).
/// Throws NonFiniteState if any state entry is NaN or infinite.
PopulationState rhs(const PopulationState& state, const ControlInput& u, const ModelParams& params);

} // namespace bsf
