#include "bsf/dynamics.hpp"

#include "bsf/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bsf {

std::array<double, kNumStates> PopulationState::to_array() const
{
    return {N_f_y, N_m_y, N_f_act, N_m_act, N_mate, N_fert, N_f_old, N_m_old, E_f, E_m, m_e};
}

PopulationState PopulationState::from_array(const std::array<double, kNumStates>& v)
{
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10]};
}

void ModelParams::set_initial_population(double females, double males)
{
    N_f0 = females;
    N_m0 = males;
    E_f0 = females;
    E_m0 = males;
}

ModelParams ModelParams::scaled(double c) const
{
    ModelParams out = *this;
    out.N_f0 *= c;
    out.N_m0 *= c;
    out.E_f0 *= c;
    out.E_m0 *= c;
    return out;
}

void ModelParams::validate() const
{
    const double rates[] = {k1, k2, k3, k4, k5, k_ovi, eps_f, eps_m, beta_f, beta_m, gamma_f, gamma_m};
    for (double r : rates) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw Error(ErrorCode::InvalidParameters, "model rates must be finite and nonnegative");
        }
    }
    bsf::validate(feed);
    bsf::validate(temp_energy);
    bsf::validate(temp_stage);
    bsf::validate(temp_egg);
    bsf::validate(light);
    if (!(N_f0 > 0.0) || !(N_m0 > 0.0) || !std::isfinite(N_f0) || !std::isfinite(N_m0)) {
        throw Error(ErrorCode::InvalidParameters, "initial populations must be positive");
    }
    if (E_f0 != N_f0 || E_m0 != N_m0) {
        throw Error(ErrorCode::InvalidParameters, "initial energy pools must equal initial populations");
    }
}

ModelParams default_params(Diet diet)
{
    ModelParams p;
    p.feed = feed_preset(diet);
    return p;
}

PopulationState initial_state(const ModelParams& params)
{
    PopulationState s;
    s.N_f_y = params.N_f0;
    s.N_m_y = params.N_m0;
    s.E_f   = params.E_f0;
    s.E_m   = params.E_m0;
    return s;
}

bool in_box(const ControlInput& u)
{
    return u.T >= kTempMin && u.T <= kTempMax && u.tau >= kLightMin && u.tau <= kLightMax;
}

double mortality(double E, double E0)
{
    if (!(E0 > 0.0)) {
        throw Error(ErrorCode::InvalidInitialEnergy, "initial energy pool must be positive");
    }
    return std::clamp(1.0 - E / E0, 0.0, 1.0);
}

TransitionRates transition_rates(double T, double tau, const ModelParams& params)
{
    const double stage = logan10_rate(T, params.temp_stage);
    TransitionRates k;
    k.k1 = params.k1 * stage;
    k.k2 = params.k2 * stage;
    k.k3 = params.k3 * stage * light_rate(tau, params.light);
    k.k4 = params.k4 * stage;
    k.k5 = params.k5 * stage;
    return k;
}

double mated_hazard(double mu_f, double mu_m, MatedMortality strategy)
{
    switch (strategy) {
    case MatedMortality::Mean:
        return 0.5 * (mu_f + mu_m);
    case MatedMortality::Female:
        return mu_f;
    case MatedMortality::Male:
        return mu_m;
    case MatedMortality::Max:
        return std::max(mu_f, mu_m);
    }
    return 0.5 * (mu_f + mu_m);
}

PopulationState rhs(const PopulationState& x, const ControlInput& u, const ModelParams& params)
{
    for (double v : x.to_array()) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFiniteState, "state contains NaN or Inf");
        }
    }

    const TransitionRates k = transition_rates(u.T, u.tau, params);
    const double r_energy   = logan10_rate(u.T, params.temp_energy);
    const double r_egg      = logan10_rate(u.T, params.temp_egg);
    const FeedParams& feed  = params.feed;

    double mu_f = mortality(x.E_f, params.E_f0);
    double mu_m = mortality(x.E_m, params.E_m0);
    // energy drains always see the true hazard; the hook only removes deaths
    const double drain_mu_f = mu_f;
    const double drain_mu_m = mu_m;
    if (!params.mortality_enabled) {
        mu_f = 0.0;
        mu_m = 0.0;
    }
    const double mu_fm = mated_hazard(mu_f, mu_m, params.mated_mortality);

    const double mating = k.k3 * x.N_f_act * x.N_m_act / params.N_m0;
    const double egg    = r_egg * feed.k_fed2 * params.k_ovi * x.N_fert;

    PopulationState d;
    d.N_f_y   = -k.k1 * x.N_f_y - mu_f * x.N_f_y;
    d.N_m_y   = -k.k2 * x.N_m_y - mu_m * x.N_m_y;
    d.N_f_act = k.k1 * x.N_f_y - mating - mu_f * x.N_f_act;
    d.N_m_act = k.k2 * x.N_m_y - mating - mu_m * x.N_m_act;
    d.N_mate  = mating - k.k4 * x.N_mate - mu_fm * x.N_mate;
    d.N_fert  = k.k4 * x.N_mate - k.k5 * x.N_fert - mu_f * x.N_fert;
    d.N_f_old = k.k5 * x.N_fert - mu_f * x.N_f_old;
    d.N_m_old = k.k4 * x.N_mate - mu_m * x.N_m_old;

    d.E_f = -(feed.k_fed1_f / r_energy) * (params.beta_f + params.gamma_f * drain_mu_f) * x.total_females() -
            (params.eps_f / (feed.k_fed2 * r_egg)) * egg;
    d.E_m = -(feed.k_fed1_m / r_energy) * (params.beta_m + params.gamma_m * drain_mu_m) * x.total_males() -
            params.eps_m * x.N_mate;
    d.m_e = egg;

    // an exhausted pool cannot be drained further; mortality is already 1 there
    if (x.E_f <= 0.0) {
        d.E_f = std::max(d.E_f, 0.0);
    }
    if (x.E_m <= 0.0) {
        d.E_m = std::max(d.E_m, 0.0);
    }
    return d;
}

} // namespace bsf
