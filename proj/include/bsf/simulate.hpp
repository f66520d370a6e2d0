#pragma once

#include "bsf/dynamics.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

namespace bsf {

/// Daily piecewise-constant temperature and photoperiod.
class ControlSchedule
{
public:
    ControlSchedule() = default;
    /// Throws InvalidSchedule on length mismatch or empty input, ScheduleOutOfBox on bound violations.
    ControlSchedule(std::vector<double> T, std::vector<double> tau);

    static ControlSchedule constant(int days, double T, double tau);
    /// The standard-practice reference: 25 degC and 16 h light every day.
    static ControlSchedule benchmark(int days = 14);

    int days() const
    {
        return static_cast<int>(T_.size());
    }
    const std::vector<double>& temperatures() const
    {
        return T_;
    }
    const std::vector<double>& photoperiods() const
    {
        return tau_;
    }
    ControlInput at_day(int day) const
    {
        return {T_[day], tau_[day]};
    }

    /// Decision vector layout [T_0..T_{d-1}, tau_0..tau_{d-1}].
    std::vector<double> to_vector() const;
    static ControlSchedule from_vector(const std::vector<double>& z);

    bool operator==(const ControlSchedule&) const = default;

private:
    std::vector<double> T_;
    std::vector<double> tau_;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PopulationState> states;
    ControlSchedule schedule;
};

inline constexpr double kDefaultStep      = 0.05;
inline constexpr double kMaxStep          = 0.1;
inline constexpr double kClampTolerance   = 1e-9;
inline constexpr double kBlowupThreshold  = 1e12;

/// Fixed-step classic RK4 with the control held constant over each day.
/// Every step is recorded. dt must divide one day and be at most 0.1.
Trajectory integrate(const PopulationState& initial, const ControlSchedule& schedule, const ModelParams& params,
                     double dt = kDefaultStep);

/// Same integration, only reporting the state at the end of every day (index 0 = end of day 1).
std::vector<PopulationState> integrate_daily(const PopulationState& initial, const ControlSchedule& schedule,
                                             const ModelParams& params, double dt = kDefaultStep);

struct Metrics {
    double sum_T   = 0.0; ///< degC * day
    double sum_tau = 0.0; ///< h
    std::optional<int> t_Nfy20; ///< first whole day with N_f_y below 20 % of N_f0
    double m_e_final = 0.0; ///< mg
};

Metrics metrics(const Trajectory& traj, const ModelParams& params);

/// First time cumulative egg mass reaches `mass`, interpolated linearly between samples.
std::optional<double> time_to_mass(const Trajectory& traj, double mass);

/// Flies per sex such that the schedule ends with `target_final_mass` mg of eggs.
/// Uses the degree-one homogeneity of the model in the initial population.
double calibrate_scale(double target_final_mass, const ControlSchedule& reference_schedule, ModelParams params,
                       double dt = kDefaultStep);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_schedule_csv(std::ostream& os, const ControlSchedule& schedule);
ControlSchedule read_schedule_csv(std::istream& is);

nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const ControlSchedule& s);

} // namespace bsf
