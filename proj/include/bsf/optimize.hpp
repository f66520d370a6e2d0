#pragma once

#include "bsf/simulate.hpp"

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

namespace bsf {

/// Cost weights. Input cost uses the deviation of T from T_amb, so holding T_amb is free.
struct OCPWeights {
    double Q     = 1e4; ///< running egg-mass weight
    double R_T   = 1.0; ///< diagonal input weight for temperature
    double R_tau = 1.0; ///< diagonal input weight for photoperiod
    double S     = 1e5; ///< terminal egg-mass weight
    double T_amb = 20.0; ///< degC

    void validate() const;
};

/// -S m_e(t_f) + sum_d [-Q m_e(end of day d) + R_T (T_d - T_amb)^2 + R_tau tau_d^2] * 1 day.
double objective(const ControlSchedule& schedule, const ModelParams& params, const OCPWeights& weights,
                 double dt = kDefaultStep);

/// Same as `objective` on the decision-vector layout of ControlSchedule::to_vector.
/// Throws ScheduleOutOfBox for entries outside the box.
double objective(const std::vector<double>& z, const ModelParams& params, const OCPWeights& weights,
                 double dt = kDefaultStep);

struct SolveOptions {
    int max_iterations   = 500; ///< per start
    double tolerance     = 1e-6; ///< relative objective change that ends a start
    double h_T           = 0.01; ///< degC
    double h_tau         = 0.01; ///< h
    int random_starts    = 3;
    std::uint64_t seed   = 42;
    double dt            = kDefaultStep;
    unsigned threads     = 0; ///< 0 = hardware concurrency
};

struct GradientEstimate {
    std::vector<double> gradient;
    std::vector<double> curvature; ///< diagonal second differences
};

/// Finite-difference gradient and diagonal curvature of the objective.
/// Central differences in the interior; second-order one-sided stencils pointing into the box at bounds.
GradientEstimate objective_gradient(const std::vector<double>& z, double f0, const ModelParams& params,
                                    const OCPWeights& weights, const SolveOptions& options = {});

struct OCPResult {
    ControlSchedule schedule;
    double objective = 0.0;
    std::vector<double> history; ///< cost at the start point, then after every accepted step
    int iterations    = 0;
    int start_index   = 0; ///< 0 = init, 1 = benchmark, 2.. = random
    bool converged    = false;

    ControlSchedule benchmark;
    double benchmark_objective = 0.0;
    Metrics metrics;
    Metrics benchmark_metrics;

    double delta_m_e     = 0.0; ///< optimal minus benchmark final egg mass (mg)
    double delta_sum_tau = 0.0;
    double delta_sum_T   = 0.0;
};

/**
 * Projected, diagonally scaled gradient descent with backtracking (Armijo) line search.
 *
 * Starts from `init`, the benchmark schedule and `random_starts` uniform random schedules drawn with
 * `seed`; the best end point wins. Throws NoDescentDirection if no start gets past its first line search.
 */
OCPResult solve(const ModelParams& params, const OCPWeights& weights, const ControlSchedule& init,
                const SolveOptions& options = {}, std::optional<ControlSchedule> benchmark = std::nullopt);

struct ScheduleReport {
    Metrics metrics;
    std::optional<double> t_to_400mg;
    double objective = 0.0;
};

struct ComparisonReport {
    ScheduleReport a;
    ScheduleReport b;
};

inline constexpr double kReferenceMass = 400.0;

ComparisonReport compare(const ControlSchedule& a, const ControlSchedule& b, const ModelParams& params,
                         const OCPWeights& weights, double dt = kDefaultStep);

nlohmann::json to_json(const ScheduleReport& r);
nlohmann::json to_json(const ComparisonReport& r);
nlohmann::json to_json(const OCPResult& r);
nlohmann::json to_json(const OCPWeights& w);

} // namespace bsf
