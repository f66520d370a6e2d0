#include "bsf/optimize.hpp"

#include "bsf/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace bsf {

void OCPWeights::validate() const
{
    const double w[] = {Q, R_T, R_tau, S};
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw Error(ErrorCode::InvalidParameters, "OCP weights must be finite and nonnegative");
        }
    }
    if (!std::isfinite(T_amb)) {
        throw Error(ErrorCode::InvalidParameters, "T_amb must be finite");
    }
}

double objective(const ControlSchedule& schedule, const ModelParams& params, const OCPWeights& weights, double dt)
{
    const auto daily = integrate_daily(initial_state(params), schedule, params, dt);
    double running   = 0.0;
    for (int d = 0; d < schedule.days(); ++d) {
        const double dT  = schedule.temperatures()[d] - weights.T_amb;
        const double tau = schedule.photoperiods()[d];
        running += -weights.Q * daily[d].m_e + weights.R_T * dT * dT + weights.R_tau * tau * tau;
    }
    return -weights.S * daily.back().m_e + running;
}

double objective(const std::vector<double>& z, const ModelParams& params, const OCPWeights& weights, double dt)
{
    return objective(ControlSchedule::from_vector(z), params, weights, dt);
}

namespace {

struct Bounds {
    double lo;
    double hi;
    double h;
};

Bounds bounds_for(std::size_t i, std::size_t days, const SolveOptions& o)
{
    return i < days ? Bounds{kTempMin, kTempMax, o.h_T} : Bounds{kLightMin, kLightMax, o.h_tau};
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n && !failed; i = next++) {
                    try {
                        fn(i);
                    }
                    catch (...) {
                        if (!failed.exchange(true)) {
                            error = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

double clamp_to(double v, const Bounds& b)
{
    return std::clamp(v, b.lo, b.hi);
}

std::vector<double> random_schedule(std::mt19937_64& gen, std::size_t days)
{
    // explicit 53-bit mapping so draws do not depend on the standard library's distribution
    auto unit = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    std::vector<double> z(2 * days);
    for (std::size_t d = 0; d < days; ++d) {
        z[d] = kTempMin + (kTempMax - kTempMin) * unit();
    }
    for (std::size_t d = 0; d < days; ++d) {
        z[days + d] = kLightMin + (kLightMax - kLightMin) * unit();
    }
    return z;
}

struct StartOutcome {
    std::vector<double> z;
    double f = 0.0;
    std::vector<double> history;
    int iterations  = 0;
    bool converged  = false;
    bool first_step_failed = false;
};

StartOutcome descend(std::vector<double> z, const ModelParams& params, const OCPWeights& weights,
                     const SolveOptions& options)
{
    const std::size_t n    = z.size();
    const std::size_t days = n / 2;

    StartOutcome out;
    double f = objective(z, params, weights, options.dt);
    out.history.push_back(f);

    std::vector<double> trial(n);
    for (int it = 0; it < options.max_iterations; ++it) {
        const GradientEstimate est = objective_gradient(z, f, params, weights, options);

        double curv_max = 0.0;
        for (double c : est.curvature) {
            curv_max = std::max(curv_max, std::abs(c));
        }
        const double curv_floor = std::max(1e-8 * curv_max, 1e-12);

        std::vector<double> direction(n);
        for (std::size_t i = 0; i < n; ++i) {
            direction[i] = -est.gradient[i] / std::max(std::abs(est.curvature[i]), curv_floor);
        }

        bool accepted = false;
        double f_new  = f;
        double alpha  = 1.0;
        for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
            double slope = 0.0;
            bool moved   = false;
            for (std::size_t i = 0; i < n; ++i) {
                trial[i] = clamp_to(z[i] + alpha * direction[i], bounds_for(i, days, options));
                slope += est.gradient[i] * (trial[i] - z[i]);
                moved = moved || trial[i] != z[i];
            }
            if (!moved || !(slope < 0.0)) {
                break;
            }
            f_new = objective(trial, params, weights, options.dt);
            if (f_new < f && f_new <= f + 1e-4 * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            out.first_step_failed = it == 0;
            // a failed search at a stationary point still counts as convergence
            out.converged = it > 0;
            break;
        }
        const double change = (f - f_new) / std::max(std::abs(f), std::numeric_limits<double>::min());
        z.swap(trial);
        f = f_new;
        out.history.push_back(f);
        out.iterations = it + 1;
        if (change < options.tolerance) {
            out.converged = true;
            break;
        }
    }
    out.z = std::move(z);
    out.f = f;
    return out;
}

ScheduleReport report_for(const ControlSchedule& s, const ModelParams& params, const OCPWeights& weights, double dt)
{
    const Trajectory traj = integrate(initial_state(params), s, params, dt);
    ScheduleReport r;
    r.metrics    = metrics(traj, params);
    r.t_to_400mg = time_to_mass(traj, kReferenceMass);
    r.objective  = objective(s, params, weights, dt);
    return r;
}

} // namespace

GradientEstimate objective_gradient(const std::vector<double>& z, double f0, const ModelParams& params,
                                    const OCPWeights& weights, const SolveOptions& options)
{
    const std::size_t n    = z.size();
    const std::size_t days = n / 2;
    GradientEstimate est;
    est.gradient.assign(n, 0.0);
    est.curvature.assign(n, 0.0);

    parallel_for(n, options.threads, [&](std::size_t i) {
        const Bounds b = bounds_for(i, days, options);
        std::vector<double> zi = z;
        auto at = [&](double offset) {
            zi[i] = z[i] + offset;
            return objective(zi, params, weights, options.dt);
        };
        const double h = b.h;
        if (z[i] - h >= b.lo && z[i] + h <= b.hi) {
            const double fp = at(h);
            const double fm = at(-h);
            est.gradient[i]  = (fp - fm) / (2.0 * h);
            est.curvature[i] = (fp - 2.0 * f0 + fm) / (h * h);
        }
        else {
            const double s  = z[i] + h <= b.hi ? 1.0 : -1.0;
            const double f1 = at(s * h);
            const double f2 = at(2.0 * s * h);
            est.gradient[i]  = s * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
            est.curvature[i] = (f0 - 2.0 * f1 + f2) / (h * h);
        }
    });
    return est;
}

OCPResult solve(const ModelParams& params, const OCPWeights& weights, const ControlSchedule& init,
                const SolveOptions& options, std::optional<ControlSchedule> benchmark)
{
    weights.validate();
    params.validate();
    if (options.max_iterations < 1 || !(options.tolerance >= 0.0) || !(options.h_T > 0.0) || !(options.h_tau > 0.0)) {
        throw Error(ErrorCode::InvalidParameters, "invalid solver options");
    }
    const ControlSchedule reference = benchmark.value_or(ControlSchedule::benchmark(init.days()));
    if (reference.days() != init.days()) {
        throw Error(ErrorCode::InvalidSchedule, "benchmark and initial schedule differ in length");
    }
    const auto days = static_cast<std::size_t>(init.days());

    std::vector<std::vector<double>> starts = {init.to_vector(), reference.to_vector()};
    std::mt19937_64 gen(options.seed);
    for (int k = 0; k < options.random_starts; ++k) {
        starts.push_back(random_schedule(gen, days));
    }

    std::optional<StartOutcome> best;
    int best_index = -1;
    bool any_progress = false;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        StartOutcome out = descend(starts[s], params, weights, options);
        spdlog::debug("start {}: objective {:.10g} after {} iterations", s, out.f, out.iterations);
        any_progress = any_progress || !out.first_step_failed;
        if (!best || out.f < best->f) {
            best       = std::move(out);
            best_index = static_cast<int>(s);
        }
    }
    if (!any_progress) {
        throw Error(ErrorCode::NoDescentDirection, "no start found a descent direction; check the weights");
    }

    OCPResult r;
    r.schedule    = ControlSchedule::from_vector(best->z);
    r.objective   = best->f;
    r.history     = best->history;
    r.iterations  = best->iterations;
    r.start_index = best_index;
    r.converged   = best->converged;
    r.benchmark   = reference;

    const ScheduleReport opt   = report_for(r.schedule, params, weights, options.dt);
    const ScheduleReport bench = report_for(reference, params, weights, options.dt);
    r.metrics                  = opt.metrics;
    r.benchmark_metrics        = bench.metrics;
    r.benchmark_objective      = bench.objective;
    r.delta_m_e                = opt.metrics.m_e_final - bench.metrics.m_e_final;
    r.delta_sum_tau            = opt.metrics.sum_tau - bench.metrics.sum_tau;
    r.delta_sum_T              = opt.metrics.sum_T - bench.metrics.sum_T;
    return r;
}

ComparisonReport compare(const ControlSchedule& a, const ControlSchedule& b, const ModelParams& params,
                         const OCPWeights& weights, double dt)
{
    return {report_for(a, params, weights, dt), report_for(b, params, weights, dt)};
}

nlohmann::json to_json(const ScheduleReport& r)
{
    nlohmann::json j = to_json(r.metrics);
    j["tTo400mg_d"]  = r.t_to_400mg ? nlohmann::json(*r.t_to_400mg) : nlohmann::json(nullptr);
    j["objective"]   = r.objective;
    return j;
}

nlohmann::json to_json(const ComparisonReport& r)
{
    return {{"a", to_json(r.a)}, {"b", to_json(r.b)}};
}

nlohmann::json to_json(const OCPWeights& w)
{
    return {{"Q", w.Q}, {"R", {w.R_T, w.R_tau}}, {"S", w.S}, {"T_amb", w.T_amb}};
}

nlohmann::json to_json(const OCPResult& r)
{
    nlohmann::json j;
    j["schedule"]            = to_json(r.schedule);
    j["objective"]           = r.objective;
    j["history"]             = r.history;
    j["metrics"]             = to_json(r.metrics);
    j["iterations"]          = r.iterations;
    j["start_index"]         = r.start_index;
    j["converged"]           = r.converged;
    j["benchmark"]           = {{"schedule", to_json(r.benchmark)},
                                {"objective", r.benchmark_objective},
                                {"metrics", to_json(r.benchmark_metrics)}};
    j["improvement"]         = {{"dEgg_mg", r.delta_m_e}, {"dSumTau_h", r.delta_sum_tau}, {"dSumT_degCd", r.delta_sum_T}};
    return j;
}

} // namespace bsf
