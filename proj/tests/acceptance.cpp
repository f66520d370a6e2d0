// Acceptance suite. One line per criterion; exit status is nonzero if any criterion fails.

#include "bsf/calibrate.hpp"
#include "bsf/dynamics.hpp"
#include "bsf/env_response.hpp"
#include "bsf/error.hpp"
#include "bsf/optimize.hpp"
#include "bsf/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace bsf;

namespace {

// tolerances
constexpr double kBenchmarkMass      = 447.6;
constexpr double kBenchmarkMassTol   = 1e-3; // relative
constexpr int kTNfy20Target          = 12;
constexpr int kTNfy20Tol             = 1;
constexpr double kBenchmarkRuntime   = 1.0; // s
constexpr double kMinRatio           = 1.05;
constexpr double kMaxSumTau          = 224.0;
constexpr double kOptimizedT400Max   = 8.0; // d
constexpr double kBenchmarkT400Min   = 10.0; // d
constexpr double kOptimizeRuntime    = 300.0; // s
constexpr double kHomogeneityTol     = 1e-9;
constexpr int kHomogeneitySchedules  = 20;
constexpr int kMonotoneSchedules     = 50;
constexpr double kMonotoneSlack      = 1e-9; // relative to N0
constexpr double kMinOrder           = 3.5;
constexpr double kNoiselessRmse      = 1e-6;
constexpr double kNoise              = 0.01;
constexpr int kNoiseSeeds            = 100;
constexpr double kNoisyCurveError    = 0.03;
constexpr double kGradientTol        = 0.01;
constexpr int kGradientSchedules     = 5;
constexpr double kBaselineTol        = 0.01;
constexpr double kPointTol           = 1e-3;
constexpr int kHorizon               = 14;

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail)
{
    std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) {
        ++failures;
    }
}

void run(int id, const std::string& name, const std::function<void(std::ostringstream&, bool&)>& body)
{
    std::ostringstream detail;
    detail.precision(6);
    bool ok = true;
    try {
        body(detail, ok);
    }
    catch (const std::exception& e) {
        ok = false;
        detail << " exception: " << e.what();
    }
    report(id, name, ok, detail.str());
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ModelParams calibrated(double* seconds = nullptr)
{
    const auto t0   = std::chrono::steady_clock::now();
    ModelParams p   = default_params(Diet::Water);
    const double n0 = calibrate_scale(kBenchmarkMass, ControlSchedule::benchmark(kHorizon), p);
    p.set_initial_population(n0, n0);
    if (seconds) {
        *seconds = seconds_since(t0);
    }
    return p;
}

ControlSchedule random_schedule(std::mt19937_64& gen, int days)
{
    std::uniform_real_distribution<double> T(kTempMin, kTempMax);
    std::uniform_real_distribution<double> tau(kLightMin, kLightMax);
    std::vector<double> Ts(days);
    std::vector<double> taus(days);
    for (int d = 0; d < days; ++d) {
        Ts[d]   = T(gen);
        taus[d] = tau(gen);
    }
    return {Ts, taus};
}

double logan_curve(double T, const Logan10Params& q)
{
    return q.alpha / (1.0 + q.k_L * std::exp(-q.p * (T - q.T_R)) + std::exp(-(q.T_let - T) / q.dT));
}

double light_curve(double tau, const LightParams& q)
{
    return q.a1 * (1.0 - std::exp(-q.a2 * tau));
}

void benchmark_reproduction(std::ostringstream& out, bool& ok)
{
    double secs        = 0.0;
    const auto t0      = std::chrono::steady_clock::now();
    const auto p       = calibrated(&secs);
    const auto traj    = integrate(initial_state(p), ControlSchedule::benchmark(kHorizon), p);
    const auto m       = metrics(traj, p);
    const double total = seconds_since(t0);

    const bool mass_ok = std::abs(m.m_e_final - kBenchmarkMass) <= kBenchmarkMassTol * kBenchmarkMass;
    const bool sums_ok = m.sum_T == 350.0 && m.sum_tau == 224.0;
    const bool t20_ok  = m.t_Nfy20 && std::abs(*m.t_Nfy20 - kTNfy20Target) <= kTNfy20Tol;
    const bool time_ok = total < kBenchmarkRuntime;
    ok                 = mass_ok && sums_ok && t20_ok && time_ok;
    out << "N0=" << p.N_f0 << " m_e=" << m.m_e_final << " mg" << (mass_ok ? "" : " (out of band)")
        << " sumT=" << m.sum_T << " sumTau=" << m.sum_tau << " tNfy20="
        << (m.t_Nfy20 ? std::to_string(*m.t_Nfy20) : std::string("none")) << " d (target " << kTNfy20Target << "+-"
        << kTNfy20Tol << ")" << " runtime=" << total << " s";
}

void optimization_improvement(std::ostringstream& out, bool& ok)
{
    const auto p        = calibrated();
    const auto t0       = std::chrono::steady_clock::now();
    const auto result   = solve(p, OCPWeights{}, ControlSchedule::benchmark(kHorizon));
    const double secs   = seconds_since(t0);
    const auto opt      = integrate(initial_state(p), result.schedule, p);
    const auto bench    = integrate(initial_state(p), ControlSchedule::benchmark(kHorizon), p);
    const auto t400_opt = time_to_mass(opt, kReferenceMass);
    const auto t400_ref = time_to_mass(bench, kReferenceMass);
    const double ratio  = result.metrics.m_e_final / result.benchmark_metrics.m_e_final;

    const bool ratio_ok = ratio >= kMinRatio;
    const bool tau_ok   = result.metrics.sum_tau < kMaxSumTau;
    const bool opt_ok   = t400_opt && *t400_opt <= kOptimizedT400Max;
    const bool ref_ok   = !t400_ref || *t400_ref > kBenchmarkT400Min;
    const bool time_ok  = secs < kOptimizeRuntime;
    ok                  = ratio_ok && tau_ok && opt_ok && ref_ok && time_ok;
    out << "ratio=" << ratio << " m_e=" << result.metrics.m_e_final << " mg sumTau=" << result.metrics.sum_tau
        << " h sumT=" << result.metrics.sum_T << " t400(opt)=" << (t400_opt ? std::to_string(*t400_opt) : "never")
        << " d t400(benchmark)=" << (t400_ref ? std::to_string(*t400_ref) : "never") << " d (required > "
        << kBenchmarkT400Min << ") start=" << result.start_index << " iterations=" << result.iterations
        << " runtime=" << secs << " s";
}

void homogeneity(std::ostringstream& out, bool& ok)
{
    const auto p = calibrated();
    std::mt19937_64 gen(101);
    double worst = 0.0;
    for (int s = 0; s < kHomogeneitySchedules; ++s) {
        const auto schedule = random_schedule(gen, kHorizon);
        const auto base     = integrate(initial_state(p), schedule, p);
        for (double c : {0.5, 2.0, 10.0}) {
            const auto pc     = p.scaled(c);
            const auto scaled = integrate(initial_state(pc), schedule, pc);
            const double floor = c * p.N_f0 * 1e-15;
            for (std::size_t i = 0; i < base.states.size(); ++i) {
                const auto a = base.states[i].to_array();
                const auto b = scaled.states[i].to_array();
                for (std::size_t k = 0; k < kNumStates; ++k) {
                    const double ref = c * a[k];
                    worst            = std::max(worst, std::abs(b[k] - ref) / std::max(std::abs(ref), floor));
                }
            }
        }
    }
    ok = worst <= kHomogeneityTol;
    out << kHomogeneitySchedules << " schedules x c in {0.5, 2, 10}, worst relative deviation " << worst;
}

void monotonicity(std::ostringstream& out, bool& ok)
{
    const auto p = calibrated();
    std::mt19937_64 gen(202);
    const double slack = kMonotoneSlack * p.N_f0;
    int bad_egg = 0, bad_energy = 0, bad_sign = 0, bad_mu = 0;
    for (int s = 0; s < kMonotoneSchedules; ++s) {
        const auto traj = integrate(initial_state(p), random_schedule(gen, kHorizon), p);
        for (std::size_t i = 0; i < traj.states.size(); ++i) {
            const auto& x = traj.states[i];
            for (double v : x.to_array()) {
                bad_sign += v < 0.0;
            }
            const double mu_f = 1.0 - x.E_f / p.E_f0;
            const double mu_m = 1.0 - x.E_m / p.E_m0;
            bad_mu += !(mu_f >= 0.0 && mu_f <= 1.0 && mu_m >= 0.0 && mu_m <= 1.0);
            if (i > 0) {
                const auto& prev = traj.states[i - 1];
                bad_egg += x.m_e < prev.m_e - slack;
                bad_energy += x.E_f > prev.E_f + slack || x.E_m > prev.E_m + slack;
            }
        }
    }
    ok = bad_egg == 0 && bad_energy == 0 && bad_sign == 0 && bad_mu == 0;
    out << kMonotoneSchedules << " schedules; violations: m_e " << bad_egg << ", energy " << bad_energy
        << ", negative " << bad_sign << ", mu " << bad_mu;
}

void integrator_order(std::ostringstream& out, bool& ok)
{
    const auto p = calibrated();
    std::vector<double> T(kHorizon);
    std::vector<double> tau(kHorizon);
    for (int d = 0; d < kHorizon; ++d) {
        T[d]   = d % 2 == 0 ? 22.0 : 31.0;
        tau[d] = d % 3 == 0 ? 8.0 : 18.0;
    }
    const ControlSchedule varying(T, tau);
    double worst = 1e300;
    for (const auto& schedule : {ControlSchedule::benchmark(kHorizon), varying}) {
        double m[3];
        const double steps[3] = {0.1, 0.05, 0.025};
        for (int k = 0; k < 3; ++k) {
            m[k] = integrate_daily(initial_state(p), schedule, p, steps[k]).back().m_e;
        }
        const double order = std::log2(std::abs(m[0] - m[1]) / std::abs(m[1] - m[2]));
        out << (schedule == varying ? " varying" : "benchmark") << " order=" << order;
        worst = std::min(worst, order);
    }
    ok = worst >= kMinOrder;
}

void fit_round_trip(std::ostringstream& out, bool& ok)
{
    const Logan10Fixed structure{true, true, true};
    double worst_clean = 0.0;
    double worst_p95   = 0.0;

    auto logan_grid = [](const Logan10Params& q) {
        DataSet d;
        for (int T = 15; T <= 40; ++T) {
            d.inputs.push_back(T);
            d.observations.push_back(logan_curve(T, q));
        }
        return d;
    };
    auto light_grid = [](const LightParams& q) {
        DataSet d;
        for (int tau = 2; tau <= 24; ++tau) {
            d.inputs.push_back(tau);
            d.observations.push_back(light_curve(tau, q));
        }
        return d;
    };
    auto p95 = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[static_cast<std::size_t>(std::ceil(0.95 * v.size())) - 1];
    };

    for (auto kind : {ResponseKind::Energy, ResponseKind::Stage, ResponseKind::Egg}) {
        const auto truth = preset(kind);
        auto init        = truth;
        init.alpha *= 1.2;
        init.p *= 1.2;
        init.k_L /= 1.2;
        const auto clean = logan_grid(truth);

        const auto fitted = logan10_from_fit(fit_logan10(clean, init, structure), truth);
        double sq         = 0.0;
        for (double T : clean.inputs) {
            sq += std::pow(logan_curve(T, fitted) - logan_curve(T, truth), 2);
        }
        worst_clean = std::max(worst_clean, std::sqrt(sq / clean.size()));

        std::vector<double> errors;
        for (int seed = 0; seed < kNoiseSeeds; ++seed) {
            std::mt19937_64 gen(seed);
            std::normal_distribution<double> noise(0.0, kNoise);
            DataSet d = clean;
            for (auto& y : d.observations) {
                y *= 1.0 + noise(gen);
            }
            const auto q = logan10_from_fit(fit_logan10(d, init, structure), truth);
            double e     = 0.0;
            for (double T : d.inputs) {
                e = std::max(e, std::abs(logan_curve(T, q) / logan_curve(T, truth) - 1.0));
            }
            errors.push_back(e);
        }
        const double q95 = p95(errors);
        worst_p95        = std::max(worst_p95, q95);
        out << to_string(kind) << " p95=" << q95 << "; ";
    }

    const auto truth = light_preset();
    const LightParams init{truth.a1 * 1.2, truth.a2 * 1.2};
    const auto clean  = light_grid(truth);
    const auto fitted = light_from_fit(fit_light(clean, init));
    double sq         = 0.0;
    for (double tau : clean.inputs) {
        sq += std::pow(light_curve(tau, fitted) - light_curve(tau, truth), 2);
    }
    worst_clean = std::max(worst_clean, std::sqrt(sq / clean.size()));
    std::vector<double> errors;
    for (int seed = 0; seed < kNoiseSeeds; ++seed) {
        std::mt19937_64 gen(1000 + seed);
        std::normal_distribution<double> noise(0.0, kNoise);
        DataSet d = clean;
        for (auto& y : d.observations) {
            y *= 1.0 + noise(gen);
        }
        const auto q = light_from_fit(fit_light(d, init));
        double e     = 0.0;
        for (double tau : d.inputs) {
            e = std::max(e, std::abs(light_curve(tau, q) / light_curve(tau, truth) - 1.0));
        }
        errors.push_back(e);
    }
    const double q95 = p95(errors);
    worst_p95        = std::max(worst_p95, q95);
    out << "light p95=" << q95 << "; worst noiseless rmse=" << worst_clean;
    ok = worst_clean < kNoiselessRmse && worst_p95 <= kNoisyCurveError;
}

void gradient_sanity(std::ostringstream& out, bool& ok)
{
    const auto p = calibrated();
    const OCPWeights w;
    SolveOptions o;
    std::mt19937_64 gen(303);
    // interior points so both stencils are available
    std::uniform_real_distribution<double> T(kTempMin + 1.0, kTempMax - 1.0);
    std::uniform_real_distribution<double> tau(kLightMin + 1.0, kLightMax - 1.0);
    double worst       = 0.0;
    double worst_first = 0.0;
    for (int s = 0; s < kGradientSchedules; ++s) {
        std::vector<double> z(2 * kHorizon);
        for (int d = 0; d < kHorizon; ++d) {
            z[d]            = T(gen);
            z[kHorizon + d] = tau(gen);
        }
        const double f0 = objective(z, p, w);
        const auto est  = objective_gradient(z, f0, p, w, o);
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double h = 0.5 * (i < static_cast<std::size_t>(kHorizon) ? o.h_T : o.h_tau);
            auto z1        = z;
            auto z2        = z;
            z1[i] += h;
            z2[i] += 2.0 * h;
            const double f1 = objective(z1, p, w);
            const double f2 = objective(z2, p, w);
            // same one-sided stencil the solver applies at the box bounds
            const double one_sided = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
            const double forward   = (f1 - f0) / h;
            const double g         = std::abs(est.gradient[i]);
            worst       = std::max(worst, std::abs(one_sided - est.gradient[i]) / g);
            worst_first = std::max(worst_first, std::abs(forward - est.gradient[i]) / g);
        }
    }
    ok = worst <= kGradientTol;
    out << kGradientSchedules << " schedules x " << 2 * kHorizon << " coordinates, worst relative gap " << worst
        << " (first-order forward difference: " << worst_first << ")";
}

void analytic_baseline(std::ostringstream& out, bool& ok)
{
    const auto p = calibrated();
    double worst = 0.0;
    for (double T_amb : {20.0, 10.0}) {
        OCPWeights w;
        w.Q          = 0.0;
        w.S          = 0.0;
        w.T_amb      = T_amb;
        const auto r = solve(p, w, ControlSchedule::benchmark(kHorizon));
        const double T_star = std::clamp(T_amb, kTempMin, kTempMax);
        for (int d = 0; d < kHorizon; ++d) {
            worst = std::max(worst, std::abs(r.schedule.temperatures()[d] - T_star));
            worst = std::max(worst, std::abs(r.schedule.photoperiods()[d] - kLightMin));
        }
    }
    ok = worst <= kBaselineTol;
    out << "T_amb in {20, 10}, worst coordinate deviation " << worst;
}

void pointwise_values(std::ostringstream& out, bool& ok)
{
    const double energy = logan10_rate(25.0, preset(ResponseKind::Energy));
    const double stage  = logan10_rate(25.0, preset(ResponseKind::Stage));
    const double egg    = logan10_rate(25.0, preset(ResponseKind::Egg));
    const double light  = light_rate(16.0, light_preset());
    ok = std::abs(energy - 0.9754) <= kPointTol && std::abs(stage - 5.5047) <= kPointTol &&
         std::abs(egg - 0.7899) <= kPointTol && std::abs(light - 1.8776) <= kPointTol;
    out.precision(8);
    out << "energy=" << energy << " stage=" << stage << " egg=" << egg << " light(16)=" << light;
}

} // namespace

int main()
{
    run(1, "benchmark reproduction", benchmark_reproduction);
    run(2, "optimization improvement", optimization_improvement);
    run(3, "homogeneity", homogeneity);
    run(4, "monotonicity", monotonicity);
    run(5, "integrator order", integrator_order);
    run(6, "curve-fit round trip", fit_round_trip);
    run(7, "gradient sanity", gradient_sanity);
    run(8, "analytic optimizer baseline", analytic_baseline);
    run(9, "pointwise response values", pointwise_values);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
