#include "bsf/simulate.hpp"

#include "bsf/error.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace bsf {

ControlSchedule::ControlSchedule(std::vector<double> T, std::vector<double> tau)
    : T_(std::move(T))
    , tau_(std::move(tau))
{
    if (T_.empty()) {
        throw Error(ErrorCode::InvalidSchedule, "schedule needs at least one day");
    }
    if (T_.size() != tau_.size()) {
        throw Error(ErrorCode::InvalidSchedule, "temperature and photoperiod lengths differ");
    }
    for (std::size_t d = 0; d < T_.size(); ++d) {
        if (!in_box({T_[d], tau_[d]})) {
            std::ostringstream msg;
            msg << "day " << d + 1 << " (T=" << T_[d] << ", tau=" << tau_[d] << ") outside [" << kTempMin << ", "
                << kTempMax << "] x [" << kLightMin << ", " << kLightMax << "]";
            throw Error(ErrorCode::ScheduleOutOfBox, msg.str());
        }
    }
}

ControlSchedule ControlSchedule::constant(int days, double T, double tau)
{
    if (days < 1) {
        throw Error(ErrorCode::InvalidSchedule, "horizon must be at least one day");
    }
    return ControlSchedule(std::vector<double>(days, T), std::vector<double>(days, tau));
}

ControlSchedule ControlSchedule::benchmark(int days)
{
    return constant(days, 25.0, 16.0);
}

std::vector<double> ControlSchedule::to_vector() const
{
    std::vector<double> z(T_);
    z.insert(z.end(), tau_.begin(), tau_.end());
    return z;
}

ControlSchedule ControlSchedule::from_vector(const std::vector<double>& z)
{
    if (z.size() % 2 != 0) {
        throw Error(ErrorCode::InvalidSchedule, "decision vector must have even length");
    }
    const auto half = static_cast<std::ptrdiff_t>(z.size() / 2);
    return ControlSchedule(std::vector<double>(z.begin(), z.begin() + half),
                           std::vector<double>(z.begin() + half, z.end()));
}

namespace {

using StateArray = std::array<double, kNumStates>;

int steps_per_day(double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw Error(ErrorCode::InvalidStep, "step size must be positive");
    }
    if (dt > kMaxStep) {
        throw Error(ErrorCode::StepTooLarge, "step " + std::to_string(dt) + " exceeds 0.1 day");
    }
    const double n = 1.0 / dt;
    const double rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-9 * rounded) {
        throw Error(ErrorCode::InvalidStep, "step " + std::to_string(dt) + " does not divide one day");
    }
    return static_cast<int>(rounded);
}

StateArray derivative(const StateArray& x, const ControlInput& u, const ModelParams& params)
{
    return rhs(PopulationState::from_array(x), u, params).to_array();
}

StateArray axpy(const StateArray& x, double a, const StateArray& k)
{
    StateArray out;
    for (std::size_t i = 0; i < kNumStates; ++i) {
        out[i] = x[i] + a * k[i];
    }
    return out;
}

void rk4_step(StateArray& x, const ControlInput& u, const ModelParams& params, double dt)
{
    const StateArray k1 = derivative(x, u, params);
    const StateArray k2 = derivative(axpy(x, 0.5 * dt, k1), u, params);
    const StateArray k3 = derivative(axpy(x, 0.5 * dt, k2), u, params);
    const StateArray k4 = derivative(axpy(x, dt, k3), u, params);
    for (std::size_t i = 0; i < kNumStates; ++i) {
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

constexpr std::size_t kEnergyFemale = 8;
constexpr std::size_t kEnergyMale   = 9;

void check_and_clamp(StateArray& x, double t, bool is_initial)
{
    for (std::size_t i = 0; i < kNumStates; ++i) {
        double& v = x[i];
        if (std::isnan(v) || std::abs(v) > kBlowupThreshold) {
            throw Error(ErrorCode::NumericalBlowup,
                        std::string(kStateNames[i]) + " diverged at t=" + std::to_string(t));
        }
        // energy pools run dry in finite time; the step that crosses zero lands on the floor
        const bool pool = i == kEnergyFemale || i == kEnergyMale;
        if (v < -kClampTolerance && !(pool && !is_initial)) {
            throw Error(ErrorCode::NegativeState, std::string(kStateNames[i]) + " = " + std::to_string(v) +
                                                      " at t=" + std::to_string(t) + "; reduce dt");
        }
        if (v < 0.0) {
            v = 0.0;
        }
    }
}

/// Drives the step loop; calls `on_step(step, steps_per_day, state)` for the initial state and after every step.
template <class OnStep>
void advance(const PopulationState& initial, const ControlSchedule& schedule, const ModelParams& params, double dt,
             OnStep&& on_step)
{
    const int n = steps_per_day(dt);
    if (schedule.days() < 1) {
        throw Error(ErrorCode::InvalidSchedule, "schedule is empty");
    }
    params.validate();
    StateArray x = initial.to_array();
    check_and_clamp(x, 0.0, true);
    on_step(0L, n, x);
    const double h = 1.0 / n;
    long step = 0;
    for (int day = 0; day < schedule.days(); ++day) {
        const ControlInput u = schedule.at_day(day);
        for (int i = 0; i < n; ++i) {
            rk4_step(x, u, params, h);
            ++step;
            check_and_clamp(x, static_cast<double>(step) / n, false);
            on_step(step, n, x);
        }
    }
}

} // namespace

Trajectory integrate(const PopulationState& initial, const ControlSchedule& schedule, const ModelParams& params,
                     double dt)
{
    Trajectory traj;
    traj.schedule = schedule;
    const auto total = static_cast<std::size_t>(schedule.days()) * static_cast<std::size_t>(std::round(1.0 / dt)) + 1;
    traj.times.reserve(total);
    traj.states.reserve(total);
    advance(initial, schedule, params, dt, [&](long step, int n, const StateArray& x) {
        traj.times.push_back(static_cast<double>(step) / n);
        traj.states.push_back(PopulationState::from_array(x));
    });
    return traj;
}

std::vector<PopulationState> integrate_daily(const PopulationState& initial, const ControlSchedule& schedule,
                                             const ModelParams& params, double dt)
{
    std::vector<PopulationState> out;
    out.reserve(schedule.days());
    advance(initial, schedule, params, dt, [&](long step, int n, const StateArray& x) {
        if (step > 0 && step % n == 0) {
            out.push_back(PopulationState::from_array(x));
        }
    });
    return out;
}

Metrics metrics(const Trajectory& traj, const ModelParams& params)
{
    if (traj.states.empty()) {
        throw Error(ErrorCode::InvalidData, "trajectory is empty");
    }
    Metrics m;
    for (double T : traj.schedule.temperatures()) {
        m.sum_T += T;
    }
    for (double tau : traj.schedule.photoperiods()) {
        m.sum_tau += tau;
    }
    const double threshold = 0.2 * params.N_f0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        if (traj.states[i].N_f_y < threshold) {
            // round away float noise sitting just above an integer day
            m.t_Nfy20 = static_cast<int>(std::ceil(traj.times[i] - 1e-9));
            break;
        }
    }
    m.m_e_final = traj.states.back().m_e;
    return m;
}

std::optional<double> time_to_mass(const Trajectory& traj, double mass)
{
    if (traj.states.empty()) {
        return std::nullopt;
    }
    if (traj.states.front().m_e >= mass) {
        return traj.times.front();
    }
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        const double hi = traj.states[i].m_e;
        if (hi >= mass) {
            const double lo = traj.states[i - 1].m_e;
            const double w  = hi > lo ? (mass - lo) / (hi - lo) : 1.0;
            return traj.times[i - 1] + w * (traj.times[i] - traj.times[i - 1]);
        }
    }
    return std::nullopt;
}

double calibrate_scale(double target_final_mass, const ControlSchedule& reference_schedule, ModelParams params,
                       double dt)
{
    if (!(target_final_mass > 0.0)) {
        throw Error(ErrorCode::InvalidParameters, "target egg mass must be positive");
    }
    params.set_initial_population(1.0, 1.0);
    const auto daily = integrate_daily(initial_state(params), reference_schedule, params, dt);
    const double unit_mass = daily.back().m_e;
    if (!(unit_mass > 0.0)) {
        throw Error(ErrorCode::DegenerateRun, "reference schedule produces no eggs");
    }
    return target_final_mass / unit_mass;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj)
{
    os << "t";
    for (auto name : kStateNames) {
        os << ',' << name;
    }
    os << '\n';
    const auto flags = os.flags();
    const auto prec  = os.precision();
    os << std::setprecision(17);
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        os << traj.times[i];
        for (double v : traj.states[i].to_array()) {
            os << ',' << v;
        }
        os << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

void write_schedule_csv(std::ostream& os, const ControlSchedule& schedule)
{
    os << "day,T_degC,tau_h\n";
    const auto prec = os.precision();
    os << std::setprecision(17);
    for (int d = 0; d < schedule.days(); ++d) {
        os << d + 1 << ',' << schedule.temperatures()[d] << ',' << schedule.photoperiods()[d] << '\n';
    }
    os.precision(prec);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_number(const std::string& s, int line_no)
{
    std::size_t used = 0;
    double v         = 0.0;
    try {
        v = std::stod(s, &used);
    }
    catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidData, "line " + std::to_string(line_no) + ": '" + s + "' is not a number");
    }
    return v;
}

} // namespace

ControlSchedule read_schedule_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) {
        throw Error(ErrorCode::InvalidData, "schedule CSV is empty");
    }
    const auto header = split_csv_line(line);
    if (header != std::vector<std::string>{"day", "T_degC", "tau_h"}) {
        throw Error(ErrorCode::InvalidData, "schedule CSV header must be 'day,T_degC,tau_h'");
    }
    std::vector<double> T;
    std::vector<double> tau;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 3) {
            throw Error(ErrorCode::InvalidData, "line " + std::to_string(line_no) + ": expected 3 fields");
        }
        const double day = parse_number(f[0], line_no);
        if (day != static_cast<double>(T.size() + 1)) {
            throw Error(ErrorCode::InvalidData, "line " + std::to_string(line_no) + ": days must run 1, 2, ...");
        }
        T.push_back(parse_number(f[1], line_no));
        tau.push_back(parse_number(f[2], line_no));
    }
    return ControlSchedule(std::move(T), std::move(tau));
}

nlohmann::json to_json(const Metrics& m)
{
    nlohmann::json j;
    j["sumT_degCd"]   = m.sum_T;
    j["sumTau_h"]     = m.sum_tau;
    j["tNfy20_d"]     = m.t_Nfy20 ? nlohmann::json(*m.t_Nfy20) : nlohmann::json(nullptr);
    j["mEggFinal_mg"] = m.m_e_final;
    return j;
}

nlohmann::json to_json(const ControlSchedule& s)
{
    return {{"T", s.temperatures()}, {"tau", s.photoperiods()}};
}

} // namespace bsf
