#include "bsf/calibrate.hpp"

#include "bsf/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <istream>
#include <sstream>

namespace bsf {

void DataSet::validate() const
{
    if (inputs.size() != observations.size()) {
        throw Error(ErrorCode::InvalidData, "inputs and observations differ in length");
    }
    if (!weights.empty() && weights.size() != inputs.size()) {
        throw Error(ErrorCode::InvalidData, "weights length differs from data length");
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!std::isfinite(inputs[i]) || !std::isfinite(observations[i])) {
            throw Error(ErrorCode::InvalidData, "row " + std::to_string(i + 1) + " is not finite");
        }
        if (!(weight(i) >= 0.0) || !std::isfinite(weight(i))) {
            throw Error(ErrorCode::InvalidData, "row " + std::to_string(i + 1) + " has a negative weight");
        }
    }
}

namespace {

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string f;
    std::istringstream ss(line);
    while (std::getline(ss, f, ',')) {
        const auto b = f.find_first_not_of(" \t\r");
        const auto e = f.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : f.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double to_number(const std::string& s, int line_no)
{
    std::size_t used = 0;
    double v         = 0.0;
    try {
        v = std::stod(s, &used);
    }
    catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) {
        throw Error(ErrorCode::InvalidData, "line " + std::to_string(line_no) + ": '" + s + "' is not a number");
    }
    return v;
}

} // namespace

DataSet read_dataset_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) {
        throw Error(ErrorCode::InvalidData, "data CSV is empty");
    }
    const auto header = split_fields(line);
    const bool weighted = header == std::vector<std::string>{"x", "y", "w"};
    if (!weighted && header != std::vector<std::string>{"x", "y"}) {
        throw Error(ErrorCode::InvalidData, "data CSV header must be 'x,y' or 'x,y,w'");
    }
    DataSet data;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto f = split_fields(line);
        if (f.size() != header.size()) {
            throw Error(ErrorCode::InvalidData,
                        "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) + " fields");
        }
        data.inputs.push_back(to_number(f[0], line_no));
        data.observations.push_back(to_number(f[1], line_no));
        if (weighted) {
            data.weights.push_back(to_number(f[2], line_no));
        }
    }
    if (data.size() == 0) {
        throw Error(ErrorCode::InvalidData, "data CSV has no rows");
    }
    data.validate();
    return data;
}

std::string_view to_string(FitStatus status)
{
    switch (status) {
    case FitStatus::Converged:
        return "converged";
    case FitStatus::MaxIterations:
        return "MaxIterations";
    case FitStatus::SingularJacobian:
        return "SingularJacobian";
    }
    return "unknown";
}

nlohmann::json to_json(const FitResult& r)
{
    nlohmann::json params = nlohmann::json::object();
    for (std::size_t i = 0; i < r.params.size(); ++i) {
        params[r.names[i]] = r.params[i];
    }
    return {{"params", params},        {"rmse", r.rmse},
            {"iterations", r.iterations}, {"converged", r.converged},
            {"status", std::string(to_string(r.status))}, {"history", r.objective_history}};
}

FitResult levenberg_marquardt(const ModelFunction& model, const std::vector<double>& observations,
                              const std::vector<double>& weights, std::vector<double> init,
                              const FitOptions& options)
{
    const auto n = static_cast<Eigen::Index>(observations.size());
    const auto p = static_cast<Eigen::Index>(init.size());

    FitResult result;
    result.params = init;

    std::vector<double> pred;
    std::vector<double> jac;
    Eigen::VectorXd sqrt_w(n);
    double weighted_scale = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        sqrt_w[i] = std::sqrt(weights.empty() ? 1.0 : weights[i]);
        weighted_scale += sqrt_w[i] * sqrt_w[i] * observations[i] * observations[i];
    }

    auto evaluate = [&](const std::vector<double>& x, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
        pred.assign(n, 0.0);
        jac.assign(n * p, 0.0);
        if (!model(x, pred, jac)) {
            return false;
        }
        r.resize(n);
        J.resize(n, p);
        for (Eigen::Index i = 0; i < n; ++i) {
            r[i] = sqrt_w[i] * (pred[i] - observations[i]);
            for (Eigen::Index k = 0; k < p; ++k) {
                J(i, k) = sqrt_w[i] * jac[i * p + k];
            }
        }
        return r.allFinite() && J.allFinite();
    };

    auto finish = [&](FitStatus status) {
        result.status    = status;
        result.converged = status == FitStatus::Converged;
        double sq        = 0.0;
        pred.assign(n, 0.0);
        jac.assign(n * p, 0.0);
        if (n > 0 && model(result.params, pred, jac)) {
            for (Eigen::Index i = 0; i < n; ++i) {
                sq += (pred[i] - observations[i]) * (pred[i] - observations[i]);
            }
            result.rmse = std::sqrt(sq / static_cast<double>(n));
        }
        else {
            result.rmse = std::numeric_limits<double>::quiet_NaN();
        }
        return result;
    };

    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    if (!evaluate(init, r, J)) {
        throw Error(ErrorCode::InvalidParameters, "initial parameters are not admissible for the data");
    }
    if (n < p) {
        // fewer points than parameters cannot pin the curve down
        return finish(FitStatus::SingularJacobian);
    }

    double f      = r.squaredNorm();
    double lambda = options.initial_lambda;
    result.objective_history.push_back(f);
    const double floor = 1e-30 * std::max(weighted_scale, std::numeric_limits<double>::min());

    Eigen::VectorXd r_new;
    Eigen::MatrixXd J_new;
    std::vector<double> candidate(init.size());
    while (result.iterations < options.max_iterations) {
        if (f <= floor) {
            return finish(FitStatus::Converged);
        }
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        const double diag_max   = A.diagonal().maxCoeff();
        if (!(diag_max > 0.0)) {
            return finish(FitStatus::SingularJacobian);
        }
        ++result.iterations;

        Eigen::MatrixXd damped = A;
        for (Eigen::Index k = 0; k < p; ++k) {
            damped(k, k) += lambda * std::max(A(k, k), 1e-12 * diag_max);
        }
        const Eigen::VectorXd step = damped.ldlt().solve(-g);

        bool accepted = false;
        if (step.allFinite()) {
            for (Eigen::Index k = 0; k < p; ++k) {
                candidate[k] = result.params[k] + step[k];
            }
            if (evaluate(candidate, r_new, J_new)) {
                const double f_new = r_new.squaredNorm();
                if (f_new < f) {
                    accepted              = true;
                    const double decrease = (f - f_new) / f;
                    result.params         = candidate;
                    f                     = f_new;
                    r                     = r_new;
                    J                     = J_new;
                    lambda                = std::max(lambda / 10.0, 1e-15);
                    result.objective_history.push_back(f);
                    if (decrease < options.tolerance) {
                        return finish(FitStatus::Converged);
                    }
                }
            }
        }
        if (!accepted) {
            lambda *= 10.0;
            if (lambda > options.max_lambda) {
                // no progress possible; a vanishing gradient means we already sit at the minimum
                const double g_rel = g.norm() / std::sqrt(std::max(f, floor) * diag_max);
                return finish(g_rel < 1e-8 ? FitStatus::Converged : FitStatus::SingularJacobian);
            }
        }
    }
    return finish(FitStatus::MaxIterations);
}

namespace {

enum LoganIndex { kAlpha, kKL, kP, kTlet, kTR, kDT };
constexpr const char* kLoganNames[] = {"alpha", "kL", "p", "Tlet", "TR", "dT"};

std::vector<int> free_logan_indices(const Logan10Fixed& fixed)
{
    std::vector<int> idx = {kAlpha, kKL, kP};
    if (!fixed.T_let) {
        idx.push_back(kTlet);
    }
    if (!fixed.T_R) {
        idx.push_back(kTR);
    }
    if (!fixed.dT) {
        idx.push_back(kDT);
    }
    return idx;
}

std::array<double, 6> logan_array(const Logan10Params& q)
{
    return {q.alpha, q.k_L, q.p, q.T_let, q.T_R, q.dT};
}

Logan10Params logan_from_array(const std::array<double, 6>& a)
{
    return {a[kAlpha], a[kKL], a[kP], a[kTlet], a[kTR], a[kDT]};
}

} // namespace

FitResult fit_logan10(const DataSet& data, const Logan10Params& init, const Logan10Fixed& fixed,
                      const FitOptions& options)
{
    data.validate();
    validate(init);
    const std::vector<int> free = free_logan_indices(fixed);
    const std::array<double, 6> base = logan_array(init);

    auto expand = [&](const std::vector<double>& x) {
        std::array<double, 6> full = base;
        for (std::size_t k = 0; k < free.size(); ++k) {
            full[free[k]] = x[k];
        }
        return full;
    };

    ModelFunction model = [&](const std::vector<double>& x, std::vector<double>& pred, std::vector<double>& jac) {
        const auto a = expand(x);
        if (!(a[kDT] > 0.0)) {
            return false;
        }
        const std::size_t p = free.size();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double T     = data.inputs[i];
            const double e1    = std::exp(-a[kP] * (T - a[kTR]));
            const double e2    = std::exp(-(a[kTlet] - T) / a[kDT]);
            const double denom = 1.0 + a[kKL] * e1 + e2;
            if (!(std::abs(denom) >= kDenominatorGuard)) {
                return false;
            }
            const double c = a[kAlpha] / (denom * denom);
            std::array<double, 6> d{};
            d[kAlpha] = 1.0 / denom;
            d[kKL]    = -c * e1;
            d[kP]     = c * a[kKL] * e1 * (T - a[kTR]);
            d[kTR]    = -c * a[kKL] * e1 * a[kP];
            d[kTlet]  = c * e2 / a[kDT];
            d[kDT]    = -c * e2 * (a[kTlet] - T) / (a[kDT] * a[kDT]);
            pred[i]   = a[kAlpha] / denom;
            for (std::size_t k = 0; k < p; ++k) {
                jac[i * p + k] = d[free[k]];
            }
        }
        return true;
    };

    std::vector<double> x0;
    for (int k : free) {
        x0.push_back(base[k]);
    }
    FitResult r = levenberg_marquardt(model, data.observations, data.weights, x0, options);
    for (int k : free) {
        r.names.emplace_back(kLoganNames[k]);
    }
    return r;
}

FitResult fit_light(const DataSet& data, const LightParams& init, const FitOptions& options)
{
    data.validate();
    validate(init);
    ModelFunction model = [&](const std::vector<double>& x, std::vector<double>& pred, std::vector<double>& jac) {
        const double a1 = x[0];
        const double a2 = x[1];
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double tau = data.inputs[i];
            const double e   = std::exp(-a2 * tau);
            pred[i]          = -a1 * std::expm1(-a2 * tau);
            jac[i * 2]       = -std::expm1(-a2 * tau);
            jac[i * 2 + 1]   = a1 * tau * e;
        }
        return true;
    };
    FitResult r = levenberg_marquardt(model, data.observations, data.weights, {init.a1, init.a2}, options);
    r.names     = {"a1", "a2"};
    return r;
}

Logan10Params logan10_from_fit(const FitResult& r, const Logan10Params& init)
{
    std::array<double, 6> a = logan_array(init);
    for (std::size_t k = 0; k < r.names.size(); ++k) {
        for (int j = 0; j < 6; ++j) {
            if (r.names[k] == kLoganNames[j]) {
                a[j] = r.params[k];
            }
        }
    }
    return logan_from_array(a);
}

LightParams light_from_fit(const FitResult& r)
{
    return {r.params.at(0), r.params.at(1)};
}

} // namespace bsf
