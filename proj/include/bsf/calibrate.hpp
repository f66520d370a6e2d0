#pragma once

#include "bsf/env_response.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace bsf {

/// Tabular response data. Weights default to 1 when empty.
struct DataSet {
    std::vector<double> inputs;
    std::vector<double> observations;
    std::vector<double> weights;

    std::size_t size() const
    {
        return inputs.size();
    }
    double weight(std::size_t i) const
    {
        return weights.empty() ? 1.0 : weights[i];
    }
    /// Throws InvalidData on unequal lengths, non-finite entries or negative weights.
    void validate() const;
};

/// Reads CSV with header `x,y` or `x,y,w`.
DataSet read_dataset_csv(std::istream& is);

enum class FitStatus { Converged, MaxIterations, SingularJacobian };

std::string_view to_string(FitStatus status);

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> params;
    double rmse    = 0.0;
    int iterations = 0;
    bool converged = false;
    FitStatus status = FitStatus::MaxIterations;
    /// Objective after each accepted step, starting with the initial point.
    std::vector<double> objective_history;
};

nlohmann::json to_json(const FitResult& r);

struct FitOptions {
    int max_iterations    = 200;
    double tolerance      = 1e-10; ///< relative objective decrease that ends the iteration
    double initial_lambda = 1e-3;
    double max_lambda     = 1e12;
};

/// Structural Logan-10 fields that can be held at their initial values.
struct Logan10Fixed {
    bool T_let = false;
    bool T_R   = false;
    bool dT    = false;
};

/// Residual model for the generic solver: fills predictions and the dense Jacobian (row-major, n x p)
/// for a parameter vector, or returns false if the vector is not admissible.
using ModelFunction =
    std::function<bool(const std::vector<double>& params, std::vector<double>& predictions, std::vector<double>& jacobian)>;

/// Damped Gauss-Newton (Levenberg-Marquardt) on sum_i w_i (f_i(params) - y_i)^2.
/// Lambda is multiplied by 10 on a rejected step and divided by 10 on an accepted one.
FitResult levenberg_marquardt(const ModelFunction& model, const std::vector<double>& observations,
                              const std::vector<double>& weights, std::vector<double> init,
                              const FitOptions& options = {});

/// Fits alpha, k_L, p and every structural field that is not fixed.
/// Result names follow the JSON keys: alpha, kL, p, Tlet, TR, dT.
FitResult fit_logan10(const DataSet& data, const Logan10Params& init, const Logan10Fixed& fixed = {},
                      const FitOptions& options = {});

/// Fits a1 and a2 of the saturating photoperiod curve.
FitResult fit_light(const DataSet& data, const LightParams& init, const FitOptions& options = {});

/// Rebuilds full curve parameters from a fit (fixed fields come from `init`).
Logan10Params logan10_from_fit(const FitResult& r, const Logan10Params& init);
LightParams light_from_fit(const FitResult& r);

} // namespace bsf
