#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowseg/errors.hpp"
#include "flowseg/types.hpp"

namespace flowseg {

enum class ModelKind { Affine, FullQuadratic };

/// Length of a full parameter row (u and v coefficients together).
constexpr int parameter_count(ModelKind kind) { return kind == ModelKind::Affine ? 6 : 12; }

/// Number of polynomial basis terms shared by the u and v components.
constexpr int basis_size(ModelKind kind) { return parameter_count(kind) / 2; }

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

enum class DistanceKind { SquaredL2, L2Norm, L1Norm };

std::string_view distance_kind_name(DistanceKind dist);
DistanceKind parse_distance_kind(std::string_view name);

struct GridDims {
    int width = 0;
    int height = 0;
};

/// Pixel coordinates normalized per axis to [-1, 1] (0 for a 1-wide axis).
inline double normalized_coord(int p, int extent) {
    return extent > 1 ? 2.0 * p / (extent - 1) - 1.0 : 0.0;
}

/// Polynomial expansion of a site's normalized coordinates:
/// [1, x, y] for affine, [1, x, y, x^2, xy, y^2] for quadratic.
Eigen::VectorXd basis(int x, int y, ModelKind kind, GridDims grid);

/// Flow vector of one motion layer at one site.
Vec2 eval_model(const Eigen::VectorXd& theta_row, int x, int y, ModelKind kind, GridDims grid);

/// The full parametric flow field of one layer.
FlowField render_model(const Eigen::VectorXd& theta_row, ModelKind kind, GridDims grid);

/// K motion layers, one parameter row each (u coefficients then v coefficients,
/// in normalized-coordinate units).
struct MotionModel {
    ModelKind kind = ModelKind::FullQuadratic;
    Eigen::MatrixXd theta;  // K x parameter_count(kind)

    MotionModel() = default;
    MotionModel(ModelKind k, int layers)
        : kind(k), theta(Eigen::MatrixXd::Zero(layers, parameter_count(k))) {}

    int layer_count() const { return static_cast<int>(theta.rows()); }
};

struct FitOptions {
    double ridge = 1e-9;          // Tikhonov term on the weighted Gram diagonal
    double irls_epsilon = 1e-6;   // residual floor in the robust reweighting
    int irls_max_iters = 50;
    double irls_rel_tol = 1e-8;   // relative parameter-change stop rule
    // Below this effective site count the fit is refused with DegenerateWeights.
    // Negative means the default min(10 * parameter_count, site_count / 10).
    double min_total_weight = -1.0;
    // Optional warm start (e.g. the previous EM iterate); ignored for SquaredL2,
    // where the minimizer is computed directly.
    std::optional<Eigen::VectorXd> warm_start;
};

struct FitResult {
    Eigen::VectorXd theta;
    int irls_iters = 0;
    // epsilon-smoothed robust objective at the initial point and after each
    // IRLS update; single entry for SquaredL2.
    std::vector<double> objective_trace;
};

/// argmin_theta sum_i w_i * delta(f_i, theta^T c(i)).
///
/// SquaredL2 solves the weighted normal equations exactly; L2Norm and L1Norm
/// run IRLS with residual-floor eps (see FitOptions). Throws FitError with
/// kind DegenerateWeights or SingularSystem.
FitResult fit_weighted(const FlowField& f, std::span<const double> weights, ModelKind kind,
                       DistanceKind dist, const FitOptions& opts = {});

/// Huber-style smoothing of |r| matched to the IRLS clamp: r for r > eps,
/// (r^2 + eps^2) / (2 eps) otherwise. The IRLS iteration decreases the sum of
/// these terms monotonically.
inline double smoothed_abs(double r, double eps) {
    return r > eps ? r : (r * r + eps * eps) / (2.0 * eps);
}

/// CSV serialization: header row names the coefficient columns, one data row
/// per layer with the kind tag in the first column.
std::string theta_to_csv(const MotionModel& model);
MotionModel theta_from_csv(std::string_view csv);

}  // namespace flowseg
