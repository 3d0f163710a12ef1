#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "flowseg/motion_model.hpp"
#include "flowseg/rng.hpp"
#include "flowseg/types.hpp"

namespace flowseg {

struct EmConfig {
    int k = 2;
    double alpha = 0.01;
    ModelKind kind = ModelKind::FullQuadratic;
    DistanceKind dist = DistanceKind::L1Norm;
    int max_iters = 100;
    double rel_tol = 1e-6;  // relative lower-bound change
    int n_inits = 1;
    std::uint64_t seed = 0;
    double init_scale = 0.5;  // model draws scale with this times the 90th-pct flow magnitude
};

struct EmResult {
    MotionModel model;
    SoftSegmentation seg;
    std::vector<double> ll_trace;
    int chosen_init = 0;
};

/// Per-layer, per-site model-to-flow distances, layer-major like SoftSegmentation.
struct ResidualGrid {
    int layers = 0;
    int width = 0;
    int height = 0;
    std::vector<double> values;

    ResidualGrid() = default;
    ResidualGrid(int k, int w, int h)
        : layers(k), width(w), height(h), values(static_cast<std::size_t>(k) * w * h, 0.0) {}

    int site_count() const { return width * height; }

    double& at(int k, int i) { return values[static_cast<std::size_t>(k) * site_count() + i]; }
    double at(int k, int i) const { return values[static_cast<std::size_t>(k) * site_count() + i]; }
};

/// delta(a, b) for the configured distance kind.
double distance(Vec2 a, Vec2 b, DistanceKind dist);

/// log of Z = integral over R^2 of exp(-delta(b, 0) / alpha) db.
/// Analytic: pi*alpha (SquaredL2), 2*pi*alpha^2 (L2Norm), 4*alpha^2 (L1Norm).
double log_z(DistanceKind dist, double alpha);

ResidualGrid residual_grid(const FlowField& f, const MotionModel& model, DistanceKind dist);

/// Posterior layer probabilities: softmax over k of -residual/alpha
/// (uniform prior and Z cancel), with max-subtraction.
SoftSegmentation e_step(const ResidualGrid& residuals, double alpha);

/// Jensen lower bound of the flow log-likelihood:
///   -( I*log(K*Z) + (1/alpha) * sum_ik m_ik * delta_ik + sum_ik m_ik * log m_ik ).
double lower_bound(const FlowField& f, const MotionModel& model, const SoftSegmentation& seg,
                   const EmConfig& cfg);

struct MStepResult {
    MotionModel model;
    std::vector<std::uint8_t> degenerate;  // layers whose fit was refused; theta kept
};

/// Per-layer weighted refit with weights seg.probs[k]. A layer with degenerate
/// weights keeps its row from `previous`. A refit that scores worse than the
/// previous row on the true weighted objective is discarded as well, so the
/// lower bound never decreases through this step.
MStepResult m_step(const FlowField& f, const SoftSegmentation& seg, const EmConfig& cfg,
                   const MotionModel& previous);

/// Random models: per-degree Gaussian draws scaled by cfg.init_scale times the
/// 90th-percentile flow magnitude (s, s/4, s/16 for constant/linear/quadratic).
MotionModel init_models(const EmConfig& cfg, const FlowField& f, Rng& rng);

/// Classical iterative EM with multi-initialization; returns the run whose
/// final lower bound is highest. Throws AllInitsFailed when every run hit a
/// singular system.
EmResult em_segment(const FlowField& f, const EmConfig& cfg);

/// Per-site argmax; ties break toward the lowest layer index.
LabelMap hard_assign(const SoftSegmentation& seg);

/// Uniform coefficient bounds for the random global quadratic motion,
/// in normalized-coordinate units.
struct AugmentRanges {
    double constant = 2.0;
    double linear = 0.5;
    double quadratic = 0.25;
};

struct Augmented {
    FlowField flow;
    Eigen::VectorXd theta_zeta;  // 12 quadratic parameters
};

/// Adds a random global quadratic field to the flow and returns it together
/// with the drawn parameters. The optimal lower bound for any fixed
/// segmentation is invariant to this perturbation.
Augmented augment(const FlowField& f, Rng& rng, const AugmentRanges& ranges = {});

}  // namespace flowseg
