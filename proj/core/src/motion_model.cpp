#include "flowseg/motion_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace flowseg {

std::string_view model_kind_name(ModelKind kind) {
    return kind == ModelKind::Affine ? "affine" : "quadratic";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "affine") return ModelKind::Affine;
    if (name == "quadratic") return ModelKind::FullQuadratic;
    throw Error("unknown model kind '" + std::string(name) + "' (expected affine|quadratic)");
}

std::string_view distance_kind_name(DistanceKind dist) {
    switch (dist) {
        case DistanceKind::SquaredL2: return "sql2";
        case DistanceKind::L2Norm: return "l2";
        case DistanceKind::L1Norm: return "l1";
    }
    return "?";
}

DistanceKind parse_distance_kind(std::string_view name) {
    if (name == "sql2") return DistanceKind::SquaredL2;
    if (name == "l2") return DistanceKind::L2Norm;
    if (name == "l1") return DistanceKind::L1Norm;
    throw Error("unknown distance kind '" + std::string(name) + "' (expected sql2|l2|l1)");
}

Eigen::VectorXd basis(int x, int y, ModelKind kind, GridDims grid) {
    const double nx = normalized_coord(x, grid.width);
    const double ny = normalized_coord(y, grid.height);
    Eigen::VectorXd c(basis_size(kind));
    c(0) = 1.0;
    c(1) = nx;
    c(2) = ny;
    if (kind == ModelKind::FullQuadratic) {
        c(3) = nx * nx;
        c(4) = nx * ny;
        c(5) = ny * ny;
    }
    return c;
}

Vec2 eval_model(const Eigen::VectorXd& theta_row, int x, int y, ModelKind kind, GridDims grid) {
    const int b = basis_size(kind);
    const Eigen::VectorXd c = basis(x, y, kind, grid);
    return {theta_row.head(b).dot(c), theta_row.segment(b, b).dot(c)};
}

FlowField render_model(const Eigen::VectorXd& theta_row, ModelKind kind, GridDims grid) {
    FlowField f(grid.width, grid.height);
    for (int y = 0; y < grid.height; ++y)
        for (int x = 0; x < grid.width; ++x) f.at(x, y) = eval_model(theta_row, x, y, kind, grid);
    return f;
}

namespace {

// Weighted normal equations for one scalar component: (sum w c c^T + ridge I) t = sum w rhs c.
// The basis matrix is accumulated in fixed site order so results are reproducible.
Eigen::VectorXd solve_component(const Eigen::MatrixXd& cs, std::span<const double> w,
                                std::span<const double> rhs, double ridge) {
    const auto b = cs.cols();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(b, b);
    Eigen::VectorXd target = Eigen::VectorXd::Zero(b);
    for (Eigen::Index i = 0; i < cs.rows(); ++i) {
        if (w[i] == 0.0) continue;
        gram.noalias() += w[i] * cs.row(i).transpose() * cs.row(i);
        target.noalias() += w[i] * rhs[i] * cs.row(i).transpose();
    }
    gram.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success)
        throw FitError(FitError::Kind::SingularSystem, "fit: factorization failed");
    Eigen::VectorXd t = ldlt.solve(target);
    if (!t.allFinite())
        throw FitError(FitError::Kind::SingularSystem, "fit: non-finite solution");
    return t;
}

struct Residuals {
    Eigen::VectorXd ru;  // per-site u residual
    Eigen::VectorXd rv;  // per-site v residual
};

Residuals residuals_of(const FlowField& f, const Eigen::MatrixXd& cs, const Eigen::VectorXd& theta) {
    const auto b = cs.cols();
    const auto n = cs.rows();
    Residuals r{Eigen::VectorXd(n), Eigen::VectorXd(n)};
    const Eigen::VectorXd pu = cs * theta.head(b);
    const Eigen::VectorXd pv = cs * theta.segment(b, b);
    for (Eigen::Index i = 0; i < n; ++i) {
        r.ru(i) = f.vectors[i].u - pu(i);
        r.rv(i) = f.vectors[i].v - pv(i);
    }
    return r;
}

// Kahan-compensated sum; keeps reductions stable and order-reproducible.
class CompensatedSum {
  public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

double smoothed_objective(const Residuals& r, std::span<const double> w, DistanceKind dist,
                          double eps) {
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < r.ru.size(); ++i) {
        if (w[i] == 0.0) continue;
        switch (dist) {
            case DistanceKind::SquaredL2:
                acc.add(w[i] * (r.ru(i) * r.ru(i) + r.rv(i) * r.rv(i)));
                break;
            case DistanceKind::L2Norm:
                acc.add(w[i] * smoothed_abs(std::hypot(r.ru(i), r.rv(i)), eps));
                break;
            case DistanceKind::L1Norm:
                acc.add(w[i] * (smoothed_abs(std::fabs(r.ru(i)), eps) +
                                smoothed_abs(std::fabs(r.rv(i)), eps)));
                break;
        }
    }
    return acc.value();
}

}  // namespace

FitResult fit_weighted(const FlowField& f, std::span<const double> weights, ModelKind kind,
                       DistanceKind dist, const FitOptions& opts) {
    const int n = f.site_count();
    if (static_cast<int>(weights.size()) != n)
        throw DimMismatch("fit_weighted: weight count does not match site count");

    double total_w = 0.0;
    for (double w : weights) total_w += w;
    const double floor =
        opts.min_total_weight >= 0.0
            ? opts.min_total_weight
            : std::min(10.0 * parameter_count(kind), static_cast<double>(n) / 10.0);
    if (total_w <= 0.0 || total_w < floor)
        throw FitError(FitError::Kind::DegenerateWeights,
                       "fit: effective site count " + std::to_string(total_w) + " below " +
                           std::to_string(floor));

    const int b = basis_size(kind);
    Eigen::MatrixXd cs(n, b);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x)
            cs.row(static_cast<Eigen::Index>(y) * f.width + x) =
                basis(x, y, kind, {f.width, f.height}).transpose();

    std::vector<double> u(n), v(n);
    for (int i = 0; i < n; ++i) {
        u[i] = f.vectors[i].u;
        v[i] = f.vectors[i].v;
    }

    auto plain_ls = [&](std::span<const double> wu, std::span<const double> wv) {
        Eigen::VectorXd theta(2 * b);
        theta.head(b) = solve_component(cs, wu, u, opts.ridge);
        theta.segment(b, b) = solve_component(cs, wv, v, opts.ridge);
        return theta;
    };

    FitResult result;
    if (dist == DistanceKind::SquaredL2) {
        result.theta = plain_ls(weights, weights);
        result.objective_trace.push_back(
            smoothed_objective(residuals_of(f, cs, result.theta), weights, dist, opts.irls_epsilon));
        return result;
    }

    // IRLS. Warm start from the caller's estimate when available, else from the
    // plain weighted least-squares solution.
    Eigen::VectorXd theta = opts.warm_start && opts.warm_start->size() == 2 * b
                                ? *opts.warm_start
                                : plain_ls(weights, weights);
    const double eps = opts.irls_epsilon;
    std::vector<double> wu(n), wv(n);
    result.objective_trace.push_back(
        smoothed_objective(residuals_of(f, cs, theta), weights, dist, eps));
    for (int it = 0; it < opts.irls_max_iters; ++it) {
        const Residuals r = residuals_of(f, cs, theta);
        if (dist == DistanceKind::L2Norm) {
            for (int i = 0; i < n; ++i) {
                const double rho = std::max(std::hypot(r.ru(i), r.rv(i)), eps);
                wu[i] = weights[i] / rho;
                wv[i] = wu[i];
            }
        } else {  // L1Norm: independent per-component reweighting
            for (int i = 0; i < n; ++i) {
                wu[i] = weights[i] / std::max(std::fabs(r.ru(i)), eps);
                wv[i] = weights[i] / std::max(std::fabs(r.rv(i)), eps);
            }
        }
        const Eigen::VectorXd next = plain_ls(wu, wv);
        const double change = (next - theta).norm();
        theta = next;
        result.irls_iters = it + 1;
        result.objective_trace.push_back(
            smoothed_objective(residuals_of(f, cs, theta), weights, dist, eps));
        if (change < opts.irls_rel_tol * (1.0 + theta.norm())) break;
    }
    result.theta = std::move(theta);
    return result;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string theta_to_csv(const MotionModel& model) {
    static constexpr const char* kCols[12] = {"u_1", "u_x",  "u_y",  "u_xx", "u_xy", "u_yy",
                                              "v_1", "v_x",  "v_y",  "v_xx", "v_xy", "v_yy"};
    const int p = parameter_count(model.kind);
    const int b = basis_size(model.kind);
    std::ostringstream out;
    out << "kind";
    for (int j = 0; j < p; ++j) {
        const int col = j < b ? j : 6 + (j - b);  // affine skips the quadratic columns
        out << ',' << kCols[col];
    }
    out << '\n';
    for (int k = 0; k < model.layer_count(); ++k) {
        out << model_kind_name(model.kind);
        for (int j = 0; j < p; ++j) out << ',' << format_double(model.theta(k, j));
        out << '\n';
    }
    return out.str();
}

MotionModel theta_from_csv(std::string_view csv) {
    std::istringstream in{std::string(csv)};
    std::string line;
    if (!std::getline(in, line)) throw Error("theta csv: empty input");

    std::vector<Eigen::VectorXd> rows;
    std::optional<ModelKind> kind;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        if (!std::getline(ls, cell, ',')) continue;
        const ModelKind row_kind = parse_model_kind(cell);
        if (kind && *kind != row_kind) throw Error("theta csv: mixed model kinds");
        kind = row_kind;
        Eigen::VectorXd row(parameter_count(row_kind));
        for (int j = 0; j < row.size(); ++j) {
            if (!std::getline(ls, cell, ',')) throw Error("theta csv: short row");
            row(j) = std::stod(cell);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || !kind) throw Error("theta csv: no parameter rows");
    MotionModel model(*kind, static_cast<int>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) model.theta.row(static_cast<int>(k)) = rows[k];
    return model;
}

}  // namespace flowseg
