#include "sbpsat/interp_forge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "sbpsat/errors.hpp"
#include "sbpsat/triplet_io.hpp"

namespace sbpsat {

namespace {

constexpr double kFeasibleTol = 1e-10;
// Feasible stencils with larger entries are kept only when no later shape in
// the escalation does better; tiny blocks can be exact yet badly scaled.
constexpr double kCoefficientBound = 4.0;
constexpr double kRankTol = 1e-11;

struct Interval {
    double lo;
    double hi;
};

Interval span(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return {std::min(a(0), b(0)), std::max(a(a.size() - 1), b(b.size() - 1))};
}

// Chebyshev polynomials T_0..T_{q-1} of the coordinate mapped to [-1, 1].
Eigen::MatrixXd chebyshev_basis(const Eigen::VectorXd& x, int q, Interval iv)
{
    const Eigen::ArrayXd t = (2.0 * x.array() - iv.lo - iv.hi) / (iv.hi - iv.lo);
    Eigen::MatrixXd basis(x.size(), std::max(q, 0));
    for (int j = 0; j < q; ++j) {
        if (j == 0)
            basis.col(j).setOnes();
        else if (j == 1)
            basis.col(j) = t.matrix();
        else
            basis.col(j) = (2.0 * t * basis.col(j - 1).array() - basis.col(j - 2).array()).matrix();
    }
    return basis;
}

struct Shape {
    StencilAnsatz::Kind kind = StencilAnsatz::Kind::banded;
    int block_rows = 0;
    int block_cols = 0;
    int interior_width = 0;
};

// Each unknown is one coefficient placed at one or more (row, col) positions;
// the repeating interior stencil shares one unknown per phase and offset.
struct Layout {
    bool fits = false;
    int n_to = 0;
    int n_from = 0;
    std::vector<std::vector<std::pair<int, int>>> positions;
    int boundary_rows = 0;
    std::vector<bool> row_interior;
    std::vector<bool> col_interior;
};

int nesting_ratio(const InterfaceQuadrature& hu, const InterfaceQuadrature& hv)
{
    const int n_from = hu.size();
    const int n_to = hv.size();
    if ((n_to - 1) % (n_from - 1) != 0) return 0;
    const int ratio = (n_to - 1) / (n_from - 1);
    const double scale = hv.points(n_to - 1) - hv.points(0);
    for (int c = 0; c < n_from; ++c)
        if (std::abs(hu.points(c) - hv.points(c * ratio)) > 1e-12 * scale) return 0;
    return ratio;
}

Layout make_layout(const InterfaceQuadrature& hu, const InterfaceQuadrature& hv, const Shape& shape)
{
    Layout layout;
    layout.n_from = hu.size();
    layout.n_to = hv.size();
    const int n_from = layout.n_from;
    const int n_to = layout.n_to;
    layout.row_interior.assign(n_to, false);
    layout.col_interior.assign(n_from, false);
    if (shape.kind == StencilAnsatz::Kind::dense) {
        for (int r = 0; r < n_to; ++r)
            for (int c = 0; c < n_from; ++c) layout.positions.push_back({{r, c}});
        layout.boundary_rows = (n_to + 1) / 2;
        layout.fits = true;
        return layout;
    }
    const int ratio = nesting_ratio(hu, hv);
    if (ratio == 0) throw ConfigError("the banded ansatz needs nested interface grids with an integer ratio");
    const int m = shape.block_rows;
    const int nb = shape.block_cols;
    const int half = shape.interior_width / 2;
    if (2 * m > n_to || nb > n_from) return layout;

    for (int r = 0; r < m; ++r)
        for (int c = 0; c < nb; ++c) {
            layout.positions.push_back({{r, c}});
            layout.positions.push_back({{n_to - 1 - r, n_from - 1 - c}});
        }
    std::map<std::pair<int, int>, std::size_t> shared;
    std::vector<bool> touched(n_from, false);
    for (int c = 0; c < nb; ++c) {
        touched[c] = true;
        touched[n_from - 1 - c] = true;
    }
    for (int r = m; r < n_to - m; ++r) {
        const int anchor = r / ratio;
        const int phase = r % ratio;
        const int first = phase == 0 ? -half : -half + 1;
        for (int k = first; k <= half; ++k) {
            const int c = anchor + k;
            if (c < 0 || c >= n_from) return layout;
            const auto key = std::make_pair(phase, k);
            auto it = shared.find(key);
            if (it == shared.end()) {
                it = shared.emplace(key, layout.positions.size()).first;
                layout.positions.emplace_back();
            }
            layout.positions[it->second].emplace_back(r, c);
        }
        layout.row_interior[r] = true;
    }
    for (int c = 0; c < n_from; ++c) layout.col_interior[c] = !touched[c];
    layout.boundary_rows = m;
    layout.fits = true;
    return layout;
}

struct Solution {
    bool feasible = false;
    double residual = std::numeric_limits<double>::infinity();
    SpMat matrix;
    int free_parameters = 0;
    double objective_before = 0.0;
    double objective_after = 0.0;
};

SpMat assemble_matrix(const Layout& layout, const Eigen::VectorXd& theta)
{
    std::vector<Eigen::Triplet<double>> entries;
    for (std::size_t k = 0; k < layout.positions.size(); ++k)
        if (theta(static_cast<Eigen::Index>(k)) != 0.0)
            for (const auto& [r, c] : layout.positions[k])
                entries.emplace_back(r, c, theta(static_cast<Eigen::Index>(k)));
    SpMat out(layout.n_to, layout.n_from);
    out.setFromTriplets(entries.begin(), entries.end());
    return out;
}

// Accuracy conditions on I_u2v:
//   rows:    I X_u = X_v              degrees < q_u2v (< max(q_u2v, q_interior) on interior rows)
//   columns: I^T H_v X_v = H_u X_u    degrees < q_v2u (likewise), scaled by 1/H_u
Solution solve_layout(const InterfaceQuadrature& hu, const InterfaceQuadrature& hv, int q_u2v, int q_v2u,
                      int q_interior, const Layout& layout, bool optimize)
{
    Solution sol;
    if (!layout.fits) return sol;
    const int n_from = hu.size();
    const int n_to = hv.size();
    const int nunk = static_cast<int>(layout.positions.size());
    const Interval iv = span(hu.points, hv.points);
    const int row_deg_interior = std::max(q_u2v, q_interior);
    const int col_deg_interior = std::max(q_v2u, q_interior);
    const int q = std::max(row_deg_interior, col_deg_interior);
    const Eigen::MatrixXd pu = chebyshev_basis(hu.points, q, iv);
    const Eigen::MatrixXd pv = chebyshev_basis(hv.points, q, iv);

    std::vector<int> row_base(n_to + 1, 0);
    for (int r = 0; r < n_to; ++r) row_base[r + 1] = row_base[r] + (layout.row_interior[r] ? row_deg_interior : q_u2v);
    std::vector<int> col_base(n_from + 1, row_base[n_to]);
    for (int c = 0; c < n_from; ++c)
        col_base[c + 1] = col_base[c] + (layout.col_interior[c] ? col_deg_interior : q_v2u);
    const int neq = col_base[n_from];

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(neq, nunk);
    Eigen::VectorXd b(neq);
    for (int r = 0; r < n_to; ++r)
        for (int j = 0; j < row_base[r + 1] - row_base[r]; ++j) b(row_base[r] + j) = pv(r, j);
    for (int c = 0; c < n_from; ++c)
        for (int j = 0; j < col_base[c + 1] - col_base[c]; ++j) b(col_base[c] + j) = pu(c, j);
    for (int k = 0; k < nunk; ++k)
        for (const auto& [r, c] : layout.positions[k]) {
            for (int j = 0; j < row_base[r + 1] - row_base[r]; ++j) a(row_base[r] + j, k) += pu(c, j);
            for (int j = 0; j < col_base[c + 1] - col_base[c]; ++j)
                a(col_base[c] + j, k) += hv.weights(r) * pv(r, j) / hu.weights(c);
        }

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(nunk);
    Eigen::MatrixXd null_space(nunk, 0);
    Eigen::MatrixXd range_v;
    Eigen::MatrixXd range_u;
    Eigen::VectorXd range_s;
    if (neq > 0 && nunk > 0) {
        const Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
        const Eigen::VectorXd& s = svd.singularValues();
        int rank = 0;
        while (rank < s.size() && s(rank) > kRankTol * s(0)) ++rank;
        range_u = svd.matrixU().leftCols(rank);
        range_v = svd.matrixV().leftCols(rank);
        range_s = s.head(rank);
        theta = range_v * (range_u.transpose() * b).cwiseQuotient(range_s);
        null_space = svd.matrixV().rightCols(nunk - rank);
    }
    // pseudo-inverse correction back onto the constraint set
    auto project = [&](Eigen::VectorXd x) {
        for (int pass = 0; pass < 2; ++pass) x += range_v * (range_u.transpose() * (b - a * x)).cwiseQuotient(range_s);
        return x;
    };
    sol.residual = neq > 0 ? (a * theta - b).cwiseAbs().maxCoeff() : 0.0;
    if (nunk == 0 && neq > 0) sol.residual = b.cwiseAbs().maxCoeff();
    sol.feasible = sol.residual <= kFeasibleTol;
    if (!sol.feasible || !optimize) return sol;
    sol.free_parameters = static_cast<int>(null_space.cols());

    // sine error of I and of its adjoint, each in the target-grid norm
    const double h_coarse = std::max((hu.points(n_from - 1) - hu.points(0)) / (n_from - 1),
                                     (hv.points(n_to - 1) - hv.points(0)) / (n_to - 1));
    const Eigen::VectorXd fu = forge_sine(hu.points, iv.lo, iv.hi, h_coarse);
    const Eigen::VectorXd fv = forge_sine(hv.points, iv.lo, iv.hi, h_coarse);
    const Eigen::ArrayXd sqrt_hv = hv.weights.array().sqrt();
    const Eigen::ArrayXd sqrt_hu = hu.weights.array().sqrt();
    Eigen::VectorXd r0(n_to + n_from);
    r0.head(n_to) = -(sqrt_hv * fv.array()).matrix();
    r0.tail(n_from) = -(sqrt_hu * fu.array()).matrix();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n_to + n_from, nunk);
    for (int k = 0; k < nunk; ++k)
        for (const auto& [r, c] : layout.positions[k]) {
            g(r, k) += sqrt_hv(r) * fu(c);
            g(n_to + c, k) += sqrt_hu(c) * hv.weights(r) * fv(r) / hu.weights(c);
        }
    const Eigen::VectorXd base = r0 + g * theta;
    sol.objective_before = base.norm();
    sol.objective_after = sol.objective_before;
    if (null_space.cols() > 0) {
        const Eigen::MatrixXd gn = g * null_space;
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
        cod.setThreshold(kRankTol);
        cod.compute(gn);
        const Eigen::VectorXd z = cod.solve(-base);
        const Eigen::VectorXd candidate = project(theta + null_space * z);
        const double after = (r0 + g * candidate).norm();
        const double drift = (a * candidate - b).cwiseAbs().maxCoeff();
        if (after <= sol.objective_before && drift <= kFeasibleTol) {
            theta = candidate;
            sol.objective_after = after;
        }
    }

    sol.matrix = assemble_matrix(layout, theta);
    sol.matrix.prune(0.0, 0.0);
    return sol;
}

double max_abs(const SpMat& m)
{
    double out = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) out = std::max(out, std::abs(it.value()));
    return out;
}

std::vector<Shape> escalation_schedule(const StencilAnsatz& ansatz, int p)
{
    std::vector<Shape> shapes;
    if (ansatz.kind == StencilAnsatz::Kind::dense) {
        shapes.push_back({StencilAnsatz::Kind::dense, 0, 0, 0});
        return shapes;
    }
    const int m0 = ansatz.block_rows > 0 ? ansatz.block_rows : 2 * p;
    const int n0 = ansatz.block_cols > 0 ? ansatz.block_cols : 3 * p;
    const int m_max = ansatz.max_block_rows > 0 ? ansatz.max_block_rows : 6 * p;
    const int n_max = ansatz.max_block_cols > 0 ? ansatz.max_block_cols : 9 * p;
    const int d0 = ansatz.interior_width > 0 ? ansatz.interior_width : 2 * p;
    const int d_max = ansatz.max_interior_width > 0 ? ansatz.max_interior_width : d0 + 4;
    for (int d = d0; d <= d_max; d += 2) {
        int m = m0;
        int nb = n0;
        bool grow_rows = true;
        shapes.push_back({StencilAnsatz::Kind::banded, m, nb, d});
        while (m < m_max || nb < n_max) {
            if ((grow_rows && m < m_max) || nb >= n_max)
                ++m;
            else
                ++nb;
            grow_rows = !grow_rows;
            shapes.push_back({StencilAnsatz::Kind::banded, m, nb, d});
        }
    }
    return shapes;
}

Eigen::VectorXd normalized_to(const Eigen::VectorXd& x, Interval iv)
{
    return ((2.0 * x.array() - iv.lo - iv.hi) / (iv.hi - iv.lo)).matrix();
}

double pair_adjoint_residual(const SpMat& u2v, const SpMat& v2u, const InterfaceQuadrature& hu,
                             const InterfaceQuadrature& hv)
{
    const Eigen::MatrixXd lhs = hu.weights.asDiagonal() * Eigen::MatrixXd(v2u);
    const Eigen::MatrixXd rhs = Eigen::MatrixXd(u2v).transpose() * hv.weights.asDiagonal();
    const double hmax = std::max(hu.weights.maxCoeff(), hv.weights.maxCoeff());
    return (lhs - rhs).cwiseAbs().maxCoeff() / hmax;
}

}  // namespace

InterfaceQuadrature InterfaceQuadrature::make(Eigen::VectorXd points, Eigen::VectorXd weights)
{
    if (points.size() != weights.size() || points.size() < 2)
        throw ConfigError("interface quadrature needs matching point and weight sequences");
    for (Eigen::Index i = 1; i < points.size(); ++i)
        if (!(points(i) > points(i - 1))) throw ConfigError("interface points must be strictly increasing");
    if (!(weights.minCoeff() > 0.0)) throw ConfigError("interface weights must be positive");
    InterfaceQuadrature quad;
    quad.quad_order = quadrature_order(weights, points);
    quad.points = std::move(points);
    quad.weights = std::move(weights);
    return quad;
}

InterfaceQuadrature InterfaceQuadrature::from_operator(const SbpOperator1D& op)
{
    InterfaceQuadrature quad = make(op.grid.points, op.h_weights);
    quad.quad_order = quadrature_order(op);
    return quad;
}

Eigen::VectorXd forge_sine(const Eigen::VectorXd& points, double lo, double hi, double h_coarse)
{
    const double k = 2.0 * M_PI / (8.0 * h_coarse);
    return points.unaryExpr([&](double x) { return std::sin(k * std::min(x - lo, hi - x)); });
}

int certify_order(const SpMat& op, const Eigen::VectorXd& from_pts, const Eigen::VectorXd& to_pts, int first_row,
                  int last_row)
{
    if (last_row < 0) last_row = static_cast<int>(op.rows());
    const Interval iv = span(from_pts, to_pts);
    const Eigen::ArrayXd s_from = normalized_to(from_pts, iv).array();
    const Eigen::ArrayXd s_to = normalized_to(to_pts, iv).array();
    const int cap = std::min(static_cast<int>(from_pts.size()), kCertifyDegreeCap);
    if (last_row <= first_row) return cap;
    for (int j = 0; j < cap; ++j) {
        const Eigen::VectorXd applied = op * s_from.pow(j).matrix();
        const double err = (applied.segment(first_row, last_row - first_row).array()
                            - s_to.pow(j).segment(first_row, last_row - first_row))
                               .abs()
                               .maxCoeff();
        if (!(err <= kCertifyTol)) return j;
    }
    return cap;
}

int certify_order(const InterpolationOperator& op, const Eigen::VectorXd& from_pts, const Eigen::VectorXd& to_pts)
{
    return certify_order(op.matrix, from_pts, to_pts);
}

int certify_interior_order(const InterpolationOperator& op, const Eigen::VectorXd& from_pts,
                           const Eigen::VectorXd& to_pts)
{
    return certify_order(op.matrix, from_pts, to_pts, op.boundary_rows, op.n_to - op.boundary_rows);
}

InterpolationOperator adjoint(const InterpolationOperator& op, const InterfaceQuadrature& from,
                              const InterfaceQuadrature& to)
{
    if (op.n_from != from.size() || op.n_to != to.size())
        throw ConfigError("adjoint: quadrature sizes do not match the operator");
    InterpolationOperator adj;
    adj.n_from = op.n_to;
    adj.n_to = op.n_from;
    const Eigen::VectorXd inv_from = from.weights.cwiseInverse();
    adj.matrix = SpMat(inv_from.asDiagonal() * SpMat(op.matrix.transpose()) * to.weights.asDiagonal());
    adj.direction = op.direction == Direction::u_to_v ? Direction::v_to_u : Direction::u_to_v;
    // boundary blocks of the adjoint are the columns touched by the boundary rows
    int touched = 0;
    for (int k = 0; k < op.matrix.outerSize(); ++k)
        for (SpMat::InnerIterator it(op.matrix, k); it; ++it)
            if (it.row() < op.boundary_rows) touched = std::max(touched, static_cast<int>(it.col()) + 1);
    adj.boundary_rows = op.boundary_rows == 0 ? 0 : std::min(touched, (adj.n_to + 1) / 2);
    adj.order_q = certify_order(adj.matrix, to.points, from.points);
    adj.interior_order = certify_interior_order(adj, to.points, from.points);
    return adj;
}

double ansatz_residual(const InterfaceQuadrature& hu, const InterfaceQuadrature& hv, int q_u2v, int q_v2u,
                       const StencilAnsatz& ansatz)
{
    const int p = std::max(1, std::min(hu.quad_order, hv.quad_order) / 2);
    const Shape shape{ansatz.kind, ansatz.block_rows > 0 ? ansatz.block_rows : 2 * p,
                      ansatz.block_cols > 0 ? ansatz.block_cols : 3 * p,
                      ansatz.interior_width > 0 ? ansatz.interior_width : 2 * p};
    return solve_layout(hu, hv, q_u2v, q_v2u, 2 * p, make_layout(hu, hv, shape), false).residual;
}

AdjointPair build_adjoint_pair(const InterfaceQuadrature& hu, const InterfaceQuadrature& hv, int q_u2v, int q_v2u,
                               const StencilAnsatz& ansatz)
{
    if (q_u2v < 1 || q_v2u < 1) throw ConfigError("interpolation orders must be at least 1");
    const int budget = std::min(hu.quad_order, hv.quad_order) + 1;
    if (q_u2v + q_v2u > budget)
        throw ForgeError("order budget exceeded: " + std::to_string(q_u2v) + "+" + std::to_string(q_v2u) + " > "
                         + std::to_string(budget - 1) + "+1");
    if (hv.size() < q_v2u)
        throw ForgeError("rank deficient target-side moment system: " + std::to_string(hv.size()) + " points < q_v2u="
                         + std::to_string(q_v2u));
    if (hu.size() < q_u2v)
        throw ForgeError("rank deficient source-side moment system: " + std::to_string(hu.size())
                         + " points < q_u2v=" + std::to_string(q_u2v));

    const int p = std::max(1, std::min(hu.quad_order, hv.quad_order) / 2);
    int attempts = 0;
    std::optional<AdjointPair> best;
    for (const Shape& shape : escalation_schedule(ansatz, p)) {
        ++attempts;
        const Layout layout = make_layout(hu, hv, shape);
        Solution sol = solve_layout(hu, hv, q_u2v, q_v2u, 2 * p, layout, true);
        if (!sol.feasible) continue;

        AdjointPair pair;
        pair.u2v.n_from = hu.size();
        pair.u2v.n_to = hv.size();
        pair.u2v.matrix = std::move(sol.matrix);
        pair.u2v.direction = Direction::u_to_v;
        pair.u2v.boundary_rows = layout.boundary_rows;
        pair.u2v.order_q = certify_order(pair.u2v, hu.points, hv.points);
        pair.u2v.interior_order = shape.kind == StencilAnsatz::Kind::dense
                                      ? pair.u2v.order_q
                                      : certify_interior_order(pair.u2v, hu.points, hv.points);
        pair.v2u = adjoint(pair.u2v, hu, hv);
        if (shape.kind == StencilAnsatz::Kind::dense) pair.v2u.interior_order = pair.v2u.order_q;
        // floating-point solves are re-verified before acceptance
        if (pair.u2v.order_q < q_u2v || pair.v2u.order_q < q_v2u) continue;

        ForgeCertificate& cert = pair.certificate;
        cert.q_u2v = q_u2v;
        cert.q_v2u = q_v2u;
        cert.certified_u2v = pair.u2v.order_q;
        cert.certified_v2u = pair.v2u.order_q;
        cert.block_rows = shape.block_rows;
        cert.block_cols = shape.block_cols;
        cert.interior_width = shape.interior_width;
        cert.attempts = attempts;
        cert.free_parameters = sol.free_parameters;
        cert.constraint_residual = sol.residual;
        cert.adjoint_residual = pair_adjoint_residual(pair.u2v.matrix, pair.v2u.matrix, hu, hv);
        cert.objective_before = sol.objective_before;
        cert.objective_after = sol.objective_after;
        cert.max_coefficient = std::max(max_abs(pair.u2v.matrix), max_abs(pair.v2u.matrix));
        if (cert.max_coefficient <= kCoefficientBound) return pair;
        if (!best || cert.max_coefficient < best->certificate.max_coefficient) best = std::move(pair);
    }
    if (best) {
        best->certificate.attempts = attempts;
        return *best;
    }
    throw ForgeError("escalation exceeded the maximum block size without a solution for orders ("
                     + std::to_string(q_u2v) + "," + std::to_string(q_v2u) + ")");
}

OpInterpolationSet build_op_set(const InterfaceQuadrature& hu, const InterfaceQuadrature& hv, int p)
{
    if (p < 1 || p > 4) throw ConfigError("OP sets are shipped for p in 1..4");
    OpInterpolationSet set;
    set.hu = hu;
    set.hv = hv;
    set.p = p;
    AdjointPair good = build_adjoint_pair(hu, hv, p + 1, p);
    AdjointPair second = build_adjoint_pair(hu, hv, p, p + 1);
    set.g_u2v = std::move(good.u2v);
    set.b_v2u = std::move(good.v2u);
    set.b_u2v = std::move(second.u2v);
    set.g_v2u = std::move(second.v2u);
    set.good_pair = good.certificate;
    set.second_pair = second.certificate;
    return set;
}

OpInterpolationSet build_op_set(int p, int n_coarse, int ratio, const SbpDataSource& source)
{
    if (ratio < 1) throw ConfigError("refinement ratio must be positive");
    const SbpOperator1D coarse = load_sbp(2 * p, Grid1D::uniform(n_coarse, 0.0, 1.0), source);
    const SbpOperator1D fine = load_sbp(2 * p, Grid1D::uniform(ratio * (n_coarse - 1) + 1, 0.0, 1.0), source);
    return build_op_set(InterfaceQuadrature::from_operator(coarse), InterfaceQuadrature::from_operator(fine), p);
}

OpInterpolationSet single_pair_mode(const OpInterpolationSet& set)
{
    OpInterpolationSet out = set;
    out.b_u2v = set.g_u2v;
    out.g_v2u = set.b_v2u;
    out.second_pair = set.good_pair;
    return out;
}

OpInterpolationSet identity_set(const InterfaceQuadrature& quad, int p)
{
    InterpolationOperator id;
    id.n_from = id.n_to = quad.size();
    id.matrix.resize(quad.size(), quad.size());
    id.matrix.setIdentity();
    id.order_q = certify_order(id, quad.points, quad.points);
    id.interior_order = id.order_q;
    OpInterpolationSet set;
    set.hu = quad;
    set.hv = quad;
    set.p = p;
    set.g_u2v = set.b_u2v = id;
    id.direction = Direction::v_to_u;
    set.g_v2u = set.b_v2u = id;
    return set;
}

double adjoint_residual(const OpInterpolationSet& set)
{
    return std::max(pair_adjoint_residual(set.g_u2v.matrix, set.b_v2u.matrix, set.hu, set.hv),
                    pair_adjoint_residual(set.b_u2v.matrix, set.g_v2u.matrix, set.hu, set.hv));
}

void write_op_set(const OpInterpolationSet& set, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    const std::vector<std::pair<std::string, const InterpolationOperator*>> ops{
        {"g_u2v", &set.g_u2v}, {"b_u2v", &set.b_u2v}, {"g_v2u", &set.g_v2u}, {"b_v2u", &set.b_v2u}};
    KeyValues cert;
    cert["p"] = std::to_string(set.p);
    cert["n_coarse"] = std::to_string(set.hu.size());
    cert["n_fine"] = std::to_string(set.hv.size());
    cert["adjoint_residual"] = format_real(adjoint_residual(set));
    for (const auto& [name, op] : ops) {
        write_triplets(dir / (name + ".txt"), op->matrix);
        cert[name + ".order_q"] = std::to_string(op->order_q);
        cert[name + ".interior_order"] = std::to_string(op->interior_order);
        cert[name + ".boundary_rows"] = std::to_string(op->boundary_rows);
        cert[name + ".n_from"] = std::to_string(op->n_from);
        cert[name + ".n_to"] = std::to_string(op->n_to);
        cert[name + ".direction"] = op->direction == Direction::u_to_v ? "u_to_v" : "v_to_u";
    }
    const std::vector<std::pair<std::string, const ForgeCertificate*>> pairs{{"good_pair", &set.good_pair},
                                                                             {"second_pair", &set.second_pair}};
    for (const auto& [name, c] : pairs) {
        cert[name + ".q_u2v"] = std::to_string(c->q_u2v);
        cert[name + ".q_v2u"] = std::to_string(c->q_v2u);
        cert[name + ".block_rows"] = std::to_string(c->block_rows);
        cert[name + ".block_cols"] = std::to_string(c->block_cols);
        cert[name + ".interior_width"] = std::to_string(c->interior_width);
        cert[name + ".attempts"] = std::to_string(c->attempts);
        cert[name + ".max_coefficient"] = format_real(c->max_coefficient);
        cert[name + ".free_parameters"] = std::to_string(c->free_parameters);
        cert[name + ".constraint_residual"] = format_real(c->constraint_residual);
        cert[name + ".objective_before"] = format_real(c->objective_before);
        cert[name + ".objective_after"] = format_real(c->objective_after);
    }
    write_key_values(dir / "certificate.txt", cert);
}

InterpolationOperator read_interpolation_operator(const std::filesystem::path& path)
{
    InterpolationOperator op;
    op.matrix = read_triplets(path);
    op.n_to = static_cast<int>(op.matrix.rows());
    op.n_from = static_cast<int>(op.matrix.cols());
    return op;
}

}  // namespace sbpsat
