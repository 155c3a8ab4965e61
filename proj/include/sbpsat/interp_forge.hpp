#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sbpsat/sbp_core.hpp"

namespace sbpsat {

struct InterfaceQuadrature {
    Eigen::VectorXd points;
    Eigen::VectorXd weights;
    int quad_order = 0;

    // Validates positivity and ordering and measures the order.
    [[nodiscard]] static InterfaceQuadrature make(Eigen::VectorXd points, Eigen::VectorXd weights);
    [[nodiscard]] static InterfaceQuadrature from_operator(const SbpOperator1D& op);
    [[nodiscard]] int size() const { return static_cast<int>(points.size()); }
};

enum class Direction { u_to_v, v_to_u };

struct InterpolationOperator {
    int n_from = 0;
    int n_to = 0;
    SpMat matrix;
    int order_q = 0;
    int interior_order = 0;
    // rows at each end of the target grid that belong to modified boundary blocks
    int boundary_rows = 0;
    Direction direction = Direction::u_to_v;
};

// Shape of the unknown part of I_u2v. Zero fields pick the defaults derived
// from p: blocks (2p)x(3p) growing to (6p)x(9p), interior width 2p growing by
// two up to 2p+4.
struct StencilAnsatz {
    enum class Kind { banded, dense };
    Kind kind = Kind::banded;
    int block_rows = 0;
    int block_cols = 0;
    int interior_width = 0;
    int max_block_rows = 0;
    int max_block_cols = 0;
    int max_interior_width = 0;

    [[nodiscard]] static StencilAnsatz dense() { return StencilAnsatz{Kind::dense}; }
};

struct ForgeCertificate {
    int q_u2v = 0;
    int q_v2u = 0;
    int certified_u2v = 0;
    int certified_v2u = 0;
    int block_rows = 0;
    int block_cols = 0;
    int interior_width = 0;
    int attempts = 0;
    int free_parameters = 0;
    double constraint_residual = 0.0;
    double adjoint_residual = 0.0;
    double objective_before = 0.0;
    double objective_after = 0.0;
    double max_coefficient = 0.0;  // over both operators of the pair
};

struct AdjointPair {
    InterpolationOperator u2v;
    InterpolationOperator v2u;
    ForgeCertificate certificate;
};

constexpr int kCertifyDegreeCap = 16;
constexpr double kCertifyTol = 1e-9;

[[nodiscard]] AdjointPair build_adjoint_pair(const InterfaceQuadrature& hu, const InterfaceQuadrature& hv,
                                             int q_u2v, int q_v2u, const StencilAnsatz& ansatz = {});

// Least-squares residual of the accuracy conditions for one fixed ansatz, with
// no budget check and no escalation (infinity when the stencil does not fit).
[[nodiscard]] double ansatz_residual(const InterfaceQuadrature& hu, const InterfaceQuadrature& hv, int q_u2v,
                                     int q_v2u, const StencilAnsatz& ansatz);

// Hilbert adjoint H_from^{-1} I^T H_to, with certified orders.
[[nodiscard]] InterpolationOperator adjoint(const InterpolationOperator& op, const InterfaceQuadrature& from,
                                            const InterfaceQuadrature& to);

[[nodiscard]] int certify_order(const SpMat& op, const Eigen::VectorXd& from_pts, const Eigen::VectorXd& to_pts,
                                int first_row = 0, int last_row = -1);
[[nodiscard]] int certify_order(const InterpolationOperator& op, const Eigen::VectorXd& from_pts,
                                const Eigen::VectorXd& to_pts);
[[nodiscard]] int certify_interior_order(const InterpolationOperator& op, const Eigen::VectorXd& from_pts,
                                         const Eigen::VectorXd& to_pts);

// Sine with eight coarse spacings per wavelength, phase zero at the nearest endpoint.
[[nodiscard]] Eigen::VectorXd forge_sine(const Eigen::VectorXd& points, double lo, double hi, double h_coarse);

struct OpInterpolationSet {
    InterpolationOperator g_u2v;
    InterpolationOperator b_u2v;
    InterpolationOperator g_v2u;
    InterpolationOperator b_v2u;
    InterfaceQuadrature hu;
    InterfaceQuadrature hv;
    int p = 0;
    ForgeCertificate good_pair;    // (g_u2v, b_v2u)
    ForgeCertificate second_pair;  // (b_u2v, g_v2u)
};

[[nodiscard]] OpInterpolationSet build_op_set(const InterfaceQuadrature& hu, const InterfaceQuadrature& hv, int p);
[[nodiscard]] OpInterpolationSet build_op_set(int p, int n_coarse, int ratio = 2,
                                              const SbpDataSource& source = SbpDataSource::shipped());
[[nodiscard]] OpInterpolationSet single_pair_mode(const OpInterpolationSet& set);
[[nodiscard]] OpInterpolationSet identity_set(const InterfaceQuadrature& quad, int p);

// max(|H_U b_v2u - g_u2v^T H_V|, |g_v2u^T H_U - H_V b_u2v|) / max(H)
[[nodiscard]] double adjoint_residual(const OpInterpolationSet& set);

void write_op_set(const OpInterpolationSet& set, const std::filesystem::path& dir);
[[nodiscard]] InterpolationOperator read_interpolation_operator(const std::filesystem::path& path);

}  // namespace sbpsat
