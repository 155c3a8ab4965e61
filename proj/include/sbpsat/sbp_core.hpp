#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace sbpsat {

using SpMat = Eigen::SparseMatrix<double>;

struct Grid1D {
    int n = 0;
    double x_left = 0.0;
    double x_right = 0.0;
    double h = 0.0;
    Eigen::VectorXd points;

    [[nodiscard]] static Grid1D uniform(int n, double x_left, double x_right);
    [[nodiscard]] double length() const { return x_right - x_left; }
};

// Diagonal-norm SBP second-derivative operator:
//   H D2 = -M - e_l d_l^T + e_r d_r^T,  M symmetric positive semidefinite.
struct SbpOperator1D {
    int order_interior = 0;
    int closure_width = 0;
    Grid1D grid;
    Eigen::VectorXd h_weights;
    SpMat d2;
    Eigen::VectorXd e_left;
    Eigen::VectorXd e_right;
    Eigen::VectorXd d_left;
    Eigen::VectorXd d_right;
    SpMat remainder;
    double gamma = 0.0;

    [[nodiscard]] int size() const { return grid.n; }
    [[nodiscard]] double h() const { return grid.h; }
    [[nodiscard]] int p() const { return order_interior / 2; }
};

// Where operator files come from; the manifest check can be disabled so the
// invariant suite can name the failing property of a modified file.
struct SbpDataSource {
    std::filesystem::path dir;
    bool check_manifest = true;

    [[nodiscard]] static SbpDataSource shipped();
};

[[nodiscard]] std::filesystem::path default_data_dir();
[[nodiscard]] const std::vector<int>& supported_orders();
[[nodiscard]] int closure_width(int order_interior, const SbpDataSource& source = SbpDataSource::shipped());

// Loads, expands to the grid and validates; throws InvariantError on corrupted data.
[[nodiscard]] SbpOperator1D load_sbp(int order_interior, const Grid1D& grid,
                                     const SbpDataSource& source = SbpDataSource::shipped());
// Same as load_sbp but skips validation; used to inspect broken data.
[[nodiscard]] SbpOperator1D load_sbp_unchecked(int order_interior, const Grid1D& grid,
                                               const SbpDataSource& source);

// Largest q with sum_i w_i x_i^j exact for all j < q (relative tolerance 1e-10).
[[nodiscard]] int quadrature_order(const Eigen::VectorXd& weights, const Eigen::VectorXd& points,
                                   int max_degree = 24);
[[nodiscard]] int quadrature_order(const SbpOperator1D& op);

[[nodiscard]] double borrowing_constant(const SbpOperator1D& op, double tol = 1e-10);
// Smallest eigenvalue of M - h*gamma*(d_r d_r^T + d_l d_l^T).
[[nodiscard]] double shifted_remainder_min_eigenvalue(const SbpOperator1D& op, double gamma);

struct InvariantCheck {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct VerificationReport {
    int order_interior = 0;
    int quadrature_order = 0;
    int interior_accuracy = 0;
    int boundary_accuracy = 0;
    int derivative_order = 0;
    double gamma = 0.0;
    std::vector<InvariantCheck> checks;

    [[nodiscard]] bool passed() const;
    [[nodiscard]] const InvariantCheck* find(const std::string& name) const;
    [[nodiscard]] std::string summary() const;
};

[[nodiscard]] VerificationReport verify_operator(const SbpOperator1D& op);

}  // namespace sbpsat
