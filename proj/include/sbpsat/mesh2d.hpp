#pragma once

#include <array>

#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include "sbpsat/interp_forge.hpp"
#include "sbpsat/sbp_core.hpp"

namespace sbpsat {

template <class Scalar>
[[nodiscard]] Eigen::SparseMatrix<Scalar> kron2(const Eigen::SparseMatrix<Scalar>& a,
                                                const Eigen::SparseMatrix<Scalar>& b)
{
    Eigen::SparseMatrix<Scalar> out = Eigen::kroneckerProduct(a, b);
    out.makeCompressed();
    return out;
}

template <class DerivedA, class DerivedB>
[[nodiscard]] Eigen::SparseMatrix<typename DerivedA::Scalar> kron2(const Eigen::MatrixBase<DerivedA>& a,
                                                                   const Eigen::MatrixBase<DerivedB>& b)
{
    using Scalar = typename DerivedA::Scalar;
    return kron2<Scalar>(a.eval().sparseView(), b.eval().sparseView());
}

[[nodiscard]] SpMat identity_matrix(int n);

struct Rect {
    double x0 = 0.0;
    double x1 = 1.0;
    double y0 = 0.0;
    double y1 = 1.0;
};

// Unknowns are ordered x-major: index = ix * ny + iy.
struct Block2D {
    Rect rect;
    int nx = 0;
    int ny = 0;
    SbpOperator1D op_x;
    SbpOperator1D op_y;

    [[nodiscard]] static Block2D make(const Rect& rect, int nx, int ny, int order,
                                      const SbpDataSource& source = SbpDataSource::shipped());
    [[nodiscard]] double hx() const { return op_x.h(); }
    [[nodiscard]] double hy() const { return op_y.h(); }
    [[nodiscard]] int size() const { return nx * ny; }
    [[nodiscard]] int index(int ix, int iy) const { return ix * ny + iy; }
    [[nodiscard]] double x(int ix) const { return op_x.grid.points(ix); }
    [[nodiscard]] double y(int iy) const { return op_y.grid.points(iy); }
};

enum class Face { west = 0, east = 1, south = 2, north = 3 };
inline constexpr std::array<Face, 4> kFaces{Face::west, Face::east, Face::south, Face::north};

struct BlockOperators {
    SpMat laplacian;
    Eigen::VectorXd h_omega;
    // N x n_face selection (e) and outward normal derivative (d) maps
    std::array<SpMat, 4> e;
    std::array<SpMat, 4> d;
    std::array<Eigen::VectorXd, 4> face_weights;
    // gradient form M (x) H_y + H_x (x) M, including the borrowed boundary parts
    SpMat gradient_form;
    // the same with the borrowed h*gamma*d d^T parts removed: M~_x + M~_y
    SpMat reduced_gradient_form;

    [[nodiscard]] const SpMat& e_face(Face f) const { return e[static_cast<int>(f)]; }
    [[nodiscard]] const SpMat& d_face(Face f) const { return d[static_cast<int>(f)]; }
    [[nodiscard]] const Eigen::VectorXd& weights(Face f) const { return face_weights[static_cast<int>(f)]; }
};

[[nodiscard]] BlockOperators build_block_ops(const Block2D& block);

// Normal spacing and borrowing constant belonging to a face.
[[nodiscard]] double face_normal_spacing(const Block2D& block, Face face);
[[nodiscard]] double face_gamma(const Block2D& block, Face face);

enum class Side { u, v };

// U is the left block, V the right block; they share the vertical interface x = left.rect.x1.
struct TwoBlockDomain {
    Block2D left;
    Block2D right;
    double interface_x = 0.0;
    int ratio = 1;
    InterfaceQuadrature hu;
    InterfaceQuadrature hv;

    [[nodiscard]] const Block2D& block(Side side) const { return side == Side::u ? left : right; }
    [[nodiscard]] int size() const { return left.size() + right.size(); }
    [[nodiscard]] int offset(Side side) const { return side == Side::u ? 0 : left.size(); }
};

struct TwoBlockSpec {
    Rect left;
    Rect right;
    int nx_u = 0;
    int ny_u = 0;
    int nx_v = 0;
    int ratio = 2;
    int order = 4;
};

[[nodiscard]] TwoBlockDomain make_two_block(const TwoBlockSpec& spec,
                                            const SbpDataSource& source = SbpDataSource::shipped());

[[nodiscard]] InterfaceQuadrature face_quadrature(const TwoBlockDomain& domain, Side side);

}  // namespace sbpsat
