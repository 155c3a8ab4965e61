#include "sbpsat/mesh2d.hpp"

#include <cmath>

#include "sbpsat/errors.hpp"

namespace sbpsat {

namespace {

SpMat column(const Eigen::VectorXd& v)
{
    return SpMat(v.sparseView());
}

SpMat diagonal(const Eigen::VectorXd& v)
{
    SpMat out(v.size(), v.size());
    out.reserve(Eigen::VectorXi::Ones(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out.insert(i, i) = v(i);
    out.makeCompressed();
    return out;
}

}  // namespace

SpMat identity_matrix(int n)
{
    SpMat id(n, n);
    id.setIdentity();
    return id;
}

Block2D Block2D::make(const Rect& rect, int nx, int ny, int order, const SbpDataSource& source)
{
    Block2D b;
    b.rect = rect;
    b.nx = nx;
    b.ny = ny;
    b.op_x = load_sbp(order, Grid1D::uniform(nx, rect.x0, rect.x1), source);
    b.op_y = load_sbp(order, Grid1D::uniform(ny, rect.y0, rect.y1), source);
    return b;
}

BlockOperators build_block_ops(const Block2D& block)
{
    const SbpOperator1D& ox = block.op_x;
    const SbpOperator1D& oy = block.op_y;
    const SpMat ix = identity_matrix(block.nx);
    const SpMat iy = identity_matrix(block.ny);
    const SpMat hx = diagonal(ox.h_weights);
    const SpMat hy = diagonal(oy.h_weights);

    BlockOperators ops;
    ops.laplacian = kron2(ox.d2, iy) + kron2(ix, oy.d2);
    ops.h_omega = Eigen::VectorXd(block.size());
    for (int i = 0; i < block.nx; ++i)
        ops.h_omega.segment(i * block.ny, block.ny) = ox.h_weights(i) * oy.h_weights;

    ops.e[static_cast<int>(Face::west)] = kron2(column(ox.e_left), iy);
    ops.e[static_cast<int>(Face::east)] = kron2(column(ox.e_right), iy);
    ops.e[static_cast<int>(Face::south)] = kron2(ix, column(oy.e_left));
    ops.e[static_cast<int>(Face::north)] = kron2(ix, column(oy.e_right));
    ops.d[static_cast<int>(Face::west)] = -kron2(column(ox.d_left), iy);
    ops.d[static_cast<int>(Face::east)] = kron2(column(ox.d_right), iy);
    ops.d[static_cast<int>(Face::south)] = -kron2(ix, column(oy.d_left));
    ops.d[static_cast<int>(Face::north)] = kron2(ix, column(oy.d_right));
    ops.face_weights[static_cast<int>(Face::west)] = oy.h_weights;
    ops.face_weights[static_cast<int>(Face::east)] = oy.h_weights;
    ops.face_weights[static_cast<int>(Face::south)] = ox.h_weights;
    ops.face_weights[static_cast<int>(Face::north)] = ox.h_weights;

    ops.gradient_form = kron2(ox.remainder, hy) + kron2(hx, oy.remainder);
    SpMat borrowed(block.size(), block.size());
    for (const Face f : kFaces) {
        const SpMat& d = ops.d_face(f);
        borrowed += face_normal_spacing(block, f) * face_gamma(block, f)
                    * SpMat(d * diagonal(ops.weights(f)) * SpMat(d.transpose()));
    }
    ops.reduced_gradient_form = ops.gradient_form - borrowed;
    return ops;
}

double face_normal_spacing(const Block2D& block, Face face)
{
    return face == Face::west || face == Face::east ? block.hx() : block.hy();
}

double face_gamma(const Block2D& block, Face face)
{
    return face == Face::west || face == Face::east ? block.op_x.gamma : block.op_y.gamma;
}

TwoBlockDomain make_two_block(const TwoBlockSpec& spec, const SbpDataSource& source)
{
    if (spec.ratio < 1) throw ConfigError("refinement ratio must be a positive integer");
    if (spec.left.y0 != spec.right.y0 || spec.left.y1 != spec.right.y1)
        throw ConfigError("blocks must share the interface segment");
    if (spec.left.x1 != spec.right.x0) throw ConfigError("blocks must meet at a vertical interface");
    const int ny_v = spec.ratio * (spec.ny_u - 1) + 1;
    TwoBlockDomain dom;
    dom.left = Block2D::make(spec.left, spec.nx_u, spec.ny_u, spec.order, source);
    dom.right = Block2D::make(spec.right, spec.nx_v, ny_v, spec.order, source);
    dom.interface_x = spec.left.x1;
    dom.ratio = spec.ratio;
    dom.hu = InterfaceQuadrature::from_operator(dom.left.op_y);
    dom.hv = InterfaceQuadrature::from_operator(dom.right.op_y);
    return dom;
}

InterfaceQuadrature face_quadrature(const TwoBlockDomain& domain, Side side)
{
    return side == Side::u ? domain.hu : domain.hv;
}

}  // namespace sbpsat
