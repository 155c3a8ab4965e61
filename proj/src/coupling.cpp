#include "sbpsat/coupling.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "sbpsat/errors.hpp"
#include "sbpsat/triplet_io.hpp"

namespace sbpsat {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat diag(const Eigen::VectorXd& v)
{
    SpMat out(v.size(), v.size());
    out.reserve(Eigen::VectorXi::Ones(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out.insert(i, i) = v(i);
    out.makeCompressed();
    return out;
}

void place(Triplets& out, const SpMat& block, int row_offset, int col_offset)
{
    for (int k = 0; k < block.outerSize(); ++k)
        for (SpMat::InnerIterator it(block, k); it; ++it)
            out.emplace_back(static_cast<int>(it.row()) + row_offset, static_cast<int>(it.col()) + col_offset,
                             it.value());
}

struct BlockContext {
    const Block2D* block;
    BlockOperators ops;
    SpMat h_inv;
    int offset;
    Side side;
};

struct Interface {
    const SpMat* e_u2v;  // interpolation of solution residuals
    const SpMat* d_u2v;  // interpolation of derivative residuals
    const SpMat* e_v2u;
    const SpMat* d_v2u;
};

Interface interface_operators(const OpInterpolationSet& set, CouplingMode mode)
{
    if (mode == CouplingMode::op) return {&set.g_u2v.matrix, &set.b_u2v.matrix, &set.g_v2u.matrix, &set.b_v2u.matrix};
    return {&set.g_u2v.matrix, &set.g_u2v.matrix, &set.b_v2u.matrix, &set.b_v2u.matrix};
}

void check_set(const TwoBlockDomain& domain, const OpInterpolationSet& set)
{
    if (set.hu.size() != domain.hu.size() || set.hv.size() != domain.hv.size())
        throw ConfigError("interpolation set does not match the interface grids");
    const double res = adjoint_residual(set);
    if (!(res <= 1e-12)) throw InvariantError("interpolation set violates the adjoint relations");
}

// Outer Dirichlet SAT on one face: L += C e^T, forcing -C g with
//   C = alpha H^{-1} (s d - (tau/h) e) H_face,  tau = strength / gamma.
void add_dirichlet(Triplets& lt, Triplets& bt, std::vector<BoundaryPoint>& points, const BlockContext& ctx,
                   Face face, double alpha, double derivative_sign, double strength)
{
    const SpMat& e = ctx.ops.e_face(face);
    const SpMat& d = ctx.ops.d_face(face);
    const SpMat hf = diag(ctx.ops.weights(face));
    const double tau = strength / face_gamma(*ctx.block, face);
    const double h = face_normal_spacing(*ctx.block, face);
    const SpMat c = alpha * SpMat(ctx.h_inv * (derivative_sign * d - (tau / h) * e) * hf);
    place(lt, SpMat(c * SpMat(e.transpose())), ctx.offset, ctx.offset);
    const int col0 = static_cast<int>(points.size());
    place(bt, SpMat(-c), ctx.offset, col0);
    const Block2D& b = *ctx.block;
    const int nface = static_cast<int>(e.cols());
    for (int k = 0; k < nface; ++k) {
        BoundaryPoint pt;
        pt.side = ctx.side;
        pt.face = face;
        switch (face) {
        case Face::west: pt.x = b.rect.x0; pt.y = b.y(k); break;
        case Face::east: pt.x = b.rect.x1; pt.y = b.y(k); break;
        case Face::south: pt.x = b.x(k); pt.y = b.rect.y0; break;
        case Face::north: pt.x = b.x(k); pt.y = b.rect.y1; break;
        }
        points.push_back(pt);
    }
}

struct Coefficients {
    double alpha_u;
    double alpha_v;
};

Coefficients real_coefficients(const CouplingConfig& cfg)
{
    if (cfg.equation == Equation::schrodinger_simple) return {cfg.a.imag(), cfg.b.imag()};
    return {cfg.a.real(), cfg.b.real()};
}

AssembledSystem start_system(const TwoBlockDomain& domain, const CouplingConfig& cfg, BlockContext& u,
                             BlockContext& v, Triplets& lt)
{
    AssembledSystem sys;
    sys.kind = cfg.equation;
    sys.config = cfg;
    sys.domain = domain;
    u = BlockContext{&domain.left, build_block_ops(domain.left), {}, 0, Side::u};
    v = BlockContext{&domain.right, build_block_ops(domain.right), {}, domain.left.size(), Side::v};
    u.h_inv = diag(u.ops.h_omega.cwiseInverse());
    v.h_inv = diag(v.ops.h_omega.cwiseInverse());
    sys.H.resize(domain.size());
    sys.H << u.ops.h_omega, v.ops.h_omega;
    const Coefficients k = real_coefficients(cfg);
    place(lt, SpMat(k.alpha_u * u.ops.laplacian), u.offset, u.offset);
    place(lt, SpMat(k.alpha_v * v.ops.laplacian), v.offset, v.offset);
    return sys;
}

void finish_system(AssembledSystem& sys, const BlockContext& u, const BlockContext& v, Triplets& lt,
                   double derivative_sign)
{
    const Coefficients k = real_coefficients(sys.config);
    Triplets bt;
    std::vector<BoundaryPoint> points;
    for (const Face f : {Face::west, Face::south, Face::north})
        add_dirichlet(lt, bt, points, u, f, k.alpha_u, derivative_sign, sys.config.dirichlet_strength);
    for (const Face f : {Face::east, Face::south, Face::north})
        add_dirichlet(lt, bt, points, v, f, k.alpha_v, derivative_sign, sys.config.dirichlet_strength);
    const int n = sys.domain.size();
    sys.L.resize(n, n);
    sys.L.setFromTriplets(lt.begin(), lt.end());
    sys.L.makeCompressed();
    sys.boundary.matrix.resize(n, static_cast<Eigen::Index>(points.size()));
    sys.boundary.matrix.setFromTriplets(bt.begin(), bt.end());
    sys.boundary.points = std::move(points);
}

}  // namespace

std::string to_string(CouplingMode mode)
{
    return mode == CouplingMode::op ? "op" : "single_pair";
}

std::string to_string(Equation eq)
{
    switch (eq) {
    case Equation::heat: return "heat";
    case Equation::schrodinger_simple: return "schrodinger_simple";
    case Equation::wave_form: return "wave_form";
    }
    return "unknown";
}

CouplingMode parse_mode(const std::string& text)
{
    if (text == "op") return CouplingMode::op;
    if (text == "single_pair") return CouplingMode::single_pair;
    throw ConfigError("unknown coupling mode '" + text + "'");
}

std::string to_string(Classification c)
{
    switch (c) {
    case Classification::sym_neg_semidef: return "sym-neg-semidef";
    case Classification::nonsym_dissipative: return "nonsym-dissipative";
    case Classification::sym_indefinite: return "sym-indefinite";
    case Classification::unclassified: return "unclassified";
    }
    return "unclassified";
}

void CouplingConfig::validate() const
{
    switch (equation) {
    case Equation::heat:
    case Equation::wave_form:
        if (a.imag() != 0.0 || b.imag() != 0.0 || !(a.real() > 0.0) || !(b.real() > 0.0))
            throw ConfigError(to_string(equation) + " coefficients must be positive reals");
        break;
    case Equation::schrodinger_simple:
        if (a.real() != 0.0 || b.real() != 0.0 || a.imag() == 0.0 || b.imag() == 0.0)
            throw ConfigError("Schrodinger coefficients must be purely imaginary");
        break;
    }
    if (equation == Equation::wave_form && !(theta_u > 1.0 && theta_v > 1.0))
        throw ConfigError("wave penalties need theta_u, theta_v > 1");
    if (!(dirichlet_strength >= 1.0)) throw ConfigError("dirichlet_strength must be at least 1");
}

AssembledSystem assemble_heat_schrodinger(const TwoBlockDomain& domain, const OpInterpolationSet& set,
                                          const CouplingConfig& cfg)
{
    if (cfg.equation != Equation::heat && cfg.equation != Equation::schrodinger_simple)
        throw ConfigError("assemble_heat_schrodinger needs the heat or Schrodinger-simple equation");
    cfg.validate();
    check_set(domain, set);
    BlockContext u;
    BlockContext v;
    Triplets lt;
    AssembledSystem sys = start_system(domain, cfg, u, v, lt);
    const Coefficients k = real_coefficients(cfg);
    // tau * conj(a) in the ansatz: -a/2 for real a, +alpha/2 after dividing a = i alpha out
    const double s = cfg.equation == Equation::heat ? -1.0 : 1.0;
    const Interface ip = interface_operators(set, cfg.mode);

    const SpMat& eu = u.ops.e_face(Face::east);
    const SpMat& du = u.ops.d_face(Face::east);
    const SpMat& ev = v.ops.e_face(Face::west);
    const SpMat& dv = v.ops.d_face(Face::west);
    const SpMat hgu = diag(u.ops.weights(Face::east));
    const SpMat hgv = diag(v.ops.weights(Face::west));
    const SpMat eut = eu.transpose();
    const SpMat dut = du.transpose();
    const SpMat evt = ev.transpose();
    const SpMat dvt = dv.transpose();

    const SpMat luu = 0.5 * k.alpha_u * SpMat(u.h_inv * (s * du * hgu * eut - eu * hgu * dut));
    const SpMat luv = SpMat(u.h_inv * (-0.5 * s * k.alpha_u * du * hgu * (*ip.e_v2u) * evt
                                       - 0.5 * k.alpha_v * eu * hgu * (*ip.d_v2u) * dvt));
    const SpMat lvv = 0.5 * k.alpha_v * SpMat(v.h_inv * (s * dv * hgv * evt - ev * hgv * dvt));
    const SpMat lvu = SpMat(v.h_inv * (-0.5 * s * k.alpha_v * dv * hgv * (*ip.e_u2v) * eut
                                       - 0.5 * k.alpha_u * ev * hgv * (*ip.d_u2v) * dut));
    place(lt, luu, u.offset, u.offset);
    place(lt, luv, u.offset, v.offset);
    place(lt, lvv, v.offset, v.offset);
    place(lt, lvu, v.offset, u.offset);
    finish_system(sys, u, v, lt, s);
    return sys;
}

AssembledSystem assemble_wave(const TwoBlockDomain& domain, const OpInterpolationSet& set, const CouplingConfig& cfg)
{
    if (cfg.equation != Equation::wave_form) throw ConfigError("assemble_wave needs the wave-form equation");
    cfg.validate();
    check_set(domain, set);
    BlockContext u;
    BlockContext v;
    Triplets lt;
    AssembledSystem sys = start_system(domain, cfg, u, v, lt);
    const Coefficients k = real_coefficients(cfg);
    const double c1 = k.alpha_u;
    const double c2 = k.alpha_v;
    const double tau_u = cfg.theta_u / (4.0 * u.block->op_x.gamma);
    const double tau_v = cfg.theta_v / (4.0 * v.block->op_x.gamma);
    const double sigma_u = tau_v;
    const double sigma_v = tau_u;
    const double h_u = u.block->hx();
    const double h_v = v.block->hx();
    const Interface ip = interface_operators(set, cfg.mode);
    const SpMat& g_u2v = *ip.e_u2v;
    const SpMat& b_u2v = *ip.d_u2v;
    const SpMat& g_v2u = *ip.e_v2u;
    const SpMat& b_v2u = *ip.d_v2u;

    const SpMat& eu = u.ops.e_face(Face::east);
    const SpMat& du = u.ops.d_face(Face::east);
    const SpMat& ev = v.ops.e_face(Face::west);
    const SpMat& dv = v.ops.d_face(Face::west);
    const SpMat hgu = diag(u.ops.weights(Face::east));
    const SpMat hgv = diag(v.ops.weights(Face::west));
    const SpMat eut = eu.transpose();
    const SpMat dut = du.transpose();
    const SpMat evt = ev.transpose();
    const SpMat dvt = dv.transpose();

    const SpMat luu = SpMat(u.h_inv * (-(tau_u / h_u) * c1 * eu * hgu * eut
                                       - (sigma_u / h_v) * c2 * eu * hgu * b_v2u * g_u2v * eut
                                       + 0.5 * c1 * du * hgu * eut - 0.5 * c1 * eu * hgu * dut));
    const SpMat luv = SpMat(u.h_inv * ((tau_u / h_u) * c1 * eu * hgu * g_v2u * evt
                                       + (sigma_u / h_v) * c2 * eu * hgu * b_v2u * evt
                                       - 0.5 * c1 * du * hgu * g_v2u * evt - 0.5 * c2 * eu * hgu * b_v2u * dvt));
    const SpMat lvv = SpMat(v.h_inv * (-(tau_v / h_v) * c2 * ev * hgv * evt
                                       - (sigma_v / h_u) * c1 * ev * hgv * b_u2v * g_v2u * evt
                                       + 0.5 * c2 * dv * hgv * evt - 0.5 * c2 * ev * hgv * dvt));
    const SpMat lvu = SpMat(v.h_inv * ((tau_v / h_v) * c2 * ev * hgv * g_u2v * eut
                                       + (sigma_v / h_u) * c1 * ev * hgv * b_u2v * eut
                                       - 0.5 * c2 * dv * hgv * g_u2v * eut - 0.5 * c1 * ev * hgv * b_u2v * dut));
    place(lt, luu, u.offset, u.offset);
    place(lt, luv, u.offset, v.offset);
    place(lt, lvv, v.offset, v.offset);
    place(lt, lvu, v.offset, u.offset);
    finish_system(sys, u, v, lt, 1.0);
    return sys;
}

AssembledSystem assemble(const TwoBlockDomain& domain, const OpInterpolationSet& set, const CouplingConfig& cfg)
{
    return cfg.equation == Equation::wave_form ? assemble_wave(domain, set, cfg)
                                               : assemble_heat_schrodinger(domain, set, cfg);
}

SpectralReport spectral_report(const AssembledSystem& sys, int max_unknowns)
{
    if (sys.size() > max_unknowns)
        throw ConfigError("spectral_report: " + std::to_string(sys.size()) + " unknowns exceed the dense cap of "
                          + std::to_string(max_unknowns));
    const Eigen::MatrixXd s = sys.H.asDiagonal() * Eigen::MatrixXd(sys.L);
    SpectralReport rep;
    const double smax = std::max(s.cwiseAbs().maxCoeff(), 1e-300);
    rep.symmetry_residual = (s - s.transpose()).cwiseAbs().maxCoeff() / smax;
    const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& eig = solver.eigenvalues();
    rep.sym_min = eig(0);
    rep.sym_max = eig(eig.size() - 1);
    rep.norm = std::max(std::abs(rep.sym_min), std::abs(rep.sym_max));
    const bool symmetric = rep.symmetry_residual <= 1e-12;
    if (symmetric && rep.sym_max <= 1e-8 * rep.norm)
        rep.classification = Classification::sym_neg_semidef;
    else if (symmetric && rep.sym_min < 0.0 && rep.sym_max > 0.0)
        rep.classification = Classification::sym_indefinite;
    else if (!symmetric && rep.sym_max <= 1e-10 * rep.norm)
        rep.classification = Classification::nonsym_dissipative;
    return rep;
}

double wave_energy(const AssembledSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& ut)
{
    const Eigen::VectorXd lu = sys.L * u;
    return 0.5 * ut.dot(sys.H.asDiagonal() * ut) - 0.5 * u.dot(sys.H.asDiagonal() * lu);
}

void export_system(const AssembledSystem& sys, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    write_triplets(dir / "L.txt", sys.L);
    write_triplets(dir / "H.txt", SpMat(sys.H.sparseView()));
    write_triplets(dir / "B.txt", sys.boundary.matrix);
}

}  // namespace sbpsat
