#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "sbpsat/coupling.hpp"
#include "sbpsat/errors.hpp"
#include "sbpsat/triplet_io.hpp"

using namespace sbpsat;

namespace {

TwoBlockDomain domain(int order, int nu, int ratio)
{
    TwoBlockSpec spec;
    spec.left = Rect{-1.0, 0.0, 0.0, 1.0};
    spec.right = Rect{0.0, 1.0, 0.0, 1.0};
    spec.nx_u = nu;
    spec.ny_u = nu;
    spec.nx_v = ratio * (nu - 1) + 1;
    spec.ratio = ratio;
    spec.order = order;
    return make_two_block(spec);
}

OpInterpolationSet set_for(const TwoBlockDomain& d, int p)
{
    return d.ratio == 1 ? identity_set(d.hu, p) : build_op_set(d.hu, d.hv, p);
}

CouplingConfig config(Equation eq, CouplingMode mode = CouplingMode::op)
{
    CouplingConfig cfg;
    cfg.equation = eq;
    cfg.mode = mode;
    if (eq == Equation::schrodinger_simple) cfg.a = cfg.b = {0.0, 1.0};
    return cfg;
}

template <class F>
Eigen::VectorXd sample_field(const TwoBlockDomain& d, F f)
{
    Eigen::VectorXd out(d.size());
    for (const Side side : {Side::u, Side::v}) {
        const Block2D& b = d.block(side);
        for (int ix = 0; ix < b.nx; ++ix)
            for (int iy = 0; iy < b.ny; ++iy) out(d.offset(side) + b.index(ix, iy)) = f(b.x(ix), b.y(iy));
    }
    return out;
}

template <class F>
Eigen::VectorXd boundary_data(const AssembledSystem& sys, F f)
{
    Eigen::VectorXd g(sys.boundary.points.size());
    for (std::size_t k = 0; k < sys.boundary.points.size(); ++k)
        g(k) = f(sys.boundary.points[k].x, sys.boundary.points[k].y);
    return g;
}

double quadratic(double x, double y) { return x * x + 3.0 * y * y - x * y + 2.0 * x - y + 0.5; }

}  // namespace

TEST(Coupling, QuadraticFieldIsReproducedByEveryForm)
{
    // single-pair mode interpolates solutions with an order-p operator, so it needs p = 3 for quadratics
    for (const Equation eq : {Equation::heat, Equation::schrodinger_simple, Equation::wave_form}) {
        for (const int ratio : {1, 2}) {
            for (const CouplingMode mode : {CouplingMode::op, CouplingMode::single_pair}) {
                const int order = mode == CouplingMode::op ? 4 : 6;
                const TwoBlockDomain d = domain(order, 13, ratio);
                const AssembledSystem sys = assemble(d, set_for(d, order / 2), config(eq, mode));
                const Eigen::VectorXd f = sample_field(d, quadratic);
                const Eigen::VectorXd lf = sys.L * f + sys.boundary.matrix * boundary_data(sys, quadratic);
                // Laplacian of the quadratic is 8
                EXPECT_LE((lf.array() - 8.0).abs().maxCoeff(), 1e-8 * sys.L.cwiseAbs().sum() / sys.size())
                    << to_string(eq) << " ratio " << ratio << " " << to_string(mode);
            }
        }
    }
}

TEST(Coupling, SinglePairAtLowOrderMissesQuadratics)
{
    const TwoBlockDomain d = domain(4, 13, 2);
    const AssembledSystem sys = assemble(d, set_for(d, 2), config(Equation::heat, CouplingMode::single_pair));
    const Eigen::VectorXd f = sample_field(d, quadratic);
    const Eigen::VectorXd lf = sys.L * f + sys.boundary.matrix * boundary_data(sys, quadratic);
    EXPECT_GT((lf.array() - 8.0).abs().maxCoeff(), 1e-3);
    auto linear = [](double x, double y) { return 2.0 * x - y + 0.5; };
    const Eigen::VectorXd g = sample_field(d, linear);
    EXPECT_LE((sys.L * g + sys.boundary.matrix * boundary_data(sys, linear)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Coupling, HeatFormIsDissipative)
{
    const TwoBlockDomain d = domain(4, 17, 2);
    const SpectralReport r = spectral_report(assemble(d, set_for(d, 2), config(Equation::heat)));
    EXPECT_EQ(r.classification, Classification::nonsym_dissipative);
    EXPECT_LE(r.sym_max, 1e-10 * r.norm);
    EXPECT_GT(r.symmetry_residual, 1e-12);
}

TEST(Coupling, SchrodingerFormIsSymmetricIndefinite)
{
    const TwoBlockDomain d = domain(4, 17, 2);
    const SpectralReport r = spectral_report(assemble(d, set_for(d, 2), config(Equation::schrodinger_simple)));
    EXPECT_EQ(r.classification, Classification::sym_indefinite);
    EXPECT_LE(r.symmetry_residual, 1e-12);
    EXPECT_LT(r.sym_min, 0.0);
    EXPECT_GT(r.sym_max, 0.0);
}

TEST(Coupling, WaveFormIsSymmetricNegativeSemidefinite)
{
    for (const int order : {4, 6}) {
        const TwoBlockDomain d = domain(order, 17, 2);
        const SpectralReport r = spectral_report(assemble(d, set_for(d, order / 2), config(Equation::wave_form)));
        EXPECT_EQ(r.classification, Classification::sym_neg_semidef) << order;
        EXPECT_LE(r.symmetry_residual, 1e-12);
        EXPECT_LE(r.sym_max, 1e-8 * r.norm);
    }
}

TEST(Coupling, ModesCoincideOnConformingGrids)
{
    for (const Equation eq : {Equation::heat, Equation::wave_form}) {
        const TwoBlockDomain d = domain(4, 11, 1);
        const OpInterpolationSet id = identity_set(d.hu, 2);
        const AssembledSystem op = assemble(d, id, config(eq, CouplingMode::op));
        const AssembledSystem sp = assemble(d, id, config(eq, CouplingMode::single_pair));
        EXPECT_EQ(Eigen::MatrixXd(op.L), Eigen::MatrixXd(sp.L)) << to_string(eq);
    }
}

TEST(Coupling, RejectsThetaAtOrBelowOne)
{
    const TwoBlockDomain d = domain(4, 11, 2);
    CouplingConfig cfg = config(Equation::wave_form);
    cfg.theta_u = 1.0;
    EXPECT_THROW((void)assemble(d, set_for(d, 2), cfg), ConfigError);
    cfg.theta_u = 1.0001;
    EXPECT_NO_THROW((void)assemble(d, set_for(d, 2), cfg));
}

TEST(Coupling, RejectsCoefficientDomains)
{
    const TwoBlockDomain d = domain(4, 11, 2);
    CouplingConfig cfg = config(Equation::heat);
    cfg.a = {0.0, 1.0};
    EXPECT_THROW((void)assemble(d, set_for(d, 2), cfg), ConfigError);
    cfg = config(Equation::schrodinger_simple);
    cfg.b = 1.0;
    EXPECT_THROW((void)assemble(d, set_for(d, 2), cfg), ConfigError);
}

TEST(Coupling, BrokenAdjointRelationIsRejected)
{
    const TwoBlockDomain d = domain(4, 11, 2);
    OpInterpolationSet set = set_for(d, 2);
    set.b_v2u.matrix.coeffRef(0, 0) += 1e-6;
    EXPECT_THROW((void)assemble(d, set, config(Equation::heat)), InvariantError);
}

TEST(Coupling, EnergyIsNonNegative)
{
    const TwoBlockDomain d = domain(4, 13, 2);
    const AssembledSystem sys = assemble(d, set_for(d, 2), config(Equation::wave_form));
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sys.size());
    EXPECT_EQ(wave_energy(sys, zero, zero), 0.0);
    std::mt19937 rng(11);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd u(sys.size());
        Eigen::VectorXd ut(sys.size());
        for (int i = 0; i < sys.size(); ++i) {
            u(i) = n01(rng);
            ut(i) = n01(rng);
        }
        EXPECT_GE(wave_energy(sys, u, Eigen::VectorXd::Zero(sys.size())), -1e-10 * u.squaredNorm());
        EXPECT_GE(wave_energy(sys, u, ut), 0.0);
    }
}

TEST(Coupling, SpectralReportHonoursCap)
{
    const TwoBlockDomain d = domain(4, 13, 2);
    const AssembledSystem sys = assemble(d, set_for(d, 2), config(Equation::heat));
    EXPECT_THROW((void)spectral_report(sys, 100), ConfigError);
}

TEST(Coupling, ExportWritesTripletFiles)
{
    const TwoBlockDomain d = domain(2, 9, 2);
    const AssembledSystem sys = assemble(d, set_for(d, 1), config(Equation::heat));
    const auto dir = std::filesystem::temp_directory_path() / "sbpsat_export";
    std::filesystem::create_directories(dir);
    export_system(sys, dir);
    const SpMat l = read_triplets(dir / "L.txt");
    EXPECT_EQ(l.rows(), sys.size());
    EXPECT_EQ(Eigen::MatrixXd(l), Eigen::MatrixXd(sys.L));
    EXPECT_EQ(read_triplets(dir / "H.txt").rows(), sys.size());
    std::filesystem::remove_all(dir);
}
