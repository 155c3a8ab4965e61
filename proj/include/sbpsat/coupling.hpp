#pragma once

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sbpsat/interp_forge.hpp"
#include "sbpsat/mesh2d.hpp"

namespace sbpsat {

enum class CouplingMode { op, single_pair };
enum class Equation { heat, schrodinger_simple, wave_form };

[[nodiscard]] std::string to_string(CouplingMode mode);
[[nodiscard]] std::string to_string(Equation eq);
[[nodiscard]] CouplingMode parse_mode(const std::string& text);

// Heat: a, b > 0.  Schrodinger-simple: a, b purely imaginary; the assembled
// operator is D_s with w_t = i D_s w.  Wave form: a = c1^2, b = c2^2 > 0.
struct CouplingConfig {
    CouplingMode mode = CouplingMode::op;
    Equation equation = Equation::heat;
    std::complex<double> a{1.0, 0.0};
    std::complex<double> b{1.0, 0.0};
    double theta_u = 3.0;
    double theta_v = 3.0;
    double dirichlet_strength = 1.0;

    void validate() const;
};

struct BoundaryPoint {
    Side side = Side::u;
    Face face = Face::west;
    double x = 0.0;
    double y = 0.0;
};

// forcing = matrix * g, g holding Dirichlet data at `points` stacked in order
struct BoundaryInjection {
    SpMat matrix;
    std::vector<BoundaryPoint> points;
};

struct AssembledSystem {
    Equation kind = Equation::heat;
    CouplingConfig config;
    TwoBlockDomain domain;
    SpMat L;
    Eigen::VectorXd H;
    BoundaryInjection boundary;

    [[nodiscard]] int size() const { return static_cast<int>(L.rows()); }
};

[[nodiscard]] AssembledSystem assemble_heat_schrodinger(const TwoBlockDomain& domain, const OpInterpolationSet& set,
                                                        const CouplingConfig& cfg);
[[nodiscard]] AssembledSystem assemble_wave(const TwoBlockDomain& domain, const OpInterpolationSet& set,
                                            const CouplingConfig& cfg);
[[nodiscard]] AssembledSystem assemble(const TwoBlockDomain& domain, const OpInterpolationSet& set,
                                       const CouplingConfig& cfg);

enum class Classification { sym_neg_semidef, nonsym_dissipative, sym_indefinite, unclassified };
[[nodiscard]] std::string to_string(Classification c);

struct SpectralReport {
    double symmetry_residual = 0.0;  // |HL - (HL)^T|_max / |HL|_max
    double sym_min = 0.0;            // extreme eigenvalues of the symmetric part of HL
    double sym_max = 0.0;
    double norm = 0.0;               // max |eigenvalue| of the symmetric part
    Classification classification = Classification::unclassified;
};

constexpr int kDenseEigenCap = 8000;
[[nodiscard]] SpectralReport spectral_report(const AssembledSystem& sys, int max_unknowns = kDenseEigenCap);

// E = 1/2 u_t^T H u_t - 1/2 u^T (H L) u
[[nodiscard]] double wave_energy(const AssembledSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& ut);

// Writes L.txt, H.txt and B.txt (boundary injection) in the triplet format.
void export_system(const AssembledSystem& sys, const std::filesystem::path& dir);

}  // namespace sbpsat
