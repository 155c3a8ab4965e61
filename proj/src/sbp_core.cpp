#include "sbpsat/sbp_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "sbpsat/errors.hpp"
#include "sbpsat/triplet_io.hpp"

namespace sbpsat {

namespace {

constexpr double kPsdTol = 1e-10;
constexpr double kExactTol = 1e-8;

struct ReferenceData {
    int n_ref = 0;
    int closure = 0;
    int p = 0;
    Eigen::VectorXd weights;
    Eigen::MatrixXd d2;
    Eigen::VectorXd d_left;
    Eigen::VectorXd d_right;
    Eigen::VectorXd stencil;  // offsets -p..p
    std::uint64_t checksum = 0;
};

std::string role_file(int order, const std::string& role)
{
    return "sbp" + std::to_string(order) + "_" + role + ".txt";
}

void check_order(int order)
{
    const auto& orders = supported_orders();
    if (std::find(orders.begin(), orders.end(), order) == orders.end())
        throw ConfigError("unsupported interior order " + std::to_string(order));
}

ReferenceData read_reference(int order, const SbpDataSource& source)
{
    check_order(order);
    const std::vector<std::string> roles{"norm", "d2", "bderiv"};
    std::map<std::string, std::string> manifest;
    if (source.check_manifest) manifest = read_manifest(source.dir / "MANIFEST");

    ReferenceData ref;
    ref.p = order / 2;
    std::uint64_t combined = 0;
    for (const auto& role : roles) {
        const auto path = source.dir / role_file(order, role);
        const std::uint64_t sum = file_checksum(path);
        combined = combined * 0x100000001b3ULL ^ sum;
        if (source.check_manifest) {
            const auto it = manifest.find(path.filename().string());
            if (it == manifest.end())
                throw InvariantError("manifest has no entry for " + path.filename().string());
            if (it->second != format_checksum(sum))
                throw InvariantError("checksum mismatch for " + path.filename().string());
        }
    }
    ref.checksum = combined;

    const SpMat norm = read_triplets(source.dir / role_file(order, "norm"));
    const SpMat d2 = read_triplets(source.dir / role_file(order, "d2"));
    const SpMat bderiv = read_triplets(source.dir / role_file(order, "bderiv"));
    ref.n_ref = static_cast<int>(norm.rows());
    if (norm.cols() != 1 || d2.rows() != ref.n_ref || d2.cols() != ref.n_ref || bderiv.rows() != 2
        || bderiv.cols() != ref.n_ref)
        throw InvariantError("inconsistent shapes in order-" + std::to_string(order) + " data files");
    ref.weights = Eigen::MatrixXd(norm).col(0);
    ref.d2 = Eigen::MatrixXd(d2);
    const Eigen::MatrixXd rows = Eigen::MatrixXd(bderiv);
    ref.d_left = rows.row(0).transpose();
    ref.d_right = rows.row(1).transpose();

    const int n = ref.n_ref;
    const int p = ref.p;
    const int mid = n / 2;
    if (mid - p < 0 || mid + p >= n) throw InvariantError("reference grid too short for the stencil");
    ref.stencil = ref.d2.row(mid).segment(mid - p, 2 * p + 1).transpose();

    const double scale = ref.stencil.cwiseAbs().maxCoeff();
    auto is_interior = [&](int i) {
        for (int j = 0; j < n; ++j) {
            const int off = j - i;
            const double expected = std::abs(off) <= p ? ref.stencil(off + p) : 0.0;
            if (std::abs(ref.d2(i, j) - expected) > 1e-14 * scale) return false;
        }
        return std::abs(ref.weights(i) - 1.0) <= 1e-15;
    };
    int closure = 0;
    for (int i = 0; i < mid; ++i)
        if (!is_interior(i) || !is_interior(n - 1 - i)) closure = i + 1;
    if (2 * closure + 1 > n) throw InvariantError("reference grid has no interior rows");
    // the interior stencil must be the same beyond the closure
    for (int i = closure; i < n - closure; ++i)
        if (!is_interior(i)) throw InvariantError("non-repeating interior row in reference data");
    ref.closure = closure;
    return ref;
}

struct GammaKey {
    int order;
    int n;
    std::uint64_t checksum;
    auto operator<=>(const GammaKey&) const = default;
};

std::mutex gamma_mutex;
std::map<GammaKey, double> gamma_cache;

SbpOperator1D expand(int order, const Grid1D& grid, const ReferenceData& ref)
{
    const int n = grid.n;
    const int r = ref.closure;
    const int p = ref.p;
    const int n_ref = ref.n_ref;
    if (n < 2 * r + 1)
        throw ConfigError("grid with " + std::to_string(n) + " points too short for order " + std::to_string(order)
                          + " (needs " + std::to_string(2 * r + 1) + ")");
    const double h = grid.h;

    SbpOperator1D op;
    op.order_interior = order;
    op.closure_width = r;
    op.grid = grid;

    op.h_weights = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < r; ++i) {
        op.h_weights(i) = ref.weights(i);
        op.h_weights(n - 1 - i) = ref.weights(n_ref - 1 - i);
    }
    op.h_weights *= h;

    std::vector<Eigen::Triplet<double>> entries;
    const double inv_h2 = 1.0 / (h * h);
    auto closure_row = [&](int ref_row, int row) {
        for (int j = 0; j < n_ref; ++j) {
            const double value = ref.d2(ref_row, j);
            if (value == 0.0) continue;
            // left closures index from the left end, right closures from the right end
            const int col = ref_row < r ? j : n - n_ref + j;
            if (col < 0 || col >= n) throw ConfigError("closure stencil exceeds the grid");
            entries.emplace_back(row, col, value * inv_h2);
        }
    };
    for (int i = 0; i < r; ++i) {
        closure_row(i, i);
        closure_row(n_ref - 1 - i, n - 1 - i);
    }
    for (int i = r; i < n - r; ++i)
        for (int off = -p; off <= p; ++off)
            if (ref.stencil(off + p) != 0.0) entries.emplace_back(i, i + off, ref.stencil(off + p) * inv_h2);
    op.d2.resize(n, n);
    op.d2.setFromTriplets(entries.begin(), entries.end());

    op.e_left = Eigen::VectorXd::Zero(n);
    op.e_right = Eigen::VectorXd::Zero(n);
    op.e_left(0) = 1.0;
    op.e_right(n - 1) = 1.0;
    op.d_left = Eigen::VectorXd::Zero(n);
    op.d_right = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n_ref; ++j) {
        if (ref.d_left(j) != 0.0) {
            if (j >= n) throw ConfigError("boundary derivative stencil exceeds the grid");
            op.d_left(j) = ref.d_left(j) / h;
        }
        if (ref.d_right(j) != 0.0) {
            const int col = n - n_ref + j;
            if (col < 0) throw ConfigError("boundary derivative stencil exceeds the grid");
            op.d_right(col) = ref.d_right(j) / h;
        }
    }

    const SpMat hd2 = op.h_weights.asDiagonal() * op.d2;
    const SpMat boundary = (op.e_right * op.d_right.transpose() - op.e_left * op.d_left.transpose()).sparseView();
    op.remainder = (boundary - hd2).pruned();

    return op;
}

// Computes gamma once per (order, size, data); an indefinite remainder leaves it at zero.
double cached_gamma(const SbpOperator1D& op, const ReferenceData& ref)
{
    const GammaKey key{op.order_interior, op.size(), ref.checksum};
    {
        const std::lock_guard lock(gamma_mutex);
        if (const auto it = gamma_cache.find(key); it != gamma_cache.end()) return it->second;
    }
    double gamma = 0.0;
    try {
        gamma = borrowing_constant(op);
    } catch (const InvariantError&) {
        gamma = 0.0;
    }
    const std::lock_guard lock(gamma_mutex);
    gamma_cache[key] = gamma;
    return gamma;
}

Eigen::VectorXd normalized(const Grid1D& grid)
{
    const double mid = 0.5 * (grid.x_left + grid.x_right);
    const double half = 0.5 * grid.length();
    return (grid.points.array() - mid) / half;
}

double max_abs_eigenvalue(const Eigen::VectorXd& eigenvalues)
{
    return eigenvalues.cwiseAbs().maxCoeff();
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& a)
{
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

Eigen::MatrixXd borrowing_matrix(const SbpOperator1D& op)
{
    return op.h() * (op.d_right * op.d_right.transpose() + op.d_left * op.d_left.transpose());
}

// Largest degree k <= max_degree such that rows [first, last) of `a` map t^j to
// expected(j) for every j <= k; -1 if even constants fail.
template <class Expected>
int max_exact_degree(const Eigen::MatrixXd& a, int first, int last, const Eigen::VectorXd& t,
                     int max_degree, Expected expected)
{
    for (int k = 0; k <= max_degree; ++k) {
        const Eigen::VectorXd samples = t.array().pow(k);
        const Eigen::VectorXd applied = a.middleRows(first, last - first) * samples;
        const Eigen::VectorXd target = expected(k).segment(first, last - first);
        for (int i = 0; i < last - first; ++i) {
            const double scale = a.row(first + i).cwiseAbs().sum();
            if (std::abs(applied(i) - target(i)) > kExactTol * std::max(scale, 1.0)) return k - 1;
        }
    }
    return max_degree;
}

// The same closures and interior stencil on the shortest grid that holds them.
// Orders measured on a fine grid can exceed the true ones because the error
// terms fall below the tolerance; on the short grid they stay measurable.
SbpOperator1D probe_operator(const SbpOperator1D& op)
{
    const int n = op.size();
    const int r = op.closure_width;
    const int p = op.p();
    const Eigen::MatrixXd d2 = Eigen::MatrixXd(op.d2);
    int reach = r + p;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < n; ++j)
            if (d2(i, j) != 0.0) reach = std::max(reach, j + 1);
    for (int j = 0; j < n; ++j)
        if (op.d_left(j) != 0.0) reach = std::max(reach, j + 1);
    const int n_probe = std::max(2 * reach + 1, 2 * r + 2 * p + 3);
    if (n_probe >= n) return op;

    const double h = op.h();
    SbpOperator1D probe = op;
    probe.grid = Grid1D::uniform(n_probe, op.grid.x_left, op.grid.x_left + (n_probe - 1) * h);
    probe.h_weights = Eigen::VectorXd::Constant(n_probe, h);
    probe.e_left = Eigen::VectorXd::Zero(n_probe);
    probe.e_right = Eigen::VectorXd::Zero(n_probe);
    probe.e_left(0) = 1.0;
    probe.e_right(n_probe - 1) = 1.0;
    probe.d_left = Eigen::VectorXd::Zero(n_probe);
    probe.d_right = Eigen::VectorXd::Zero(n_probe);
    const int shift = n - n_probe;
    for (int i = 0; i < r; ++i) {
        probe.h_weights(i) = op.h_weights(i);
        probe.h_weights(n_probe - 1 - i) = op.h_weights(n - 1 - i);
    }
    for (int j = 0; j < reach; ++j) {
        probe.d_left(j) = op.d_left(j);
        probe.d_right(n_probe - 1 - j) = op.d_right(n - 1 - j);
    }
    std::vector<Eigen::Triplet<double>> entries;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < reach; ++j) {
            if (d2(i, j) != 0.0) entries.emplace_back(i, j, d2(i, j));
            const int row = n - 1 - i;
            const int col = n - 1 - j;
            if (d2(row, col) != 0.0) entries.emplace_back(row - shift, col - shift, d2(row, col));
        }
    const int mid = n / 2;
    for (int i = r; i < n_probe - r; ++i)
        for (int off = -p; off <= p; ++off)
            if (d2(mid, mid + off) != 0.0) entries.emplace_back(i, i + off, d2(mid, mid + off));
    probe.d2.resize(n_probe, n_probe);
    probe.d2.setFromTriplets(entries.begin(), entries.end());
    return probe;
}

struct MeasuredOrders {
    int quadrature = 0;
    int interior_degree = 0;
    int boundary_degree = 0;
    int derivative = 0;
};

MeasuredOrders measure_orders(const SbpOperator1D& op)
{
    MeasuredOrders out;
    const int n = op.size();
    const int p = op.p();
    const int r = op.closure_width;
    const Eigen::VectorXd t = normalized(op.grid);
    const double half = 0.5 * op.grid.length();
    const Eigen::MatrixXd d2 = Eigen::MatrixXd(op.d2);
    const int degree_cap = 2 * p + 3;
    out.quadrature = quadrature_order(op.h_weights, op.grid.points);

    auto second_derivative = [&](int k) -> Eigen::VectorXd {
        if (k < 2) return Eigen::VectorXd::Zero(n);
        return (k * (k - 1) / (half * half)) * t.array().pow(k - 2).matrix();
    };
    out.interior_degree =
        n > 2 * r ? max_exact_degree(d2, r, n - r, t, degree_cap, second_derivative) : degree_cap;
    out.boundary_degree = std::min(max_exact_degree(d2, 0, r, t, degree_cap, second_derivative),
                                   max_exact_degree(d2, n - r, n, t, degree_cap, second_derivative));

    Eigen::MatrixXd drows(2, n);
    drows.row(0) = op.d_left.transpose();
    drows.row(1) = op.d_right.transpose();
    auto first_derivative = [&](int k) -> Eigen::VectorXd {
        Eigen::VectorXd v(2);
        v(0) = k == 0 ? 0.0 : k * std::pow(t(0), k - 1) / half;
        v(1) = k == 0 ? 0.0 : k * std::pow(t(n - 1), k - 1) / half;
        return v;
    };
    out.derivative = max_exact_degree(drows, 0, 2, t, degree_cap, first_derivative);
    return out;
}

MeasuredOrders combined_orders(const SbpOperator1D& op)
{
    const MeasuredOrders own = measure_orders(op);
    const MeasuredOrders probe = measure_orders(probe_operator(op));
    return {std::min(own.quadrature, probe.quadrature), std::min(own.interior_degree, probe.interior_degree),
            std::min(own.boundary_degree, probe.boundary_degree), std::min(own.derivative, probe.derivative)};
}

}  // namespace

Grid1D Grid1D::uniform(int n, double x_left, double x_right)
{
    if (n < 2) throw ConfigError("grid needs at least two points");
    if (!(x_right > x_left)) throw ConfigError("grid endpoints must be increasing");
    Grid1D g;
    g.n = n;
    g.x_left = x_left;
    g.x_right = x_right;
    g.h = (x_right - x_left) / (n - 1);
    g.points = Eigen::VectorXd::LinSpaced(n, x_left, x_right);
    return g;
}

SbpDataSource SbpDataSource::shipped()
{
    return SbpDataSource{default_data_dir(), true};
}

std::filesystem::path default_data_dir()
{
    if (const char* env = std::getenv("SBPSAT_DATA_DIR"); env != nullptr && *env != '\0') return env;
    return SBPSAT_DEFAULT_DATA_DIR;
}

const std::vector<int>& supported_orders()
{
    static const std::vector<int> orders{2, 4, 6, 8};
    return orders;
}

int closure_width(int order_interior, const SbpDataSource& source)
{
    return read_reference(order_interior, source).closure;
}

SbpOperator1D load_sbp_unchecked(int order_interior, const Grid1D& grid, const SbpDataSource& source)
{
    const ReferenceData ref = read_reference(order_interior, source);
    SbpOperator1D op = expand(order_interior, grid, ref);
    op.gamma = cached_gamma(op, ref);
    return op;
}

SbpOperator1D load_sbp(int order_interior, const Grid1D& grid, const SbpDataSource& source)
{
    SbpOperator1D op = load_sbp_unchecked(order_interior, grid, source);
    const VerificationReport report = verify_operator(op);
    if (!report.passed())
        throw InvariantError("order-" + std::to_string(order_interior) + " operator data failed verification: "
                             + report.summary());
    return op;
}

int quadrature_order(const Eigen::VectorXd& weights, const Eigen::VectorXd& points, int max_degree)
{
    const double a = points(0);
    const double b = points(points.size() - 1);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const Eigen::ArrayXd t = (points.array() - mid) / half;
    for (int j = 0; j < max_degree; ++j) {
        const double sum = (weights.array() * t.pow(j)).sum();
        const double exact = j % 2 == 0 ? 2.0 * half / (j + 1) : 0.0;
        if (std::abs(sum - exact) > 1e-10 * (2.0 * half / (j + 1))) return j;
    }
    return max_degree;
}

int quadrature_order(const SbpOperator1D& op)
{
    return combined_orders(op).quadrature;
}

double shifted_remainder_min_eigenvalue(const SbpOperator1D& op, double gamma)
{
    const Eigen::MatrixXd shifted = Eigen::MatrixXd(op.remainder) - gamma * borrowing_matrix(op);
    return symmetric_eigenvalues(0.5 * (shifted + shifted.transpose()))(0);
}

double borrowing_constant(const SbpOperator1D& op, double tol)
{
    const Eigen::MatrixXd m = Eigen::MatrixXd(op.remainder);
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    const Eigen::VectorXd eig = symmetric_eigenvalues(sym);
    const double floor = -kPsdTol * max_abs_eigenvalue(eig);
    if (eig(0) < floor) throw InvariantError("remainder is not positive semidefinite");
    const Eigen::MatrixXd b = borrowing_matrix(op);
    auto feasible = [&](double gamma) { return symmetric_eigenvalues(sym - gamma * b)(0) >= floor; };

    double lower = 0.0;
    double upper = 1.0;
    while (feasible(upper)) {
        lower = upper;
        upper *= 2.0;
        if (upper > 1e8) throw InvariantError("borrowing bisection did not find an infeasible bound");
    }
    while (upper - lower > tol) {
        const double mid = 0.5 * (lower + upper);
        (feasible(mid) ? lower : upper) = mid;
    }
    return lower;
}

bool VerificationReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.passed; });
}

const InvariantCheck* VerificationReport::find(const std::string& name) const
{
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string VerificationReport::summary() const
{
    std::ostringstream out;
    bool first = true;
    for (const auto& c : checks) {
        if (c.passed) continue;
        out << (first ? "" : "; ") << c.name << " (measured " << c.measured << ", threshold " << c.threshold << ")";
        first = false;
    }
    return first ? "all checks passed" : out.str();
}

VerificationReport verify_operator(const SbpOperator1D& op)
{
    VerificationReport report;
    report.order_interior = op.order_interior;
    report.gamma = op.gamma;
    const int n = op.size();
    const int p = op.p();
    auto add = [&](std::string name, bool passed, double measured, double threshold, std::string detail = {}) {
        report.checks.push_back({std::move(name), passed, measured, threshold, std::move(detail)});
    };

    add("weights_positive", op.h_weights.minCoeff() > 0.0, op.h_weights.minCoeff(), 0.0);
    const double sum_err = std::abs(op.h_weights.sum() - op.grid.length()) / op.grid.length();
    add("weights_sum", sum_err <= 1e-12, sum_err, 1e-12);

    const MeasuredOrders orders = combined_orders(op);
    report.quadrature_order = orders.quadrature;
    add("quadrature_order", report.quadrature_order == op.order_interior, report.quadrature_order,
        op.order_interior);

    const Eigen::MatrixXd m = Eigen::MatrixXd(op.remainder);
    const double m_max = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff() / m_max;
    add("remainder_symmetric", asym <= 1e-12, asym, 1e-12);

    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    const Eigen::VectorXd eig = symmetric_eigenvalues(sym);
    const double m_norm = max_abs_eigenvalue(eig);
    add("remainder_psd", eig(0) >= -kPsdTol * m_norm, eig(0) / m_norm, -kPsdTol);

    report.interior_accuracy = orders.interior_degree - 1;
    report.boundary_accuracy = orders.boundary_degree - 1;
    add("interior_accuracy", orders.interior_degree >= 2 * p, report.interior_accuracy, 2 * p,
        "exact through degree " + std::to_string(orders.interior_degree));
    add("boundary_accuracy", orders.boundary_degree >= p, report.boundary_accuracy, p,
        "exact through degree " + std::to_string(orders.boundary_degree));

    const bool extraction = op.e_left.size() == n && op.e_right.size() == n && op.e_left(0) == 1.0
                            && op.e_right(n - 1) == 1.0 && op.e_left.cwiseAbs().sum() == 1.0
                            && op.e_right.cwiseAbs().sum() == 1.0;
    add("boundary_extraction", extraction, extraction ? 0.0 : 1.0, 0.0);

    report.derivative_order = orders.derivative;
    add("boundary_derivative_order", report.derivative_order >= p + 1, report.derivative_order, p + 1);

    add("gamma_positive", op.gamma > 0.0, op.gamma, 0.0);
    const Eigen::MatrixXd b = borrowing_matrix(op);
    const double borrow_min = symmetric_eigenvalues(sym - op.gamma * b)(0) / m_norm;
    add("borrowing_psd", borrow_min >= -kPsdTol, borrow_min, -kPsdTol);
    const double beyond_min = symmetric_eigenvalues(sym - (op.gamma + 0.01) * b)(0) / m_norm;
    add("borrowing_maximal", beyond_min < -kPsdTol, beyond_min, -kPsdTol);

    // SBP identity on smooth samples
    const Eigen::VectorXd t = normalized(op.grid);
    const Eigen::VectorXd f = (1.3 * t.array()).sin() + 0.2;
    const Eigen::VectorXd g = (0.7 * t.array() + 0.4).cos();
    const double lhs = f.dot(op.h_weights.asDiagonal() * (op.d2 * g));
    const double rhs = -f.dot(op.remainder * g) + f(n - 1) * op.d_right.dot(g) - f(0) * op.d_left.dot(g);
    const double scale = f.cwiseAbs().sum() * (m.cwiseAbs() * g.cwiseAbs()).maxCoeff();
    const double identity_res = std::abs(lhs - rhs) / std::max(scale, 1e-300);
    add("sbp_identity", identity_res <= 1e-12, identity_res, 1e-12);
    return report;
}

}  // namespace sbpsat
