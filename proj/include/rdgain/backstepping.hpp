#pragma once

// Backstepping kernels on the triangle 0 <= y <= x <= 1, the Volterra
// transforms they define, and the boundary control laws.
//
// Direct kernel:   K_xx - K_yy = g(y) K,   g = (b + c) / eps
// Inverse kernel:  L_xx - L_yy = -g(x) L
// both with K(x,0) = 0 (q = +inf) or K_y(x,0) = q K(x,0), and
// K(x,x) = -(1/2) int_0^x g.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rdgain/csv.hpp"
#include "rdgain/errors.hpp"
#include "rdgain/numerics.hpp"
#include "rdgain/plant.hpp"

namespace rdgain {

enum class KernelKind { Direct, Inverse };

struct KernelDiagnostics {
    std::string method = "tabulated";
    int iterations = 0;
    double final_increment = 0.0;
    std::vector<double> increments;  // sup-norm Picard increments of the finest pass
};

struct KernelSolverOptions {
    double tol = 1e-10;
    int max_iter = 200;
    // Characteristic cells per grid cell on the coarse pass.
    int refine = 4;
    // Second pass at twice the resolution, combined by Richardson extrapolation.
    bool extrapolate = true;
};

/// Lower-triangular table K(x_i, y_k), k <= i, plus the derivative trace
/// K_x(1, y_k) when it has been computed.
class Kernel {
public:
    Kernel(Grid grid, KernelKind kind, std::vector<double> table, SampledCoefficient b, double c, double epsilon,
           double q, std::vector<double> x_derivative_trace = {}, KernelDiagnostics diagnostics = {})
        : grid_(grid),
          kind_(kind),
          table_(std::move(table)),
          trace_(std::move(x_derivative_trace)),
          b_(std::move(b)),
          c_(c),
          epsilon_(epsilon),
          q_(q),
          diagnostics_(std::move(diagnostics)),
          quadrature_(std::make_shared<const RowQuadrature>(grid)) {
        const std::size_t n = grid_.size();
        if (table_.size() != n * (n + 1) / 2) throw ValidationError("Kernel: table size does not match grid");
        if (!trace_.empty() && trace_.size() != n) throw ValidationError("Kernel: derivative trace size mismatch");
        require_same_grid(b_.grid(), grid_, "Kernel");
        for (double v : table_) {
            if (!std::isfinite(v)) throw NumericalError("Kernel: non-finite table entry");
        }
    }

    /// Kernel whose entries are f(x, y), attached to a zero coefficient. For
    /// tests and hand-built transforms.
    template <typename F>
    static Kernel tabulate(const Grid& grid, F&& f, KernelKind kind = KernelKind::Direct) {
        std::vector<double> table;
        table.reserve(grid.size() * (grid.size() + 1) / 2);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            for (std::size_t k = 0; k <= i; ++k) table.push_back(f(grid.x(i), grid.x(k)));
        }
        return Kernel(grid, kind, std::move(table), SampledCoefficient(Profile(grid), 0.0), 0.0, 1.0,
                      std::numeric_limits<double>::infinity());
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] KernelKind kind() const noexcept { return kind_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t k) const noexcept { return table_[offset(i) + k]; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
        return {table_.data() + offset(i), i + 1};
    }
    [[nodiscard]] const std::vector<double>& table() const noexcept { return table_; }
    [[nodiscard]] bool has_x_derivative_trace() const noexcept { return !trace_.empty(); }
    [[nodiscard]] const std::vector<double>& x_derivative_trace() const noexcept { return trace_; }
    [[nodiscard]] const SampledCoefficient& b() const noexcept { return b_; }
    [[nodiscard]] double c() const noexcept { return c_; }
    [[nodiscard]] double epsilon() const noexcept { return epsilon_; }
    [[nodiscard]] double q() const noexcept { return q_; }
    [[nodiscard]] const KernelDiagnostics& diagnostics() const noexcept { return diagnostics_; }
    [[nodiscard]] const RowQuadrature& quadrature() const noexcept { return *quadrature_; }

    [[nodiscard]] double max_abs() const noexcept {
        double m = 0.0;
        for (double v : table_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Sup-norm difference of two tables on the same grid.
    [[nodiscard]] double distance(const Kernel& other) const {
        require_same_grid(grid_, other.grid_, "Kernel::distance");
        double m = 0.0;
        for (std::size_t a = 0; a < table_.size(); ++a) m = std::max(m, std::abs(table_[a] - other.table_[a]));
        return m;
    }

    /// Columns x, y, K, one row per triangle node.
    [[nodiscard]] std::string to_csv() const {
        csv::Writer w({"x", "y", "K"});
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            for (std::size_t k = 0; k <= i; ++k) w.row(std::vector<double>{grid_.x(i), grid_.x(k), (*this)(i, k)});
        }
        return w.str();
    }

private:
    static std::size_t offset(std::size_t i) noexcept { return i * (i + 1) / 2; }

    Grid grid_;
    KernelKind kind_;
    std::vector<double> table_;
    std::vector<double> trace_;
    SampledCoefficient b_;
    double c_;
    double epsilon_;
    double q_;
    KernelDiagnostics diagnostics_;
    std::shared_ptr<const RowQuadrature> quadrature_;
};

namespace detail {

// Fixed-point solution of the kernel integral equation on the characteristic
// lattice xi = a*d, eta = b*d (0 <= b <= a, a + b <= 2M, d = 1/M). With
// G(xi, eta) = K((xi+eta)/2, (xi-eta)/2) the equation reads
//
//   G(xi, eta) = P(eta) - 1/4 int_eta^xi g(s/2) ds + sigma/4 int_eta^xi F(s, eta) ds,
//   F(s, eta)  = int_0^eta g((s -+ t)/2) G(s, t) dt,
//
// where sigma = +1, "-" for the direct kernel and sigma = -1, "+" for the
// inverse kernel. P vanishes for the Dirichlet condition; otherwise it solves
// P' + q P = 2 G_xi(eta, eta).
class CharacteristicSolver {
public:
    CharacteristicSolver(std::vector<double> g_half, double q, bool dirichlet, KernelKind kind)
        : gh_(std::move(g_half)),
          M_((gh_.size() - 1) / 2),
          d_(1.0 / static_cast<double>(M_)),
          q_(q),
          dirichlet_(dirichlet),
          sigma_(kind == KernelKind::Direct ? 1.0 : -1.0),
          direct_(kind == KernelKind::Direct) {
        A_.assign(2 * M_ + 1, 0.0);
        for (std::size_t a = 1; a <= 2 * M_; ++a) A_[a] = A_[a - 1] + 0.5 * d_ * (gh_[a - 1] + gh_[a]);
        G_.assign(offset(M_ + 1), 0.0);
    }

    void solve(double tol, int max_iter) {
        std::vector<double> next(G_.size());
        std::vector<double> fprev(2 * M_ + 1, 0.0), fcur(2 * M_ + 1, 0.0);
        for (int it = 1; it <= max_iter; ++it) {
            sweep(G_, next, fprev, fcur, nullptr);
            double inc = 0.0;
            for (std::size_t s = 0; s < next.size(); ++s) inc = std::max(inc, std::abs(next[s] - G_[s]));
            G_.swap(next);
            increments_.push_back(inc);
            if (!std::isfinite(inc)) {
                throw ConvergenceError(it, inc, "kernel solver: iteration diverged");
            }
            if (inc < tol) return;
        }
        throw ConvergenceError(max_iter, increments_.back(),
                               "kernel solver: no convergence within " + std::to_string(max_iter) +
                                   " iterations (last increment " + csv::format_double(increments_.back()) + ")");
    }

    // K(x, y) at lattice point x = (a+b)/2 d, y = (a-b)/2 d.
    [[nodiscard]] double at(std::size_t a, std::size_t b) const noexcept { return G_[offset(b) + (a - b)]; }

    /// K_x(1, y) at the lattice points of the x = 1 edge, indexed by b = M..0
    /// (y = (M - b) d), computed from the integral equation as G_xi + G_eta.
    [[nodiscard]] std::vector<double> x_derivative_edge() {
        std::vector<double> out(M_ + 1, 0.0);
        std::vector<double> next(G_.size());
        std::vector<double> fprev(2 * M_ + 1, 0.0), fcur(2 * M_ + 1, 0.0);
        sweep(G_, next, fprev, fcur, &out);
        return out;
    }

    [[nodiscard]] std::size_t cells() const noexcept { return M_; }
    [[nodiscard]] const std::vector<double>& increments() const noexcept { return increments_; }

private:
    [[nodiscard]] std::size_t offset(std::size_t b) const noexcept { return b * (2 * M_ + 1) - b * (b - 1); }

    [[nodiscard]] double weight(std::size_t a, std::size_t b) const noexcept {
        return direct_ ? gh_[a - b] : gh_[a + b];
    }

    // One application of the fixed-point map from `old` into `out`. When
    // `edge` is given, also evaluates G_xi + G_eta at the row ends a = 2M - b.
    void sweep(const std::vector<double>& old, std::vector<double>& out, std::vector<double>& fprev,
               std::vector<double>& fcur, std::vector<double>* edge) const {
        const double h2 = 0.5 * d_;
        const double decay = dirichlet_ ? 0.0 : std::exp(-q_ * d_);
        double P = 0.0;
        double D_prev = 0.0;
        std::fill(fprev.begin(), fprev.end(), 0.0);
        for (std::size_t b = 0; b <= M_; ++b) {
            const std::size_t last = 2 * M_ - b;
            const double* gcur = old.data() + offset(b);
            // F(a, b) = F(a, b-1) + d/2 (w(a,b-1) G(a,b-1) + w(a,b) G(a,b))
            if (b == 0) {
                for (std::size_t a = 0; a <= last; ++a) fcur[a] = 0.0;
            } else {
                const double* gprev = old.data() + offset(b - 1);
                for (std::size_t a = b; a <= last; ++a) {
                    fcur[a] = fprev[a] + h2 * (weight(a, b - 1) * gprev[a - (b - 1)] + weight(a, b) * gcur[a - b]);
                }
            }
            const double D = -0.25 * gh_[b] + 0.25 * sigma_ * fcur[b];
            if (!dirichlet_) {
                P = b == 0 ? 0.0 : decay * P + h2 * (decay * 2.0 * D_prev + 2.0 * D);
            }
            D_prev = D;

            double* row = out.data() + offset(b);
            double B = 0.0;
            row[0] = P;
            for (std::size_t a = b + 1; a <= last; ++a) {
                B += h2 * (fcur[a - 1] + fcur[a]);
                row[a - b] = P - 0.25 * (A_[a] - A_[b]) + 0.25 * sigma_ * B;
            }

            if (edge) {
                // d/d eta of  int_eta^xi F(s, eta) ds  =  -F(eta, eta) + int_eta^xi F_eta(s, eta) ds
                double I = 0.0;
                for (std::size_t a = b + 1; a <= last; ++a) {
                    I += h2 * (weight(a - 1, b) * gcur[a - 1 - b] + weight(a, b) * gcur[a - b]);
                }
                const double g_xi = -0.25 * gh_[last] + 0.25 * sigma_ * fcur[last];
                const double p_prime = dirichlet_ ? 0.0 : 2.0 * D - q_ * P;
                const double g_eta = p_prime + 0.25 * gh_[b] - 0.25 * sigma_ * fcur[b] + 0.25 * sigma_ * I;
                (*edge)[b] = g_xi + g_eta;
            }
            fprev.swap(fcur);
        }
    }

    std::vector<double> gh_;
    std::size_t M_;
    double d_;
    double q_;
    bool dirichlet_;
    double sigma_;
    bool direct_;
    std::vector<double> A_;
    std::vector<double> G_;
    std::vector<double> increments_;
};

struct LatticeKernel {
    std::vector<double> table;
    std::vector<double> trace;
    std::vector<double> increments;
};

inline LatticeKernel solve_on_lattice(const SampledCoefficient& b, double c, double epsilon, double q,
                                      const Grid& grid, KernelKind kind, std::size_t refine, double tol,
                                      int max_iter, bool with_trace) {
    const std::size_t n = grid.size();
    const std::size_t M = (n - 1) * refine;
    std::vector<double> gh(2 * M + 1);
    for (std::size_t k = 0; k <= 2 * M; ++k) {
        const double x = k == 2 * M ? 1.0 : static_cast<double>(k) / static_cast<double>(2 * M);
        gh[k] = (b(x) + c) / epsilon;
        if (!std::isfinite(gh[k])) throw NumericalError("kernel solver: non-finite coefficient sample");
    }
    const bool dirichlet = std::isinf(q);
    CharacteristicSolver solver(std::move(gh), q, dirichlet, kind);
    solver.solve(tol, max_iter);

    LatticeKernel out;
    out.table.reserve(n * (n + 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k <= i; ++k) out.table.push_back(solver.at(refine * (i + k), refine * (i - k)));
    }
    if (with_trace) {
        const auto edge = solver.x_derivative_edge();
        out.trace.resize(n);
        for (std::size_t k = 0; k < n; ++k) out.trace[k] = edge[refine * (n - 1 - k)];
    }
    out.increments = solver.increments();
    return out;
}

inline Kernel solve_kernel(const SampledCoefficient& b, double c, double epsilon, double q, const Grid& grid,
                           KernelKind kind, const KernelSolverOptions& opts) {
    if (!(opts.tol > 0.0)) throw ValidationError("kernel solver: tol must be positive");
    if (opts.max_iter < 1) throw ValidationError("kernel solver: max_iter must be at least 1");
    if (opts.refine < 1) throw ValidationError("kernel solver: refine must be at least 1");
    if (!(epsilon > 0.0)) throw ValidationError("kernel solver: epsilon must be positive");
    if (std::isnan(q) || (std::isinf(q) && q < 0.0)) throw ValidationError("kernel solver: invalid q");
    require_same_grid(b.grid(), grid, "kernel solver");

    const auto r = static_cast<std::size_t>(opts.refine);
    auto coarse = solve_on_lattice(b, c, epsilon, q, grid, kind, r, opts.tol, opts.max_iter, true);
    KernelDiagnostics diag;
    diag.method = "successive-approximation";
    if (!opts.extrapolate) {
        diag.iterations = static_cast<int>(coarse.increments.size());
        diag.final_increment = coarse.increments.back();
        diag.increments = coarse.increments;
        return Kernel(grid, kind, std::move(coarse.table), b, c, epsilon, q, std::move(coarse.trace),
                      std::move(diag));
    }
    auto fine = solve_on_lattice(b, c, epsilon, q, grid, kind, 2 * r, opts.tol, opts.max_iter, true);
    std::vector<double> table(fine.table.size()), trace(fine.trace.size());
    for (std::size_t s = 0; s < table.size(); ++s) table[s] = (4.0 * fine.table[s] - coarse.table[s]) / 3.0;
    for (std::size_t s = 0; s < trace.size(); ++s) trace[s] = (4.0 * fine.trace[s] - coarse.trace[s]) / 3.0;
    diag.iterations = static_cast<int>(std::max(coarse.increments.size(), fine.increments.size()));
    diag.final_increment = std::max(coarse.increments.back(), fine.increments.back());
    diag.increments = std::move(fine.increments);
    return Kernel(grid, kind, std::move(table), b, c, epsilon, q, std::move(trace), std::move(diag));
}

}  // namespace detail

/// Direct kernel K by successive approximations in characteristic coordinates.
inline Kernel solve_kernel_numeric(const SampledCoefficient& b, double c, double epsilon, double q, const Grid& grid,
                                   const KernelSolverOptions& opts = {}) {
    return detail::solve_kernel(b, c, epsilon, q, grid, KernelKind::Direct, opts);
}

/// Inverse kernel L; same boundary and trace conditions, reaction term -g(x) L.
inline Kernel solve_inverse_kernel(const SampledCoefficient& b, double c, double epsilon, double q, const Grid& grid,
                                   const KernelSolverOptions& opts = {}) {
    return detail::solve_kernel(b, c, epsilon, q, grid, KernelKind::Inverse, opts);
}

/// K(x, y) for b(x) = lt + 50/cosh^2(5x), c = 0, eps = 1, q = +inf:
///   K = -lt y I1(z)/z - 5 tanh(5y) I0(z),   z = sqrt(lt (x^2 - y^2)).
inline double closed_form_kernel_value(double lambda_tilde, double x, double y) {
    const double z = std::sqrt(std::max(0.0, lambda_tilde * (x * x - y * y)));
    const double i1_over_z = z < 1e-6 ? 0.5 : bessel_i1(z) / z;
    return -lambda_tilde * y * i1_over_z - 5.0 * std::tanh(5.0 * y) * bessel_i0(z);
}

/// d/dx of the closed form, for Neumann use of the closed-form kernel.
inline double closed_form_kernel_dx(double lambda_tilde, double x, double y) {
    const double z = std::sqrt(std::max(0.0, lambda_tilde * (x * x - y * y)));
    // d/dz (I1/z) = I2/z = (I0 - 2 I1/z)/z ;  dz/dx = lt x / z
    double d_i1z_dx;
    double d_i0_dx;
    if (z < 1e-6) {
        d_i1z_dx = lambda_tilde * x / 8.0;
        d_i0_dx = 0.5 * lambda_tilde * x;
    } else {
        const double i0 = bessel_i0(z), i1 = bessel_i1(z);
        const double dzdx = lambda_tilde * x / z;
        d_i1z_dx = (i0 - 2.0 * i1 / z) / z * dzdx;
        d_i0_dx = i1 * dzdx;
    }
    return -lambda_tilde * y * d_i1z_dx - 5.0 * std::tanh(5.0 * y) * d_i0_dx;
}

inline Kernel solve_kernel_closed_form(double lambda_tilde, const Grid& grid, double sample_time = 0.0) {
    if (!(lambda_tilde > 0.0) || !std::isfinite(lambda_tilde)) {
        throw ValidationError("solve_kernel_closed_form: lambda_tilde must be positive");
    }
    std::vector<double> table;
    table.reserve(grid.size() * (grid.size() + 1) / 2);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t k = 0; k <= i; ++k) table.push_back(closed_form_kernel_value(lambda_tilde, grid.x(i), grid.x(k)));
    }
    std::vector<double> trace(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) trace[k] = closed_form_kernel_dx(lambda_tilde, 1.0, grid.x(k));
    auto shape = [lambda_tilde](double x) {
        const double s = 1.0 / std::cosh(5.0 * x);
        return lambda_tilde + 50.0 * s * s;
    };
    SampledCoefficient b(Profile::from_function(grid, shape), sample_time, shape);
    KernelDiagnostics diag;
    diag.method = "closed-form";
    return Kernel(grid, KernelKind::Direct, std::move(table), std::move(b), 0.0, 1.0,
                  std::numeric_limits<double>::infinity(), std::move(trace), std::move(diag));
}

namespace detail {

inline Profile volterra(const Kernel& K, const Profile& u, double sign, const char* where) {
    require_same_grid(K.grid(), u.grid(), where);
    const std::size_t n = u.size();
    std::vector<double> out(n);
    const auto& quad = K.quadrature();
    for (std::size_t i = 0; i < n; ++i) {
        const auto w = quad.row(i);
        const auto k = K.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j <= i; ++j) s += w[j] * k[j] * u[j];
        out[i] = u[i] + sign * s;
    }
    return Profile(u.grid(), std::move(out));
}

}  // namespace detail

/// w(x) = u(x) - int_0^x K(x, y) u(y) dy.
inline Profile direct_transform(const Kernel& K, const Profile& u) {
    return detail::volterra(K, u, -1.0, "direct_transform");
}

/// u(x) = w(x) + int_0^x L(x, y) w(y) dy.
inline Profile inverse_transform(const Kernel& L, const Profile& w) {
    return detail::volterra(L, w, 1.0, "inverse_transform");
}

/// Boundary input: int_0^1 K(1,y) u dy (Dirichlet) or
/// K(1,1) u(1) + int_0^1 K_x(1,y) u dy (Neumann).
inline double control_value(const Kernel& K, const Profile& u, Actuation actuation) {
    require_same_grid(K.grid(), u.grid(), "control_value");
    const std::size_t last = u.size() - 1;
    const auto w = K.quadrature().row(last);
    if (actuation == Actuation::Dirichlet) {
        const auto k = K.row(last);
        double s = 0.0;
        for (std::size_t j = 0; j <= last; ++j) s += w[j] * k[j] * u[j];
        return s;
    }
    if (!K.has_x_derivative_trace()) {
        throw ValidationError("control_value: Neumann actuation needs the kernel's x-derivative trace");
    }
    const auto& kx = K.x_derivative_trace();
    double s = K(last, last) * u[last];
    for (std::size_t j = 0; j <= last; ++j) s += w[j] * kx[j] * u[j];
    return s;
}

/// 1 + (int_0^1 int_0^x K(x,y)^2 dy dx)^{1/2}, nested trapezoid.
inline double transform_bound(const Kernel& K) {
    const Grid& grid = K.grid();
    const double h = grid.step();
    std::vector<double> inner(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const auto k = K.row(i);
        double s = 0.5 * (k[0] * k[0] + k[i] * k[i]);
        for (std::size_t j = 1; j < i; ++j) s += k[j] * k[j];
        inner[i] = s * h;
    }
    double outer = 0.5 * (inner.front() + inner.back());
    for (std::size_t i = 1; i + 1 < inner.size(); ++i) outer += inner[i];
    return 1.0 + std::sqrt(outer * h);
}

/// Trapezoid antiderivative  -(1/(2 eps)) int_0^{x_i} (b + c)  at every node,
/// the value the kernel diagonal must take.
inline std::vector<double> kernel_trace_target(const SampledCoefficient& b, double c, double epsilon,
                                               std::size_t refine = 64) {
    const Grid& grid = b.grid();
    const std::size_t n = grid.size();
    const double d = grid.step() / static_cast<double>(refine);
    std::vector<double> out(n, 0.0);
    double acc = 0.0;
    double prev = b(0.0) + c;
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t s = 1; s <= refine; ++s) {
            const double x = s == refine ? grid.x(i) : grid.x(i - 1) + static_cast<double>(s) * d;
            const double v = b(x) + c;
            acc += 0.5 * d * (prev + v);
            prev = v;
        }
        out[i] = -acc / (2.0 * epsilon);
    }
    return out;
}

/// Sup-norm of the second-order divided-difference residual
/// K_xx - K_yy - g(y) K (direct) or K_xx - K_yy + g(x) K (inverse) over the
/// interior nodes 1 <= k <= i-1, i <= n-2.
inline double kernel_pde_residual(const Kernel& K) {
    const Grid& grid = K.grid();
    const std::size_t n = grid.size();
    const double h2 = grid.step() * grid.step();
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = (K.b().values()[i] + K.c()) / K.epsilon();
    double m = 0.0;
    for (std::size_t i = 2; i + 1 < n; ++i) {
        for (std::size_t k = 1; k + 1 <= i; ++k) {
            const double kxx = (K(i + 1, k) - 2.0 * K(i, k) + K(i - 1, k)) / h2;
            const double kyy = (K(i, k + 1) - 2.0 * K(i, k) + K(i, k - 1)) / h2;
            const double react = K.kind() == KernelKind::Direct ? g[k] * K(i, k) : -g[i] * K(i, k);
            m = std::max(m, std::abs(kxx - kyy - react));
        }
    }
    return m;
}

}  // namespace rdgain
