#include "elastinv/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace elastinv {

SparseOperator SparseOperator::from_triplets(std::size_t n, std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
        if (t.row >= n || t.col >= n) throw std::out_of_range("triplet index outside the operator");
    }
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row < b.row || (a.row == b.row && a.col < b.col);
    });
    SparseOperator op;
    op.n_ = n;
    op.row_ptr_.assign(n + 1, 0);
    for (std::size_t k = 0; k < triplets.size();) {
        const auto row = triplets[k].row, col = triplets[k].col;
        double v = 0.0;
        while (k < triplets.size() && triplets[k].row == row && triplets[k].col == col) v += triplets[k++].value;
        op.cols_.push_back(col);
        op.values_.push_back(v);
        ++op.row_ptr_[row + 1];
    }
    std::partial_sum(op.row_ptr_.begin(), op.row_ptr_.end(), op.row_ptr_.begin());
    return op;
}

void SparseOperator::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != n_ || y.size() != n_) throw std::invalid_argument("operator/vector size mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
        y[i] = s;
    }
}

std::vector<double> SparseOperator::operator*(std::span<const double> x) const {
    std::vector<double> y(n_);
    multiply(x, y);
    return y;
}

double SparseOperator::at(std::size_t row, std::size_t col) const {
    const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_.at(row));
    const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_.at(row + 1));
    const auto it = std::lower_bound(first, last, col);
    return (it != last && *it == col) ? values_[static_cast<std::size_t>(it - cols_.begin())] : 0.0;
}

std::vector<double> SparseOperator::diagonal() const {
    std::vector<double> d(n_);
    for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
    return d;
}

double SparseOperator::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double SparseOperator::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double SparseOperator::symmetry_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            worst = std::max(worst, std::abs(values_[k] - at(cols_[k], i)));
        }
    }
    const double scale = max_abs();
    return scale > 0.0 ? worst / scale : 0.0;
}

SparseOperator SparseOperator::add_scaled(const SparseOperator& other, double s) const {
    if (other.n_ != n_) throw std::invalid_argument("add_scaled: operator sizes differ");
    SparseOperator out;
    out.n_ = n_;
    out.row_ptr_.assign(n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) {
        std::size_t a = row_ptr_[i], b = other.row_ptr_[i];
        const std::size_t ae = row_ptr_[i + 1], be = other.row_ptr_[i + 1];
        while (a < ae || b < be) {
            if (b == be || (a < ae && cols_[a] < other.cols_[b])) {
                out.cols_.push_back(cols_[a]);
                out.values_.push_back(values_[a++]);
            } else if (a == ae || other.cols_[b] < cols_[a]) {
                out.cols_.push_back(other.cols_[b]);
                out.values_.push_back(s * other.values_[b++]);
            } else {
                out.cols_.push_back(cols_[a]);
                out.values_.push_back(values_[a++] + s * other.values_[b++]);
            }
        }
        out.row_ptr_[i + 1] = out.cols_.size();
    }
    return out;
}

SparseOperator SparseOperator::with_identity_rows(const std::vector<int>& dofs) const {
    std::vector<char> fixed(n_, 0);
    for (int d : dofs) fixed.at(static_cast<std::size_t>(d)) = 1;
    SparseOperator out;
    out.n_ = n_;
    out.row_ptr_.assign(n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) {
        if (fixed[i]) {
            out.cols_.push_back(i);
            out.values_.push_back(1.0);
        } else {
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                if (fixed[cols_[k]]) continue;
                out.cols_.push_back(cols_[k]);
                out.values_.push_back(values_[k]);
            }
        }
        out.row_ptr_[i + 1] = out.cols_.size();
    }
    return out;
}

namespace {

// Local P1 mass pattern on a triangle of unit area: (1 + delta_ij) / 12.
constexpr double kMassLocal[3][3] = {{2.0 / 12, 1.0 / 12, 1.0 / 12},
                                     {1.0 / 12, 2.0 / 12, 1.0 / 12},
                                     {1.0 / 12, 1.0 / 12, 2.0 / 12}};

std::array<std::array<double, 3>, 3> element_mass(const Mesh& mesh, std::size_t t, const ScalarField& rho,
                                                  QuadratureRule rule) {
    const auto& tri = mesh.triangle(t);
    const double area = mesh.area(t);
    std::array<std::array<double, 3>, 3> m{};
    if (rule == QuadratureRule::centroid) {
        const double r = (rho[tri[0]] + rho[tri[1]] + rho[tri[2]]) / 3.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] = r * area * kMassLocal[i][j];
        return m;
    }
    // midpoint of edge (k, k+1): phi_k = phi_{k+1} = 1/2
    for (int q = 0; q < 3; ++q) {
        const int a = q, b = (q + 1) % 3;
        const double r = 0.5 * (rho[tri[a]] + rho[tri[b]]);
        double phi[3] = {0.0, 0.0, 0.0};
        phi[a] = phi[b] = 0.5;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] += (area / 3.0) * r * phi[i] * phi[j];
    }
    return m;
}

}  // namespace

SparseOperator assemble_mass(const Mesh& mesh, const ScalarField& rho, QuadratureRule rule) {
    check_size(mesh, rho, "assemble_mass");
    for (double r : rho.values) {
        if (!(r > 0.0)) throw std::invalid_argument("assemble_mass: density must be positive");
    }
    std::vector<Triplet> trip;
    trip.reserve(mesh.triangle_count() * 18);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangle(t);
        const auto m = element_mass(mesh, t, rho, rule);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (std::size_t c = 0; c < 2; ++c) {
                    trip.push_back({2 * static_cast<std::size_t>(tri[i]) + c,
                                    2 * static_cast<std::size_t>(tri[j]) + c, m[i][j]});
                }
    }
    return SparseOperator::from_triplets(2 * mesh.node_count(), std::move(trip));
}

SparseOperator assemble_scalar_mass(const Mesh& mesh) {
    const ScalarField one(mesh.node_count(), 1.0);
    std::vector<Triplet> trip;
    trip.reserve(mesh.triangle_count() * 9);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangle(t);
        const auto m = element_mass(mesh, t, one, QuadratureRule::centroid);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.push_back({static_cast<std::size_t>(tri[i]), static_cast<std::size_t>(tri[j]), m[i][j]});
    }
    return SparseOperator::from_triplets(mesh.node_count(), std::move(trip));
}

SparseOperator assemble_stiffness(const Mesh& mesh, const ScalarField& lambda, const ScalarField& mu) {
    check_size(mesh, lambda, "assemble_stiffness lambda");
    check_size(mesh, mu, "assemble_stiffness mu");
    for (double m : mu.values) {
        if (!(m > 0.0)) throw std::invalid_argument("assemble_stiffness: shear modulus must be positive");
    }
    std::vector<Triplet> trip;
    trip.reserve(mesh.triangle_count() * 36);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangle(t);
        const auto& g = mesh.shape_gradients(t);
        const double area = mesh.area(t);
        const double lam = (lambda[tri[0]] + lambda[tri[1]] + lambda[tri[2]]) / 3.0;
        const double m = (mu[tri[0]] + mu[tri[1]] + mu[tri[2]]) / 3.0;
        // Voigt strain rows (xx, yy, 2xy) of the basis function (node k, component c)
        double b[3][6];
        for (int k = 0; k < 3; ++k) {
            b[0][2 * k] = g[k].x;
            b[1][2 * k] = 0.0;
            b[2][2 * k] = g[k].y;
            b[0][2 * k + 1] = 0.0;
            b[1][2 * k + 1] = g[k].y;
            b[2][2 * k + 1] = g[k].x;
        }
        const double d[3][3] = {{lam + 2 * m, lam, 0.0}, {lam, lam + 2 * m, 0.0}, {0.0, 0.0, m}};
        for (int p = 0; p < 6; ++p) {
            double db[3];
            for (int r = 0; r < 3; ++r) db[r] = d[r][0] * b[0][p] + d[r][1] * b[1][p] + d[r][2] * b[2][p];
            for (int q = 0; q < 6; ++q) {
                const double v = area * (b[0][q] * db[0] + b[1][q] * db[1] + b[2][q] * db[2]);
                trip.push_back({2 * static_cast<std::size_t>(tri[q / 2]) + q % 2,
                                2 * static_cast<std::size_t>(tri[p / 2]) + p % 2, v});
            }
        }
    }
    return SparseOperator::from_triplets(2 * mesh.node_count(), std::move(trip));
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

SolveResult solve_spd(const SparseOperator& a, std::span<const double> b, double tol, int max_iter,
                      std::span<const double> initial_guess) {
    const std::size_t n = a.size();
    if (b.size() != n) throw std::invalid_argument("solve_spd: right-hand side size mismatch");
    SolveResult out;
    out.x.assign(n, 0.0);
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        out.report = {0, 0.0, true};
        return out;
    }
    if (initial_guess.size() == n) std::copy(initial_guess.begin(), initial_guess.end(), out.x.begin());

    std::vector<double> inv_diag = a.diagonal();
    for (auto& d : inv_diag) {
        if (!(d > 0.0)) throw std::invalid_argument("solve_spd: non-positive diagonal entry");
        d = 1.0 / d;
    }
    std::vector<double> r(n), z(n), p(n), ap(n);
    a.multiply(out.x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    double rnorm = std::sqrt(dot(r, r));
    int it = 0;
    if (rnorm > tol * bnorm) {
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        p = z;
        double rz = dot(r, z);
        for (it = 1; it <= max_iter; ++it) {
            a.multiply(p, ap);
            const double alpha = rz / dot(p, ap);
            for (std::size_t i = 0; i < n; ++i) {
                out.x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            rnorm = std::sqrt(dot(r, r));
            if (rnorm <= tol * bnorm) break;
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        it = std::min(it, max_iter);
    }
    out.report.iterations = it;
    out.report.residual = rnorm / bnorm;
    out.report.converged = rnorm <= tol * bnorm;
    return out;
}

}  // namespace elastinv
