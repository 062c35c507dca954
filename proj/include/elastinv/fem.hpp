#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "elastinv/mesh.hpp"

namespace elastinv {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Square sparse matrix in compressed-row form. Immutable after construction.
class SparseOperator {
public:
    SparseOperator() = default;

    /// Duplicates are summed in input order, so identical triplet sequences
    /// give bit-identical operators.
    static SparseOperator from_triplets(std::size_t n, std::vector<Triplet> triplets);

    std::size_t size() const { return n_; }
    std::size_t nonzeros() const { return values_.size(); }

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> operator*(std::span<const double> x) const;

    double at(std::size_t row, std::size_t col) const;
    std::vector<double> diagonal() const;
    double sum() const;
    double max_abs() const;
    /// max |a_ij - a_ji| / max |a_ij|
    double symmetry_defect() const;

    /// this + s * other (patterns may differ).
    SparseOperator add_scaled(const SparseOperator& other, double s) const;

    /// Replaces the rows and columns of the given unknowns with the identity.
    SparseOperator with_identity_rows(const std::vector<int>& dofs) const;

    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::size_t>& cols() const { return cols_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> cols_;
    std::vector<double> values_;
};

/// How spatially varying coefficients are sampled inside a triangle.
enum class QuadratureRule {
    centroid,       ///< one point, coefficient = mean of the nodal values
    edge_midpoint,  ///< three edge midpoints, exact for quadratic integrands
};

/// Consistent vector-P1 mass matrix for density rho.
SparseOperator assemble_mass(const Mesh& mesh, const ScalarField& rho,
                             QuadratureRule rule = QuadratureRule::centroid);

/// Isotropic stiffness: integral of lambda div u div v + 2 mu eps(u):eps(v).
/// Element gradients are constant, so both rules give the same operator.
SparseOperator assemble_stiffness(const Mesh& mesh, const ScalarField& lambda, const ScalarField& mu);

/// Consistent scalar P1 mass (rho = 1), N x N.
SparseOperator assemble_scalar_mass(const Mesh& mesh);

struct LinearSolveReport {
    int iterations = 0;
    double residual = 0.0;  ///< relative 2-norm ||b - Ax|| / ||b||
    bool converged = false;
};

struct SolveResult {
    std::vector<double> x;
    LinearSolveReport report;
};

/// Jacobi-preconditioned conjugate gradients. The optional initial guess is
/// used when its length matches b.
SolveResult solve_spd(const SparseOperator& a, std::span<const double> b, double tol = 1e-10,
                      int max_iter = 10000, std::span<const double> initial_guess = {});

}  // namespace elastinv
