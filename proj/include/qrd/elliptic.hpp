#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <span>

#include "qrd/field.hpp"

namespace qrd {

// Poisson problem with natural (zero-flux) boundary conditions on a chart,
// solved as a bordered system pinning the weighted mean to zero. The
// factorization is built once per chart and reused across solves.
class NeumannPoisson {
public:
    explicit NeumannPoisson(const Chart& chart);

    // rhs must have (near) zero weighted mean; returns the zero-mean solution
    ScalarField solve(const ScalarField& rhs) const;

    const Chart& chart() const { return *chart_; }

private:
    const Chart* chart_;
    Eigen::SparseMatrix<double> A_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

// Discrete clamped biharmonic problem: Delta^2 psi = rhs inside, with psi and
// d psi/dn prescribed on the boundary (one value per boundary sample). The
// bilaplacian is the square of the mapped compact Laplacian; Dirichlet data
// and the Neumann ghost closure are eliminated into the right-hand side, so
// one factorization serves every solve on the chart. Grids above the direct
// threshold fall back to ILUT-preconditioned BiCGSTAB.
class ClampedBiharmonic {
public:
    explicit ClampedBiharmonic(const Chart& chart);

    ScalarField solve(std::span<const double> dirichlet, std::span<const double> neumann,
                      const ScalarField& rhs) const;

    // psi = psi_h + lambda psi_p with int psi * constraint = 0
    struct Constrained {
        ScalarField psi;
        double lambda = 0.0;
    };
    Constrained solve_with_constraint(std::span<const double> dirichlet,
                                      std::span<const double> neumann,
                                      const ScalarField& constraint) const;

    // particular solution with homogeneous clamped data (cache for reuse)
    ScalarField particular(const ScalarField& constraint) const;
    Constrained combine(const ScalarField& psi_h, const ScalarField& psi_p,
                        const ScalarField& constraint) const;

    const Chart& chart() const { return *chart_; }

private:
    ScalarField assemble_field(const Eigen::VectorXd& u, std::span<const double> dirichlet) const;

    const Chart* chart_;
    int n_unknowns_ = 0;
    std::vector<int> unknown_of_node_;  // -1 where the node is boundary data
    std::vector<int> sample_of_node_;   // boundary sample index or -1
    Eigen::SparseMatrix<double> B_;    // bilaplacian over unknowns
    Eigen::SparseMatrix<double> Ld_, Ln_;  // first-application data maps
    Eigen::SparseMatrix<double> L2_;       // second application, unknown rows
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
    std::unique_ptr<Eigen::BiCGSTAB<Eigen::SparseMatrix<double>,
                                    Eigen::IncompleteLUT<double>>> iter_;
};

}  // namespace qrd
