#include "qrd/elliptic.hpp"

#include <cmath>
#include <vector>

namespace qrd {

namespace {

using Trip = Eigen::Triplet<double>;

// J^{-1} n at a boundary sample: coefficients of (d/ds, d/dt) in d/dn
void normal_coeffs(const Chart& ch, const BoundarySample& b, double& a_s, double& a_t) {
    Mat2 J = ch.jacobian_at(ch.s_of(b.i), ch.t_of(b.j));
    double inv = 1.0 / J.det();
    a_s = inv * (J.d * b.normal.x - J.b * b.normal.y);
    a_t = inv * (-J.c * b.normal.x + J.a * b.normal.y);
}

}  // namespace

// ------------------------------------------------------------------ Poisson

NeumannPoisson::NeumannPoisson(const Chart& chart) : chart_(&chart) {
    const Chart& ch = chart;
    const int nu = ch.nu, nv = ch.nv;
    const int N = nu * nv;
    const bool polar = ch.kind == Chart::Kind::Polar;
    std::vector<Trip> trips;
    trips.reserve(std::size_t(N) * 12);

    auto add = [&](int r, int c, double v) {
        if (v != 0.0) trips.emplace_back(r, c, v);
    };
    auto wrap = [&](int j) { return (j % nv + nv) % nv; };

    // s-faces between (i,j) and (i+1,j); faces along rect t-boundaries are
    // half faces (boundary cells extend only inward)
    for (int i = 0; i + 1 < nu; ++i) {
        double sf = 0.5 * (ch.s_of(i) + ch.s_of(i + 1));
        for (int j = 0; j < nv; ++j) {
            double frac = (!polar && (j == 0 || j == nv - 1)) ? 0.5 : 1.0;
            double detj, mss, mst, mtt;
            ch.metric(sf, ch.t_of(j), detj, mss, mst, mtt);
            int lo = ch.idx(i, j), hi = ch.idx(i + 1, j);
            double c = frac * mss * ch.dt / ch.ds;
            add(lo, hi, c);
            add(lo, lo, -c);
            add(hi, lo, c);
            add(hi, hi, -c);
            if (mst != 0.0 && polar) {
                // cross term: average tangential derivative at the face
                double cc = mst * ch.dt / (4.0 * ch.dt);
                int jp = wrap(j + 1), jm = wrap(j - 1);
                for (int side : {0, 1}) {
                    int base = side == 0 ? i : i + 1;
                    add(lo, ch.idx(base, jp), cc);
                    add(lo, ch.idx(base, jm), -cc);
                    add(hi, ch.idx(base, jp), -cc);
                    add(hi, ch.idx(base, jm), cc);
                }
            }
        }
    }
    // t-faces between (i,j) and (i,j+1); half faces along the s-boundaries
    int jmax = polar ? nv : nv - 1;
    for (int i = 0; i < nu; ++i) {
        double frac = 1.0;
        if (i == nu - 1) frac = 0.5;
        if (!polar && i == 0) frac = 0.5;
        for (int j = 0; j < jmax; ++j) {
            int j2 = polar ? wrap(j + 1) : j + 1;
            double tf = ch.t_of(j) + 0.5 * ch.dt;
            double detj, mss, mst, mtt;
            ch.metric(ch.s_of(i), tf, detj, mss, mst, mtt);
            int lo = ch.idx(i, j), hi = ch.idx(i, j2);
            double c = frac * mtt * ch.ds / ch.dt;
            add(lo, hi, c);
            add(lo, lo, -c);
            add(hi, lo, c);
            add(hi, hi, -c);
            if (mst != 0.0 && polar) {
                // d/ds at the face; one-sided at the radial extremes
                for (int col : {j, j2}) {
                    if (i > 0 && i + 1 < nu) {
                        double cc = frac * mst / 4.0;
                        add(lo, ch.idx(i + 1, col), cc);
                        add(lo, ch.idx(i - 1, col), -cc);
                        add(hi, ch.idx(i + 1, col), -cc);
                        add(hi, ch.idx(i - 1, col), cc);
                    } else {
                        int ia = (i == 0) ? 1 : nu - 1;
                        int ib = (i == 0) ? 0 : nu - 2;
                        double cc = frac * mst / 2.0;
                        add(lo, ch.idx(ia, col), cc);
                        add(lo, ch.idx(ib, col), -cc);
                        add(hi, ch.idx(ia, col), -cc);
                        add(hi, ch.idx(ib, col), cc);
                    }
                }
            }
        }
    }

    // bordered system pinning the weighted mean
    Eigen::SparseMatrix<double> A(N + 1, N + 1);
    for (int id = 0; id < N; ++id) {
        trips.emplace_back(id, N, ch.area_weights[id]);
        trips.emplace_back(N, id, ch.area_weights[id]);
    }
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    A_ = std::move(A);
    lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(A_);
    if (lu_->info() != Eigen::Success)
        throw Error(ErrorKind::SolverDiverged, "Neumann Poisson factorization failed");
}

ScalarField NeumannPoisson::solve(const ScalarField& rhs) const {
    const Chart& ch = *chart_;
    const int N = int(ch.size());
    Eigen::VectorXd b(N + 1);
    for (int id = 0; id < N; ++id) b(id) = rhs.v[id] * ch.area_weights[id];
    b(N) = 0.0;
    Eigen::VectorXd x = lu_->solve(b);
    if (lu_->info() != Eigen::Success)
        throw Error(ErrorKind::SolverDiverged, "Neumann Poisson solve failed");
    ScalarField out(ch);
    for (int id = 0; id < N; ++id) out.v[id] = x(id);
    return out;
}

// --------------------------------------------------------------- biharmonic

ClampedBiharmonic::ClampedBiharmonic(const Chart& chart) : chart_(&chart) {
    const Chart& ch = chart;
    const int nu = ch.nu, nv = ch.nv;
    const int N = nu * nv;
    const bool polar = ch.kind == Chart::Kind::Polar;
    const int NB = int(ch.boundary.size());

    sample_of_node_.assign(N, -1);
    for (int b = 0; b < NB; ++b)
        sample_of_node_[ch.idx(ch.boundary[b].i, ch.boundary[b].j)] = b;

    unknown_of_node_.assign(N, -1);
    int nuk = 0;
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            int id = ch.idx(i, j);
            if (sample_of_node_[id] < 0) unknown_of_node_[id] = nuk++;
        }
    n_unknowns_ = nuk;

    // ghost slots
    auto wrap = [&](int j) { return (j % nv + nv) % nv; };
    int NS = N;
    std::vector<int> ghost_id;
    auto slot = [&](int i, int j) -> int {
        if (polar) {
            j = wrap(j);
            if (i < nu) return ch.idx(i, j);
            return N + j;  // outer ghost ring
        }
        if (i >= 0 && i < nu && j >= 0 && j < nv) return ch.idx(i, j);
        // rect side ghosts
        if (i == -1) return N + (j - 1);
        if (i == nu) return N + (nv - 2) + (j - 1);
        if (j == -1) return N + 2 * (nv - 2) + (i - 1);
        return N + 2 * (nv - 2) + (nu - 2) + (i - 1);  // j == nv
    };
    NS = polar ? N + nv : N + 2 * (nv - 2) + 2 * (nu - 2);

    // first-application Laplacian over slots, rows at real nodes
    std::vector<Trip> ltr;
    ltr.reserve(std::size_t(N) * 14);
    auto is_rect_corner = [&](int i, int j) {
        return !polar && (i == 0 || i == nu - 1) && (j == 0 || j == nv - 1);
    };
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            if (is_rect_corner(i, j)) continue;
            int row = ch.idx(i, j);
            double detj_n, q0, q1, q2;
            ch.metric(ch.s_of(i), ch.t_of(j), detj_n, q0, q1, q2);
            double vol = detj_n * ch.ds * ch.dt;
            auto add = [&](int sl, double v) {
                if (v != 0.0 && sl >= 0) ltr.emplace_back(row, sl, v / vol);
            };
            // s-faces at i +- 1/2 (polar skips the pole face at i=0)
            for (int f : {0, 1}) {
                int ia = f == 0 ? i - 1 : i;  // face between ia and ia+1
                if (polar && ia < 0) continue;
                if (!polar && (ia < -1 || ia + 1 > nu)) continue;
                double sf = (ch.s_of(ia) + ch.s_of(ia + 1)) * 0.5;
                double detj, mss, mst, mtt;
                ch.metric(sf, ch.t_of(j), detj, mss, mst, mtt);
                double sign = (f == 0) ? -1.0 : 1.0;  // outgoing face sign
                double c = mss * ch.dt / ch.ds;
                add(slot(ia + 1, j), sign * c);
                add(slot(ia, j), -sign * c);
                if (mst != 0.0 && polar) {
                    double cc = mst * ch.dt / (4.0 * ch.dt);
                    for (int bi : {ia, ia + 1}) {
                        add(slot(bi, j + 1), sign * cc);
                        add(slot(bi, j - 1), -sign * cc);
                    }
                }
            }
            // t-faces at j +- 1/2
            for (int f : {0, 1}) {
                int ja = f == 0 ? j - 1 : j;  // face between ja and ja+1
                if (!polar && (ja < 0 || ja + 1 > nv - 1)) {
                    // one-sided closure at rect edges: mst == 0 there, and the
                    // boundary rows only need fluxes across existing faces
                    if (ja < -1 || ja + 1 > nv) continue;
                }
                double tf = ch.t_of(ja) + 0.5 * ch.dt;
                double detj, mss, mst, mtt;
                ch.metric(ch.s_of(i), tf, detj, mss, mst, mtt);
                double sign = (f == 0) ? -1.0 : 1.0;
                double c = mtt * ch.ds / ch.dt;
                add(slot(i, ja + 1), sign * c);
                add(slot(i, ja), -sign * c);
                if (mst != 0.0 && polar) {
                    for (int col : {ja, ja + 1}) {
                        if (i == 0) {
                            double cc = mst * ch.ds / (2.0 * ch.ds);
                            add(slot(1, col), sign * cc);
                            add(slot(0, col), -sign * cc);
                        } else {
                            double cc = mst * ch.ds / (4.0 * ch.ds);
                            add(slot(i + 1, col), sign * cc);
                            add(slot(i - 1, col), -sign * cc);
                        }
                    }
                }
            }
        }
    }
    Eigen::SparseMatrix<double> L(N, NS);
    L.setFromTriplets(ltr.begin(), ltr.end());

    // closure: slot value = C u + Dd gD + Dn gN
    std::vector<Trip> ctr, ddtr, dntr;
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            int id = ch.idx(i, j);
            if (unknown_of_node_[id] >= 0)
                ctr.emplace_back(id, unknown_of_node_[id], 1.0);
            else
                ddtr.emplace_back(id, sample_of_node_[id], 1.0);
        }
    auto close_ghost = [&](int gslot, const BoundarySample& b, int dir_axis_s, double dir,
                           int inner2_i, int inner2_j) {
        double a_s, a_t;
        normal_coeffs(ch, b, a_s, a_t);
        double a_out = dir_axis_s ? a_s : a_t;
        double a_oth = dir_axis_s ? a_t : a_s;
        double dref = dir_axis_s ? ch.ds : ch.dt;
        int bnode = ch.idx(b.i, b.j);
        int bs = sample_of_node_[bnode];
        int inner2 = ch.idx(inner2_i, inner2_j);
        // ghost = inner2 + dir*2*dref*(gN - a_oth * d_tang gD)/a_out
        if (unknown_of_node_[inner2] >= 0)
            ctr.emplace_back(gslot, unknown_of_node_[inner2], 1.0);
        else
            ddtr.emplace_back(gslot, sample_of_node_[inner2], 1.0);
        double k = dir * 2.0 * dref / a_out;
        dntr.emplace_back(gslot, bs, k);
        if (a_oth != 0.0 && polar) {
            // tangential derivative of the Dirichlet trace along the ring
            int jp = wrap(b.j + 1), jm = wrap(b.j - 1);
            double kk = -k * a_oth / (2.0 * ch.dt);
            ddtr.emplace_back(gslot, sample_of_node_[ch.idx(b.i, jp)], kk);
            ddtr.emplace_back(gslot, sample_of_node_[ch.idx(b.i, jm)], -kk);
        }
    };
    if (polar) {
        for (int j = 0; j < nv; ++j)
            close_ghost(N + j, ch.boundary[j], 1, +1.0, nu - 2, j);
    } else {
        for (int j = 1; j < nv - 1; ++j) {
            close_ghost(slot(-1, j), ch.boundary[sample_of_node_[ch.idx(0, j)]], 1, -1.0, 1, j);
            close_ghost(slot(nu, j), ch.boundary[sample_of_node_[ch.idx(nu - 1, j)]], 1, +1.0,
                        nu - 2, j);
        }
        for (int i = 1; i < nu - 1; ++i) {
            close_ghost(slot(i, -1), ch.boundary[sample_of_node_[ch.idx(i, 0)]], 0, -1.0, i, 1);
            close_ghost(slot(i, nv), ch.boundary[sample_of_node_[ch.idx(i, nv - 1)]], 0, +1.0, i,
                        nv - 2);
        }
    }
    Eigen::SparseMatrix<double> C(NS, n_unknowns_), Dd(NS, NB), Dn(NS, NB);
    C.setFromTriplets(ctr.begin(), ctr.end());
    Dd.setFromTriplets(ddtr.begin(), ddtr.end());
    Dn.setFromTriplets(dntr.begin(), dntr.end());

    Eigen::SparseMatrix<double> Lu = L * C;
    Ld_ = L * Dd;
    Ln_ = L * Dn;

    // second application: rows at unknown nodes touch only real-node columns
    std::vector<Trip> l2tr;
    for (int k = 0; k < L.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it) {
            int r = int(it.row());
            if (unknown_of_node_[r] >= 0 && it.col() < N)
                l2tr.emplace_back(unknown_of_node_[r], int(it.col()), it.value());
        }
    L2_.resize(n_unknowns_, N);
    L2_.setFromTriplets(l2tr.begin(), l2tr.end());

    B_ = (L2_ * Lu).pruned();
    B_.makeCompressed();

    if (std::max(nu, nv) <= 192) {
        lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
        lu_->compute(B_);
        if (lu_->info() != Eigen::Success)
            throw Error(ErrorKind::SolverDiverged, "biharmonic factorization failed");
    } else {
        iter_ = std::make_unique<Eigen::BiCGSTAB<Eigen::SparseMatrix<double>,
                                                 Eigen::IncompleteLUT<double>>>();
        iter_->preconditioner().setDroptol(1e-7);
        iter_->preconditioner().setFillfactor(40);
        iter_->setTolerance(1e-12);
        iter_->setMaxIterations(4000);
        iter_->compute(B_);
        if (iter_->info() != Eigen::Success)
            throw Error(ErrorKind::SolverDiverged, "biharmonic preconditioner failed");
    }
}

ScalarField ClampedBiharmonic::assemble_field(const Eigen::VectorXd& u,
                                              std::span<const double> dirichlet) const {
    const Chart& ch = *chart_;
    ScalarField out(ch);
    for (std::size_t id = 0; id < ch.size(); ++id) {
        if (unknown_of_node_[id] >= 0)
            out.v[id] = u(unknown_of_node_[id]);
        else
            out.v[id] = dirichlet[sample_of_node_[id]];
    }
    return out;
}

ScalarField ClampedBiharmonic::solve(std::span<const double> dirichlet,
                                     std::span<const double> neumann,
                                     const ScalarField& rhs) const {
    const Chart& ch = *chart_;
    const int NB = int(ch.boundary.size());
    Eigen::VectorXd gd(NB), gn(NB);
    for (int b = 0; b < NB; ++b) {
        gd(b) = dirichlet[b];
        gn(b) = neumann[b];
    }
    Eigen::VectorXd data = Ld_ * gd + Ln_ * gn;
    Eigen::VectorXd b(n_unknowns_);
    for (std::size_t id = 0; id < ch.size(); ++id)
        if (unknown_of_node_[id] >= 0) b(unknown_of_node_[id]) = rhs.v[id];
    b -= L2_ * data;
    Eigen::VectorXd u;
    if (lu_) {
        u = lu_->solve(b);
        if (lu_->info() != Eigen::Success)
            throw Error(ErrorKind::SolverDiverged, "biharmonic solve failed");
    } else {
        u = iter_->solve(b);
        if (iter_->info() != Eigen::Success)
            throw Error(ErrorKind::SolverDiverged, "biharmonic iteration did not converge");
    }
    return assemble_field(u, dirichlet);
}

ScalarField ClampedBiharmonic::particular(const ScalarField& constraint) const {
    std::vector<double> zero(chart_->boundary.size(), 0.0);
    return solve(zero, zero, constraint);
}

ClampedBiharmonic::Constrained ClampedBiharmonic::combine(const ScalarField& psi_h,
                                                          const ScalarField& psi_p,
                                                          const ScalarField& constraint) const {
    const Chart& ch = *chart_;
    double num = 0.0, den = 0.0, c2 = 0.0, p2 = 0.0, h2 = 0.0;
    for (std::size_t id = 0; id < ch.size(); ++id) {
        double w = ch.area_weights[id];
        num += psi_h.v[id] * constraint.v[id] * w;
        den += psi_p.v[id] * constraint.v[id] * w;
        c2 += constraint.v[id] * constraint.v[id] * w;
        p2 += psi_p.v[id] * psi_p.v[id] * w;
        h2 += psi_h.v[id] * psi_h.v[id] * w;
    }
    Constrained out{psi_h, 0.0};
    if (c2 == 0.0) return out;
    double floor = 1e-13 * std::sqrt(c2) * std::sqrt(p2);
    if (std::abs(den) <= floor) {
        if (std::abs(num) <= 1e-13 * std::sqrt(c2) * std::sqrt(h2)) return out;
        throw Error(ErrorKind::DegenerateConstraint,
                    "cannot enforce orthogonality: particular solution is orthogonal "
                    "to the constraint");
    }
    out.lambda = -num / den;
    for (std::size_t id = 0; id < out.psi.v.size(); ++id)
        out.psi.v[id] += out.lambda * psi_p.v[id];
    return out;
}

ClampedBiharmonic::Constrained ClampedBiharmonic::solve_with_constraint(
    std::span<const double> dirichlet, std::span<const double> neumann,
    const ScalarField& constraint) const {
    ScalarField zero_rhs(*chart_);
    ScalarField psi_h = solve(dirichlet, neumann, zero_rhs);
    ScalarField psi_p = particular(constraint);
    return combine(psi_h, psi_p, constraint);
}

}  // namespace qrd
