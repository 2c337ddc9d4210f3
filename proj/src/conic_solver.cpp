// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Primal-dual interior-point method on the homogeneous self-dual embedding
// with Nesterov-Todd scaling and a Mehrotra predictor-corrector.

#include "airs/conic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace airs::conic {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kStepFactor = 0.99;
constexpr double kSigmaExponent = 3.0;
constexpr int kRefine = 2;

// Per-block NT scaling. Nonneg: W = diag(d). Psd: W(Z) = R'ZR.
struct BlockScaling {
    VectorXd d;
    MatrixXd r;
    MatrixXd rinv;
    VectorXd lambda;  // scaled point; eigenvalues for Psd blocks
};

// Columns of G touched by one Psd block, stored densely.
struct MatrixEntry {
    int i = 0;  // row, i >= j
    int j = 0;
    double v = 0.0;  // matrix value (svec scaling removed)
};

struct PsdColumns {
    std::vector<int> cols;
    MatrixXd values;                              // block size x cols.size()
    std::vector<std::vector<MatrixEntry>> entries;  // nonzeros per column, lower triangle
};

class Solver {
public:
    Solver(const ConicProblem& p, const SolverOptions& o) : p_(p), opts_(o) {
        n_ = p.num_vars();
        neq_ = p.num_eq();
        m_ = p.slack_size();
        at_ = p.a_eq.transpose();
        gt_ = p.g.transpose();
        nu_ = 0;
        for (const auto& k : p.cones) nu_ += k.degree();
        scaling_.resize(p.cones.size());

        // Nonneg rows gathered into one sparse matrix; Psd columns densified.
        std::vector<Triplet> nn;
        int nn_rows = 0;
        psd_cols_.resize(p.cones.size());
        for (std::size_t b = 0; b < p.cones.size(); ++b) {
            const auto& k = p.cones[b];
            if (k.kind == ConeKind::Nonneg) {
                for (int r = 0; r < k.dim; ++r) nn_row_.push_back(k.offset + r);
                nn_rows += k.dim;
            }
        }
        nn_g_.resize(nn_rows, n_);
        {
            std::vector<int> row_map(m_, -1);
            for (int i = 0; i < nn_rows; ++i) row_map[nn_row_[i]] = i;
            for (int j = 0; j < p.g.outerSize(); ++j)
                for (SpMat::InnerIterator it(p.g, j); it; ++it)
                    if (row_map[it.row()] >= 0) nn.emplace_back(row_map[it.row()], j, it.value());
            nn_g_.setFromTriplets(nn.begin(), nn.end());
        }
        for (std::size_t b = 0; b < p.cones.size(); ++b) {
            const auto& k = p.cones[b];
            if (k.kind != ConeKind::Psd) continue;
            auto& pc = psd_cols_[b];
            for (int j = 0; j < p.g.outerSize(); ++j) {
                bool hit = false;
                for (SpMat::InnerIterator it(p.g, j); it; ++it)
                    if (it.row() >= k.offset && it.row() < k.offset + k.size()) { hit = true; break; }
                if (hit) pc.cols.push_back(j);
            }
            pc.values = MatrixXd::Zero(k.size(), static_cast<Eigen::Index>(pc.cols.size()));
            for (std::size_t c = 0; c < pc.cols.size(); ++c)
                for (SpMat::InnerIterator it(p.g, pc.cols[c]); it; ++it)
                    if (it.row() >= k.offset && it.row() < k.offset + k.size())
                        pc.values(it.row() - k.offset, static_cast<Eigen::Index>(c)) = it.value();
            pc.entries.resize(pc.cols.size());
            for (int j = 0, idx = 0; j < k.dim; ++j)
                for (int i = j; i < k.dim; ++i, ++idx)
                    for (std::size_t c = 0; c < pc.cols.size(); ++c) {
                        const double v = pc.values(idx, static_cast<Eigen::Index>(c));
                        if (v != 0.0) pc.entries[c].push_back({i, j, i == j ? v : v / std::sqrt(2.0)});
                    }
        }
    }

    ConicSolution run();

private:
    // ---- cone algebra ----------------------------------------------------

    // Jordan product u o v in the (already scaled) block coordinates.
    VectorXd jordan(const VectorXd& u, const VectorXd& v) const {
        VectorXd out(m_);
        for (const auto& k : p_.cones) {
            if (k.kind == ConeKind::Nonneg) {
                out.segment(k.offset, k.dim) = u.segment(k.offset, k.dim).cwiseProduct(v.segment(k.offset, k.dim));
            } else {
                const MatrixXd a = smat(u.segment(k.offset, k.size()));
                const MatrixXd b = smat(v.segment(k.offset, k.size()));
                out.segment(k.offset, k.size()) = svec(0.5 * (a * b + b * a));
            }
        }
        return out;
    }

    // lambda o lambda with lambda the current scaled point.
    VectorXd lambda_sq() const {
        VectorXd out(m_);
        for (std::size_t b = 0; b < p_.cones.size(); ++b) {
            const auto& k = p_.cones[b];
            const auto& l = scaling_[b].lambda;
            if (k.kind == ConeKind::Nonneg) out.segment(k.offset, k.dim) = l.cwiseAbs2();
            else out.segment(k.offset, k.size()) = svec(MatrixXd(l.cwiseAbs2().asDiagonal()));
        }
        return out;
    }

    VectorXd identity() const {
        VectorXd e(m_);
        for (const auto& k : p_.cones) {
            if (k.kind == ConeKind::Nonneg) e.segment(k.offset, k.dim).setOnes();
            else e.segment(k.offset, k.size()) = svec(MatrixXd::Identity(k.dim, k.dim));
        }
        return e;
    }

    // Solves lambda o x = v.
    VectorXd lambda_divide(const VectorXd& v) const {
        VectorXd out(m_);
        for (std::size_t b = 0; b < p_.cones.size(); ++b) {
            const auto& k = p_.cones[b];
            const auto& l = scaling_[b].lambda;
            if (k.kind == ConeKind::Nonneg) {
                out.segment(k.offset, k.dim) = v.segment(k.offset, k.dim).cwiseQuotient(l);
            } else {
                MatrixXd x = smat(v.segment(k.offset, k.size()));
                for (int j = 0; j < k.dim; ++j)
                    for (int i = 0; i < k.dim; ++i) x(i, j) *= 2.0 / (l(i) + l(j));
                out.segment(k.offset, k.size()) = svec(x);
            }
        }
        return out;
    }

    enum class Op { W, WT, WinvT, Winv };

    VectorXd apply(Op op, const VectorXd& v) const {
        VectorXd out(m_);
        for (std::size_t b = 0; b < p_.cones.size(); ++b) {
            const auto& k = p_.cones[b];
            const auto& sc = scaling_[b];
            if (k.kind == ConeKind::Nonneg) {
                const auto seg = v.segment(k.offset, k.dim);
                if (op == Op::W || op == Op::WT) out.segment(k.offset, k.dim) = seg.cwiseProduct(sc.d);
                else out.segment(k.offset, k.dim) = seg.cwiseQuotient(sc.d);
            } else {
                const MatrixXd x = smat(v.segment(k.offset, k.size()));
                MatrixXd y;
                switch (op) {
                    case Op::W: y = sc.r.transpose() * x * sc.r; break;
                    case Op::WT: y = sc.r * x * sc.r.transpose(); break;
                    case Op::WinvT: y = sc.rinv * x * sc.rinv.transpose(); break;
                    case Op::Winv: y = sc.rinv.transpose() * x * sc.rinv; break;
                }
                out.segment(k.offset, k.size()) = svec(y);
            }
        }
        return out;
    }

    // Largest alpha with lambda + alpha * dv in the cone (capped at a large value).
    double max_step(const VectorXd& dv) const {
        double amax = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < p_.cones.size(); ++b) {
            const auto& k = p_.cones[b];
            const auto& l = scaling_[b].lambda;
            if (k.kind == ConeKind::Nonneg) {
                for (int i = 0; i < k.dim; ++i) {
                    const double di = dv(k.offset + i);
                    if (di < 0) amax = std::min(amax, -l(i) / di);
                }
            } else {
                MatrixXd x = smat(dv.segment(k.offset, k.size()));
                const VectorXd isq = l.cwiseSqrt().cwiseInverse();
                x = isq.asDiagonal() * x * isq.asDiagonal();
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(x, Eigen::EigenvaluesOnly);
                const double emin = es.eigenvalues()(0);
                if (emin < 0) amax = std::min(amax, -1.0 / emin);
            }
        }
        return amax;
    }

    // Sets the scaling from the scaled point lambda + alpha*(ds, dz) of the
    // current scaling (or from raw s, z when `fresh` holds identity scaling).
    bool update_scaling(const VectorXd& st, const VectorXd& zt) {
        for (std::size_t b = 0; b < p_.cones.size(); ++b) {
            const auto& k = p_.cones[b];
            auto& sc = scaling_[b];
            if (k.kind == ConeKind::Nonneg) {
                const VectorXd s = sc.d.cwiseProduct(st.segment(k.offset, k.dim));
                const VectorXd z = zt.segment(k.offset, k.dim).cwiseQuotient(sc.d);
                if ((s.array() <= 0).any() || (z.array() <= 0).any()) return false;
                sc.d = s.cwiseQuotient(z).cwiseSqrt();
                sc.lambda = s.cwiseProduct(z).cwiseSqrt();
            } else {
                const MatrixXd sm = smat(st.segment(k.offset, k.size()));
                const MatrixXd zm = smat(zt.segment(k.offset, k.size()));
                Eigen::LLT<MatrixXd> ls(sm), lz(zm);
                if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
                const MatrixXd lsm = ls.matrixL();
                const MatrixXd lzm = lz.matrixL();
                Eigen::JacobiSVD<MatrixXd> svd(lzm.transpose() * lsm, Eigen::ComputeFullU | Eigen::ComputeFullV);
                const VectorXd sv = svd.singularValues();
                if (sv.minCoeff() <= 0 || !std::isfinite(sv.maxCoeff())) return false;
                const VectorXd isq = sv.cwiseSqrt().cwiseInverse();
                const MatrixXd lsinv = lsm.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(k.dim, k.dim));
                sc.r = sc.r * lsm * svd.matrixV() * isq.asDiagonal();
                sc.rinv = sv.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() * lsinv * sc.rinv;
                sc.lambda = sv;
            }
        }
        return true;
    }

    void identity_scaling() {
        for (std::size_t b = 0; b < p_.cones.size(); ++b) {
            const auto& k = p_.cones[b];
            auto& sc = scaling_[b];
            if (k.kind == ConeKind::Nonneg) {
                sc.d = VectorXd::Ones(k.dim);
                sc.lambda = VectorXd::Ones(k.dim);
            } else {
                sc.r = MatrixXd::Identity(k.dim, k.dim);
                sc.rinv = sc.r;
                sc.lambda = VectorXd::Ones(k.dim);
            }
        }
    }

    // Current (s, z) in original coordinates: s = W' lambda, z = W^{-1} lambda.
    VectorXd lambda_vec() const {
        VectorXd out(m_);
        for (std::size_t b = 0; b < p_.cones.size(); ++b) {
            const auto& k = p_.cones[b];
            const auto& l = scaling_[b].lambda;
            if (k.kind == ConeKind::Nonneg) out.segment(k.offset, k.dim) = l;
            else out.segment(k.offset, k.size()) = svec(MatrixXd(l.asDiagonal()));
        }
        return out;
    }

    // ---- KKT system ------------------------------------------------------

    bool factor() {
        MatrixXd h = MatrixXd::Zero(n_, n_);
        if (nn_g_.rows() > 0) {
            VectorXd inv_d(nn_g_.rows());
            int i = 0;
            for (std::size_t b = 0; b < p_.cones.size(); ++b)
                if (p_.cones[b].kind == ConeKind::Nonneg)
                    for (int r = 0; r < p_.cones[b].dim; ++r) inv_d(i++) = 1.0 / scaling_[b].d(r);
            const SpMat bm = inv_d.asDiagonal() * nn_g_;
            const SpMat btb = SpMat(bm.transpose()) * bm;
            h += MatrixXd(btb);
        }
        for (std::size_t b = 0; b < p_.cones.size(); ++b) {
            const auto& k = p_.cones[b];
            if (k.kind != ConeKind::Psd) continue;
            const auto& pc = psd_cols_[b];
            const auto& sc = scaling_[b];
            const int nc = static_cast<int>(pc.cols.size());
            MatrixXd bm(k.size(), nc);
            MatrixXd congr(k.dim, k.dim);
            for (int c = 0; c < nc; ++c) {
                const auto& ent = pc.entries[static_cast<std::size_t>(c)];
                if (2 * static_cast<int>(ent.size()) <= k.dim) {
                    // Sparse column: sum of rank-two terms r_i r_j' + r_j r_i'.
                    congr.setZero();
                    for (const MatrixEntry& e : ent) {
                        if (e.i == e.j) {
                            congr.noalias() += e.v * sc.rinv.col(e.i) * sc.rinv.col(e.i).transpose();
                        } else {
                            congr.noalias() += e.v * sc.rinv.col(e.i) * sc.rinv.col(e.j).transpose();
                            congr.noalias() += e.v * sc.rinv.col(e.j) * sc.rinv.col(e.i).transpose();
                        }
                    }
                    bm.col(c) = svec(congr);
                } else {
                    const MatrixXd gm = smat(pc.values.col(c));
                    bm.col(c) = svec(sc.rinv * gm * sc.rinv.transpose());
                }
            }
            MatrixXd btb = MatrixXd::Zero(nc, nc);
            btb.selfadjointView<Eigen::Lower>().rankUpdate(bm.transpose());
            for (int c2 = 0; c2 < nc; ++c2)
                for (int c1 = c2; c1 < nc; ++c1) {
                    h(pc.cols[c1], pc.cols[c2]) += btb(c1, c2);
                    if (c1 != c2) h(pc.cols[c2], pc.cols[c1]) += btb(c1, c2);
                }
        }
        kkt_ = MatrixXd::Zero(n_ + neq_, n_ + neq_);
        kkt_.topLeftCorner(n_, n_) = h;
        if (neq_ > 0) {
            const MatrixXd a = MatrixXd(p_.a_eq);
            kkt_.topRightCorner(n_, neq_) = a.transpose();
            kkt_.bottomLeftCorner(neq_, n_) = a;
        }
        // Tiny static regularization keeps the factorization defined when G
        // lacks full column rank on a face; refinement removes its effect.
        const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
        MatrixXd reg = kkt_;
        reg.topLeftCorner(n_, n_).diagonal().array() += 1e-14 * scale;
        if (neq_ > 0) reg.bottomRightCorner(neq_, neq_).diagonal().array() -= 1e-14 * scale;
        lu_.compute(reg);
        return std::isfinite(lu_.matrixLU().cwiseAbs().maxCoeff());
    }

    // Solves [0 A' G'; A 0 0; G 0 -W'W] [x; y; z] = [r1; r2; r3] with
    // iterative refinement against the unreduced operator.
    bool kkt_solve(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& x, VectorXd& y,
                   VectorXd& z) const {
        reduced_solve(r1, r2, r3, x, y, z);
        for (int it = 0; it < kRefine; ++it) {
            const VectorXd e1 = r1 - at_ * y - gt_ * z;
            const VectorXd e2 = r2 - p_.a_eq * x;
            const VectorXd e3 = r3 - p_.g * x + apply(Op::WT, apply(Op::W, z));
            VectorXd cx, cy, cz;
            reduced_solve(e1, e2, e3, cx, cy, cz);
            x += cx;
            y += cy;
            z += cz;
        }
        return x.allFinite() && y.allFinite() && z.allFinite();
    }

    void reduced_solve(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& x, VectorXd& y,
                       VectorXd& z) const {
        const VectorXd w3 = apply(Op::Winv, apply(Op::WinvT, r3));
        VectorXd rhs(n_ + neq_);
        rhs.head(n_) = r1 + gt_ * w3;
        rhs.tail(neq_) = r2;
        const VectorXd sol = lu_.solve(rhs);
        x = sol.head(n_);
        y = sol.tail(neq_);
        z = apply(Op::Winv, apply(Op::WinvT, VectorXd(p_.g * x - r3)));
    }

    const ConicProblem& p_;
    SolverOptions opts_;
    int n_ = 0, neq_ = 0, m_ = 0, nu_ = 0;
    SpMat at_, gt_;
    SpMat nn_g_;
    std::vector<int> nn_row_;
    std::vector<PsdColumns> psd_cols_;
    std::vector<BlockScaling> scaling_;
    MatrixXd kkt_;
    Eigen::PartialPivLU<MatrixXd> lu_;
};

// Smallest alpha so that v + alpha e is on the cone boundary (i.e. -min eig).
double cone_shift(const ConicProblem& p, const VectorXd& v) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& k : p.cones) {
        const auto seg = v.segment(k.offset, k.size());
        if (k.kind == ConeKind::Nonneg) {
            worst = std::max(worst, -seg.minCoeff());
        } else {
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(seg), Eigen::EigenvaluesOnly);
            worst = std::max(worst, -es.eigenvalues()(0));
        }
    }
    return worst;
}

ConicSolution Solver::run() {
    ConicSolution out;
    const VectorXd& c = p_.c;
    const VectorXd& b = p_.b_eq;
    const VectorXd& h = p_.h;
    const double resx0 = std::max(1.0, c.norm());
    const double resy0 = std::max(1.0, b.norm());
    const double resz0 = std::max(1.0, h.norm());
    const VectorXd e = identity();

    // Initial point from two least-squares solves with W = I.
    identity_scaling();
    if (!factor()) return out;
    VectorXd x, y, z, s, tmp_x, tmp_y;
    if (!kkt_solve(VectorXd::Zero(n_), b, h, x, tmp_y, s)) return out;
    s = -s;
    if (!kkt_solve(-c, VectorXd::Zero(neq_), VectorXd::Zero(m_), tmp_x, y, z)) return out;
    {
        const double nrms = std::max(1.0, s.norm());
        const double ts = cone_shift(p_, s);
        if (ts >= -1e-8 * nrms) s += (1.0 + ts) * e;
        const double nrmz = std::max(1.0, z.norm());
        const double tz = cone_shift(p_, z);
        if (tz >= -1e-8 * nrmz) z += (1.0 + tz) * e;
    }
    double tau = 1.0, kappa = 1.0;
    if (!update_scaling(s, z)) return out;  // identity scaling: lambda-coordinates are raw

    auto fill = [&](SolveStatus st, double scale_by) {
        out.status = st;
        out.x = x / scale_by;
        out.y = y / scale_by;
        out.s = s / scale_by;
        out.z = z / scale_by;
    };

    // Best iterate seen, used when the method stalls before converging.
    struct Snapshot {
        VectorXd x, y, s, z;
        double tau = 1, pcost = 0, dcost = 0;
        Residuals res;
        double merit = std::numeric_limits<double>::infinity();
    } best;
    for (int iter = 0; iter <= opts_.max_iter; ++iter) {
        s = apply(Op::WT, lambda_vec());
        z = apply(Op::Winv, lambda_vec());
        const VectorXd lam = lambda_vec();
        const double gap = lam.squaredNorm();
        const double mu = (gap + tau * kappa) / (nu_ + 1);

        const VectorXd rx = at_ * y + gt_ * z + c * tau;
        const VectorXd ry = p_.a_eq * x - b * tau;
        const VectorXd rz = p_.g * x + s - h * tau;
        const double cx = c.dot(x), by = b.dot(y), hz = h.dot(z);
        const double rt = kappa + cx + by + hz;

        const double pcost = cx / tau;
        const double dcost = -(by + hz) / tau;
        const double pres = std::max(ry.norm() / resy0, rz.norm() / resz0) / tau;
        const double dres = rx.norm() / resx0 / tau;
        const double gap_abs = gap / (tau * tau);
        double relgap = std::numeric_limits<double>::infinity();
        if (pcost < 0) relgap = gap_abs / -pcost;
        else if (dcost > 0) relgap = gap_abs / dcost;
        const double pinfres = (hz + by < 0)
            ? (at_ * y + gt_ * z).norm() / resx0 / -(hz + by)
            : std::numeric_limits<double>::infinity();
        const double dinfres = (cx < 0)
            ? std::max((p_.a_eq * x).norm() / resy0, (p_.g * x + s).norm() / resz0) / -cx
            : std::numeric_limits<double>::infinity();

        out.iterations = iter;
        out.objective_value = pcost;
        out.dual_objective = dcost;
        out.residuals = {pres, dres, std::min(gap_abs, relgap)};
        if (out.residuals.max() < best.merit) best = {x, y, s, z, tau, pcost, dcost, out.residuals, out.residuals.max()};
        if (opts_.record_trace) out.trace.push_back({pcost, dcost, out.residuals});

        if (pres <= opts_.tol && dres <= opts_.tol && (gap_abs <= opts_.tol || relgap <= opts_.tol)) {
            fill(SolveStatus::Optimal, tau);
            return out;
        }
        if (pinfres <= opts_.tol) {
            const double scale = -(hz + by);
            fill(SolveStatus::PrimalInfeasible, 1.0);
            out.y = y / scale;
            out.z = z / scale;
            out.x.setZero();
            return out;
        }
        if (dinfres <= opts_.tol) {
            fill(SolveStatus::DualInfeasible, -cx);
            return out;
        }
        if (iter == opts_.max_iter) break;

        if (!factor()) break;

        // Solve the Newton system for a given right-hand side.
        VectorXd vx, vy, vz;
        if (!kkt_solve(-c, b, h, vx, vy, vz)) break;
        const double vden = c.dot(vx) + b.dot(vy) + h.dot(vz);

        struct Dir {
            VectorXd dx, dy, dsT, dzT;
            double dtau = 0, dkappa = 0;
        };
        auto newton = [&](double coef, const VectorXd& ds_rhs, double dk_rhs, Dir& d) {
            const VectorXd t = lambda_divide(ds_rhs);
            VectorXd ux, uy, uz;
            if (!kkt_solve(-coef * rx, -coef * ry, VectorXd(-coef * rz - apply(Op::WT, t)), ux, uy, uz)) return false;
            const double dt_rhs = -coef * rt;
            const double den = vden - kappa / tau;
            d.dtau = (dt_rhs - dk_rhs / tau - c.dot(ux) - b.dot(uy) - h.dot(uz)) / den;
            d.dkappa = (dk_rhs - kappa * d.dtau) / tau;
            d.dx = ux + d.dtau * vx;
            d.dy = uy + d.dtau * vy;
            const VectorXd dz = uz + d.dtau * vz;
            d.dzT = apply(Op::W, dz);
            d.dsT = t - d.dzT;
            return d.dx.allFinite() && d.dzT.allFinite() && std::isfinite(d.dtau);
        };
        auto step_of = [&](const Dir& d) {
            double a = std::min(max_step(d.dsT), max_step(d.dzT));
            if (d.dtau < 0) a = std::min(a, -tau / d.dtau);
            if (d.dkappa < 0) a = std::min(a, -kappa / d.dkappa);
            return a;
        };

        const VectorXd lsq = lambda_sq();
        Dir aff;
        if (!newton(1.0, -lsq, -tau * kappa, aff)) break;
        const double a_aff = std::min(1.0, step_of(aff));
        const double sigma = std::pow(1.0 - a_aff, kSigmaExponent);

        Dir cmb;
        const VectorXd ds_rhs = -lsq - jordan(aff.dsT, aff.dzT) + sigma * mu * e;
        const double dk_rhs = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        if (!newton(1.0 - sigma, ds_rhs, dk_rhs, cmb)) break;
        const double alpha = std::min(1.0, kStepFactor * step_of(cmb));
        if (!(alpha > 1e-12)) break;

        x += alpha * cmb.dx;
        y += alpha * cmb.dy;
        tau += alpha * cmb.dtau;
        kappa += alpha * cmb.dkappa;
        const VectorXd st = lam + alpha * cmb.dsT;
        const VectorXd zt = lam + alpha * cmb.dzT;
        if (!update_scaling(st, zt)) break;
    }

    // No clean termination. Fall back to the best iterate; accept it when it
    // meets a 10x looser tolerance.
    if (!std::isfinite(best.merit)) return out;
    x = best.x;
    y = best.y;
    s = best.s;
    z = best.z;
    out.objective_value = best.pcost;
    out.dual_objective = best.dcost;
    out.residuals = best.res;
    const SolveStatus st = best.merit <= 10 * opts_.tol
        ? SolveStatus::Optimal
        : (out.iterations >= opts_.max_iter ? SolveStatus::MaxIterations : SolveStatus::NumericalFailure);
    fill(st, best.tau);
    return out;
}

}  // namespace

namespace {

std::atomic<bool> g_audit{false};
std::atomic<long> g_solves{0}, g_optimal{0}, g_certified{0};

}  // namespace

void set_audit(bool on) { g_audit.store(on); }

void reset_audit() {
    g_solves.store(0);
    g_optimal.store(0);
    g_certified.store(0);
}

AuditCounts audit_counts() { return {g_solves.load(), g_optimal.load(), g_certified.load()}; }

ConicSolution solve(const ConicProblem& p, const SolverOptions& opts) {
    p.validate();
    Solver solver(p, opts);
    ConicSolution out = solver.run();
    if (g_audit.load()) {
        ++g_solves;
        if (out.status == SolveStatus::Optimal) {
            ++g_optimal;
            if (certify_solution(p, out, 10.0 * opts.tol).passed()) ++g_certified;
        }
    }
    return out;
}

}  // namespace airs::conic
