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


#include "airs/irs_opt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace airs {

namespace {

const cd kI(0.0, 1.0);

Eigen::MatrixXcd herm(const Eigen::MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

double spectral_sq(const Eigen::MatrixXcd& f) {
    const double s = Eigen::JacobiSVD<Eigen::MatrixXcd>(f).singularValues()(0);
    return std::max(s * s, std::numeric_limits<double>::min());
}

// SINR row of user k as an affine function of the lifted IRS variables:
//   c0 + 2 Re(v^H u) + Re Tr(C U) + d^T diag(Phi).
struct LiftedRow {
    double c0 = 0.0;
    Eigen::VectorXcd v;
    Eigen::MatrixXcd c;
    Eigen::VectorXd d;

    double eval(const Eigen::VectorXcd& u, const Eigen::MatrixXcd& big_u, const Eigen::VectorXd& phi_diag) const {
        return c0 + 2.0 * v.dot(u).real() + (c * big_u).trace().real() + d.dot(phi_diag);
    }
};

// Leakage matrix of user k:
//   K0 + sum_m (conj(u_m) T_m + h.c.) + H_IE (U^T o K) H_IE^H + H_IE diag(a Phi_mm - b U_mm) H_IE^H.
struct LiftedLeak {
    Eigen::MatrixXcd k0;
    std::vector<Eigen::MatrixXcd> t;
    Eigen::MatrixXcd k;     // G B G^H
    Eigen::MatrixXcd h_ie;
    double a = 0.0;         // C_tol (1 + sigma_I^2)
    double b = 0.0;         // C_tol

    // H_IE (E^T o K) H_IE^H - b H_IE diag(E_mm) H_IE^H for a Hermitian E.
    Eigen::MatrixXcd u_term(const Eigen::MatrixXcd& e) const {
        const Eigen::MatrixXcd had = e.transpose().cwiseProduct(k);
        Eigen::MatrixXcd r = h_ie * had * h_ie.adjoint();
        r -= b * h_ie * e.diagonal().real().cast<cd>().asDiagonal() * h_ie.adjoint();
        return herm(r);
    }

    Eigen::MatrixXcd eval(const Eigen::VectorXcd& u, const Eigen::MatrixXcd& big_u,
                          const Eigen::VectorXd& phi_diag) const {
        Eigen::MatrixXcd r = k0;
        for (int m = 0; m < u.size(); ++m) r += std::conj(u(m)) * t[m] + u(m) * t[m].adjoint();
        r += u_term(big_u);
        r += a * h_ie * phi_diag.cast<cd>().asDiagonal() * h_ie.adjoint();
        return herm(r);
    }
};

Eigen::MatrixXcd interference_cov(const BsDesign& bs, int k, double gamma) {
    Eigen::MatrixXcd b = bs.w[k] * bs.w[k].adjoint();
    Eigen::MatrixXcd others = bs.z_b;
    for (std::size_t j = 0; j < bs.w.size(); ++j)
        if (static_cast<int>(j) != k) others += bs.w[j] * bs.w[j].adjoint();
    return b - gamma * others;
}

LiftedRow make_row(const ChannelSet& ch, const BsDesign& bs, const SystemParams& params, int k, double margin) {
    const double gamma = params.gamma_min[k] * (1.0 + margin);
    const Eigen::MatrixXcd b = interference_cov(bs, k, gamma);
    const Eigen::VectorXcd& hb = ch.h_bu[k];
    const Eigen::MatrixXcd d = ch.g.adjoint() * ch.h_iu[k].asDiagonal();  // h_eq = h_bu + D u
    LiftedRow r;
    r.c0 = (hb.adjoint() * b * hb)(0, 0).real() - gamma * params.noise_user[k];
    r.v = d.adjoint() * b * hb;  // 2 Re(h_bu^H B D u) = 2 Re(v^H u)
    const Eigen::VectorXd h2 = ch.h_iu[k].cwiseAbs2();
    r.c = herm(d.adjoint() * b * d);
    r.c.diagonal() += (gamma * h2).cast<cd>();
    r.d = -gamma * (1.0 + params.noise_irs) * h2;
    return r;
}

LiftedLeak make_leak(const ChannelSet& ch, const BsDesign& bs, const SystemParams& params, int k, double margin) {
    const double c_tol = params.c_tol(k) * (1.0 - margin);
    const Eigen::MatrixXcd b = c_tol * bs.z_b - bs.w[k] * bs.w[k].adjoint();
    LiftedLeak l;
    l.h_ie = ch.h_ie;
    l.k0 = herm(ch.h_be * b * ch.h_be.adjoint());
    const Eigen::MatrixXcd gbh = ch.g * b * ch.h_be.adjoint();  // M x N_E
    for (int m = 0; m < ch.n_irs(); ++m) l.t.push_back(ch.h_ie.col(m) * gbh.row(m));
    l.k = herm(ch.g * b * ch.g.adjoint());
    l.a = c_tol * (1.0 + params.noise_irs);
    l.b = c_tol;
    return l;
}

// Sparse coefficient accumulator for the objective.
struct Objective {
    std::map<int, double> coef;
    double constant = 0.0;
    void add(int var, double c) { coef[var] += c; }
    void add(const conic::LinearExpr& e, double scale) {
        for (const auto& [v, c] : e.terms) coef[v] += scale * c;
        constant += scale * e.constant;
    }
};

conic::LinearExpr row_expr(const LiftedRow& row, const P5Model& m, double scale) {
    const double s = m.power_scale, r = std::sqrt(s);
    conic::LinearExpr e;
    e.constant = scale * row.c0;
    for (int i = 0; i < m.u.n; ++i) {
        e.add(m.u.re(i), scale * 2.0 * r * row.v(i).real());
        e.add(m.u.im(i), scale * 2.0 * r * row.v(i).imag());
        e.add(m.phi_diag + i, scale * s * row.d(i));
    }
    m.big_u.add_trace_product(e, row.c, scale * s);
    return e;
}

conic::HermitianAffine leak_expr(const LiftedLeak& leak, const P5Model& m, double scale) {
    const double s = m.power_scale, r = std::sqrt(s);
    const int n_e = static_cast<int>(leak.k0.rows());
    conic::HermitianAffine a(n_e);
    a.constant = scale * leak.k0;
    for (int i = 0; i < m.u.n; ++i) {
        const Eigen::MatrixXcd& t = leak.t[i];
        a.add(m.u.re(i), herm(scale * r * (t + t.adjoint())));
        a.add(m.u.im(i), herm(scale * r * (-kI * t + kI * t.adjoint())));
        const Eigen::VectorXcd h = leak.h_ie.col(i);
        a.add(m.phi_diag + i, herm(scale * s * leak.a * h * h.adjoint()));
    }
    m.big_u.add_to(a, [&](const Eigen::MatrixXcd& e) { return Eigen::MatrixXcd(scale * s * leak.u_term(e)); });
    return a;
}

Eigen::VectorXd pack(const P5Model& m, const Eigen::VectorXcd& phi_n, const Eigen::VectorXcd& u_n,
                     const Eigen::VectorXd& alpha, const Eigen::VectorXd& phi_diag_n, const Eigen::MatrixXcd& u_mat_n) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m.problem.num_vars());
    for (int i = 0; i < m.u.n; ++i) {
        x(m.phi.re(i)) = phi_n(i).real();
        x(m.phi.im(i)) = phi_n(i).imag();
        x(m.u.re(i)) = u_n(i).real();
        x(m.u.im(i)) = u_n(i).imag();
        x(m.alpha + i) = alpha(i);
        x(m.phi_diag + i) = phi_diag_n(i);
    }
    const int n = m.big_u.n;
    for (int i = 0; i < n; ++i) {
        x(m.big_u.diag(i)) = u_mat_n(i, i).real();
        for (int j = i + 1; j < n; ++j) {
            x(m.big_u.re(i, j)) = u_mat_n(i, j).real();
            x(m.big_u.im(i, j)) = u_mat_n(i, j).imag();
        }
    }
    return x;
}

// Penalized merit in normalized units at a lifted point.
double merit(const P5Model& m, const Eigen::VectorXd& x) {
    const conic::ComplexVariable& phi = m.phi;
    double v = m.base_objective.evaluate(x);
    const Eigen::VectorXcd ph = phi.value(x), u = m.u.value(x);
    double tr_phi = 0.0;
    for (int i = 0; i < m.u.n; ++i) tr_phi += x(m.phi_diag + i);
    const double tr_u = m.big_u.value(x).trace().real();
    v += m.rho_slack * ((tr_phi - ph.squaredNorm()) + (tr_u - u.squaredNorm()));
    for (int i = 0; i < m.u.n; ++i) {
        const double a = x(m.alpha + i);
        v += m.rho_alpha * (a - a * a);
    }
    return v;
}

}  // namespace

// ---- iterates -------------------------------------------------------------

ScaIterate ScaIterate::from_design(const IrsDesign& d) {
    ScaIterate it;
    it.phi_t = d.phi;
    it.alpha_t = d.alpha;
    it.u_t = d.u();
    it.trace_phi = d.power();
    return it;
}

IrsDesign ScaIterate::design() const {
    IrsDesign d;
    d.phi = phi_t;
    d.alpha = alpha_t;
    return d;
}

ScaIterate initial_iterate(const ChannelSet& ch, const SystemParams& params) {
    const int m = ch.n_irs();
    const double amp = std::sqrt(params.p_irs_max / (2.0 * m));
    const Eigen::VectorXcd v = ch.h_bu[0].normalized();
    const Eigen::VectorXcd gv = ch.g * v;
    IrsDesign d = IrsDesign::zero(m);
    for (int i = 0; i < m; ++i) d.phi(i) = std::polar(amp, std::arg(ch.h_iu[0](i)) - std::arg(gv(i)));
    return ScaIterate::from_design(d);
}

ScaIterate random_iterate(const ChannelSet& ch, const SystemParams& params, std::uint64_t seed) {
    const int m = ch.n_irs();
    const double amp = std::sqrt(params.p_irs_max / (2.0 * m));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
    std::bernoulli_distribution coin(0.5);
    IrsDesign d = IrsDesign::zero(m);
    for (int i = 0; i < m; ++i) {
        d.phi(i) = std::polar(amp, ph(rng));
        d.alpha(i) = coin(rng) ? 1.0 : 0.0;
    }
    return ScaIterate::from_design(d);
}

// ---- SVD split and Taylor bounds -----------------------------------------

std::vector<SvdTerm> svd_split(const Eigen::MatrixXcd& g, const Eigen::MatrixXcd& b) {
    const Eigen::MatrixXcd k = g * b * g.adjoint();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
    std::vector<SvdTerm> out;
    for (int i = 0; i < k.rows(); ++i)
        out.push_back({svd.singularValues()(i) * svd.matrixU().col(i), svd.matrixV().col(i)});
    return out;
}

double TaylorBounds::alpha_sq(int m, double alpha) const {
    const double a = alpha_t(m);
    return 2.0 * a * alpha - a * a;
}

double TaylorBounds::theta_trace(const Eigen::VectorXcd& phi) const {
    return 2.0 * phi_t.dot(phi).real() - phi_t.squaredNorm();
}

double TaylorBounds::u_trace(const Eigen::VectorXcd& u) const {
    return 2.0 * u_t.dot(u).real() - u_t.squaredNorm();
}

TaylorBounds taylor_bounds(const ScaIterate& it) { return {it.alpha_t, it.phi_t, it.u_t}; }

// ---- lifted expressions ---------------------------------------------------

double lifted_sinr_row(const ChannelSet& ch, const BsDesign& bs, const SystemParams& params, int k,
                       const Eigen::VectorXcd& u, const Eigen::MatrixXcd& big_u, const Eigen::VectorXd& phi_diag,
                       double margin) {
    return make_row(ch, bs, params, k, margin).eval(u, big_u, phi_diag);
}

Eigen::MatrixXcd lifted_leak_matrix(const ChannelSet& ch, const BsDesign& bs, const SystemParams& params, int k,
                                    const Eigen::VectorXcd& u, const Eigen::MatrixXcd& big_u,
                                    const Eigen::VectorXd& phi_diag, double margin) {
    return make_leak(ch, bs, params, k, margin).eval(u, big_u, phi_diag);
}

// ---- P5 -------------------------------------------------------------------

P5Model build_p5(const ChannelSet& ch, const BsDesign& bs, const SystemParams& params, const ScaIterate& anchor,
                 const P5Options& opts) {
    ch.validate();
    params.validate();
    bs.validate();
    const int n = ch.n_irs(), n_u = ch.n_users();
    if (anchor.phi_t.size() != n || anchor.u_t.size() != n || anchor.alpha_t.size() != n)
        throw std::invalid_argument("build_p5: anchor size does not match the IRS");
    if (!(params.p_irs_max > 0.0)) throw std::invalid_argument("build_p5: P_I^max must be positive");
    if (opts.mode == P5Mode::Priced &&
        (static_cast<int>(opts.sinr_price.size()) != n_u || static_cast<int>(opts.leak_price.size()) != n_u))
        throw std::invalid_argument("build_p5: priced mode needs one multiplier per user and constraint");
    if (opts.frozen_alpha && opts.frozen_alpha->size() != n)
        throw std::invalid_argument("build_p5: frozen modes have the wrong size");

    P5Model m;
    m.power_scale = params.p_irs_max;
    const double s = m.power_scale, r = std::sqrt(s);
    conic::ProblemBuilder pb;
    m.phi = conic::ComplexVariable::add(pb, "phi", n);
    m.u = conic::ComplexVariable::add(pb, "u", n);
    m.alpha = pb.add_variables("alpha", n).offset;
    m.phi_diag = pb.add_variables("Phi", n).offset;
    m.big_u = conic::HermitianVariable::add(pb, "U", n);

    std::vector<LiftedRow> rows;
    std::vector<LiftedLeak> leaks;
    for (int k = 0; k < n_u; ++k) {
        rows.push_back(make_row(ch, bs, params, k, opts.margin));
        leaks.push_back(make_leak(ch, bs, params, k, opts.margin));
    }

    // Base objective: Tr(Phi) / P_I, plus prices in priced mode.
    Objective obj;
    for (int i = 0; i < n; ++i) obj.add(m.phi_diag + i, 1.0);
    if (opts.mode == P5Mode::Priced) {
        for (int k = 0; k < n_u; ++k) {
            obj.add(row_expr(rows[k], m, 1.0), -opts.sinr_price[k] / s);
            const conic::HermitianAffine a = leak_expr(leaks[k], m, 1.0);
            const Eigen::MatrixXcd& sk = opts.leak_price[k];
            for (const auto& [var, mat] : a.terms) obj.add(var, -(sk * mat).trace().real() / s);
        }
    }
    m.base_objective.constant = 0.0;
    for (const auto& [v, c] : obj.coef) m.base_objective.add(v, c);

    // Penalty weight: large enough that Phi and U stay at their lower bounds.
    double bound = 0.0;
    for (int i = 0; i < n; ++i) bound = std::max(bound, -obj.coef[m.phi_diag + i]);
    {
        Eigen::MatrixXcd cu(n, n);
        for (int i = 0; i < n; ++i) {
            cu(i, i) = obj.coef[m.big_u.diag(i)];
            for (int j = i + 1; j < n; ++j) {
                cu(j, i) = 0.5 * cd(obj.coef[m.big_u.re(i, j)], -obj.coef[m.big_u.im(i, j)]);
                cu(i, j) = std::conj(cu(j, i));
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cu, Eigen::EigenvaluesOnly);
        bound = std::max(bound, -es.eigenvalues()(0));
    }
    m.rho_slack = std::max(opts.rho_slack, opts.rho_slack_factor * bound);
    m.rho_alpha = opts.rho_alpha;

    // Penalties: rho_s [(Tr Phi - lin ||phi||^2) + (Tr U - lin ||u||^2)] + rho_a sum (alpha - lin alpha^2).
    const Eigen::VectorXcd phi_t = anchor.phi_t / r, u_t = anchor.u_t / r;
    double constant = 0.0;
    for (int i = 0; i < n; ++i) {
        obj.add(m.phi_diag + i, m.rho_slack);
        obj.add(m.big_u.diag(i), m.rho_slack);
        obj.add(m.phi.re(i), -2.0 * m.rho_slack * phi_t(i).real());
        obj.add(m.phi.im(i), -2.0 * m.rho_slack * phi_t(i).imag());
        obj.add(m.u.re(i), -2.0 * m.rho_slack * u_t(i).real());
        obj.add(m.u.im(i), -2.0 * m.rho_slack * u_t(i).imag());
        const double a = anchor.alpha_t(i);
        obj.add(m.alpha + i, m.rho_alpha * (1.0 - 2.0 * a));
        constant += m.rho_alpha * a * a;
    }
    constant += m.rho_slack * (phi_t.squaredNorm() + u_t.squaredNorm());
    m.objective_constant = constant;
    for (const auto& [v, c] : obj.coef) pb.set_objective(v, c);

    // Modes: 0 <= alpha <= 1, or frozen.
    for (int i = 0; i < n; ++i) {
        if (opts.frozen_alpha) {
            conic::LinearExpr e;
            e.add(m.alpha + i, 1.0).constant = -(*opts.frozen_alpha)(i);
            pb.add_equality(e);
        }
        conic::LinearExpr lo, hi;
        lo.add(m.alpha + i, 1.0);
        hi.add(m.alpha + i, -1.0).constant = 1.0;
        pb.add_nonneg(lo);
        pb.add_nonneg(hi);
    }
    // Power budget: Tr(Phi) <= P_I.
    {
        conic::LinearExpr e;
        e.constant = 1.0;
        for (int i = 0; i < n; ++i) e.add(m.phi_diag + i, -1.0);
        pb.add_nonneg(e);
    }
    // Big-M on real and imaginary parts: |u| <= alpha B and |u - conj(phi)| <= (1 - alpha) B.
    const double big_m = opts.big_m;
    for (int i = 0; i < n; ++i) {
        for (int part = 0; part < 2; ++part) {
            const int uv = part == 0 ? m.u.re(i) : m.u.im(i);
            const int pv = part == 0 ? m.phi.re(i) : m.phi.im(i);
            const double conj_sign = part == 0 ? -1.0 : 1.0;  // u - conj(phi): Re u - Re phi, Im u + Im phi
            for (double sgn : {1.0, -1.0}) {
                conic::LinearExpr a, b;
                a.add(m.alpha + i, big_m).add(uv, -sgn);
                pb.add_nonneg(a);
                b.constant = big_m;
                b.add(m.alpha + i, -big_m).add(uv, -sgn).add(pv, -sgn * conj_sign);
                pb.add_nonneg(b);
            }
        }
    }
    // Phi_mm >= |phi_m|^2 as [[Phi_mm, Re, Im], [Re, 1, 0], [Im, 0, 1]] >= 0.
    for (int i = 0; i < n; ++i) {
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(3, 3);
        c(1, 1) = c(2, 2) = 1.0;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3), br = a, bi = a;
        a(0, 0) = 1.0;
        br(0, 1) = br(1, 0) = 1.0;
        bi(0, 2) = bi(2, 0) = 1.0;
        pb.add_symmetric_lmi({{m.phi_diag + i, a}, {m.phi.re(i), br}, {m.phi.im(i), bi}}, c);
    }
    // U >= u u^H as [[U, u], [u^H, 1]] >= 0.
    {
        conic::HermitianAffine a(n + 1);
        a.constant(n, n) = 1.0;
        m.big_u.add_to(a, [&](const Eigen::MatrixXcd& e) {
            Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(n + 1, n + 1);
            x.topLeftCorner(n, n) = e;
            return x;
        });
        for (int i = 0; i < n; ++i) {
            Eigen::MatrixXcd xr = Eigen::MatrixXcd::Zero(n + 1, n + 1), xi = xr;
            xr(i, n) = xr(n, i) = 1.0;
            xi(i, n) = kI;
            xi(n, i) = -kI;
            a.add(m.u.re(i), xr);
            a.add(m.u.im(i), xi);
        }
        pb.add_hermitian_lmi(a);
    }
    // SINR and leakage constraints at the fixed BS design.
    if (opts.mode == P5Mode::Constrained) {
        const IrsDesign anchor_design = anchor.design();
        const double sf = spectral_sq(equivalent_eve_channel(ch, anchor_design));
        for (int k = 0; k < n_u; ++k) {
            pb.add_nonneg(row_expr(rows[k], m, 1.0 / params.noise_user[k]));
            ++m.sinr_rows;
            conic::HermitianAffine a = leak_expr(leaks[k], m, 1.0 / sf);
            a.constant += leaks[k].b * opts.q_regularizer * Eigen::MatrixXcd::Identity(ch.n_eve(), ch.n_eve());
            pb.add_hermitian_lmi(a);
            ++m.leak_blocks;
        }
    }
    m.problem = pb.build();
    return m;
}

P5Solution solve_p5(const ChannelSet& ch, const BsDesign& bs, const SystemParams& params, const ScaIterate& anchor,
                    const P5Options& opts) {
    const P5Model m = build_p5(ch, bs, params, anchor, opts);
    const conic::ConicSolution sol = conic::solve(m.problem, opts.solver);
    P5Solution out;
    out.status = sol.status;
    if (sol.status != conic::SolveStatus::Optimal) return out;
    out.certified = conic::certify_solution(m.problem, sol, 10.0 * opts.solver.tol).passed();
    const double s = m.power_scale, r = std::sqrt(s);
    const int n = ch.n_irs();
    ScaIterate& it = out.next;
    it.phi_t = r * m.phi.value(sol.x);
    it.u_t = r * m.u.value(sol.x);
    it.alpha_t = sol.x.segment(m.alpha, n).cwiseMax(0.0).cwiseMin(1.0);
    out.phi_diag = s * sol.x.segment(m.phi_diag, n);
    out.big_u = s * m.big_u.value(sol.x);
    it.trace_phi = out.phi_diag.sum();
    it.gap_phi = it.trace_phi - it.phi_t.squaredNorm();
    it.gap_u = out.big_u.trace().real() - it.u_t.squaredNorm();
    it.objective_t = s * merit(m, sol.x);
    out.surrogate = s * (sol.objective_value + m.objective_constant);
    return out;
}

IrsDesign round_modes(const Eigen::VectorXd& alpha, const Eigen::VectorXcd& phi, const Eigen::VectorXcd& u) {
    if (alpha.size() != phi.size() || u.size() != phi.size())
        throw std::invalid_argument("round_modes: size mismatch");
    IrsDesign d;
    d.phi = phi;
    d.alpha.resize(alpha.size());
    for (int i = 0; i < alpha.size(); ++i) {
        if (alpha(i) < 0.0 || alpha(i) > 1.0) throw std::invalid_argument("round_modes: alpha outside [0, 1]");
        d.alpha(i) = alpha(i) >= 0.5 ? 1.0 : 0.0;
    }
    return d;
}

namespace {

// Merit of a consistent anchor (Phi = Theta Theta^H, U = u u^H).
double anchor_merit(const ChannelSet& ch, const BsDesign& bs, const SystemParams& params, const ScaIterate& it,
                    const P5Options& opts) {
    const P5Model m = build_p5(ch, bs, params, it, opts);
    const double r = std::sqrt(m.power_scale);
    const Eigen::VectorXcd phi = it.phi_t / r, u = it.u_t / r;
    const Eigen::VectorXd x = pack(m, phi, u, it.alpha_t, phi.cwiseAbs2(), u * u.adjoint());
    return m.power_scale * merit(m, x);
}

}  // namespace

ScaResult sca_optimize(const ChannelSet& ch, const BsDesign& bs, const SystemParams& params, const ScaIterate& init,
                       const ScaConfig& cfg) {
    if (cfg.t_max < 1) throw std::invalid_argument("sca_optimize: t_max must be at least 1");
    ScaResult res;
    ScaIterate start = init;
    start.objective_t = anchor_merit(ch, bs, params, init, cfg.p5);
    start.trace_phi = init.phi_t.squaredNorm();
    res.trace.push_back(start);

    ScaIterate anchor = start;
    for (int t = 1; t <= cfg.t_max; ++t) {
        P5Solution sol = solve_p5(ch, bs, params, anchor, cfg.p5);
        if (sol.status != conic::SolveStatus::Optimal) {
            if (t == 1) {
                res.status = sol.status == conic::SolveStatus::PrimalInfeasible ? SubproblemStatus::Infeasible
                                                                                 : SubproblemStatus::SolverFailure;
                res.design = round_modes(anchor.alpha_t, anchor.phi_t, anchor.u_t);
                res.last = anchor;
                return res;
            }
            break;
        }
        const double prev = anchor.objective_t;
        anchor = sol.next;
        res.trace.push_back(anchor);
        res.last_solution = sol;
        const double change = std::abs(prev - anchor.objective_t);
        if (change <= cfg.tol * std::max(std::abs(prev), 1e-6 * params.p_irs_max)) {
            res.converged = true;
            break;
        }
    }
    res.last = anchor;
    res.status = SubproblemStatus::Optimal;
    res.design = round_modes(anchor.alpha_t, anchor.phi_t, anchor.u_t);

    // Frozen-mode pass when rounding moved a mode or broke a constraint.
    bool resolve = (res.design.alpha - anchor.alpha_t).cwiseAbs().maxCoeff() > 1e-9;
    if (!resolve && cfg.p5.mode == P5Mode::Constrained) {
        const FeasibilityReport fr = check_feasibility(ch, bs, res.design, params, 1e-6);
        double worst = 0.0;
        for (double v : fr.c1) worst = std::min(worst, v);
        for (double v : fr.c2) worst = std::min(worst, v);
        resolve = worst < -1e-6;
    }
    if (resolve) {
        P5Options frozen = cfg.p5;
        frozen.frozen_alpha = res.design.alpha;
        ScaIterate a = anchor;
        a.alpha_t = res.design.alpha;
        a.u_t = res.design.u();
        const P5Solution sol = solve_p5(ch, bs, params, a, frozen);
        res.frozen_resolve = true;
        if (sol.status == conic::SolveStatus::Optimal) {
            res.last_solution = sol;
            res.design = round_modes(sol.next.alpha_t, sol.next.phi_t, sol.next.u_t);
        } else if (cfg.p5.mode == P5Mode::Constrained) {
            res.status = SubproblemStatus::Infeasible;
        }
    }
    // Keep the design inside the budget after numerical round-off.
    const double p = res.design.power();
    if (p > params.p_irs_max) res.design.phi *= std::sqrt(params.p_irs_max / p);
    return res;
}

}  // namespace airs
