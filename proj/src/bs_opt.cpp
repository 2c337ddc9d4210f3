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


#include "airs/bs_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace airs {

namespace {

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

// Leakage LMI scale: spectral norm squared of F_eq, floored to avoid 0.
double leak_scale_of(const Eigen::MatrixXcd& f) {
    const double s = Eigen::JacobiSVD<Eigen::MatrixXcd>(f).singularValues()(0);
    return std::max(s * s, std::numeric_limits<double>::min());
}

struct Margins {
    std::vector<double> gamma;
    std::vector<double> c_tol;
};

Margins margins(const SystemParams& params, double margin) {
    Margins m;
    for (int k = 0; k < params.n_users; ++k) {
        m.gamma.push_back(params.gamma_min[k] * (1.0 + margin));
        m.c_tol.push_back(params.c_tol(k) * (1.0 - margin));
    }
    return m;
}

// Per-user violations of the unmargined P3 constraints at a rank-one design.
struct Violations {
    std::vector<double> sinr;
    std::vector<double> leak;
    double z_psd = 0.0;
    double worst() const {
        double v = z_psd;
        for (double s : sinr) v = std::max(v, s);
        for (double s : leak) v = std::max(v, s);
        return v;
    }
};

Violations violations(const ChannelSet& ch, const IrsDesign& irs, const SystemParams& params, const BsDesign& bs,
                      const P3Options& opts) {
    const EffectiveChannels e = effective_channels(ch, bs, irs, params);
    const Eigen::MatrixXcd q_irs = irs_covariance_at_eve(ch, irs, params);
    const double s = leak_scale_of(e.f_eq);
    const int n_e = ch.n_eve();
    Violations v;
    for (int k = 0; k < ch.n_users(); ++k) {
        const double gamma = user_sinr(ch, bs, irs, params, k);
        v.sinr.push_back((params.gamma_min[k] - gamma) / params.gamma_min[k]);
        const Eigen::VectorXcd fw = e.f_eq * bs.w[k];
        const Eigen::MatrixXcd q = e.f_eq * bs.z_b * e.f_eq.adjoint() + q_irs +
                                   opts.q_regularizer * s * Eigen::MatrixXcd::Identity(n_e, n_e);
        const Eigen::MatrixXcd lmi = hermitian_part(params.c_tol(k) * q - fw * fw.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(lmi, Eigen::EigenvaluesOnly);
        const double scale = std::max(params.c_tol(k) * q.norm(), fw.squaredNorm());
        v.leak.push_back(scale > 0.0 ? -es.eigenvalues()(0) / scale : 0.0);
    }
    if (bs.z_b.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(bs.z_b), Eigen::EigenvaluesOnly);
        const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
        v.z_psd = -es.eigenvalues()(0) / scale;
    }
    return v;
}

Eigen::MatrixXcd project_psd(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(m));
    const Eigen::VectorXd l = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * l.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

const char* to_string(SubproblemStatus s) {
    switch (s) {
        case SubproblemStatus::Optimal: return "Optimal";
        case SubproblemStatus::Infeasible: return "Infeasible";
        case SubproblemStatus::ExtractionFailed: return "ExtractionFailed";
        case SubproblemStatus::SolverFailure: return "SolverFailure";
    }
    return "Unknown";
}

const char* to_string(ExtractionPath p) {
    switch (p) {
        case ExtractionPath::None: return "None";
        case ExtractionPath::Eigen: return "Eigen";
        case ExtractionPath::Randomization: return "Randomization";
    }
    return "Unknown";
}

P3Model build_p3(const ChannelSet& ch, const IrsDesign& irs, const SystemParams& params, const P3Options& opts) {
    ch.validate();
    params.validate();
    irs.validate(params.p_irs_max);
    if (irs.size() != ch.n_irs()) throw std::invalid_argument("build_p3: IRS size does not match channels");
    const int n_t = ch.n_tx(), n_e = ch.n_eve(), n_u = ch.n_users();
    if (n_u != params.n_users) throw std::invalid_argument("build_p3: user count does not match parameters");

    const Margins mg = margins(params, opts.margin);
    std::vector<Eigen::VectorXcd> h(n_u);
    for (int k = 0; k < n_u; ++k) h[k] = equivalent_user_channel(ch, irs, k);
    const Eigen::MatrixXcd f = equivalent_eve_channel(ch, irs);

    P3Model m;
    conic::ProblemBuilder pb;
    for (int k = 0; k < n_u; ++k)
        m.w.push_back(conic::HermitianVariable::add(pb, "W" + std::to_string(k + 1), n_t));
    if (opts.bs_artificial_noise) m.z = conic::HermitianVariable::add(pb, "Z_B", n_t);

    // Jamming elements carry their power as a variable; the rest stay fixed.
    IrsDesign fixed = irs;
    if (opts.optimize_jamming) {
        for (int i = 0; i < irs.size(); ++i)
            if (irs.alpha(i) < 0.5) {
                m.jam_elements.push_back(i);
                fixed.phi(i) = 0.0;
            }
        if (!m.jam_elements.empty()) {
            m.jam_offset = pb.add_variables("jam", static_cast<int>(m.jam_elements.size())).offset;
            conic::LinearExpr budget;
            budget.constant = 1.0 - fixed.power() / params.p_irs_max;
            for (std::size_t j = 0; j < m.jam_elements.size(); ++j) {
                conic::LinearExpr lo;
                lo.add(m.jam_offset + static_cast<int>(j), 1.0);
                pb.add_nonneg(lo);
                budget.add(m.jam_offset + static_cast<int>(j), -1.0);
                pb.add_objective(m.jam_offset + static_cast<int>(j), params.p_irs_max);
            }
            pb.add_nonneg(budget);
        }
    }

    auto add_trace = [&](const conic::HermitianVariable& v) {
        for (int i = 0; i < v.n; ++i) pb.add_objective(v.diag(i), 1.0);
    };
    for (const auto& w : m.w) add_trace(w);
    if (m.z.n > 0) add_trace(m.z);

    // SINR rows, normalized by the user noise power.
    for (int k = 0; k < n_u; ++k) {
        const double scale = 1.0 / params.noise_user[k];
        const Eigen::MatrixXcd hh = h[k] * h[k].adjoint();
        conic::LinearExpr e;
        m.w[k].add_trace_product(e, hh, scale);
        for (int j = 0; j < n_u; ++j)
            if (j != k) m.w[j].add_trace_product(e, hh, -mg.gamma[k] * scale);
        if (m.z.n > 0) m.z.add_trace_product(e, hh, -mg.gamma[k] * scale);
        e.constant = -mg.gamma[k] * scale * (params.noise_user[k] + irs_interference_at_user(ch, fixed, params, k));
        for (std::size_t j = 0; j < m.jam_elements.size(); ++j) {
            const int el = m.jam_elements[j];
            const double g2 = std::norm(ch.h_iu[k](el)) * (1.0 + params.noise_irs);
            e.add(m.jam_offset + static_cast<int>(j), -mg.gamma[k] * scale * g2 * params.p_irs_max);
        }
        m.sinr_rows.push_back(pb.add_nonneg(e));
        m.sinr_scale.push_back(scale);
    }

    // Leakage LMIs: C_tol (F Z F^H + Q_IRS + eps I) - F W_k F^H >= 0, scaled by 1/||F||^2.
    const Eigen::MatrixXcd q_irs = irs_covariance_at_eve(ch, fixed, params);
    const double s = leak_scale_of(f);
    std::vector<int> leak_ids;
    for (int k = 0; k < n_u; ++k) {
        const double scale = 1.0 / s;
        conic::HermitianAffine lmi(n_e);
        lmi.constant = hermitian_part(mg.c_tol[k] * scale * q_irs) +
                       mg.c_tol[k] * opts.q_regularizer * Eigen::MatrixXcd::Identity(n_e, n_e);
        m.w[k].add_to(lmi, [&](const Eigen::MatrixXcd& b) { return hermitian_part(-scale * f * b * f.adjoint()); });
        if (m.z.n > 0)
            m.z.add_to(lmi, [&](const Eigen::MatrixXcd& b) {
                return hermitian_part(mg.c_tol[k] * scale * f * b * f.adjoint());
            });
        for (std::size_t j = 0; j < m.jam_elements.size(); ++j) {
            const Eigen::VectorXcd h = ch.h_ie.col(m.jam_elements[j]);
            const double c = mg.c_tol[k] * scale * (1.0 + params.noise_irs) * params.p_irs_max;
            lmi.add(m.jam_offset + static_cast<int>(j), hermitian_part(c * h * h.adjoint()));
        }
        leak_ids.push_back(pb.add_hermitian_lmi(lmi));
        m.leak_scale.push_back(scale);
    }

    // PSD blocks of the matrix variables.
    auto add_psd = [&](const conic::HermitianVariable& v) {
        conic::HermitianAffine a(v.n);
        v.add_to(a, [](const Eigen::MatrixXcd& b) { return b; });
        pb.add_hermitian_lmi(a);
        ++m.variable_psd_blocks;
    };
    for (const auto& w : m.w) add_psd(w);
    if (m.z.n > 0) add_psd(m.z);

    for (int id : leak_ids) m.leak_cones.push_back(pb.cone_index(id));
    m.problem = pb.build();
    return m;
}

RankOne extract_rank_one(const Eigen::MatrixXcd& w_mat) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(w_mat));
    const Eigen::Index n = w_mat.rows();
    RankOne r;
    const double l1 = std::max(es.eigenvalues()(n - 1), 0.0);
    r.w = std::sqrt(l1) * es.eigenvectors().col(n - 1);
    r.gap = n > 1 && l1 > 0.0 ? std::max(es.eigenvalues()(n - 2), 0.0) / l1 : 0.0;
    return r;
}

double p3_violation(const ChannelSet& ch, const IrsDesign& irs, const SystemParams& params, const BsDesign& bs,
                    const P3Options& opts) {
    return violations(ch, irs, params, bs, opts).worst();
}

BsSubproblemResult solve_p3(const ChannelSet& ch, const IrsDesign& irs, const SystemParams& params,
                            const P3Options& opts) {
    const P3Model m = build_p3(ch, irs, params, opts);
    conic::SolverOptions so = opts.solver;
    conic::ConicSolution sol = conic::solve(m.problem, so);
    if ((sol.status == conic::SolveStatus::MaxIterations || sol.status == conic::SolveStatus::NumericalFailure) &&
        opts.fallback_tol > so.tol) {
        so.tol = opts.fallback_tol;
        sol = conic::solve(m.problem, so);
    }
    BsSubproblemResult r;
    r.solver_status = sol.status;
    r.iterations = sol.iterations;
    if (sol.status == conic::SolveStatus::PrimalInfeasible) {
        r.status = SubproblemStatus::Infeasible;
        return r;
    }
    if (sol.status != conic::SolveStatus::Optimal) {
        r.status = SubproblemStatus::SolverFailure;
        return r;
    }
    r.certified = conic::certify_solution(m.problem, sol, 10.0 * so.tol).passed();
    r.objective = sol.objective_value;
    r.irs = irs;
    for (std::size_t j = 0; j < m.jam_elements.size(); ++j) {
        const int el = m.jam_elements[j];
        const double pw = std::max(sol.x(m.jam_offset + static_cast<int>(j)), 0.0) * params.p_irs_max;
        const double ph = std::abs(irs.phi(el)) > 0.0 ? std::arg(irs.phi(el)) : 0.0;
        r.irs.phi(el) = std::polar(std::sqrt(pw), ph);
    }
    const double irs_power = r.irs.power();
    if (irs_power > params.p_irs_max) r.irs.phi *= std::sqrt(params.p_irs_max / irs_power);

    const int n_u = ch.n_users(), n_t = ch.n_tx();
    r.z_b = m.z.n > 0 ? m.z.value(sol.x) : Eigen::MatrixXcd::Zero(n_t, n_t);
    r.extracted = BsDesign::zero(n_t, n_u);
    r.extracted.z_b = project_psd(r.z_b);
    for (int k = 0; k < n_u; ++k) {
        r.w_mats.push_back(m.w[k].value(sol.x));
        const RankOne ro = extract_rank_one(r.w_mats[k]);
        r.extracted.w[k] = ro.w;
        r.tightness.push_back(ro.gap);
    }

    for (int k = 0; k < n_u; ++k) {
        r.sinr_dual.push_back(sol.z(m.sinr_rows[k]) * m.sinr_scale[k]);
        const conic::ConeBlock& cb = m.problem.cones[m.leak_cones[k]];
        const Eigen::MatrixXd zk = conic::smat(sol.z.segment(cb.offset, cb.size()));
        r.leak_dual.push_back(conic::unembed_dual(zk) * m.leak_scale[k]);
    }

    const IrsDesign& used = r.irs;
    Violations v = violations(ch, used, params, r.extracted, opts);
    r.path = ExtractionPath::Eigen;
    if (v.worst() > opts.extraction_tol) {
        // Gaussian randomization for each user whose own constraints fail.
        r.path = ExtractionPath::Randomization;
        const Margins mg = margins(params, opts.margin);
        std::mt19937_64 rng(opts.seed);
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
        for (int k = 0; k < n_u; ++k) {
            if (std::max(v.sinr[k], v.leak[k]) <= opts.extraction_tol) continue;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(r.w_mats[k]));
            const Eigen::MatrixXcd l =
                es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<cd>().asDiagonal();
            const Eigen::VectorXcd h = equivalent_user_channel(ch, used, k);
            BsDesign best = r.extracted;
            double best_power = std::numeric_limits<double>::infinity();
            for (int d = 0; d < opts.randomization_draws; ++d) {
                Eigen::VectorXcd xi(n_t);
                for (int i = 0; i < n_t; ++i) xi(i) = cd(nd(rng), nd(rng));
                xi = l * xi;
                const double gain = std::norm(h.dot(xi));
                if (!(gain > 0.0)) continue;
                // The denominator of user k's SINR does not depend on w_k.
                BsDesign cand = r.extracted;
                cand.w[k] = xi;
                const double gamma_xi = user_sinr(ch, cand, used, params, k);
                cand.w[k] *= std::sqrt(mg.gamma[k] / gamma_xi);
                const double p = cand.w[k].squaredNorm();
                if (p < best_power && violations(ch, used, params, cand, opts).worst() <= opts.extraction_tol) {
                    best_power = p;
                    best = cand;
                }
            }
            if (std::isinf(best_power)) {
                r.status = SubproblemStatus::ExtractionFailed;
                r.violation = v.worst();
                r.extracted_power = total_power(r.extracted, IrsDesign::zero(0));
                return r;
            }
            r.extracted = best;
        }
        v = violations(ch, used, params, r.extracted, opts);
    }
    r.violation = v.worst();
    r.extracted_power = total_power(r.extracted, IrsDesign::zero(0));
    r.status = r.violation <= opts.extraction_tol ? SubproblemStatus::Optimal : SubproblemStatus::ExtractionFailed;
    return r;
}

}  // namespace airs
