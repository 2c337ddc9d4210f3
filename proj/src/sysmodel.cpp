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

#include "airs/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace airs {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
constexpr double kRelSingular = 1e-12;  // relative eigenvalue floor for Q
constexpr double kRelNullEnergy = 1e-9;  // tolerated share of F w in null(Q)

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

double log2_1p(double x) { return std::log1p(x) / std::numbers::ln2; }
}  // namespace

// ---- units ----------------------------------------------------------------

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts * 1e3); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// ---- parameters -----------------------------------------------------------

double SystemParams::reference_loss() const {
    const double r = kSpeedOfLight / (4.0 * std::numbers::pi * carrier_freq * ref_distance);
    return r * r;
}

double SystemParams::c_tol(int k) const { return std::exp2(c_max.at(k)) - 1.0; }

void SystemParams::broadcast_per_user() {
    auto fit = [this](std::vector<double>& v) {
        const double first = v.empty() ? 0.0 : v.front();
        v.resize(n_users, first);
    };
    fit(noise_user);
    fit(gamma_min);
    fit(c_max);
}

void SystemParams::set_gamma_min_db(double db) { gamma_min.assign(n_users, db_to_linear(db)); }

void SystemParams::validate() const {
    require(n_tx >= 1 && n_eve >= 1 && n_irs >= 1 && n_users >= 1, "antenna/element/user counts must be positive");
    require(n_irs + n_tx >= n_eve, "M + N_T >= N_E violated");
    require(static_cast<int>(users.size()) == n_users, "users positions must have n_users entries");
    require(static_cast<int>(noise_user.size()) == n_users, "noise_user must have n_users entries");
    require(static_cast<int>(gamma_min.size()) == n_users, "gamma_min must have n_users entries");
    require(static_cast<int>(c_max.size()) == n_users, "c_max must have n_users entries");
    for (double v : noise_user) require(v >= 0.0, "noise_user must be nonnegative");
    for (double v : gamma_min) require(v > 0.0, "gamma_min must be positive");
    for (double v : c_max) require(v > 0.0, "c_max must be positive");
    require(noise_irs >= 0.0 && p_irs_max >= 0.0, "powers must be nonnegative");
    require(carrier_freq > 0.0 && ref_distance > 0.0, "carrier frequency and reference distance must be positive");
    const auto& r = rician_factors;
    require(r.bu >= 0 && r.be >= 0 && r.bi >= 0 && r.iu >= 0 && r.ie >= 0, "Rician factors must be nonnegative");
}

// ---- containers -----------------------------------------------------------

void ChannelSet::validate() const {
    const int m = n_irs(), nt = n_tx(), ne = n_eve();
    require(h_iu.size() == h_bu.size(), "h_iu and h_bu must have one entry per user");
    for (const auto& h : h_iu) require(h.size() == m, "h_iu length must be M");
    for (const auto& h : h_bu) require(h.size() == nt, "h_bu length must be N_T");
    require(h_ie.rows() == ne && h_ie.cols() == m, "H_IE must be N_E x M");
    require(g.allFinite() && h_ie.allFinite() && h_be.allFinite(), "channels must be finite");
}

BsDesign BsDesign::zero(int n_tx, int n_users) {
    BsDesign b;
    b.w.assign(n_users, Eigen::VectorXcd::Zero(n_tx));
    b.z_b = Eigen::MatrixXcd::Zero(n_tx, n_tx);
    return b;
}

void BsDesign::validate() const {
    const double scale = std::max(1.0, z_b.norm());
    require((z_b - z_b.adjoint()).norm() <= 1e-10 * scale, "Z_B must be Hermitian");
    if (z_b.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(z_b, Eigen::EigenvaluesOnly);
        require(es.eigenvalues()(0) >= -1e-8, "Z_B must be PSD");
    }
}

IrsDesign IrsDesign::zero(int m) {
    IrsDesign d;
    d.phi = Eigen::VectorXcd::Zero(m);
    d.alpha = Eigen::VectorXd::Ones(m);
    return d;
}

Eigen::VectorXcd IrsDesign::u() const { return alpha.cast<cd>().cwiseProduct(phi.conjugate()); }

void IrsDesign::validate(double p_irs_max) const {
    require(alpha.size() == phi.size(), "alpha and phi must have equal length");
    for (int m = 0; m < alpha.size(); ++m) require(alpha(m) == 0.0 || alpha(m) == 1.0, "alpha must be binary");
    require(power() <= p_irs_max + 1e-8, "IRS power budget exceeded");
}

// ---- model ----------------------------------------------------------------

Eigen::VectorXcd equivalent_user_channel(const ChannelSet& ch, const IrsDesign& irs, int k) {
    return ch.h_bu[k] + ch.g.adjoint() * irs.u().cwiseProduct(ch.h_iu[k]);
}

Eigen::MatrixXcd equivalent_eve_channel(const ChannelSet& ch, const IrsDesign& irs) {
    return ch.h_be + ch.h_ie * irs.u().conjugate().asDiagonal() * ch.g;
}

double irs_interference_at_user(const ChannelSet& ch, const IrsDesign& irs, const SystemParams& params, int k) {
    double v = 0.0;
    for (int m = 0; m < irs.size(); ++m) {
        const double jam = 1.0 - irs.alpha(m);
        v += std::norm(ch.h_iu[k](m)) * std::norm(irs.phi(m)) * (jam * jam + params.noise_irs);
    }
    return v;
}

Eigen::MatrixXcd irs_covariance_at_eve(const ChannelSet& ch, const IrsDesign& irs, const SystemParams& params) {
    Eigen::VectorXd d(irs.size());
    for (int m = 0; m < irs.size(); ++m) {
        const double jam = 1.0 - irs.alpha(m);
        d(m) = std::norm(irs.phi(m)) * (jam * jam + params.noise_irs);
    }
    Eigen::MatrixXcd q = ch.h_ie * d.cast<cd>().asDiagonal() * ch.h_ie.adjoint();
    return 0.5 * (q + q.adjoint());
}

EffectiveChannels effective_channels(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs,
                                     const SystemParams& params) {
    ch.validate();
    require(static_cast<int>(bs.w.size()) == ch.n_users(), "precoder count must equal K");
    require(irs.size() == ch.n_irs(), "IRS size must equal M");
    EffectiveChannels e;
    const int n_users = ch.n_users();
    for (int k = 0; k < n_users; ++k) e.h_eq.push_back(equivalent_user_channel(ch, irs, k));
    e.f_eq = equivalent_eve_channel(ch, irs);
    for (int k = 0; k < n_users; ++k) {
        double mu = params.noise_user[k];
        for (int j = 0; j < n_users; ++j)
            if (j != k) mu += std::norm(e.h_eq[k].dot(bs.w[j]));
        mu += e.h_eq[k].dot(bs.z_b * e.h_eq[k]).real();
        e.mu.push_back(mu);
    }
    Eigen::MatrixXcd q = e.f_eq * bs.z_b * e.f_eq.adjoint();
    q = 0.5 * (q + q.adjoint());
    e.q = q + irs_covariance_at_eve(ch, irs, params);
    return e;
}

double user_sinr(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs, const SystemParams& params, int k) {
    const EffectiveChannels e = effective_channels(ch, bs, irs, params);
    const double num = std::norm(e.h_eq[k].dot(bs.w[k]));
    return num / (e.mu[k] + irs_interference_at_user(ch, irs, params, k));
}

double user_rate(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs, const SystemParams& params, int k) {
    return log2_1p(user_sinr(ch, bs, irs, params, k));
}

EveCapacityForms eve_capacity_forms(const Eigen::MatrixXcd& q_in, const Eigen::VectorXcd& fw_in) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(q_in);
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmax > 0.0) || es.eigenvalues().minCoeff() <= kRelSingular * lmax)
        throw SingularQError("Q is singular; the worst-case Eve capacity is undefined");
    // Scale-free: divide Q by lambda_max and F w by its square root.
    const Eigen::MatrixXcd q = q_in / lmax;
    const Eigen::VectorXcd v = fw_in / std::sqrt(lmax);
    const Eigen::VectorXd lam = es.eigenvalues() / lmax;
    const Eigen::MatrixXcd& e = es.eigenvectors();

    EveCapacityForms f;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(q);
    const Eigen::VectorXcd qinv_v = lu.solve(v);
    const int n = static_cast<int>(q.rows());
    const Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n) + qinv_v * v.adjoint();
    f.det_form = std::log2(std::abs(m.determinant()));
    f.scalar_form = log2_1p(v.dot(qinv_v).real());
    f.trace_form = log2_1p((qinv_v * v.adjoint()).trace().real());
    const Eigen::MatrixXcd q_isqrt = e * lam.cwiseSqrt().cwiseInverse().cast<cd>().asDiagonal() * e.adjoint();
    const Eigen::VectorXcd s = q_isqrt * v;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ls(s * s.adjoint(), Eigen::EigenvaluesOnly);
    f.lambda_form = log2_1p(ls.eigenvalues().maxCoeff());
    return f;
}

double eve_capacity_from(const Eigen::MatrixXcd& q_in, const Eigen::VectorXcd& fw_in) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (q_in + q_in.adjoint()));
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmax > 0.0)) throw SingularQError("Q = 0; the worst-case Eve capacity is undefined");
    const Eigen::VectorXd lam = es.eigenvalues() / lmax;
    const Eigen::VectorXcd c = es.eigenvectors().adjoint() * (fw_in / std::sqrt(lmax));
    double x = 0.0, null_energy = 0.0;
    for (int i = 0; i < lam.size(); ++i) {
        if (lam(i) > kRelSingular) x += std::norm(c(i)) / lam(i);
        else null_energy += std::norm(c(i));
    }
    if (null_energy > kRelNullEnergy * c.squaredNorm() && null_energy > 0.0)
        return std::numeric_limits<double>::infinity();
    return log2_1p(x);
}

double eve_capacity(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs, const SystemParams& params,
                    int k) {
    const EffectiveChannels e = effective_channels(ch, bs, irs, params);
    return eve_capacity_from(e.q, e.f_eq * bs.w[k]);
}

double secrecy_rate(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs, const SystemParams& params,
                    int k) {
    const double r = user_rate(ch, bs, irs, params, k) - eve_capacity(ch, bs, irs, params, k);
    return r > 0.0 ? r : 0.0;
}

double total_power(const BsDesign& bs, const IrsDesign& irs) {
    double p = bs.z_b.trace().real() + irs.power();
    for (const auto& w : bs.w) p += w.squaredNorm();
    return p;
}

double FeasibilityReport::worst() const {
    double v = std::min({c3, c4, c5});
    for (double s : c1) v = std::min(v, s);
    for (double s : c2) v = std::min(v, s);
    return v;
}

FeasibilityReport check_feasibility(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs,
                                    const SystemParams& params, double tol) {
    FeasibilityReport r;
    const EffectiveChannels e = effective_channels(ch, bs, irs, params);
    const int n_users = ch.n_users();
    for (int k = 0; k < n_users; ++k) {
        const double num = std::norm(e.h_eq[k].dot(bs.w[k]));
        const double gamma = num / (e.mu[k] + irs_interference_at_user(ch, irs, params, k));
        r.c1.push_back(gamma - params.gamma_min[k]);
        try {
            r.c2.push_back(params.c_max[k] - eve_capacity_from(e.q, e.f_eq * bs.w[k]));
        } catch (const SingularQError&) {
            r.q_singular = true;
            r.c2.push_back(-std::numeric_limits<double>::infinity());
        }
    }
    if (bs.z_b.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (bs.z_b + bs.z_b.adjoint()), Eigen::EigenvaluesOnly);
        r.c3 = es.eigenvalues()(0);
    }
    r.c4 = 0.0;
    for (int m = 0; m < irs.alpha.size(); ++m)
        r.c4 = std::min(r.c4, -std::min(std::abs(irs.alpha(m)), std::abs(1.0 - irs.alpha(m))));
    r.c5 = params.p_irs_max - irs.power();
    r.feasible = r.worst() >= -tol;
    return r;
}

Estimate empirical_sinr(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs, const SystemParams& params,
                        int k, long n_samples, std::uint64_t seed) {
    require(n_samples >= 2, "empirical_sinr needs at least two samples");
    const EffectiveChannels e = effective_channels(ch, bs, irs, params);
    const int n_users = ch.n_users(), m = ch.n_irs();
    const Eigen::VectorXcd& h = e.h_eq[k];

    // Per-source coefficients of the received scalar.
    std::vector<cd> a(n_users);
    for (int j = 0; j < n_users; ++j) a[j] = h.dot(bs.w[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> zs(0.5 * (bs.z_b + bs.z_b.adjoint()));
    const Eigen::VectorXd zl = zs.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::RowVectorXcd b = h.adjoint() * zs.eigenvectors() * zl.cast<cd>().asDiagonal();
    std::vector<cd> jam(m), dyn(m);
    const double sigma_i = std::sqrt(params.noise_irs);
    for (int i = 0; i < m; ++i) {
        const cd hc = std::conj(ch.h_iu[k](i));
        jam[i] = hc * (1.0 - irs.alpha(i)) * irs.phi(i);
        dyn[i] = hc * irs.phi(i) * sigma_i;
    }
    const double sigma_u = std::sqrt(params.noise_user[k]);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    auto cn = [&]() { return cd(nd(rng), nd(rng)); };
    double sd = 0, sd2 = 0, so = 0, so2 = 0;
    for (long s = 0; s < n_samples; ++s) {
        cd desired, other = 0.0;
        for (int j = 0; j < n_users; ++j) {
            const cd x = cn();
            if (j == k) desired = a[j] * x;
            else other += a[j] * x;
        }
        for (int i = 0; i < b.size(); ++i) other += b(i) * cn();
        for (int i = 0; i < m; ++i) other += jam[i] * cn();
        for (int i = 0; i < m; ++i) other += dyn[i] * cn();
        other += sigma_u * cn();
        const double pd = std::norm(desired), po = std::norm(other);
        sd += pd;
        sd2 += pd * pd;
        so += po;
        so2 += po * po;
    }
    const double n = static_cast<double>(n_samples);
    const double md = sd / n, mo = so / n;
    const double vd = std::max(0.0, sd2 / n - md * md), vo = std::max(0.0, so2 / n - mo * mo);
    Estimate est;
    est.value = md / mo;
    // Delta method for a ratio of independent sample means.
    est.std_error = std::sqrt((vd / (mo * mo) + md * md * vo / (mo * mo * mo * mo)) / n);
    return est;
}

}  // namespace airs
