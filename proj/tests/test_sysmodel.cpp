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

#include <doctest.h>

#include <cmath>
#include <random>

using namespace airs;

namespace {

Eigen::MatrixXcd random_cmat(std::mt19937_64& rng, int r, int c, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5) * scale);
    Eigen::MatrixXcd m(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) m(i, j) = cd(nd(rng), nd(rng));
    return m;
}

Eigen::VectorXcd random_cvec(std::mt19937_64& rng, int n, double scale = 1.0) {
    return random_cmat(rng, n, 1, scale).col(0);
}

// Random design on the default scenario: powers are scaled so that all
// terms have comparable magnitude at the receivers.
struct Instance {
    SystemParams p;
    ChannelSet ch;
    BsDesign bs;
    IrsDesign irs;
};

Instance random_instance(std::uint64_t seed, bool binary_modes = true) {
    Instance in;
    in.ch = generate_channels(in.p, seed);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const int nt = in.p.n_tx, m = in.p.n_irs;
    in.bs = BsDesign::zero(nt, in.p.n_users);
    for (auto& w : in.bs.w) w = random_cvec(rng, nt, 0.3);
    const Eigen::MatrixXcd b = random_cmat(rng, nt, nt, 0.1);
    in.bs.z_b = b * b.adjoint();
    in.irs = IrsDesign::zero(m);
    in.irs.phi = random_cvec(rng, m, std::sqrt(in.p.p_irs_max / (2.0 * m)));
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int i = 0; i < m; ++i) in.irs.alpha(i) = binary_modes ? (ud(rng) < 0.5 ? 0.0 : 1.0) : ud(rng);
    return in;
}

// Minimal single-antenna scenario for closed-form checks.
SystemParams scalar_params() {
    SystemParams p;
    p.n_tx = 1;
    p.n_eve = 1;
    p.n_irs = 1;
    p.n_users = 1;
    p.users = {{100.0, 10.0}};
    p.broadcast_per_user();
    return p;
}

ChannelSet scalar_channels(cd h_bu, cd h_be) {
    ChannelSet ch;
    ch.g = Eigen::MatrixXcd::Zero(1, 1);
    ch.h_iu = {Eigen::VectorXcd::Zero(1)};
    ch.h_ie = Eigen::MatrixXcd::Zero(1, 1);
    ch.h_bu = {Eigen::VectorXcd::Constant(1, h_bu)};
    ch.h_be = Eigen::MatrixXcd::Constant(1, 1, h_be);
    return ch;
}

}  // namespace

TEST_CASE("unit conversions") {
    CHECK(dbm_to_watts(10.0) == doctest::Approx(0.01));
    CHECK(dbm_to_watts(-100.0) == doctest::Approx(1e-13));
    CHECK(watts_to_dbm(1e-3) == doctest::Approx(0.0));
    CHECK(db_to_linear(4.0) == doctest::Approx(2.5118864315));
    CHECK(linear_to_db(100.0) == doctest::Approx(20.0));
}

TEST_CASE("parameter invariants") {
    SystemParams p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.reference_loss() == doctest::Approx(std::pow(299792458.0 / (4.0 * M_PI * 2.4e9), 2)));
    CHECK(linear_to_db(p.reference_loss()) == doctest::Approx(-40.05).epsilon(1e-3));
    CHECK(p.c_tol(0) == doctest::Approx(std::exp2(1.6) - 1.0).epsilon(1e-15));
    CHECK(p.c_tol(0) == doctest::Approx(2.03137).epsilon(1e-4));
    SystemParams bad = p;
    bad.n_eve = 20;  // M + N_T < N_E
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.gamma_min[0] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.users.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("channel generation: geometry, statistics, determinism") {
    SystemParams p;
    const double d_bi = std::hypot(60.0, 20.0);
    CHECK(d_bi == doctest::Approx(std::sqrt(4000.0)));
    CHECK(d_bi == doctest::Approx(63.2456).epsilon(1e-6));
    CHECK(path_loss(p, d_bi, 2.6) == doctest::Approx(p.reference_loss() * std::pow(4000.0, -1.3)));

    const ChannelSet a = generate_channels(p, 42), b = generate_channels(p, 42);
    CHECK(a.g == b.g);
    CHECK(a.h_ie == b.h_ie);
    CHECK(a.h_be == b.h_be);
    for (int k = 0; k < 2; ++k) {
        CHECK(a.h_iu[k] == b.h_iu[k]);
        CHECK(a.h_bu[k] == b.h_bu[k]);
    }
    CHECK(a.g.rows() == 12);
    CHECK(a.g.cols() == 4);
    CHECK(a.h_ie.rows() == 2);
    CHECK(a.h_ie.cols() == 12);
    CHECK(a.h_be.rows() == 2);
    CHECK(generate_channels(p, 43).g != a.g);

    // Rayleigh BS-user link: E|h|^2 = L(d); 1e5 draws over seeds.
    p.n_tx = 1;
    p.n_irs = 1;
    p.n_eve = 1;
    const double l_bu = path_loss(p, std::hypot(100.0, 10.0), p.pathloss_exponents.bu);
    double acc = 0.0;
    const int n = 100000;
    for (int s = 0; s < n; ++s) acc += generate_channels(p, 1000 + s).h_bu[0].squaredNorm();
    CHECK(std::abs(acc / n / l_bu - 1.0) < 0.02);

    SystemParams z;
    z.eve = z.irs;
    CHECK_THROWS_AS(generate_channels(z, 1), std::invalid_argument);
}

TEST_CASE("Rician link carries the steering-vector LoS component") {
    SystemParams p;
    p.rician_factors.bi = 1e12;  // essentially pure LoS
    const ChannelSet ch = generate_channels(p, 7);
    const double l = path_loss(p, std::sqrt(4000.0), p.pathloss_exponents.bi);
    // Pure LoS: every entry has magnitude sqrt(L) and the matrix has rank one.
    CHECK((ch.g.cwiseAbs().array() - std::sqrt(l)).abs().maxCoeff() < 1e-5 * std::sqrt(l));
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ch.g);
    CHECK(svd.singularValues()(1) < 1e-5 * svd.singularValues()(0));
}

TEST_CASE("effective channels: IRS disabled and all-reflect reductions") {
    Instance in = random_instance(3);
    IrsDesign off = in.irs;
    off.phi.setZero();
    EffectiveChannels e = effective_channels(in.ch, in.bs, off, in.p);
    for (int k = 0; k < 2; ++k) CHECK((e.h_eq[k] - in.ch.h_bu[k]).norm() == 0.0);
    CHECK((e.f_eq - in.ch.h_be).norm() == 0.0);
    CHECK((e.q - in.ch.h_be * in.bs.z_b * in.ch.h_be.adjoint()).norm() <= 1e-14 * e.q.norm());

    IrsDesign refl = in.irs;
    refl.alpha.setOnes();
    const Eigen::MatrixXcd cov = irs_covariance_at_eve(in.ch, refl, in.p);
    const Eigen::MatrixXcd dyn =
        in.p.noise_irs * in.ch.h_ie * refl.phi.cwiseAbs2().cast<cd>().asDiagonal() * in.ch.h_ie.adjoint();
    CHECK((cov - dyn).norm() <= 1e-14 * dyn.norm());
    const double i_user = irs_interference_at_user(in.ch, refl, in.p, 0);
    double dyn_user = 0.0;
    for (int m = 0; m < 12; ++m) dyn_user += in.p.noise_irs * std::norm(in.ch.h_iu[0](m) * refl.phi(m));
    CHECK(i_user == doctest::Approx(dyn_user).epsilon(1e-12));

    // Cascaded channel structure: h_eq^H = h_bu^H + h_iu^H A Theta G.
    const Eigen::MatrixXcd at = (in.irs.alpha.cast<cd>().cwiseProduct(in.irs.phi)).asDiagonal();
    e = effective_channels(in.ch, in.bs, in.irs, in.p);
    const Eigen::RowVectorXcd row = in.ch.h_bu[1].adjoint() + in.ch.h_iu[1].adjoint() * at * in.ch.g;
    CHECK((e.h_eq[1].adjoint() - row).norm() <= 1e-13 * row.norm());
    CHECK((e.f_eq - (in.ch.h_be + in.ch.h_ie * at * in.ch.g)).norm() <= 1e-13 * e.f_eq.norm());
    CHECK((e.q - e.q.adjoint()).norm() == 0.0);
}

TEST_CASE("Q matches the sample covariance of Eve's non-desired terms") {
    const Instance in = random_instance(11);
    const EffectiveChannels e = effective_channels(in.ch, in.bs, in.irs, in.p);
    // Independent sampler: F z_B + H_IE ((I - A) Theta z_I + Theta n_I).
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    Eigen::LLT<Eigen::MatrixXcd> llt(in.bs.z_b);
    const Eigen::MatrixXcd lz = llt.matrixL();
    const int m = 12, nt = 4, n = 1000000;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(2, 2);
    Eigen::VectorXcd xz(nt), xi(m);
    for (int s = 0; s < n; ++s) {
        for (int i = 0; i < nt; ++i) xz(i) = cd(nd(rng), nd(rng));
        for (int i = 0; i < m; ++i) {
            const cd zi(nd(rng), nd(rng)), ni(nd(rng), nd(rng));
            xi(i) = in.irs.phi(i) * ((1.0 - in.irs.alpha(i)) * zi + std::sqrt(in.p.noise_irs) * ni);
        }
        const Eigen::VectorXcd r = e.f_eq * (lz * xz) + in.ch.h_ie * xi;
        acc += r * r.adjoint();
    }
    acc /= n;
    CHECK((acc - e.q).norm() <= 0.01 * e.q.norm());
}

TEST_CASE("user SINR closed forms") {
    SystemParams p = scalar_params();
    ChannelSet ch = scalar_channels(1.0, 1.0);
    BsDesign bs = BsDesign::zero(1, 1);
    const double power = 2e-12;
    bs.w[0](0) = std::sqrt(power);
    IrsDesign irs = IrsDesign::zero(1);
    CHECK(user_sinr(ch, bs, irs, p, 0) == doctest::Approx(power / p.noise_user[0]));

    // Same in a multi-antenna setting with h_bu = e_1.
    SystemParams q;
    q.n_users = 1;
    q.users = {{100.0, 10.0}};
    q.broadcast_per_user();
    ChannelSet c2 = generate_channels(q, 1);
    c2.h_bu[0] = Eigen::VectorXcd::Unit(4, 0);
    BsDesign b2 = BsDesign::zero(4, 1);
    b2.w[0] = std::sqrt(power) * Eigen::VectorXcd::Unit(4, 0);
    CHECK(user_sinr(c2, b2, IrsDesign::zero(12), q, 0) == doctest::Approx(power / q.noise_user[0]));

    const Instance in = random_instance(4);
    BsDesign silent = in.bs;
    silent.w[0].setZero();
    CHECK(user_sinr(in.ch, silent, in.irs, in.p, 0) == 0.0);

    // Explicit denominator.
    const EffectiveChannels e = effective_channels(in.ch, in.bs, in.irs, in.p);
    const int k = 1;
    double den = in.p.noise_user[k] + std::norm(e.h_eq[k].dot(in.bs.w[0])) +
                 (e.h_eq[k].adjoint() * in.bs.z_b * e.h_eq[k])(0, 0).real();
    for (int m = 0; m < 12; ++m) {
        const double g2 = std::norm(in.ch.h_iu[k](m) * in.irs.phi(m));
        den += g2 * (std::pow(1.0 - in.irs.alpha(m), 2) + in.p.noise_irs);
    }
    CHECK(e.mu[k] + irs_interference_at_user(in.ch, in.irs, in.p, k) >= in.p.noise_user[k]);
    CHECK(user_sinr(in.ch, in.bs, in.irs, in.p, k) ==
          doctest::Approx(std::norm(e.h_eq[k].dot(in.bs.w[k])) / den).epsilon(1e-12));
    CHECK(user_rate(in.ch, in.bs, in.irs, in.p, k) ==
          doctest::Approx(std::log2(1.0 + user_sinr(in.ch, in.bs, in.irs, in.p, k))));
}

TEST_CASE("Eve capacity forms agree on random instances") {
    std::mt19937_64 rng(99);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const int ne = 1 + t % 4;
        const Eigen::MatrixXcd b = random_cmat(rng, ne, ne + 1);
        const Eigen::MatrixXcd q = 1e-12 * (b * b.adjoint());
        const Eigen::VectorXcd fw = random_cvec(rng, ne, 1e-6 * std::exp((t % 7) - 3.0));
        const EveCapacityForms f = eve_capacity_forms(q, fw);
        worst = std::max({worst, std::abs(f.det_form - f.scalar_form), std::abs(f.det_form - f.trace_form),
                          std::abs(f.det_form - f.lambda_form)});
        CHECK(eve_capacity_from(q, fw) == doctest::Approx(f.scalar_form).epsilon(1e-12));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("Eve capacity special cases") {
    const Eigen::MatrixXcd q = Eigen::MatrixXcd::Constant(1, 1, 3e-12);
    const Eigen::VectorXcd fw = Eigen::VectorXcd::Constant(1, cd(0.0, std::sqrt(6e-12)));
    CHECK(eve_capacity_from(q, fw) == doctest::Approx(std::log2(3.0)));
    CHECK(eve_capacity_from(q, Eigen::VectorXcd::Zero(1)) == 0.0);
    CHECK_THROWS_AS(eve_capacity_forms(Eigen::MatrixXcd::Zero(2, 2), Eigen::VectorXcd::Ones(2)), SingularQError);
    CHECK_THROWS_AS(eve_capacity_from(Eigen::MatrixXcd::Zero(2, 2), Eigen::VectorXcd::Ones(2)), SingularQError);

    // Rank-deficient Q: pseudo-inverse on the range, +inf off it.
    Eigen::MatrixXcd q2 = Eigen::MatrixXcd::Zero(2, 2);
    q2(0, 0) = 2.0;
    CHECK(eve_capacity_from(q2, Eigen::VectorXcd::Unit(2, 0)) == doctest::Approx(std::log2(1.5)));
    CHECK(std::isinf(eve_capacity_from(q2, Eigen::VectorXcd::Unit(2, 1))));

    // All AN sources off and sigma_I = 0: worst-case model undefined.
    Instance in = random_instance(5);
    in.bs.z_b.setZero();
    in.irs.alpha.setOnes();
    in.p.noise_irs = 0.0;
    CHECK_THROWS_AS(eve_capacity(in.ch, in.bs, in.irs, in.p, 0), SingularQError);
    const FeasibilityReport r = check_feasibility(in.ch, in.bs, in.irs, in.p, 1e-6);
    CHECK(r.q_singular);
    CHECK_FALSE(r.feasible);
}

TEST_CASE("secrecy rate") {
    // Two BS antennas: the user sees antenna 1 only, the AN sits on antenna 2,
    // so R_U = log2(1 + P / sigma^2) and C_E = log2(1 + P / z).
    SystemParams p = scalar_params();
    p.n_tx = 2;
    ChannelSet ch = scalar_channels(1.0, 1.0);
    ch.g = Eigen::MatrixXcd::Zero(1, 2);
    ch.h_bu[0] = Eigen::VectorXcd::Unit(2, 0);
    ch.h_be = Eigen::MatrixXcd::Ones(1, 2);
    const IrsDesign irs = IrsDesign::zero(1);
    const double gamma = std::pow(10.0, 0.4);
    const double power = gamma * p.noise_user[0];
    auto design = [&](double z) {
        BsDesign bs = BsDesign::zero(2, 1);
        bs.w[0](0) = std::sqrt(power);
        bs.z_b(1, 1) = z;
        return bs;
    };

    const BsDesign bs = design(power / p.c_tol(0));
    CHECK(user_rate(ch, bs, irs, p, 0) == doctest::Approx(std::log2(1.0 + gamma)).epsilon(1e-12));
    CHECK(eve_capacity(ch, bs, irs, p, 0) == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(secrecy_rate(ch, bs, irs, p, 0) == doctest::Approx(0.2124).epsilon(1e-3));

    const double at_boundary = secrecy_rate(ch, design(power / gamma), irs, p, 0);
    CHECK(at_boundary >= 0.0);
    CHECK(at_boundary <= 1e-12);
    CHECK(secrecy_rate(ch, design(power * 1e-3), irs, p, 0) == 0.0);
}

TEST_CASE("total power") {
    CHECK(total_power(BsDesign::zero(4, 2), IrsDesign::zero(12)) == 0.0);
    BsDesign bs = BsDesign::zero(2, 1);
    bs.w[0] << std::sqrt(0.25), cd(0.0, std::sqrt(0.25));
    bs.z_b = Eigen::MatrixXcd::Identity(2, 2) * 0.05;
    IrsDesign irs = IrsDesign::zero(4);
    irs.phi.setConstant(std::sqrt(0.01 / 4.0));
    CHECK(irs.power() == doctest::Approx(0.01));
    CHECK(total_power(bs, irs) == doctest::Approx(0.61));
    // Invariance under per-user phase rotation.
    BsDesign rot = bs;
    rot.w[0] *= std::polar(1.0, 1.234);
    CHECK(total_power(rot, irs) == doctest::Approx(0.61));
}

TEST_CASE("IRS design helpers") {
    IrsDesign irs = IrsDesign::zero(3);
    irs.phi << cd(1, 2), cd(0, -1), cd(3, 0);
    irs.alpha << 1, 0, 1;
    const Eigen::VectorXcd u = irs.u();
    CHECK(u(0) == std::conj(irs.phi(0)));
    CHECK(u(1) == cd(0.0, 0.0));
    CHECK(u(2) == cd(3.0, 0.0));
    CHECK((irs.theta().diagonal() - irs.phi).norm() == 0.0);
    CHECK_NOTHROW(irs.validate(15.0));
    CHECK_THROWS(irs.validate(14.9));
    irs.alpha(1) = 0.5;
    CHECK_THROWS(irs.validate(100.0));
}

TEST_CASE("feasibility report") {
    Instance in = random_instance(8);
    const BsDesign zero = BsDesign::zero(4, 2);
    FeasibilityReport r = check_feasibility(in.ch, zero, in.irs, in.p, 1e-6);
    CHECK(r.c1[0] == doctest::Approx(-in.p.gamma_min[0]));
    CHECK_FALSE(r.feasible);

    IrsDesign over = in.irs;
    over.phi *= std::sqrt(2.0 * in.p.p_irs_max / over.power());
    r = check_feasibility(in.ch, in.bs, over, in.p, 1e-6);
    CHECK(r.c5 == doctest::Approx(-in.p.p_irs_max));

    IrsDesign frac = in.irs;
    frac.alpha(0) = 0.3;
    r = check_feasibility(in.ch, in.bs, frac, in.p, 1e-6);
    CHECK(r.c4 == doctest::Approx(-0.3));

    BsDesign neg = in.bs;
    neg.z_b = -Eigen::MatrixXcd::Identity(4, 4);
    r = check_feasibility(in.ch, neg, in.irs, in.p, 1e-6);
    CHECK(r.c3 == doctest::Approx(-1.0));
}

TEST_CASE("empirical SINR agrees with the closed form") {
    SUBCASE("single user, IRS off, no AN") {
        SystemParams p;
        p.n_users = 1;
        p.users = {{100.0, 10.0}};
        p.broadcast_per_user();
        const ChannelSet ch = generate_channels(p, 21);
        BsDesign bs = BsDesign::zero(4, 1);
        bs.w[0] = ch.h_bu[0] / ch.h_bu[0].norm() * 0.05;
        const IrsDesign irs = IrsDesign::zero(12);
        const double gamma = user_sinr(ch, bs, irs, p, 0);
        const Estimate e = empirical_sinr(ch, bs, irs, p, 0, 200000, 3);
        CHECK(std::abs(e.value - gamma) <= 3.0 * e.std_error);

        const Estimate e2 = empirical_sinr(ch, bs, irs, p, 0, 400000, 4);
        CHECK(e2.std_error / e.std_error == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.05));
    }
    SUBCASE("random instances") {
        for (std::uint64_t s = 0; s < 5; ++s) {
            const Instance in = random_instance(100 + s);
            for (int k = 0; k < 2; ++k) {
                const double gamma = user_sinr(in.ch, in.bs, in.irs, in.p, k);
                const Estimate e = empirical_sinr(in.ch, in.bs, in.irs, in.p, k, 100000, 17 + s);
                CHECK(std::abs(e.value - gamma) <= 3.0 * e.std_error);
            }
        }
    }
    SUBCASE("jamming lowers the SINR") {
        Instance in = random_instance(31);
        IrsDesign off = in.irs;
        off.phi.setZero();
        IrsDesign jam = in.irs;
        jam.alpha.setZero();
        jam.phi *= std::sqrt(in.p.p_irs_max / jam.power());
        const Estimate e_off = empirical_sinr(in.ch, in.bs, off, in.p, 0, 100000, 1);
        const Estimate e_jam = empirical_sinr(in.ch, in.bs, jam, in.p, 0, 100000, 1);
        CHECK(e_jam.value < e_off.value);
    }
}
