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

#include <doctest.h>

#include <cmath>
#include <random>

using namespace airs;

namespace {

IrsDesign spread_irs(int m, double power, bool half_jam) {
    IrsDesign irs = IrsDesign::zero(m);
    for (int i = 0; i < m; ++i) irs.phi(i) = std::polar(std::sqrt(power / m), 0.3 * i);
    if (half_jam)
        for (int i = 0; i < m; i += 2) irs.alpha(i) = 0.0;
    return irs;
}

double trace_re(const Eigen::MatrixXcd& m) { return m.trace().real(); }

}  // namespace

TEST_CASE("P3 structure") {
    const SystemParams p;
    const ChannelSet ch = generate_channels(p, 1);
    const P3Model m = build_p3(ch, spread_irs(12, 0.005, false), p);
    CHECK(m.sinr_rows.size() == 2);
    CHECK(m.leak_cones.size() == 2);
    CHECK(m.variable_psd_blocks == 3);
    REQUIRE(m.problem.cones.size() == 6);
    CHECK(m.problem.cones[0].kind == conic::ConeKind::Nonneg);
    CHECK(m.problem.cones[0].dim == 2);
    for (int c : m.leak_cones) CHECK(m.problem.cones[c].dim == 2 * p.n_eve);
    CHECK(m.problem.num_vars() == 3 * p.n_tx * p.n_tx);
    CHECK(p.c_tol(0) == doctest::Approx(std::exp2(1.6) - 1.0));

    P3Options no_an;
    no_an.bs_artificial_noise = false;
    const P3Model m2 = build_p3(ch, IrsDesign::zero(12), p, no_an);
    CHECK(m2.variable_psd_blocks == 2);
    CHECK(m2.z.n == 0);

    IrsDesign over = spread_irs(12, 0.02, false);
    CHECK_THROWS(build_p3(ch, over, p));
}

TEST_CASE("rank-one extraction") {
    Eigen::VectorXcd v(3);
    v << cd(1, 2), cd(-0.5, 0.1), cd(0, 3);
    const RankOne r = extract_rank_one(v * v.adjoint());
    // Equal up to a global phase.
    const cd phase = r.w.dot(v) / std::abs(r.w.dot(v));
    CHECK((r.w * phase - v).norm() <= 1e-12 * v.norm());
    CHECK(r.gap <= 1e-15);

    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 1e-9;
    const RankOne r2 = extract_rank_one(d);
    CHECK(std::abs(std::abs(r2.w(0)) - 1.0) <= 1e-15);
    CHECK(std::abs(r2.w(1)) == 0.0);
    CHECK(r2.gap == doctest::Approx(1e-9));
}

TEST_CASE("P3 solves: feasibility, tightness and certification") {
    const SystemParams p;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const ChannelSet ch = generate_channels(p, seed);
        for (const IrsDesign& irs : {IrsDesign::zero(12), spread_irs(12, 0.005, false), spread_irs(12, 0.005, true)}) {
            const BsSubproblemResult r = solve_p3(ch, irs, p);
            REQUIRE(r.status == SubproblemStatus::Optimal);
            CHECK(r.certified);
            CHECK(r.path == ExtractionPath::Eigen);
            for (double t : r.tightness) CHECK(t <= 1e-6);
            for (const auto& w : r.w_mats) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(w);
                CHECK(es.eigenvalues()(0) >= -1e-8);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> zs(r.z_b);
            CHECK(zs.eigenvalues()(0) >= -1e-8);
            double sdp = trace_re(r.z_b);
            for (const auto& w : r.w_mats) sdp += trace_re(w);
            CHECK(sdp == doctest::Approx(r.objective).epsilon(1e-6));
            CHECK(r.extracted_power == doctest::Approx(r.objective).epsilon(1e-6));
            const FeasibilityReport fr = check_feasibility(ch, r.extracted, irs, p, 1e-5);
            CHECK(fr.feasible);
            CHECK(p3_violation(ch, irs, p, r.extracted) <= 1e-6);
        }
    }
}

TEST_CASE("P3 with the IRS off is the classic AN-aided secure beamforming SDP") {
    const SystemParams p;
    const ChannelSet ch = generate_channels(p, 9);
    const IrsDesign off = IrsDesign::zero(12);
    const BsSubproblemResult r = solve_p3(ch, off, p);
    REQUIRE(r.status == SubproblemStatus::Optimal);
    CHECK(check_feasibility(ch, r.extracted, off, p, 1e-5).feasible);
    // The SINR rows are active at the optimum.
    for (int k = 0; k < 2; ++k) CHECK(user_sinr(ch, r.extracted, off, p, k) == doctest::Approx(p.gamma_min[k]).epsilon(1e-4));

    P3Options no_an;
    no_an.bs_artificial_noise = false;
    const BsSubproblemResult r2 = solve_p3(ch, off, p, no_an);
    if (r2.status == SubproblemStatus::Optimal) {
        CHECK(r2.extracted.z_b.norm() == 0.0);
        CHECK(r2.objective >= r.objective * (1.0 - 1e-6));
    }
}

TEST_CASE("P3 infeasibility threshold when N_E = N_T") {
    // With Eve as capable as the BS and no IRS, Cauchy-Schwarz gives
    // SINR_k <= C_tol, so targets above C_tol are infeasible.
    SystemParams p;
    p.n_eve = 4;
    const ChannelSet ch = generate_channels(p, 3);
    const IrsDesign off = IrsDesign::zero(12);
    auto status_at = [&](double factor) {
        SystemParams q = p;
        q.gamma_min.assign(2, factor * p.c_tol(0));
        return solve_p3(ch, off, q).status;
    };
    CHECK(status_at(0.5) == SubproblemStatus::Optimal);
    CHECK(status_at(0.9) == SubproblemStatus::Optimal);
    CHECK(status_at(1.01) == SubproblemStatus::Infeasible);
    CHECK(status_at(2.0) == SubproblemStatus::Infeasible);
    // Default 4 dB target exceeds C_tol = 2.03.
    CHECK(solve_p3(ch, off, p).status == SubproblemStatus::Infeasible);
}

TEST_CASE("P3 symmetry for duplicate users") {
    // Identical channels give SINR_1 * SINR_2 < 1, so the targets must stay below 0 dB.
    SystemParams p;
    ChannelSet ch = generate_channels(p, 4);
    ch.h_bu[1] = ch.h_bu[0];
    ch.h_iu[1] = ch.h_iu[0];
    CHECK(solve_p3(ch, spread_irs(12, 0.004, false), p).status == SubproblemStatus::Infeasible);
    p.set_gamma_min_db(-3.0);
    const BsSubproblemResult r = solve_p3(ch, spread_irs(12, 0.004, false), p);
    REQUIRE(r.status == SubproblemStatus::Optimal);
    CHECK(std::abs(trace_re(r.w_mats[0]) - trace_re(r.w_mats[1])) <= 1e-5);
}

TEST_CASE("P3 optimum is monotone in the SINR target") {
    const SystemParams base;
    for (std::uint64_t seed : {2u, 5u}) {
        const ChannelSet ch = generate_channels(base, seed);
        const IrsDesign irs = spread_irs(12, 0.002, false);
        double prev = 0.0;
        for (double db : {0.0, 4.0, 8.0}) {
            SystemParams p = base;
            p.set_gamma_min_db(db);
            const BsSubproblemResult r = solve_p3(ch, irs, p);
            REQUIRE(r.status == SubproblemStatus::Optimal);
            CHECK(r.objective >= prev);
            prev = r.objective;
        }
    }
}

TEST_CASE("P3 multipliers predict the objective change") {
    const SystemParams p;
    const ChannelSet ch = generate_channels(p, 2);
    IrsDesign irs = spread_irs(12, 1.2e-5, true);
    const BsSubproblemResult base = solve_p3(ch, irs, p);
    REQUIRE(base.status == SubproblemStatus::Optimal);
    IrsDesign pert = irs;
    for (int m = 0; m < 12; m += 2) pert.phi(m) *= 1.001;
    const BsSubproblemResult r = solve_p3(ch, pert, p);
    REQUIRE(r.status == SubproblemStatus::Optimal);

    const P3Options o;
    const Eigen::MatrixXcd dq = irs_covariance_at_eve(ch, pert, p) - irs_covariance_at_eve(ch, irs, p);
    double predicted = 0.0;
    for (int k = 0; k < 2; ++k) {
        const double dint = irs_interference_at_user(ch, pert, p, k) - irs_interference_at_user(ch, irs, p, k);
        CHECK(base.sinr_dual[k] >= 0.0);
        predicted += base.sinr_dual[k] * p.gamma_min[k] * (1.0 + o.margin) * dint;
        predicted -= (base.leak_dual[k] * p.c_tol(k) * (1.0 - o.margin) * dq).trace().real();
    }
    const double actual = r.objective - base.objective;
    CHECK(std::abs(actual - predicted) <= 0.01 * std::abs(actual));
}

TEST_CASE("leakage LMI agrees with the log-det form") {
    const SystemParams p;
    std::mt19937_64 rng(77);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    std::uniform_real_distribution<double> ud(-3.0, 1.0);
    int agree = 0, counted = 0;
    for (int t = 0; t < 1000; ++t) {
        const ChannelSet ch = generate_channels(p, 500 + t);
        BsDesign bs = BsDesign::zero(4, 2);
        for (auto& w : bs.w)
            for (int i = 0; i < 4; ++i) w(i) = cd(nd(rng), nd(rng)) * std::pow(10.0, ud(rng));
        Eigen::MatrixXcd b(4, 4);
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) b(i, j) = cd(nd(rng), nd(rng));
        bs.z_b = b * b.adjoint() * std::pow(10.0, ud(rng));
        const IrsDesign irs = spread_irs(12, 0.01 * (t % 3) / 2.0, t % 2 == 0);
        const EffectiveChannels e = effective_channels(ch, bs, irs, p);
        for (int k = 0; k < 2; ++k) {
            const double ce = eve_capacity_from(e.q, e.f_eq * bs.w[k]);
            if (std::abs(ce - p.c_max[k]) < 1e-9) continue;
            const Eigen::VectorXcd fw = e.f_eq * bs.w[k];
            const Eigen::MatrixXcd lmi = p.c_tol(k) * e.q - fw * fw.adjoint();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (lmi + lmi.adjoint()), Eigen::EigenvaluesOnly);
            ++counted;
            if ((ce <= p.c_max[k]) == (es.eigenvalues()(0) >= 0.0)) ++agree;
        }
    }
    CHECK(counted > 1900);
    CHECK(agree == counted);
}

TEST_CASE("jointly sized jamming powers") {
    SystemParams p;
    int better = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const ChannelSet ch = generate_channels(p, seed);
        IrsDesign jam = spread_irs(p.n_irs, 0.001, false);
        jam.alpha.setZero();
        P3Options o;
        o.optimize_jamming = true;
        const BsSubproblemResult r = solve_p3(ch, jam, p, o);
        REQUIRE(r.status == SubproblemStatus::Optimal);
        CHECK(r.certified);
        CHECK(r.irs.power() <= p.p_irs_max);
        // The objective counts the jamming power; phases are kept.
        CHECK(r.objective == doctest::Approx(trace_re(r.z_b) + trace_re(r.w_mats[0]) + trace_re(r.w_mats[1]) +
                                             r.irs.power())
                                 .epsilon(1e-6));
        for (int m = 0; m < p.n_irs; ++m)
            if (std::abs(r.irs.phi(m)) > 1e-9) CHECK(std::arg(r.irs.phi(m)) == doctest::Approx(std::arg(jam.phi(m))));
        CHECK(check_feasibility(ch, r.extracted, r.irs, p, 1e-5).feasible);

        const BsSubproblemResult off = solve_p3(ch, IrsDesign::zero(p.n_irs), p, P3Options{});
        REQUIRE(off.status == SubproblemStatus::Optimal);
        // Zero jamming is a feasible point of the joint problem.
        CHECK(r.objective <= off.objective * (1.0 + 1e-6));
        better += r.objective < off.objective;
    }
    CHECK(better >= 4);

    // N_E = 5 > N_T: the IRS-off problem is infeasible, jamming restores feasibility.
    p.n_eve = 5;
    const ChannelSet ch = generate_channels(p, 1);
    IrsDesign jam = IrsDesign::zero(p.n_irs);
    jam.alpha.setZero();
    P3Options o;
    o.optimize_jamming = true;
    CHECK(solve_p3(ch, IrsDesign::zero(p.n_irs), p, P3Options{}).status == SubproblemStatus::Infeasible);
    CHECK(solve_p3(ch, jam, p, o).status == SubproblemStatus::Optimal);
}
