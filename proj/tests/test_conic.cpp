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

#include <doctest.h>

#include "airs/conic.hpp"

#include <random>

using namespace airs::conic;
using cd = std::complex<double>;

TEST_CASE("svec / smat round trip and inner product") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(4, 4);
    a = (a + a.transpose()).eval();
    Eigen::MatrixXd b = Eigen::MatrixXd::Random(4, 4);
    b = (b + b.transpose()).eval();
    CHECK((smat(svec(a)) - a).norm() < 1e-14);
    CHECK(svec(a).dot(svec(b)) == doctest::Approx((a * b).trace()).epsilon(1e-12));
    CHECK(svec_size(4) == 10);
    CHECK(svec_side(10) == 4);
    CHECK_THROWS(svec_side(7));
}

TEST_CASE("Hermitian embedding doubles the spectrum") {
    Eigen::MatrixXcd h(2, 2);
    h << 0, cd(0, -1), cd(0, 1), 0;
    const Eigen::MatrixXd e = embed_hermitian(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-1));
    CHECK(es.eigenvalues()(1) == doctest::Approx(-1));
    CHECK(es.eigenvalues()(2) == doctest::Approx(1));
    CHECK(es.eigenvalues()(3) == doctest::Approx(1));

    Eigen::MatrixXcd bad(2, 2);
    bad << 1, cd(0, 1), cd(0, 1), 1;
    CHECK_THROWS_AS(embed_hermitian(bad), std::invalid_argument);
}

TEST_CASE("fixture: minimize t s.t. [[t,1],[1,t]] PSD") {
    ProblemBuilder pb;
    const int t = pb.add_variables("t", 1).offset;
    pb.set_objective(t, 1.0);
    Eigen::MatrixXd c0(2, 2), c1 = Eigen::MatrixXd::Identity(2, 2);
    c0 << 0, 1, 1, 0;
    pb.add_symmetric_lmi({{t, c1}}, c0);
    const auto p = pb.build();
    const auto s = solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(std::abs(s.x(t) - 1.0) <= 1e-6);
    CHECK(certify_solution(p, s, 1e-6).passed());
}

TEST_CASE("fixture: minimize x s.t. x >= 3") {
    ProblemBuilder pb;
    const int x = pb.add_variables("x", 1).offset;
    pb.set_objective(x, 1.0);
    pb.add_nonneg(LinearExpr{-3.0, {}}.add(x, 1.0));
    const auto p = pb.build();
    const auto s = solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(std::abs(s.x(x) - 3.0) <= 1e-6);
    CHECK(certify_solution(p, s, 1e-6).passed());
}

TEST_CASE("fixture: contradictory bounds are primal infeasible") {
    ProblemBuilder pb;
    const int x = pb.add_variables("x", 1).offset;
    pb.set_objective(x, 1.0);
    pb.add_nonneg(LinearExpr{-1.0, {}}.add(x, 1.0));
    pb.add_nonneg(LinearExpr{}.add(x, -1.0));
    const auto s = solve(pb.build());
    CHECK(s.status == SolveStatus::PrimalInfeasible);
}

TEST_CASE("unbounded LP is dual infeasible") {
    ProblemBuilder pb;
    const int x = pb.add_variables("x", 1).offset;
    pb.set_objective(x, -1.0);
    pb.add_nonneg(LinearExpr{}.add(x, 1.0));
    const auto s = solve(pb.build());
    CHECK(s.status == SolveStatus::DualInfeasible);
}

// Oracle: min Re Tr(C X) s.t. Tr X = 1, X Hermitian PSD equals lambda_min(C).
TEST_CASE("Hermitian SDP matches the smallest eigenvalue") {
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 3 + trial;
        Eigen::MatrixXcd c(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) c(i, j) = cd(nd(rng), nd(rng));
        c = (c + c.adjoint()).eval();

        ProblemBuilder pb;
        // X = sum_i x_ii E_ii + sum_{i<j} (re_ij (E_ij + E_ji) + im_ij i (E_ij - E_ji))
        const int nv = n * n;
        const int base = pb.add_variables("X", nv).offset;
        HermitianAffine xa(n);
        LinearExpr trace{-1.0, {}};
        int v = base;
        for (int i = 0; i < n; ++i) {
            Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
            e(i, i) = 1;
            xa.add(v, e);
            trace.add(v, 1.0);
            pb.set_objective(v, c(i, i).real());
            ++v;
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                Eigen::MatrixXcd er = Eigen::MatrixXcd::Zero(n, n), ei = er;
                er(i, j) = er(j, i) = 1;
                ei(i, j) = cd(0, 1);
                ei(j, i) = cd(0, -1);
                xa.add(v, er);
                // Re Tr(C E) = 2 Re c_ji ; Re Tr(C iE') = 2 Re(i c_ji) - ...
                pb.set_objective(v, (c * er).trace().real());
                ++v;
                xa.add(v, ei);
                pb.set_objective(v, (c * ei).trace().real());
                ++v;
            }
        pb.add_equality(trace);
        pb.add_hermitian_lmi(xa);
        const auto p = pb.build();
        const auto s = solve(p, 1e-8, 100);
        REQUIRE(s.status == SolveStatus::Optimal);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c);
        CHECK(s.objective_value == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-6));
        CHECK(certify_solution(p, s, 1e-7).passed());
    }
}

// Oracle: LP with box constraints; optimum is -sum |c_i| at x = -sign(c).
TEST_CASE("box LP matches closed form") {
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    ProblemBuilder pb;
    const int n = 6;
    const int base = pb.add_variables("x", n).offset;
    double expected = 0;
    for (int i = 0; i < n; ++i) {
        const double ci = nd(rng);
        pb.set_objective(base + i, ci);
        pb.add_nonneg(LinearExpr{1.0, {}}.add(base + i, 1.0));
        pb.add_nonneg(LinearExpr{1.0, {}}.add(base + i, -1.0));
        expected -= std::abs(ci);
    }
    const auto p = pb.build();
    const auto s = solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("certify_solution flags a perturbed point") {
    ProblemBuilder pb;
    const int x = pb.add_variables("x", 1).offset;
    pb.set_objective(x, 1.0);
    pb.add_nonneg(LinearExpr{-3.0, {}}.add(x, 1.0));
    const auto p = pb.build();
    auto s = solve(p);
    s.x(0) = 2.0;
    const auto r = certify_solution(p, s, 1e-6);
    CHECK_FALSE(r.cone_membership);
    CHECK_FALSE(r.objective);
}

TEST_CASE("json round trip preserves the problem") {
    ProblemBuilder pb;
    const int t = pb.add_variables("t", 1).offset;
    pb.set_objective(t, 1.0);
    Eigen::MatrixXd c0(2, 2);
    c0 << 0, 1, 1, 0;
    pb.add_symmetric_lmi({{t, Eigen::MatrixXd::Identity(2, 2)}}, c0);
    pb.add_nonneg(LinearExpr{-0.5, {}}.add(t, 1.0));
    const auto p = pb.build();
    const auto q = load_json(dump_json(p));
    CHECK((Eigen::MatrixXd(q.g) - Eigen::MatrixXd(p.g)).norm() == 0.0);
    CHECK((q.h - p.h).norm() == 0.0);
    CHECK(q.cones.size() == p.cones.size());
    CHECK(q.variable_map.at("t").length == 1);
    CHECK(solve(q).x(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("lifted Hermitian variables and dual un-embedding") {
    using namespace airs::conic;
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd;
    for (int n = 1; n <= 5; ++n) {
        ProblemBuilder pb;
        pb.add_variables("pad", 3);
        const HermitianVariable hv = HermitianVariable::add(pb, "X", n);
        CHECK(hv.offset == 3);
        Eigen::VectorXd x(3 + n * n);
        for (int i = 0; i < x.size(); ++i) x(i) = nd(rng);
        const Eigen::MatrixXcd xm = hv.value(x);
        CHECK((xm - xm.adjoint()).norm() == 0.0);
        Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(n, n);
        for (int v = 0; v < hv.count(); ++v) sum += x(hv.offset + v) * hv.basis(v);
        CHECK((sum - xm).norm() <= 1e-14 * (1.0 + xm.norm()));

        Eigen::MatrixXcd a(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) a(i, j) = std::complex<double>(nd(rng), nd(rng));
        const Eigen::MatrixXcd c = a + a.adjoint();
        LinearExpr e;
        hv.add_trace_product(e, c, 2.0);
        CHECK(e.evaluate(x) == doctest::Approx(2.0 * (c * xm).trace().real()));

        // <Z, embed(M)> = Re Tr(S M) for a random symmetric Z.
        Eigen::MatrixXd zr(2 * n, 2 * n);
        for (int j = 0; j < 2 * n; ++j)
            for (int i = 0; i < 2 * n; ++i) zr(i, j) = nd(rng);
        const Eigen::MatrixXd z = zr + zr.transpose();
        const Eigen::MatrixXcd s = unembed_dual(z);
        CHECK((s - s.adjoint()).norm() <= 1e-14);
        CHECK((z.cwiseProduct(embed_hermitian(c))).sum() == doctest::Approx((s * c).trace().real()));
    }
    ProblemBuilder pb;
    const ComplexVariable cv = ComplexVariable::add(pb, "u", 2);
    Eigen::VectorXd x(4);
    x << 1, 2, 3, 4;
    CHECK(cv.value(x)(1) == std::complex<double>(3, 4));
    CHECK(cv.im(0) == 1);
}

TEST_CASE("solve audit counts certified optima") {
    ProblemBuilder pb;
    const int x = pb.add_variables("x", 1).offset;
    pb.set_objective(x, 1.0);
    pb.add_nonneg(LinearExpr{-3.0, {}}.add(x, 1.0));
    const auto p = pb.build();
    reset_audit();
    solve(p);
    CHECK(audit_counts().solves == 0);
    set_audit(true);
    solve(p);
    solve(p);
    set_audit(false);
    const AuditCounts c = audit_counts();
    CHECK(c.solves == 2);
    CHECK(c.optimal == 2);
    CHECK(c.certified == 2);
    reset_audit();
    CHECK(audit_counts().optimal == 0);
}
