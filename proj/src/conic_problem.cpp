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

#include "airs/conic.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace airs::conic {

namespace {
constexpr double kSqrt2 = 1.41421356237309504880;
}

void ConicProblem::validate() const {
    const int n = num_vars();
    if (a_eq.cols() != n && !(a_eq.rows() == 0 && num_eq() == 0))
        throw std::invalid_argument("A_eq column count does not match objective length");
    if (a_eq.rows() != num_eq())
        throw std::invalid_argument("A_eq row count does not match b_eq length");
    if (g.cols() != n || g.rows() != slack_size())
        throw std::invalid_argument("G dimensions do not match (h, c)");
    int expected = 0;
    for (const auto& k : cones) {
        if (k.dim <= 0) throw std::invalid_argument("cone block with non-positive dimension");
        if (k.offset != expected) throw std::invalid_argument("cone blocks must tile the slack vector in order");
        expected += k.size();
    }
    if (expected != slack_size()) throw std::invalid_argument("cone blocks do not cover the slack vector");
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::PrimalInfeasible: return "PrimalInfeasible";
        case SolveStatus::DualInfeasible: return "DualInfeasible";
        case SolveStatus::MaxIterations: return "MaxIterations";
        case SolveStatus::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

int svec_size(int n) { return n * (n + 1) / 2; }

int svec_side(int len) {
    const int n = static_cast<int>(std::lround((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
    if (svec_size(n) != len) throw std::invalid_argument("length is not a triangular number");
    return n;
}

Eigen::VectorXd svec(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    Eigen::VectorXd v(svec_size(n));
    int k = 0;
    for (int j = 0; j < n; ++j) {
        v(k++) = m(j, j);
        for (int i = j + 1; i < n; ++i) v(k++) = kSqrt2 * 0.5 * (m(i, j) + m(j, i));
    }
    return v;
}

Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const int n = svec_side(static_cast<int>(v.size()));
    Eigen::MatrixXd m(n, n);
    int k = 0;
    for (int j = 0; j < n; ++j) {
        m(j, j) = v(k++);
        for (int i = j + 1; i < n; ++i) {
            m(i, j) = v(k++) / kSqrt2;
            m(j, i) = m(i, j);
        }
    }
    return m;
}

Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("embed_hermitian: matrix is not square");
    const double scale = std::max(1.0, h.norm());
    if ((h - h.adjoint()).norm() > 1e-10 * scale)
        throw std::invalid_argument("embed_hermitian: matrix is not Hermitian");
    const Eigen::Index n = h.rows();
    Eigen::MatrixXd e(2 * n, 2 * n);
    e.topLeftCorner(n, n) = h.real();
    e.bottomRightCorner(n, n) = h.real();
    e.topRightCorner(n, n) = -h.imag();
    e.bottomLeftCorner(n, n) = h.imag();
    return e;
}

Eigen::MatrixXcd HermitianAffine::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::MatrixXcd m = constant;
    for (const auto& [var, coeff] : terms) m += x(var) * coeff;
    return m;
}

double LinearExpr::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    double v = constant;
    for (const auto& [var, a] : terms) v += a * x(var);
    return v;
}

// ---- builder --------------------------------------------------------------

IndexRange ProblemBuilder::add_variables(const std::string& name, int count) {
    if (count < 0) throw std::invalid_argument("negative variable count");
    if (names_.count(name)) throw std::invalid_argument("duplicate variable group: " + name);
    IndexRange r{n_vars_, count};
    names_[name] = r;
    n_vars_ += count;
    return r;
}

void ProblemBuilder::set_objective(int var, double coeff) { objective_[var] = coeff; }
void ProblemBuilder::add_objective(int var, double coeff) { objective_[var] += coeff; }

void ProblemBuilder::add_equality(const LinearExpr& e) { equalities_.push_back(e); }

int ProblemBuilder::add_nonneg(const LinearExpr& e) {
    pending_nonneg_.push_back(e);
    return static_cast<int>(pending_nonneg_.size()) - 1;
}

int ProblemBuilder::add_nonneg_block(const std::vector<LinearExpr>& exprs) {
    if (exprs.empty()) throw std::invalid_argument("add_nonneg_block: empty block");
    Block b;
    b.cone = {ConeKind::Nonneg, static_cast<int>(exprs.size()), 0};
    for (int r = 0; r < static_cast<int>(exprs.size()); ++r) {
        // s = h - G x = expr  =>  h = c0, G = -a
        b.h.push_back(exprs[r].constant);
        for (const auto& [var, a] : exprs[r].terms) b.g.emplace_back(r, var, -a);
    }
    blocks_.push_back(std::move(b));
    return static_cast<int>(blocks_.size()) - 1;
}

int ProblemBuilder::add_symmetric_lmi(const std::vector<std::pair<int, Eigen::MatrixXd>>& terms,
                                       const Eigen::MatrixXd& constant) {
    const int n = static_cast<int>(constant.rows());
    Block b;
    b.cone = {ConeKind::Psd, n, 0};
    const Eigen::VectorXd h = svec(constant);
    b.h.assign(h.data(), h.data() + h.size());
    for (const auto& [var, m] : terms) {
        const Eigen::VectorXd col = svec(m);
        for (int r = 0; r < col.size(); ++r)
            if (col(r) != 0.0) b.g.emplace_back(r, var, -col(r));
    }
    blocks_.push_back(std::move(b));
    return static_cast<int>(blocks_.size()) - 1;
}

int ProblemBuilder::add_hermitian_lmi(const HermitianAffine& expr) {
    std::vector<std::pair<int, Eigen::MatrixXd>> real_terms;
    real_terms.reserve(expr.terms.size());
    for (const auto& [var, m] : expr.terms) real_terms.emplace_back(var, embed_hermitian(m));
    return add_symmetric_lmi(real_terms, embed_hermitian(expr.constant));
}

// ---- lifted variables -----------------------------------------------------

HermitianVariable HermitianVariable::add(ProblemBuilder& pb, const std::string& name, int n) {
    return HermitianVariable{pb.add_variables(name, n * n).offset, n};
}

namespace {
// Position of the strictly upper entry (i, j), i < j, in row-major order.
int upper_index(int n, int i, int j) { return i * n - i * (i + 1) / 2 + (j - i - 1); }
}  // namespace

int HermitianVariable::re(int i, int j) const { return offset + n + 2 * upper_index(n, i, j); }
int HermitianVariable::im(int i, int j) const { return offset + n + 2 * upper_index(n, i, j) + 1; }

Eigen::MatrixXcd HermitianVariable::basis(int local) const {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(n, n);
    if (local < n) {
        b(local, local) = 1.0;
        return b;
    }
    const int pair = (local - n) / 2;
    const bool imag = (local - n) % 2 == 1;
    int i = 0;
    while (upper_index(n, i, n - 1) < pair) ++i;
    const int j = pair - upper_index(n, i, i + 1) + i + 1;
    b(i, j) = imag ? std::complex<double>(0.0, 1.0) : std::complex<double>(1.0, 0.0);
    b(j, i) = std::conj(b(i, j));
    return b;
}

Eigen::MatrixXcd HermitianVariable::value(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = x(diag(i));
        for (int j = i + 1; j < n; ++j) {
            m(i, j) = std::complex<double>(x(re(i, j)), x(im(i, j)));
            m(j, i) = std::conj(m(i, j));
        }
    }
    return m;
}

void HermitianVariable::add_trace_product(LinearExpr& e, const Eigen::MatrixXcd& c, double scale) const {
    // Re Tr(C X) = sum_i C_ii x_ii + sum_{i<j} 2 Re(C_ji X_ij).
    for (int i = 0; i < n; ++i) {
        e.add(diag(i), scale * c(i, i).real());
        for (int j = i + 1; j < n; ++j) {
            const std::complex<double> cji = c(j, i) + std::conj(c(i, j));
            e.add(re(i, j), scale * cji.real());
            e.add(im(i, j), -scale * cji.imag());
        }
    }
}

ComplexVariable ComplexVariable::add(ProblemBuilder& pb, const std::string& name, int n) {
    return ComplexVariable{pb.add_variables(name, 2 * n).offset, n};
}

Eigen::VectorXcd ComplexVariable::value(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = std::complex<double>(x(re(i)), x(im(i)));
    return v;
}

Eigen::MatrixXcd unembed_dual(const Eigen::MatrixXd& z) {
    const Eigen::Index n = z.rows() / 2;
    const Eigen::MatrixXd z11 = z.topLeftCorner(n, n), z22 = z.bottomRightCorner(n, n);
    const Eigen::MatrixXd z12 = z.topRightCorner(n, n), z21 = z.bottomLeftCorner(n, n);
    Eigen::MatrixXcd s(n, n);
    s.real() = z11 + z22;
    s.imag() = z21 - z12;
    return s;
}

ConicProblem ProblemBuilder::build() const {
    ConicProblem p;
    const int n = n_vars_;
    p.c = Eigen::VectorXd::Zero(n);
    for (const auto& [var, a] : objective_) p.c(var) = a;
    p.variable_map = names_;

    std::vector<Block> blocks;
    if (!pending_nonneg_.empty()) {
        Block b;
        b.cone = {ConeKind::Nonneg, static_cast<int>(pending_nonneg_.size()), 0};
        for (int r = 0; r < static_cast<int>(pending_nonneg_.size()); ++r) {
            b.h.push_back(pending_nonneg_[r].constant);
            for (const auto& [var, a] : pending_nonneg_[r].terms) b.g.emplace_back(r, var, -a);
        }
        blocks.push_back(std::move(b));
    }
    blocks.insert(blocks.end(), blocks_.begin(), blocks_.end());

    int m = 0;
    for (const auto& b : blocks) m += b.cone.size();
    std::vector<Triplet> g;
    p.h = Eigen::VectorXd::Zero(m);
    int offset = 0;
    for (const auto& b : blocks) {
        ConeBlock k = b.cone;
        k.offset = offset;
        p.cones.push_back(k);
        for (const auto& t : b.g) g.emplace_back(offset + t.row(), t.col(), t.value());
        for (int r = 0; r < static_cast<int>(b.h.size()); ++r) p.h(offset + r) = b.h[r];
        offset += k.size();
    }
    p.g.resize(m, n);
    p.g.setFromTriplets(g.begin(), g.end());

    const int neq = static_cast<int>(equalities_.size());
    std::vector<Triplet> a;
    p.b_eq = Eigen::VectorXd::Zero(neq);
    for (int r = 0; r < neq; ++r) {
        p.b_eq(r) = -equalities_[r].constant;
        for (const auto& [var, v] : equalities_[r].terms) a.emplace_back(r, var, v);
    }
    p.a_eq.resize(neq, n);
    p.a_eq.setFromTriplets(a.begin(), a.end());
    p.validate();
    return p;
}

// ---- certificate ----------------------------------------------------------

CertificateReport certify_solution(const ConicProblem& p, const ConicSolution& s, double tol) {
    CertificateReport r;
    if (s.x.size() != p.num_vars()) return r;
    const Eigen::VectorXd& x = s.x;

    if (p.num_eq() > 0) {
        const Eigen::VectorXd res = p.a_eq * x - p.b_eq;
        r.equality_residual = res.norm() / std::max(1.0, p.b_eq.norm());
    }
    r.equalities = r.equality_residual <= tol;

    const Eigen::VectorXd slack = p.h - p.g * x;
    if (s.s.size() == slack.size())
        r.linear_residual = (slack - s.s).norm() / std::max(1.0, p.h.norm());
    double min_val = std::numeric_limits<double>::infinity();
    for (const auto& k : p.cones) {
        const auto seg = slack.segment(k.offset, k.size());
        double v;
        if (k.kind == ConeKind::Nonneg) {
            v = seg.minCoeff();
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(smat(seg), Eigen::EigenvaluesOnly);
            v = es.eigenvalues()(0);
        }
        // Scale-aware: compare against the block's own magnitude.
        const double scale = std::max(1.0, seg.norm());
        min_val = std::min(min_val, v / scale);
    }
    if (p.cones.empty()) min_val = 0.0;
    r.min_cone_value = min_val;
    r.cone_membership = min_val >= -tol;

    const double obj = p.c.dot(x);
    r.objective_error = std::abs(obj - s.objective_value) / std::max(1.0, std::abs(obj));
    r.objective = r.objective_error <= tol;
    return r;
}

// ---- json -----------------------------------------------------------------

namespace {
nlohmann::json triplets_json(const SpMat& m) {
    nlohmann::json out = nlohmann::json::array();
    for (int j = 0; j < m.outerSize(); ++j)
        for (SpMat::InnerIterator it(m, j); it; ++it) out.push_back({it.row(), it.col(), it.value()});
    return out;
}

SpMat triplets_from(const nlohmann::json& j, int rows, int cols) {
    std::vector<Triplet> t;
    for (const auto& e : j) t.emplace_back(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>());
    SpMat m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

Eigen::VectorXd vec_from(const nlohmann::json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}
}  // namespace

std::string dump_json(const ConicProblem& p) {
    nlohmann::json j;
    j["n"] = p.num_vars();
    j["objective"] = std::vector<double>(p.c.data(), p.c.data() + p.c.size());
    j["equalities"] = {{"rows", p.num_eq()},
                       {"triplets", triplets_json(p.a_eq)},
                       {"rhs", std::vector<double>(p.b_eq.data(), p.b_eq.data() + p.b_eq.size())}};
    j["inequalities"] = {{"rows", p.slack_size()},
                         {"triplets", triplets_json(p.g)},
                         {"rhs", std::vector<double>(p.h.data(), p.h.data() + p.h.size())}};
    nlohmann::json cones = nlohmann::json::array();
    for (const auto& k : p.cones)
        cones.push_back({{"kind", k.kind == ConeKind::Nonneg ? "nonneg" : "psd"}, {"dim", k.dim}, {"offset", k.offset}});
    j["cones"] = cones;
    nlohmann::json vars = nlohmann::json::object();
    for (const auto& [name, r] : p.variable_map) vars[name] = {r.offset, r.length};
    j["variables"] = vars;
    return j.dump();
}

ConicProblem load_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ConicProblem p;
    const int n = j.at("n").get<int>();
    p.c = vec_from(j.at("objective"));
    const auto& eq = j.at("equalities");
    p.b_eq = vec_from(eq.at("rhs"));
    p.a_eq = triplets_from(eq.at("triplets"), eq.at("rows").get<int>(), n);
    const auto& in = j.at("inequalities");
    p.h = vec_from(in.at("rhs"));
    p.g = triplets_from(in.at("triplets"), in.at("rows").get<int>(), n);
    for (const auto& k : j.at("cones")) {
        ConeBlock b;
        b.kind = k.at("kind").get<std::string>() == "psd" ? ConeKind::Psd : ConeKind::Nonneg;
        b.dim = k.at("dim").get<int>();
        b.offset = k.at("offset").get<int>();
        p.cones.push_back(b);
    }
    for (const auto& [name, r] : j.at("variables").items())
        p.variable_map[name] = IndexRange{r.at(0).get<int>(), r.at(1).get<int>()};
    p.validate();
    return p;
}

}  // namespace airs::conic
