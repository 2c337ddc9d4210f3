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

#ifndef AIRS_CONIC_HPP
#define AIRS_CONIC_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace airs::conic {

using Triplet = Eigen::Triplet<double>;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor>;

enum class ConeKind { Nonneg, Psd };

// One cone block over a contiguous slice of the slack vector. For Nonneg
// blocks `dim` is the length; for Psd blocks it is the matrix side and the
// slice holds svec(S) with n(n+1)/2 entries.
struct ConeBlock {
    ConeKind kind = ConeKind::Nonneg;
    int dim = 0;
    int offset = 0;

    int size() const { return kind == ConeKind::Nonneg ? dim : dim * (dim + 1) / 2; }
    int degree() const { return dim; }
};

struct IndexRange {
    int offset = 0;
    int length = 0;
};

// minimize c'x  s.t.  A_eq x = b_eq,  G x + s = h,  s in K
// x is free; every slack entry belongs to exactly one cone block.
struct ConicProblem {
    Eigen::VectorXd c;
    SpMat a_eq;
    Eigen::VectorXd b_eq;
    SpMat g;
    Eigen::VectorXd h;
    std::vector<ConeBlock> cones;
    std::map<std::string, IndexRange> variable_map;

    int num_vars() const { return static_cast<int>(c.size()); }
    int num_eq() const { return static_cast<int>(b_eq.size()); }
    int slack_size() const { return static_cast<int>(h.size()); }

    // Throws std::invalid_argument on inconsistent dimensions or cone layout.
    void validate() const;
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIterations, NumericalFailure };

const char* to_string(SolveStatus s);

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;

    double max() const { return std::max(primal, std::max(dual, gap)); }
};

struct IterationRecord {
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    Residuals residuals;
};

struct ConicSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd x;
    Eigen::VectorXd y;  // equality multipliers
    Eigen::VectorXd s;  // cone slacks
    Eigen::VectorXd z;  // cone multipliers
    double objective_value = 0.0;
    double dual_objective = 0.0;
    Residuals residuals;
    int iterations = 0;
    std::vector<IterationRecord> trace;
};

struct SolverOptions {
    double tol = 1e-7;
    int max_iter = 100;
    bool record_trace = false;
};

ConicSolution solve(const ConicProblem& p, const SolverOptions& opts = {});
inline ConicSolution solve(const ConicProblem& p, double tol, int max_iter) {
    return solve(p, SolverOptions{tol, max_iter, false});
}

// Process-wide audit: when on, every Optimal result of solve() is re-checked
// with certify_solution at 10x the solve tolerance and counted.
struct AuditCounts {
    long solves = 0;
    long optimal = 0;
    long certified = 0;
};
void set_audit(bool on);
void reset_audit();
AuditCounts audit_counts();

struct CertificateReport {
    bool equalities = false;
    bool cone_membership = false;
    bool objective = false;
    double equality_residual = 0.0;
    double linear_residual = 0.0;  // ||G x + s - h||, s recomputed as h - G x
    double min_cone_value = 0.0;   // smallest eigenvalue / entry over all blocks
    double objective_error = 0.0;

    bool passed() const { return equalities && cone_membership && objective; }
};

// Re-checks a primal point without touching the solver: A_eq x = b_eq,
// h - G x in K (per-block minimum eigenvalue >= -tol), and c'x against the
// reported objective. Residuals are relative to max(1, ||rhs||).
CertificateReport certify_solution(const ConicProblem& p, const ConicSolution& s, double tol);

// ---- symmetric / Hermitian helpers ---------------------------------------

// Lower-triangle, column-major, off-diagonals scaled by sqrt(2).
Eigen::VectorXd svec(const Eigen::MatrixXd& m);
Eigen::MatrixXd smat(const Eigen::Ref<const Eigen::VectorXd>& v);
int svec_size(int n);
int svec_side(int len);  // inverse of svec_size; throws if len is not triangular

// [[Re h, -Im h], [Im h, Re h]]; throws std::invalid_argument if h is not
// Hermitian within 1e-10 (relative to max(1, ||h||)).
Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& h);

// Affine Hermitian matrix expression  C + sum_i x_i M_i  over solver variables.
struct HermitianAffine {
    Eigen::MatrixXcd constant;
    std::vector<std::pair<int, Eigen::MatrixXcd>> terms;

    explicit HermitianAffine(int n = 0) : constant(Eigen::MatrixXcd::Zero(n, n)) {}
    int side() const { return static_cast<int>(constant.rows()); }
    void add(int var, const Eigen::MatrixXcd& coeff) { terms.emplace_back(var, coeff); }
    Eigen::MatrixXcd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

// Sparse affine scalar expression  c0 + sum_i a_i x_i.
struct LinearExpr {
    double constant = 0.0;
    std::vector<std::pair<int, double>> terms;

    LinearExpr& add(int var, double coeff) {
        if (coeff != 0.0) terms.emplace_back(var, coeff);
        return *this;
    }
    double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

// Incremental construction of a ConicProblem from named variable groups,
// nonnegative scalar expressions and Hermitian LMIs.
class ProblemBuilder {
public:
    IndexRange add_variables(const std::string& name, int count);
    int num_vars() const { return n_vars_; }

    void set_objective(int var, double coeff);
    void add_objective(int var, double coeff);

    // Scalar rows are merged into one leading Nonneg block, so the returned
    // row is also the slack offset in the built problem.
    void add_equality(const LinearExpr& lhs_minus_rhs);  // expr == 0
    int add_nonneg(const LinearExpr& expr);              // expr >= 0
    // Block adders return a block id; cone_index() maps it into ConicProblem::cones.
    int add_nonneg_block(const std::vector<LinearExpr>& exprs);
    int add_hermitian_lmi(const HermitianAffine& expr);  // expr >= 0 (PSD)
    int add_symmetric_lmi(const std::vector<std::pair<int, Eigen::MatrixXd>>& terms,
                          const Eigen::MatrixXd& constant);
    int cone_index(int block_id) const { return block_id + (pending_nonneg_.empty() ? 0 : 1); }

    ConicProblem build() const;

private:
    struct Block {
        ConeBlock cone;
        std::vector<Triplet> g;  // rows relative to block start
        std::vector<double> h;
    };

    int n_vars_ = 0;
    std::map<std::string, IndexRange> names_;
    std::map<int, double> objective_;
    std::vector<LinearExpr> equalities_;
    std::vector<LinearExpr> pending_nonneg_;
    std::vector<Block> blocks_;
};

// Hermitian n x n matrix variable stored as n^2 reals: the diagonal, then
// (Re, Im) of each strictly upper entry, row-major.
struct HermitianVariable {
    int offset = 0;
    int n = 0;

    static HermitianVariable add(ProblemBuilder& pb, const std::string& name, int n);
    int count() const { return n * n; }
    int diag(int i) const { return offset + i; }
    int re(int i, int j) const;  // i < j
    int im(int i, int j) const;  // i < j
    Eigen::MatrixXcd basis(int local) const;  // d X / d x_{offset+local}
    Eigen::MatrixXcd value(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    // Adds sum_v x_v * map(basis(v)) to expr.
    template <class Map>
    void add_to(HermitianAffine& expr, Map&& map) const {
        for (int v = 0; v < count(); ++v) expr.add(offset + v, map(basis(v)));
    }
    // Coefficients of Re Tr(C X) for Hermitian C.
    void add_trace_product(LinearExpr& e, const Eigen::MatrixXcd& c, double scale = 1.0) const;
};

// Complex n-vector stored as (Re, Im) pairs.
struct ComplexVariable {
    int offset = 0;
    int n = 0;

    static ComplexVariable add(ProblemBuilder& pb, const std::string& name, int n);
    int re(int i) const { return offset + 2 * i; }
    int im(int i) const { return offset + 2 * i + 1; }
    Eigen::VectorXcd value(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

// Complex Hermitian S with <Z, embed_hermitian(M)> = Re Tr(S M) for every
// Hermitian M, where Z is the real 2n x 2n dual of an embedded LMI.
Eigen::MatrixXcd unembed_dual(const Eigen::MatrixXd& z);

// Debug dump for cross-solver differential testing. Schema:
//   {"n": int, "objective": [c...],
//    "equalities": {"rows": p, "triplets": [[i,j,v],...], "rhs": [b...]},
//    "inequalities": {"rows": m, "triplets": [[i,j,v],...], "rhs": [h...]},
//    "cones": [{"kind": "nonneg"|"psd", "dim": d, "offset": o}, ...],
//    "variables": {"name": [offset, length], ...}}
// PSD slices use the same svec ordering as svec().
std::string dump_json(const ConicProblem& p);
ConicProblem load_json(const std::string& text);

}  // namespace airs::conic

#endif
