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


#ifndef AIRS_IRS_OPT_HPP
#define AIRS_IRS_OPT_HPP

#include "airs/bs_opt.hpp"
#include "airs/conic.hpp"
#include "airs/sysmodel.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace airs {

// One anchor of the SCA loop (physical units).
struct ScaIterate {
    Eigen::VectorXcd phi_t;
    Eigen::VectorXcd u_t;
    Eigen::VectorXd alpha_t;
    double objective_t = 0.0;  // penalized merit in watts; equals Tr(Phi) (+ prices) when the slacks are tight
    double trace_phi = 0.0;    // Tr(Phi) in watts
    double gap_phi = 0.0;      // Tr(Phi - Theta Theta^H) in watts
    double gap_u = 0.0;        // Tr(U - u u^H) in watts

    static ScaIterate from_design(const IrsDesign& d);
    IrsDesign design() const;  // phi and alpha as stored, no rounding
};

// Reflect-all start with phases aligning the cascaded path of user 1 to its
// direct path and total power P_I^max / 2.
ScaIterate initial_iterate(const ChannelSet& ch, const SystemParams& params);
// Random phases and random modes at the same power, for restarts.
ScaIterate random_iterate(const ChannelSet& ch, const SystemParams& params, std::uint64_t seed);

struct SvdTerm {
    Eigen::VectorXcd p;  // varrho_m r_m
    Eigen::VectorXcd q;  // v_m
};

// Factorizes G B G^H = sum_m p_m q_m^H through the SVD of G B G^H.
std::vector<SvdTerm> svd_split(const Eigen::MatrixXcd& g, const Eigen::MatrixXcd& b);

// First-order minorants at the anchor:
//   alpha_m^2      >= 2 alpha_t,m alpha_m - alpha_t,m^2
//   ||phi||^2      >= 2 Re(phi_t^H phi) - ||phi_t||^2
//   ||u||^2        >= 2 Re(u_t^H u) - ||u_t||^2
struct TaylorBounds {
    Eigen::VectorXd alpha_t;
    Eigen::VectorXcd phi_t;
    Eigen::VectorXcd u_t;

    double alpha_sq(int m, double alpha) const;
    double theta_trace(const Eigen::VectorXcd& phi) const;
    double u_trace(const Eigen::VectorXcd& u) const;
};
TaylorBounds taylor_bounds(const ScaIterate& it);

enum class P5Mode {
    Constrained,  // SINR and leakage constraints at the fixed BS design
    Priced        // constraints replaced by their P3 multipliers in the objective
};

struct P5Options {
    P5Mode mode = P5Mode::Constrained;
    // P3 multipliers (physical units), required in Priced mode.
    std::vector<double> sinr_price;
    std::vector<Eigen::MatrixXcd> leak_price;
    // Penalty weights in normalized units (powers divided by P_I^max).
    // rho_slack < 0 selects it automatically from the prices.
    double rho_slack = 1.0;
    double rho_slack_factor = 2.0;
    double rho_alpha = 1.0;
    double big_m = 1.0;  // Big-M constant as a multiple of sqrt(P_I^max)
    std::optional<Eigen::VectorXd> frozen_alpha;
    double margin = 1e-6;
    double q_regularizer = 1e-12;
    conic::SolverOptions solver{1e-8, 100, false};
};

struct P5Model {
    conic::ConicProblem problem;
    conic::ComplexVariable phi;  // normalized by sqrt(P_I^max)
    conic::ComplexVariable u;
    int alpha = 0;               // first index of the M mode variables
    int phi_diag = 0;            // first index of the M diagonal entries of Phi / P_I^max
    conic::HermitianVariable big_u;  // U / P_I^max
    double power_scale = 0.0;    // P_I^max
    double rho_slack = 0.0;      // effective penalty weights
    double rho_alpha = 0.0;
    conic::LinearExpr base_objective;  // Tr(Phi) plus prices, normalized
    double objective_constant = 0.0;   // constant of the full surrogate
    int sinr_rows = 0;
    int leak_blocks = 0;
};

P5Model build_p5(const ChannelSet& ch, const BsDesign& bs, const SystemParams& params, const ScaIterate& anchor,
                 const P5Options& opts);

struct P5Solution {
    conic::SolveStatus status = conic::SolveStatus::NumericalFailure;
    bool certified = false;
    ScaIterate next;           // new anchor with objective_t = merit at the solution
    double surrogate = 0.0;    // optimal surrogate value in watts
    Eigen::MatrixXcd big_u;    // U in watts
    Eigen::VectorXd phi_diag;  // diag(Phi) in watts
};

P5Solution solve_p5(const ChannelSet& ch, const BsDesign& bs, const SystemParams& params, const ScaIterate& anchor,
                    const P5Options& opts);

struct ScaConfig {
    int t_max = 20;
    double tol = 1e-4;
    P5Options p5;
};

struct ScaResult {
    SubproblemStatus status = SubproblemStatus::SolverFailure;
    bool converged = false;
    IrsDesign design;                // rounded and re-validated
    std::vector<ScaIterate> trace;   // trace[0] is the start
    bool frozen_resolve = false;     // a frozen-mode pass followed the rounding
    ScaIterate last;                 // last unrounded iterate
    P5Solution last_solution;
};

ScaResult sca_optimize(const ChannelSet& ch, const BsDesign& bs, const SystemParams& params, const ScaIterate& init,
                       const ScaConfig& cfg);

// Threshold at 0.5 (ties reflect) and re-impose u_m = alpha_m conj(phi_m).
IrsDesign round_modes(const Eigen::VectorXd& alpha, const Eigen::VectorXcd& phi, const Eigen::VectorXcd& u);

// Lifted SINR expression of user k at the fixed BS design (physical units),
// evaluated at (u, U, diag Phi). Equals the P3 SINR row when U = u u^H,
// Phi = Theta Theta^H and the modes are binary.
double lifted_sinr_row(const ChannelSet& ch, const BsDesign& bs, const SystemParams& params, int k,
                       const Eigen::VectorXcd& u, const Eigen::MatrixXcd& big_u, const Eigen::VectorXd& phi_diag,
                       double margin = 0.0);
// Lifted leakage matrix C_tol Q - F W_k F^H (without the regularizer).
Eigen::MatrixXcd lifted_leak_matrix(const ChannelSet& ch, const BsDesign& bs, const SystemParams& params, int k,
                                    const Eigen::VectorXcd& u, const Eigen::MatrixXcd& big_u,
                                    const Eigen::VectorXd& phi_diag, double margin = 0.0);

}  // namespace airs

#endif
