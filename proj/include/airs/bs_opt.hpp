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


#ifndef AIRS_BS_OPT_HPP
#define AIRS_BS_OPT_HPP

#include "airs/conic.hpp"
#include "airs/sysmodel.hpp"

#include <cstdint>
#include <vector>

namespace airs {

enum class SubproblemStatus { Optimal, Infeasible, ExtractionFailed, SolverFailure };
const char* to_string(SubproblemStatus s);

struct P3Options {
    conic::SolverOptions solver{1e-8, 100, false};
    // A stalled solve is repeated once at this looser tolerance (0 disables).
    double fallback_tol = 1e-6;
    double margin = 1e-6;           // SINR targets raised and C_tol lowered by this relative amount
    double q_regularizer = 1e-12;   // added to the normalized Q inside each leakage LMI
    double extraction_tol = 1e-6;   // allowed normalized violation after rank-one recovery
    int randomization_draws = 200;
    std::uint64_t seed = 1;
    bool bs_artificial_noise = true;  // false pins Z_B = 0
    // Treat the per-element powers |phi_m|^2 of jamming elements (alpha_m = 0)
    // as variables. All IRS terms stay linear, so P3 remains an SDP.
    bool optimize_jamming = false;
};

// P3 in conic form plus the handles needed to read the solution back.
struct P3Model {
    conic::ConicProblem problem;
    std::vector<conic::HermitianVariable> w;
    conic::HermitianVariable z;  // n = 0 when BS AN is disabled
    std::vector<int> sinr_rows;   // slack offsets of the SINR rows
    std::vector<int> leak_cones;  // cone indices of the leakage LMIs
    std::vector<double> sinr_scale;
    std::vector<double> leak_scale;
    int variable_psd_blocks = 0;
    std::vector<int> jam_elements;  // element indices with a power variable
    int jam_offset = -1;            // first power variable (units of P_I^max)
};

// SDR of P3 for a fixed IRS state: min sum Tr W_k + Tr Z_B subject to the
// linear SINR rows, the N_E x N_E leakage LMIs and PSD blocks for W_k, Z_B.
P3Model build_p3(const ChannelSet& ch, const IrsDesign& irs, const SystemParams& params, const P3Options& opts = {});

struct RankOne {
    Eigen::VectorXcd w;
    double gap = 0.0;  // lambda_2 / lambda_1
};

// Principal eigenpair sqrt(lambda_1) v_1 of a Hermitian PSD matrix.
RankOne extract_rank_one(const Eigen::MatrixXcd& w_mat);

enum class ExtractionPath { None, Eigen, Randomization };
const char* to_string(ExtractionPath p);

struct BsSubproblemResult {
    SubproblemStatus status = SubproblemStatus::SolverFailure;
    conic::SolveStatus solver_status = conic::SolveStatus::NumericalFailure;
    std::vector<Eigen::MatrixXcd> w_mats;
    Eigen::MatrixXcd z_b;
    BsDesign extracted;
    std::vector<double> tightness;
    double objective = 0.0;          // SDP optimum in watts (BS power, plus jamming power if optimized)
    IrsDesign irs;                   // IRS state used, with optimized jamming powers when requested
    double extracted_power = 0.0;    // power of the recovered design
    ExtractionPath path = ExtractionPath::None;
    double violation = 0.0;          // worst normalized violation of the recovered design
    bool certified = false;          // certify_solution at 10 x tol
    int iterations = 0;
    // Multipliers in physical units: lambda_k for the SINR rows and S_k for
    // the leakage LMIs, so d(opt) = -sum lambda_k dg_k - sum Re Tr(S_k dG_k).
    std::vector<double> sinr_dual;
    std::vector<Eigen::MatrixXcd> leak_dual;
};

BsSubproblemResult solve_p3(const ChannelSet& ch, const IrsDesign& irs, const SystemParams& params,
                            const P3Options& opts = {});

// Worst normalized violation of the P3 constraints at a rank-one design:
// relative SINR shortfall and the leakage LMI's most negative eigenvalue over
// its scale. Nonpositive means feasible.
double p3_violation(const ChannelSet& ch, const IrsDesign& irs, const SystemParams& params, const BsDesign& bs,
                    const P3Options& opts = {});

}  // namespace airs

#endif
