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

#ifndef AIRS_DRIVER_HPP
#define AIRS_DRIVER_HPP

#include "airs/bs_opt.hpp"
#include "airs/irs_opt.hpp"
#include "airs/sysmodel.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace airs {

enum class Scheme { Proposed, BaselineAllReflect, BaselineNoIrs };
enum class RunStatus { Feasible, Infeasible, NotConverged };

const char* to_string(Scheme s);
const char* to_string(RunStatus s);
// Accepts "proposed", "all_reflect" and "no_irs"; throws otherwise.
Scheme scheme_from_string(const std::string& name);

struct AoConfig {
    int tau_max = 30;
    double ao_tol = 1e-3;  // relative change of the total power
    ScaConfig sca;
    P3Options p3;
    Scheme scheme = Scheme::Proposed;

    // Random restarts tried when no regular start has a feasible first P3.
    int restarts = 3;
    std::uint64_t seed = 1;
    // All-reflect baseline keeps the BS artificial noise Z_B.
    bool baseline_bs_an = true;
    // Proposed scheme: P3 also sizes the powers of the jamming elements.
    bool joint_jamming = true;
    // Also start from Theta = 0 (reflect modes, zero amplitude).
    bool zero_start = true;
    // Proposed scheme: also start from the all-jam configuration.
    bool jam_start = true;
    // Multiplier-priced IRS steps, each validated by a fresh P3 solve.
    bool priced_steps = false;
    int priced_attempts = 3;
    double priced_rho = 1.0;  // initial proximal weight, multiplied by 4 after a rejected step

    // Throws std::invalid_argument on a bad setting.
    void validate() const;
};

enum class IrsStep { None, Sca, Priced, Both };

const char* to_string(IrsStep s);

struct AoRecord {
    int tau = 0;
    double total_power = 0.0;  // after the IRS step of this iteration
    double bs_power = 0.0;
    double irs_power = 0.0;
    SubproblemStatus p3_status = SubproblemStatus::SolverFailure;
    SubproblemStatus sca_status = SubproblemStatus::SolverFailure;
    double max_tightness = 0.0;  // largest lambda_2 / lambda_1 over the W_k
    int sca_iterations = 0;
    IrsStep irs_step = IrsStep::None;
    std::vector<double> sca_trace;  // Algorithm 1 merit values in watts
};

struct AoHistory {
    std::vector<AoRecord> records;
    RunStatus status = RunStatus::Infeasible;
    std::string start;  // label of the initialization that produced the result
    int starts_tried = 0;
    int p3_solves = 0;
    int p5_solves = 0;
};

struct AoResult {
    RunStatus status = RunStatus::Infeasible;
    BsDesign bs;
    IrsDesign irs;
    double total_power = 0.0;
    AoHistory history;

    bool feasible() const { return status != RunStatus::Infeasible; }
};

// Alternates P3 (BS given IRS) and Algorithm 1 (IRS given BS) from every
// start of the configured scheme and returns the best run. The history of
// the returned run is non-increasing in total power.
AoResult alternating_optimize(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg);

// Single AO run from a given IRS start.
AoResult alternating_optimize_from(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg,
                                   const IrsDesign& start, const std::string& label);

// Modes frozen at reflection; the IRS emits no artificial noise.
AoResult baseline_all_reflect(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg);

// Theta = 0: a single P3 solve on the direct channels.
AoResult baseline_no_irs(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg);

// Dispatches on cfg.scheme.
AoResult run_scheme(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg);

// AO with the modes frozen at `alpha` (used by the exhaustive oracle).
AoResult alternating_optimize_frozen(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg,
                                     const Eigen::VectorXd& alpha);

}  // namespace airs

#endif
