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

#ifndef AIRS_HARNESS_HPP
#define AIRS_HARNESS_HPP

#include "airs/driver.hpp"
#include "airs/sysmodel.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace airs {

// ---- experiment description ----------------------------------------------

enum class SweepAxis { GammaMinDb, NEve, NIrs };

const char* to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& name);

struct ExperimentSpec {
    SystemParams base;
    SweepAxis axis = SweepAxis::GammaMinDb;
    std::vector<double> values{0.0, 4.0, 8.0};
    std::vector<Scheme> schemes{Scheme::Proposed, Scheme::BaselineAllReflect, Scheme::BaselineNoIrs};
    int n_realizations = 20;
    std::uint64_t seed_base = 1;
    // Draw each realization at the largest M of an n_irs sweep and keep the
    // first m elements for smaller values.
    bool nested_irs = true;
    AoConfig ao;
    int jobs = 1;

    // Parameters for one sweep value; throws on an invalid value.
    SystemParams params_at(double value) const;
    // Throws std::invalid_argument when the spec cannot run.
    void validate() const;
};

// Structured config. Powers are in dBm and SINR targets in dB; missing keys
// keep their defaults.
ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ExperimentSpec& spec);
ExperimentSpec load_spec(const std::string& path);

// ---- records ---------------------------------------------------------------

struct SchemeOutcome {
    Scheme scheme = Scheme::Proposed;
    RunStatus status = RunStatus::Infeasible;
    double power_w = 0.0;    // meaningful iff feasible
    double power_dbm = 0.0;  // meaningful iff feasible
    std::vector<double> secrecy_rates;
    int ao_iterations = 0;
    int irs_jamming = 0;  // elements in jamming mode
    double irs_power_w = 0.0;
    std::string start;
    double wall_time_s = 0.0;

    bool feasible() const { return status != RunStatus::Infeasible; }
};

struct TrialRecord {
    std::uint64_t seed = 0;
    double sweep_value = 0.0;
    std::vector<SchemeOutcome> outcomes;  // in ExperimentSpec::schemes order
};

// Channel draws are deterministic in (seed_base + realization); the result is
// ordered by sweep value, then realization, regardless of spec.jobs.
std::vector<TrialRecord> run_sweep(const ExperimentSpec& spec);

struct AggregateRow {
    double sweep_value = 0.0;
    Scheme scheme = Scheme::Proposed;
    double avg_power_dbm = 0.0;  // dBm of the mean power over common-feasible trials
    double feasibility_pct = 0.0;
    int n_common_feasible = 0;
    double avg_power_w = 0.0;
    double std_error_w = 0.0;
    double own_avg_power_dbm = 0.0;  // over this scheme's feasible trials
    int n_feasible = 0;
};

// One row per (sweep value, scheme). Common-feasible trials are those where
// every scheme of the spec is feasible.
std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records, const ExperimentSpec& spec);

// Writes results.csv, records.json and resolved_config.json into dir.
void emit_report(const std::vector<TrialRecord>& records, const ExperimentSpec& spec, const std::string& dir);

std::string csv_header();
std::string csv_row(const AggregateRow& row);
nlohmann::json records_to_json(const std::vector<TrialRecord>& records);

// ---- oracles ---------------------------------------------------------------

struct LeakageLmiStats {
    int trials = 0;
    int excluded = 0;  // within 1e-9 of the boundary
    int agreed = 0;
    int c2_satisfied = 0;
    double max_form_gap = 0.0;  // largest pairwise gap of the four capacity forms
    double runtime_s = 0.0;

    bool passed() const { return agreed == trials - excluded && max_form_gap <= 1e-10; }
};

// Random channels and designs on both sides of the leakage constraint;
// compares log2 det(I + Q^-1 F w w^H F^H) <= C_max with the LMI
// C_tol Q - F w w^H F^H >= 0, and cross-checks the four capacity forms.
LeakageLmiStats verify_leakage_lmi(int n_trials, std::uint64_t seed, const SystemParams& params = {});

struct OracleResult {
    bool feasible = false;
    double best_power = 0.0;
    Eigen::VectorXd best_alpha;
    std::vector<double> pattern_power;  // +inf where infeasible; index bit m is alpha_m
    int patterns = 0;
};

// Runs the frozen-mode AO for all 2^M mode patterns; refuses M > 10.
OracleResult exhaustive_mode_oracle(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg);

// A watts value rendered in dBm so that dbm_to_watts returns it exactly
// whenever such a dBm value exists next to watts_to_dbm(w).
double exact_dbm(double watts);
double exact_db(double linear);

}  // namespace airs

#endif
