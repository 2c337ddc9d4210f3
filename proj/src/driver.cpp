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


#include "airs/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace airs {

const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::Proposed: return "proposed";
        case Scheme::BaselineAllReflect: return "all_reflect";
        case Scheme::BaselineNoIrs: return "no_irs";
    }
    return "?";
}

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Feasible: return "Feasible";
        case RunStatus::Infeasible: return "Infeasible";
        case RunStatus::NotConverged: return "NotConverged";
    }
    return "?";
}

const char* to_string(IrsStep s) {
    switch (s) {
        case IrsStep::None: return "none";
        case IrsStep::Sca: return "sca";
        case IrsStep::Priced: return "priced";
        case IrsStep::Both: return "both";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& name) {
    for (Scheme s : {Scheme::Proposed, Scheme::BaselineAllReflect, Scheme::BaselineNoIrs})
        if (name == to_string(s)) return s;
    throw std::invalid_argument("unknown scheme: " + name);
}

void AoConfig::validate() const {
    if (tau_max < 1) throw std::invalid_argument("AoConfig: tau_max must be at least 1");
    if (!(ao_tol > 0.0)) throw std::invalid_argument("AoConfig: ao_tol must be positive");
    if (sca.t_max < 1) throw std::invalid_argument("AoConfig: sca.t_max must be at least 1");
    if (!(sca.tol > 0.0)) throw std::invalid_argument("AoConfig: sca.tol must be positive");
    if (restarts < 0) throw std::invalid_argument("AoConfig: restarts must be non-negative");
    if (priced_attempts < 0) throw std::invalid_argument("AoConfig: priced_attempts must be non-negative");
    if (!(priced_rho > 0.0)) throw std::invalid_argument("AoConfig: priced_rho must be positive");
}

namespace {

// Per-run settings derived from the scheme.
struct RunSetup {
    P3Options p3;
    ScaConfig sca;
    std::optional<Eigen::VectorXd> frozen;
};

RunSetup setup_for(const AoConfig& cfg, int m, const std::optional<Eigen::VectorXd>& frozen) {
    RunSetup s;
    s.p3 = cfg.p3;
    s.sca = cfg.sca;
    s.sca.p5.mode = P5Mode::Constrained;
    s.frozen = frozen;
    if (cfg.scheme == Scheme::BaselineAllReflect) {
        s.frozen = Eigen::VectorXd::Ones(m);
        s.p3.bs_artificial_noise = cfg.baseline_bs_an;
        s.p3.optimize_jamming = false;
    } else {
        s.p3.optimize_jamming = cfg.joint_jamming;
    }
    if (s.frozen) s.sca.p5.frozen_alpha = *s.frozen;
    return s;
}

double bs_power(const BsDesign& bs) { return total_power(bs, IrsDesign::zero(0)); }

double max_gap(const std::vector<double>& v) {
    double g = 0.0;
    for (double x : v) g = std::max(g, x);
    return g;
}

bool design_feasible(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs, const SystemParams& params) {
    return check_feasibility(ch, bs, irs, params, 1e-5).feasible;
}

IrsDesign with_modes(IrsDesign d, const std::optional<Eigen::VectorXd>& alpha) {
    if (alpha) d.alpha = *alpha;
    return d;
}

AoResult run_from(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg, const RunSetup& su,
                  const IrsDesign& start, const std::string& label) {
    AoResult res;
    AoHistory& h = res.history;
    h.start = label;
    h.starts_tried = 1;

    BsSubproblemResult cur = solve_p3(ch, start, params, su.p3);
    ++h.p3_solves;
    if (cur.status != SubproblemStatus::Optimal) {
        res.status = h.status = RunStatus::Infeasible;
        return res;
    }
    IrsDesign irs = cur.irs;
    BsDesign bs = cur.extracted;
    double total = bs_power(bs) + irs.power();
    bool converged = false;

    for (int tau = 1; tau <= cfg.tau_max; ++tau) {
        AoRecord rec;
        rec.tau = tau;
        const double prev_total = total;

        rec.p3_status = cur.status;
        rec.max_tightness = max_gap(cur.tightness);

        // Step 2a: multiplier-priced IRS moves, validated by a P3 solve.
        bool priced_ok = false;
        if (cfg.priced_steps) {
            double rho = cfg.priced_rho;
            for (int a = 0; a < cfg.priced_attempts; ++a, rho *= 4.0) {
                P5Options po = su.sca.p5;
                po.mode = P5Mode::Priced;
                po.sinr_price = cur.sinr_dual;
                po.leak_price = cur.leak_dual;
                po.rho_slack = rho;
                const P5Solution s = solve_p5(ch, bs, params, ScaIterate::from_design(irs), po);
                ++h.p5_solves;
                if (s.status != conic::SolveStatus::Optimal) break;
                IrsDesign cand = round_modes(s.next.alpha_t, s.next.phi_t, s.next.u_t);
                if (cand.power() > params.p_irs_max) cand.phi *= std::sqrt(params.p_irs_max / cand.power());
                const BsSubproblemResult r = solve_p3(ch, cand, params, su.p3);
                ++h.p3_solves;
                if (r.status != SubproblemStatus::Optimal) continue;
                const double t = bs_power(r.extracted) + r.irs.power();
                if (t < total && design_feasible(ch, r.extracted, r.irs, params)) {
                    cur = r;
                    bs = r.extracted;
                    irs = r.irs;
                    total = t;
                    priced_ok = true;
                    break;
                }
            }
        }

        // Step 2b: Algorithm 1 at the fixed BS design.
        const ScaResult sr = sca_optimize(ch, bs, params, ScaIterate::from_design(irs), su.sca);
        h.p5_solves += static_cast<int>(sr.trace.size()) - 1 + (sr.frozen_resolve ? 1 : 0);
        rec.sca_status = sr.status;
        rec.sca_iterations = static_cast<int>(sr.trace.size()) - 1;
        for (const ScaIterate& it : sr.trace) rec.sca_trace.push_back(it.objective_t);
        // The candidate is accepted through a BS re-solve: the lifted
        // constraints of P5 can leave the fixed BS design marginally short.
        bool sca_ok = false;
        if (sr.status == SubproblemStatus::Optimal) {
            const BsSubproblemResult r = solve_p3(ch, sr.design, params, su.p3);
            ++h.p3_solves;
            if (r.status == SubproblemStatus::Optimal) {
                const double t = bs_power(r.extracted) + r.irs.power();
                if (t < total && design_feasible(ch, r.extracted, r.irs, params)) {
                    cur = r;
                    bs = r.extracted;
                    irs = r.irs;
                    total = t;
                    sca_ok = true;
                }
            }
        }
        rec.irs_step = priced_ok ? (sca_ok ? IrsStep::Both : IrsStep::Priced) : (sca_ok ? IrsStep::Sca : IrsStep::None);

        rec.bs_power = bs_power(bs);
        rec.irs_power = irs.power();
        rec.total_power = total;
        h.records.push_back(std::move(rec));
        if (prev_total - total <= cfg.ao_tol * prev_total) {
            converged = true;
            break;
        }
    }
    res.bs = bs;
    res.irs = irs;
    res.total_power = total;
    res.status = h.status = converged ? RunStatus::Feasible : RunStatus::NotConverged;
    return res;
}

std::uint64_t restart_seed(std::uint64_t base, int r) { return base * 1000003ULL + 7919ULL * static_cast<std::uint64_t>(r + 1); }

// Runs every regular start, then random restarts if none had a feasible
// first P3, and keeps the lowest-power run.
AoResult multi_start(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg, const RunSetup& su,
                     const std::vector<std::pair<IrsDesign, std::string>>& starts) {
    AoResult best;
    int tried = 0, p3 = 0, p5 = 0;
    auto consider = [&](const AoResult& r) {
        ++tried;
        p3 += r.history.p3_solves;
        p5 += r.history.p5_solves;
        if (r.feasible() && (!best.feasible() || r.total_power < best.total_power)) best = r;
    };
    for (const auto& [d, label] : starts) consider(run_from(ch, params, cfg, su, d, label));
    if (!best.feasible()) {
        const bool free_modes = !su.frozen;
        for (int r = 0; r < cfg.restarts; ++r) {
            IrsDesign d = random_iterate(ch, params, restart_seed(cfg.seed, r)).design();
            if (!free_modes) d.alpha = *su.frozen;
            consider(run_from(ch, params, cfg, su, d, "random_" + std::to_string(r)));
            if (best.feasible()) break;
        }
    }
    best.history.starts_tried = tried;
    best.history.p3_solves = p3;
    best.history.p5_solves = p5;
    return best;
}

}  // namespace

AoResult alternating_optimize_from(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg,
                                   const IrsDesign& start, const std::string& label) {
    cfg.validate();
    const RunSetup su = setup_for(cfg, ch.n_irs(), std::nullopt);
    return run_from(ch, params, cfg, su, with_modes(start, su.frozen), label);
}

AoResult alternating_optimize(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg) {
    cfg.validate();
    const RunSetup su = setup_for(cfg, ch.n_irs(), std::nullopt);
    std::vector<std::pair<IrsDesign, std::string>> starts;
    starts.emplace_back(with_modes(initial_iterate(ch, params).design(), su.frozen), "initial");
    if (cfg.zero_start) starts.emplace_back(with_modes(IrsDesign::zero(ch.n_irs()), su.frozen), "zero");
    if (cfg.scheme == Scheme::Proposed && cfg.jam_start) {
        IrsDesign jam = initial_iterate(ch, params).design();
        jam.alpha.setZero();
        starts.emplace_back(jam, "all_jam");
    }
    return multi_start(ch, params, cfg, su, starts);
}

AoResult alternating_optimize_frozen(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg,
                                     const Eigen::VectorXd& alpha) {
    cfg.validate();
    if (alpha.size() != ch.n_irs()) throw std::invalid_argument("alternating_optimize_frozen: alpha size mismatch");
    for (int i = 0; i < alpha.size(); ++i)
        if (alpha(i) != 0.0 && alpha(i) != 1.0)
            throw std::invalid_argument("alternating_optimize_frozen: alpha must be binary");
    AoConfig c = cfg;
    c.scheme = Scheme::Proposed;
    const RunSetup su = setup_for(c, ch.n_irs(), alpha);
    return multi_start(ch, params, c, su, {{with_modes(initial_iterate(ch, params).design(), alpha), "initial"}});
}

AoResult baseline_all_reflect(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg) {
    AoConfig c = cfg;
    c.scheme = Scheme::BaselineAllReflect;
    return alternating_optimize(ch, params, c);
}

AoResult baseline_no_irs(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg) {
    cfg.validate();
    P3Options p3 = cfg.p3;
    p3.optimize_jamming = false;
    p3.bs_artificial_noise = true;
    const IrsDesign off = IrsDesign::zero(ch.n_irs());
    const BsSubproblemResult r = solve_p3(ch, off, params, p3);
    AoResult res;
    res.history.start = "off";
    res.history.starts_tried = 1;
    res.history.p3_solves = 1;
    if (r.status != SubproblemStatus::Optimal) {
        res.status = res.history.status = RunStatus::Infeasible;
        return res;
    }
    res.bs = r.extracted;
    res.irs = off;
    res.total_power = bs_power(r.extracted);
    AoRecord rec;
    rec.tau = 1;
    rec.total_power = res.total_power;
    rec.bs_power = res.total_power;
    rec.p3_status = r.status;
    rec.sca_status = SubproblemStatus::Optimal;
    rec.max_tightness = max_gap(r.tightness);
    res.history.records.push_back(rec);
    res.status = res.history.status = RunStatus::Feasible;
    return res;
}

AoResult run_scheme(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg) {
    switch (cfg.scheme) {
        case Scheme::Proposed: return alternating_optimize(ch, params, cfg);
        case Scheme::BaselineAllReflect: return baseline_all_reflect(ch, params, cfg);
        case Scheme::BaselineNoIrs: return baseline_no_irs(ch, params, cfg);
    }
    throw std::invalid_argument("run_scheme: unknown scheme");
}

}  // namespace airs
