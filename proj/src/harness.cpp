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


#include "airs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace airs {

using nlohmann::json;

const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::GammaMinDb: return "gamma_min_db";
        case SweepAxis::NEve: return "n_eve";
        case SweepAxis::NIrs: return "n_irs";
    }
    return "?";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
    for (SweepAxis a : {SweepAxis::GammaMinDb, SweepAxis::NEve, SweepAxis::NIrs})
        if (name == to_string(a)) return a;
    throw std::invalid_argument("unknown sweep axis: " + name);
}

namespace {

int as_count(double v, const char* what) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e6)
        throw std::invalid_argument(std::string(what) + " sweep values must be positive integers");
    return static_cast<int>(v);
}

}  // namespace

SystemParams ExperimentSpec::params_at(double value) const {
    SystemParams p = base;
    switch (axis) {
        case SweepAxis::GammaMinDb: p.set_gamma_min_db(value); break;
        case SweepAxis::NEve: p.n_eve = as_count(value, "n_eve"); break;
        case SweepAxis::NIrs: p.n_irs = as_count(value, "n_irs"); break;
    }
    p.validate();
    return p;
}

void ExperimentSpec::validate() const {
    base.validate();
    if (n_realizations < 1) throw std::invalid_argument("ExperimentSpec: n_realizations must be at least 1");
    if (values.empty()) throw std::invalid_argument("ExperimentSpec: empty sweep");
    if (schemes.empty()) throw std::invalid_argument("ExperimentSpec: no scheme selected");
    if (jobs < 1) throw std::invalid_argument("ExperimentSpec: jobs must be at least 1");
    for (double v : values) params_at(v);
    ao.validate();
}

// ---- dB helpers ------------------------------------------------------------

namespace {

template <class To, class From>
double exact_inverse(double x, To to, From from) {
    const double d0 = to(x);
    if (from(d0) == x) return d0;
    double up = d0, down = d0;
    for (int i = 0; i < 64; ++i) {
        up = std::nextafter(up, std::numeric_limits<double>::infinity());
        down = std::nextafter(down, -std::numeric_limits<double>::infinity());
        if (from(up) == x) return up;
        if (from(down) == x) return down;
    }
    return d0;
}

}  // namespace

double exact_dbm(double watts) { return exact_inverse(watts, watts_to_dbm, dbm_to_watts); }
double exact_db(double linear) { return exact_inverse(linear, linear_to_db, db_to_linear); }

// ---- JSON config -----------------------------------------------------------

namespace {

json point_json(Point2 p) { return json::array({p.x, p.y}); }

Point2 point_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("config: a point is [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json links_json(const LinkValues& v) { return {{"bu", v.bu}, {"be", v.be}, {"bi", v.bi}, {"iu", v.iu}, {"ie", v.ie}}; }

void links_from(const json& j, LinkValues& v) {
    for (auto& [key, val] : j.items()) {
        if (key == "bu") v.bu = val.get<double>();
        else if (key == "be") v.be = val.get<double>();
        else if (key == "bi") v.bi = val.get<double>();
        else if (key == "iu") v.iu = val.get<double>();
        else if (key == "ie") v.ie = val.get<double>();
        else throw std::invalid_argument("config: unknown link key " + key);
    }
}

// Scalar or per-user array, converted element-wise.
template <class F>
std::vector<double> per_user(const json& j, F convert) {
    std::vector<double> out;
    if (j.is_array())
        for (const auto& e : j) out.push_back(convert(e.get<double>()));
    else
        out.push_back(convert(j.get<double>()));
    return out;
}

template <class F>
json per_user_json(const std::vector<double>& v, F convert) {
    json a = json::array();
    for (double x : v) a.push_back(convert(x));
    return a;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
    for (auto& [key, val] : j.items()) {
        (void)val;
        if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end())
            throw std::invalid_argument(std::string("config: unknown key '") + key + "' in " + where);
    }
}

SystemParams system_from(const json& j) {
    reject_unknown(j,
                   {"n_tx", "n_eve", "n_irs", "n_users", "bs", "irs", "eve", "users", "pathloss_exponents",
                    "rician_factors", "carrier_freq_hz", "ref_distance_m", "noise_user_dbm", "noise_irs_dbm",
                    "gamma_min_db", "c_max", "p_irs_max_dbm", "rng_seed"},
                   "system");
    SystemParams p;
    p.n_tx = j.value("n_tx", p.n_tx);
    p.n_eve = j.value("n_eve", p.n_eve);
    p.n_irs = j.value("n_irs", p.n_irs);
    p.n_users = j.value("n_users", p.n_users);
    if (j.contains("bs")) p.bs = point_from(j["bs"]);
    if (j.contains("irs")) p.irs = point_from(j["irs"]);
    if (j.contains("eve")) p.eve = point_from(j["eve"]);
    if (j.contains("users")) {
        p.users.clear();
        for (const auto& u : j["users"]) p.users.push_back(point_from(u));
    }
    if (j.contains("pathloss_exponents")) links_from(j["pathloss_exponents"], p.pathloss_exponents);
    if (j.contains("rician_factors")) links_from(j["rician_factors"], p.rician_factors);
    p.carrier_freq = j.value("carrier_freq_hz", p.carrier_freq);
    p.ref_distance = j.value("ref_distance_m", p.ref_distance);
    if (j.contains("noise_user_dbm")) p.noise_user = per_user(j["noise_user_dbm"], dbm_to_watts);
    if (j.contains("noise_irs_dbm")) p.noise_irs = dbm_to_watts(j["noise_irs_dbm"].get<double>());
    if (j.contains("gamma_min_db")) p.gamma_min = per_user(j["gamma_min_db"], db_to_linear);
    if (j.contains("c_max")) p.c_max = per_user(j["c_max"], [](double x) { return x; });
    if (j.contains("p_irs_max_dbm")) p.p_irs_max = dbm_to_watts(j["p_irs_max_dbm"].get<double>());
    p.rng_seed = j.value("rng_seed", p.rng_seed);
    p.broadcast_per_user();
    return p;
}

json system_json(const SystemParams& p) {
    json users = json::array();
    for (const Point2& u : p.users) users.push_back(point_json(u));
    return {{"n_tx", p.n_tx},
            {"n_eve", p.n_eve},
            {"n_irs", p.n_irs},
            {"n_users", p.n_users},
            {"bs", point_json(p.bs)},
            {"irs", point_json(p.irs)},
            {"eve", point_json(p.eve)},
            {"users", users},
            {"pathloss_exponents", links_json(p.pathloss_exponents)},
            {"rician_factors", links_json(p.rician_factors)},
            {"carrier_freq_hz", p.carrier_freq},
            {"ref_distance_m", p.ref_distance},
            {"noise_user_dbm", per_user_json(p.noise_user, exact_dbm)},
            {"noise_irs_dbm", exact_dbm(p.noise_irs)},
            {"gamma_min_db", per_user_json(p.gamma_min, exact_db)},
            {"c_max", p.c_max},
            {"p_irs_max_dbm", exact_dbm(p.p_irs_max)},
            {"rng_seed", p.rng_seed}};
}

AoConfig ao_from(const json& j) {
    reject_unknown(j,
                   {"tau_max", "ao_tol", "sca_t_max", "sca_tol", "restarts", "seed", "baseline_bs_an", "joint_jamming",
                    "zero_start", "jam_start", "priced_steps", "priced_attempts", "priced_rho", "rho_slack",
                    "rho_alpha", "big_m", "p3_margin", "p5_margin", "q_regularizer", "p3_solver_tol",
                    "p5_solver_tol", "randomization_draws"},
                   "ao");
    AoConfig c;
    c.tau_max = j.value("tau_max", c.tau_max);
    c.ao_tol = j.value("ao_tol", c.ao_tol);
    c.sca.t_max = j.value("sca_t_max", c.sca.t_max);
    c.sca.tol = j.value("sca_tol", c.sca.tol);
    c.restarts = j.value("restarts", c.restarts);
    c.seed = j.value("seed", c.seed);
    c.baseline_bs_an = j.value("baseline_bs_an", c.baseline_bs_an);
    c.joint_jamming = j.value("joint_jamming", c.joint_jamming);
    c.zero_start = j.value("zero_start", c.zero_start);
    c.jam_start = j.value("jam_start", c.jam_start);
    c.priced_steps = j.value("priced_steps", c.priced_steps);
    c.priced_attempts = j.value("priced_attempts", c.priced_attempts);
    c.priced_rho = j.value("priced_rho", c.priced_rho);
    c.sca.p5.rho_slack = j.value("rho_slack", c.sca.p5.rho_slack);
    c.sca.p5.rho_alpha = j.value("rho_alpha", c.sca.p5.rho_alpha);
    c.sca.p5.big_m = j.value("big_m", c.sca.p5.big_m);
    c.p3.margin = j.value("p3_margin", c.p3.margin);
    c.sca.p5.margin = j.value("p5_margin", c.sca.p5.margin);
    c.p3.q_regularizer = j.value("q_regularizer", c.p3.q_regularizer);
    c.sca.p5.q_regularizer = c.p3.q_regularizer;
    c.p3.solver.tol = j.value("p3_solver_tol", c.p3.solver.tol);
    c.sca.p5.solver.tol = j.value("p5_solver_tol", c.sca.p5.solver.tol);
    c.p3.randomization_draws = j.value("randomization_draws", c.p3.randomization_draws);
    return c;
}

json ao_json(const AoConfig& c) {
    return {{"tau_max", c.tau_max},
            {"ao_tol", c.ao_tol},
            {"sca_t_max", c.sca.t_max},
            {"sca_tol", c.sca.tol},
            {"restarts", c.restarts},
            {"seed", c.seed},
            {"baseline_bs_an", c.baseline_bs_an},
            {"joint_jamming", c.joint_jamming},
            {"zero_start", c.zero_start},
            {"jam_start", c.jam_start},
            {"priced_steps", c.priced_steps},
            {"priced_attempts", c.priced_attempts},
            {"priced_rho", c.priced_rho},
            {"rho_slack", c.sca.p5.rho_slack},
            {"rho_alpha", c.sca.p5.rho_alpha},
            {"big_m", c.sca.p5.big_m},
            {"p3_margin", c.p3.margin},
            {"p5_margin", c.sca.p5.margin},
            {"q_regularizer", c.p3.q_regularizer},
            {"p3_solver_tol", c.p3.solver.tol},
            {"p5_solver_tol", c.sca.p5.solver.tol},
            {"randomization_draws", c.p3.randomization_draws}};
}

}  // namespace

ExperimentSpec spec_from_json(const json& j) {
    reject_unknown(j, {"system", "sweep", "schemes", "n_realizations", "seed_base", "nested_irs", "ao", "jobs"},
                   "top level");
    ExperimentSpec s;
    if (j.contains("system")) s.base = system_from(j["system"]);
    if (j.contains("sweep")) {
        const json& sw = j["sweep"];
        reject_unknown(sw, {"axis", "values"}, "sweep");
        if (sw.contains("axis")) s.axis = sweep_axis_from_string(sw["axis"].get<std::string>());
        if (sw.contains("values")) s.values = sw["values"].get<std::vector<double>>();
    }
    if (j.contains("schemes")) {
        s.schemes.clear();
        for (const auto& n : j["schemes"]) s.schemes.push_back(scheme_from_string(n.get<std::string>()));
    }
    s.n_realizations = j.value("n_realizations", s.n_realizations);
    s.seed_base = j.value("seed_base", s.seed_base);
    s.nested_irs = j.value("nested_irs", s.nested_irs);
    if (j.contains("ao")) s.ao = ao_from(j["ao"]);
    s.jobs = j.value("jobs", s.jobs);
    s.validate();
    return s;
}

json spec_to_json(const ExperimentSpec& s) {
    json schemes = json::array();
    for (Scheme sc : s.schemes) schemes.push_back(to_string(sc));
    return {{"system", system_json(s.base)},
            {"sweep", {{"axis", to_string(s.axis)}, {"values", s.values}}},
            {"schemes", schemes},
            {"n_realizations", s.n_realizations},
            {"seed_base", s.seed_base},
            {"nested_irs", s.nested_irs},
            {"ao", ao_json(s.ao)},
            {"jobs", s.jobs}};
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    return spec_from_json(json::parse(in));
}

// ---- sweep -----------------------------------------------------------------

namespace {

SchemeOutcome run_one(const ChannelSet& ch, const SystemParams& p, const AoConfig& base, Scheme scheme) {
    const auto t0 = std::chrono::steady_clock::now();
    AoConfig cfg = base;
    cfg.scheme = scheme;
    const AoResult r = run_scheme(ch, p, cfg);
    SchemeOutcome o;
    o.scheme = scheme;
    o.status = r.status;
    o.start = r.history.start;
    o.ao_iterations = static_cast<int>(r.history.records.size());
    if (r.feasible()) {
        o.power_w = r.total_power;
        o.power_dbm = watts_to_dbm(r.total_power);
        o.irs_power_w = r.irs.power();
        for (int m = 0; m < r.irs.alpha.size(); ++m) o.irs_jamming += r.irs.alpha(m) < 0.5;
        for (int k = 0; k < p.n_users; ++k) o.secrecy_rates.push_back(secrecy_rate(ch, r.bs, r.irs, p, k));
    }
    o.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return o;
}

}  // namespace

std::vector<TrialRecord> run_sweep(const ExperimentSpec& spec) {
    spec.validate();
    const int nv = static_cast<int>(spec.values.size());
    const int nr = spec.n_realizations;
    std::vector<TrialRecord> out(static_cast<std::size_t>(nv) * nr);
    const double max_value = *std::max_element(spec.values.begin(), spec.values.end());

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const int job = next.fetch_add(1);
            if (job >= nv * nr) return;
            try {
                const int vi = job / nr, r = job % nr;
                const double value = spec.values[static_cast<std::size_t>(vi)];
                const SystemParams p = spec.params_at(value);
                const std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(r);
                ChannelSet ch;
                if (spec.axis == SweepAxis::NIrs && spec.nested_irs)
                    ch = generate_channels(spec.params_at(max_value), seed).first_elements(p.n_irs);
                else
                    ch = generate_channels(p, seed);
                TrialRecord& rec = out[static_cast<std::size_t>(job)];
                rec.seed = seed;
                rec.sweep_value = value;
                for (Scheme s : spec.schemes) rec.outcomes.push_back(run_one(ch, p, spec.ao, s));
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(nv * nr);
            }
        }
    };
    const int n_threads = std::min(spec.jobs, nv * nr);
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records, const ExperimentSpec& spec) {
    std::vector<AggregateRow> rows;
    for (double value : spec.values) {
        std::vector<const TrialRecord*> at;
        for (const TrialRecord& r : records)
            if (r.sweep_value == value) at.push_back(&r);
        for (std::size_t s = 0; s < spec.schemes.size(); ++s) {
            AggregateRow row;
            row.sweep_value = value;
            row.scheme = spec.schemes[s];
            double sum = 0.0, sum_sq = 0.0, own = 0.0;
            for (const TrialRecord* r : at) {
                const SchemeOutcome& o = r->outcomes[s];
                if (o.feasible()) {
                    ++row.n_feasible;
                    own += o.power_w;
                }
                const bool common = std::all_of(r->outcomes.begin(), r->outcomes.end(),
                                                [](const SchemeOutcome& x) { return x.feasible(); });
                if (common) {
                    ++row.n_common_feasible;
                    sum += o.power_w;
                    sum_sq += o.power_w * o.power_w;
                }
            }
            const int n = row.n_common_feasible;
            row.feasibility_pct = at.empty() ? 0.0 : 100.0 * row.n_feasible / static_cast<double>(at.size());
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.avg_power_w = n > 0 ? sum / n : nan;
            row.avg_power_dbm = n > 0 ? watts_to_dbm(row.avg_power_w) : nan;
            row.std_error_w =
                n > 1 ? std::sqrt(std::max(0.0, (sum_sq - n * row.avg_power_w * row.avg_power_w) / (n - 1)) / n) : nan;
            row.own_avg_power_dbm = row.n_feasible > 0 ? watts_to_dbm(own / row.n_feasible) : nan;
            rows.push_back(row);
        }
    }
    return rows;
}

std::string csv_header() {
    return "sweep_value,scheme,avg_power_dbm,feasibility_pct,n_common_feasible,avg_power_w,std_error_w,"
           "own_avg_power_dbm,n_feasible";
}

std::string csv_row(const AggregateRow& r) {
    std::ostringstream os;
    os << std::setprecision(10) << r.sweep_value << ',' << to_string(r.scheme) << ',' << r.avg_power_dbm << ','
       << r.feasibility_pct << ',' << r.n_common_feasible << ',' << r.avg_power_w << ',' << r.std_error_w << ','
       << r.own_avg_power_dbm << ',' << r.n_feasible;
    return os.str();
}

json records_to_json(const std::vector<TrialRecord>& records) {
    json arr = json::array();
    for (const TrialRecord& r : records) {
        json outs = json::array();
        for (const SchemeOutcome& o : r.outcomes) {
            json jo = {{"scheme", to_string(o.scheme)},
                       {"status", to_string(o.status)},
                       {"ao_iterations", o.ao_iterations},
                       {"start", o.start},
                       {"wall_time_s", o.wall_time_s}};
            if (o.feasible()) {
                jo["power_w"] = o.power_w;
                jo["power_dbm"] = o.power_dbm;
                jo["irs_power_w"] = o.irs_power_w;
                jo["irs_jamming_elements"] = o.irs_jamming;
                jo["secrecy_rates"] = o.secrecy_rates;
            }
            outs.push_back(jo);
        }
        arr.push_back({{"seed", r.seed}, {"sweep_value", r.sweep_value}, {"outcomes", outs}});
    }
    return arr;
}

void emit_report(const std::vector<TrialRecord>& records, const ExperimentSpec& spec, const std::string& dir) {
    if (records.empty()) throw std::invalid_argument("emit_report: no records");
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(fs::path(dir) / name);
        if (!f) throw std::runtime_error(std::string("cannot write ") + (fs::path(dir) / name).string());
        return f;
    };
    {
        std::ofstream f = open("results.csv");
        f << csv_header() << '\n';
        for (const AggregateRow& r : aggregate(records, spec)) f << csv_row(r) << '\n';
    }
    {
        std::ofstream f = open("records.json");
        f << json{{"sweep_axis", to_string(spec.axis)}, {"records", records_to_json(records)}}.dump(2) << '\n';
    }
    {
        std::ofstream f = open("resolved_config.json");
        f << spec_to_json(spec).dump(2) << '\n';
    }
}

// ---- oracles ---------------------------------------------------------------

LeakageLmiStats verify_leakage_lmi(int n_trials, std::uint64_t seed, const SystemParams& params) {
    const auto t0 = std::chrono::steady_clock::now();
    LeakageLmiStats st;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int n_t = params.n_tx;
    for (int trial = 0; trial < n_trials; ++trial) {
        const ChannelSet ch = generate_channels(params, rng());
        IrsDesign irs = random_iterate(ch, params, rng()).design();
        irs.phi *= std::sqrt(2.0 * uni(rng));  // up to the full budget
        BsDesign bs = BsDesign::zero(n_t, params.n_users);
        Eigen::MatrixXcd a(n_t, n_t);
        for (int j = 0; j < n_t; ++j)
            for (int i = 0; i < n_t; ++i) a(i, j) = cd(nd(rng), nd(rng));
        bs.z_b = 1e-3 * uni(rng) * a * a.adjoint();
        for (int k = 0; k < params.n_users; ++k)
            for (int i = 0; i < n_t; ++i) bs.w[k](i) = cd(nd(rng), nd(rng));

        const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(params.n_users));
        const EffectiveChannels eff = effective_channels(ch, bs, irs, params);
        Eigen::VectorXcd fw = eff.f_eq * bs.w[k];
        const double c_tol = params.c_tol(k);
        if (trial == 0) {
            fw.setZero();
        } else {
            // Place w^H F^H Q^-1 F w log-uniformly within a decade of C_tol.
            const double s = fw.dot(eff.q.ldlt().solve(fw)).real();
            fw *= std::sqrt(c_tol * std::pow(10.0, 2.0 * uni(rng) - 1.0) / s);
        }
        const EveCapacityForms f = eve_capacity_forms(eff.q, fw);
        const double forms[] = {f.det_form, f.scalar_form, f.trace_form, f.lambda_form};
        for (double x : forms)
            for (double y : forms) st.max_form_gap = std::max(st.max_form_gap, std::abs(x - y));

        ++st.trials;
        if (std::abs(f.det_form - params.c_max[k]) <= 1e-9) {
            ++st.excluded;
            continue;
        }
        const bool logdet_ok = f.det_form <= params.c_max[k];
        const Eigen::MatrixXcd lmi = c_tol * eff.q - fw * fw.adjoint();
        const bool lmi_ok = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(lmi).eigenvalues().minCoeff() >= 0.0;
        st.c2_satisfied += logdet_ok;
        st.agreed += logdet_ok == lmi_ok;
    }
    st.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return st;
}

OracleResult exhaustive_mode_oracle(const ChannelSet& ch, const SystemParams& params, const AoConfig& cfg) {
    const int m = ch.n_irs();
    if (m > 10) throw std::invalid_argument("exhaustive_mode_oracle: at most 10 IRS elements");
    OracleResult out;
    out.patterns = 1 << m;
    out.pattern_power.assign(static_cast<std::size_t>(out.patterns), std::numeric_limits<double>::infinity());
    for (int pat = 0; pat < out.patterns; ++pat) {
        Eigen::VectorXd alpha(m);
        for (int i = 0; i < m; ++i) alpha(i) = (pat >> i) & 1 ? 1.0 : 0.0;
        const AoResult r = alternating_optimize_frozen(ch, params, cfg, alpha);
        if (!r.feasible()) continue;
        out.pattern_power[static_cast<std::size_t>(pat)] = r.total_power;
        if (!out.feasible || r.total_power < out.best_power) {
            out.feasible = true;
            out.best_power = r.total_power;
            out.best_alpha = alpha;
        }
    }
    return out;
}

}  // namespace airs
