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


// Command-line front end: sweep, verify and oracle subcommands.

#include "airs/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace airs;

namespace {

struct Common {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    std::string schemes;
};

ExperimentSpec resolve(const Common& c) {
    ExperimentSpec spec = c.config.empty() ? ExperimentSpec{} : load_spec(c.config);
    if (c.seed_set) spec.seed_base = c.seed;
    if (c.jobs > 0) spec.jobs = c.jobs;
    if (!c.schemes.empty()) {
        spec.schemes.clear();
        std::stringstream ss(c.schemes);
        std::string name;
        while (std::getline(ss, name, ','))
            if (!name.empty()) spec.schemes.push_back(scheme_from_string(name));
    }
    spec.validate();
    return spec;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON experiment config (powers in dBm)");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--seed", c.seed, "first realization seed")->each([&c](const std::string&) { c.seed_set = true; });
    app->add_option("--jobs", c.jobs, "worker threads");
    app->add_option("--scheme", c.schemes, "comma-separated schemes: proposed,all_reflect,no_irs");
}

int cmd_sweep(const Common& c) {
    const ExperimentSpec spec = resolve(c);
    const std::vector<TrialRecord> records = run_sweep(spec);
    emit_report(records, spec, c.out);
    std::cout << csv_header() << '\n';
    for (const AggregateRow& r : aggregate(records, spec)) std::cout << csv_row(r) << '\n';
    return 0;
}

int cmd_verify(const Common& c, int trials, int sinr_instances, long samples) {
    const ExperimentSpec spec = resolve(c);
    const std::uint64_t seed = spec.seed_base;
    bool ok = true;

    const LeakageLmiStats st = verify_leakage_lmi(trials, seed, spec.base);
    std::printf("leakage_lmi: trials=%d excluded=%d agreed=%d c2_satisfied=%d max_form_gap=%.3e time=%.2fs %s\n",
                st.trials, st.excluded, st.agreed, st.c2_satisfied, st.max_form_gap, st.runtime_s,
                st.passed() ? "PASS" : "FAIL");
    ok &= st.passed();

    // Closed-form SINR against the sample estimate.
    std::mt19937_64 rng(seed);
    int within = 0;
    for (int i = 0; i < sinr_instances; ++i) {
        const ChannelSet ch = generate_channels(spec.base, rng());
        const IrsDesign irs = random_iterate(ch, spec.base, rng()).design();
        BsDesign bs = BsDesign::zero(spec.base.n_tx, spec.base.n_users);
        std::normal_distribution<double> nd(0.0, 0.05);
        for (auto& w : bs.w)
            for (int t = 0; t < w.size(); ++t) w(t) = cd(nd(rng), nd(rng));
        const int k = i % spec.base.n_users;
        const double exact = user_sinr(ch, bs, irs, spec.base, k);
        const Estimate e = empirical_sinr(ch, bs, irs, spec.base, k, samples, rng());
        within += std::abs(e.value - exact) <= 3.0 * e.std_error;
    }
    // Three standard errors cover 99.7% of instances; allow the binomial tail.
    const bool sinr_ok = sinr_instances == 0 || within >= sinr_instances - std::max(1, sinr_instances / 20);
    std::printf("sinr_crosscheck: instances=%d within_3se=%d %s\n", sinr_instances, within, sinr_ok ? "PASS" : "FAIL");
    ok &= sinr_ok;
    return ok ? 0 : 2;
}

int cmd_oracle(const Common& c, int count) {
    const ExperimentSpec spec = resolve(c);
    const SystemParams& p = spec.base;
    std::filesystem::create_directories(c.out);
    std::ofstream csv(std::filesystem::path(c.out) / "oracle.csv");
    csv << "seed,oracle_power_w,proposed_power_w,ratio,oracle_alpha,proposed_alpha\n";
    std::printf("seed oracle_w proposed_w ratio\n");
    auto bits = [](const Eigen::VectorXd& a) {
        std::string s;
        for (int i = 0; i < a.size(); ++i) s += a(i) > 0.5 ? '1' : '0';
        return s;
    };
    for (int r = 0; r < count; ++r) {
        const std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(r);
        const ChannelSet ch = generate_channels(p, seed);
        const OracleResult o = exhaustive_mode_oracle(ch, p, spec.ao);
        AoConfig cfg = spec.ao;
        cfg.scheme = Scheme::Proposed;
        const AoResult a = alternating_optimize(ch, p, cfg);
        const double ratio = o.feasible && a.feasible() ? a.total_power / o.best_power : std::nan("");
        std::printf("%llu %.6e %.6e %.4f\n", static_cast<unsigned long long>(seed), o.feasible ? o.best_power : NAN,
                    a.feasible() ? a.total_power : NAN, ratio);
        csv << seed << ',' << (o.feasible ? o.best_power : NAN) << ',' << (a.feasible() ? a.total_power : NAN) << ','
            << ratio << ',' << (o.feasible ? bits(o.best_alpha) : "") << ',' << (a.feasible() ? bits(a.irs.alpha) : "")
            << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Secure downlink with a multifunctional active IRS: power minimization experiments"};
    app.require_subcommand(1);
    Common common;

    CLI::App* sweep = app.add_subcommand("sweep", "run a Monte Carlo sweep and write results.csv / records.json");
    add_common(sweep, common);

    CLI::App* verify = app.add_subcommand("verify", "run the oracle suites; exit code 2 on failure");
    add_common(verify, common);
    int trials = 1000, sinr_instances = 10;
    long samples = 200000;
    verify->add_option("--trials", trials, "leakage LMI trials");
    verify->add_option("--sinr-instances", sinr_instances, "SINR cross-check instances");
    verify->add_option("--samples", samples, "samples per SINR estimate");

    CLI::App* oracle = app.add_subcommand("oracle", "exhaustive mode search against the proposed scheme (M <= 10)");
    add_common(oracle, common);
    int count = 5;
    oracle->add_option("--count", count, "number of realizations");

    CLI11_PARSE(app, argc, argv);
    try {
        if (sweep->parsed()) return cmd_sweep(common);
        if (verify->parsed()) return cmd_verify(common, trials, sinr_instances, samples);
        if (oracle->parsed()) return cmd_oracle(common, count);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
