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

#ifndef AIRS_SYSMODEL_HPP
#define AIRS_SYSMODEL_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace airs {

using cd = std::complex<double>;

// ---- units ----------------------------------------------------------------

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_linear(double db);
double linear_to_db(double lin);

// ---- parameters -----------------------------------------------------------

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// Per-link constants: BS-user, BS-Eve, BS-IRS, IRS-user, IRS-Eve.
struct LinkValues {
    double bu = 0.0;
    double be = 0.0;
    double bi = 0.0;
    double iu = 0.0;
    double ie = 0.0;
};

struct SystemParams {
    int n_tx = 4;
    int n_eve = 2;
    int n_irs = 12;
    int n_users = 2;

    Point2 bs{0.0, 0.0};
    Point2 irs{60.0, 20.0};
    Point2 eve{80.0, 20.0};
    std::vector<Point2> users{{100.0, 10.0}, {100.0, -10.0}};

    LinkValues pathloss_exponents{3.5, 3.5, 2.6, 2.6, 2.6};
    LinkValues rician_factors{0.0, 0.0, 3.0, 3.0, 3.0};

    double carrier_freq = 2.4e9;  // Hz
    double ref_distance = 1.0;    // m

    std::vector<double> noise_user{1e-13, 1e-13};  // W, per user
    double noise_irs = 1e-13;                       // W
    std::vector<double> gamma_min{2.5118864315095801, 2.5118864315095801};  // linear, per user
    std::vector<double> c_max{1.6, 1.6};            // bit/s/Hz, per user
    double p_irs_max = 0.01;                        // W

    std::uint64_t rng_seed = 1;

    // Free-space loss at ref_distance: (c / (4 pi f d0))^2.
    double reference_loss() const;
    double c_tol(int k) const;  // 2^{c_max} - 1

    // Resizes the per-user vectors to n_users, repeating the first entry.
    void broadcast_per_user();
    void set_gamma_min_db(double db);

    // Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

// ---- channels and designs -------------------------------------------------

// Vectors h_iu and h_bu are stored un-conjugated; the physical row channel
// is their conjugate transpose.
struct ChannelSet {
    Eigen::MatrixXcd g;                 // M x N_T
    std::vector<Eigen::VectorXcd> h_iu;  // K x (M)
    Eigen::MatrixXcd h_ie;              // N_E x M
    std::vector<Eigen::VectorXcd> h_bu;  // K x (N_T)
    Eigen::MatrixXcd h_be;              // N_E x N_T

    int n_tx() const { return static_cast<int>(g.cols()); }
    int n_irs() const { return static_cast<int>(g.rows()); }
    int n_eve() const { return static_cast<int>(h_be.rows()); }
    int n_users() const { return static_cast<int>(h_bu.size()); }
    void validate() const;
    // Channels of the first m IRS elements (common random numbers across M).
    ChannelSet first_elements(int m) const;
};

struct BsDesign {
    std::vector<Eigen::VectorXcd> w;
    Eigen::MatrixXcd z_b;

    static BsDesign zero(int n_tx, int n_users);
    void validate() const;
};

struct IrsDesign {
    Eigen::VectorXcd phi;   // phi_m = p_m exp(j theta_m)
    Eigen::VectorXd alpha;  // 1 = reflect, 0 = jam

    static IrsDesign zero(int m);
    int size() const { return static_cast<int>(phi.size()); }
    Eigen::VectorXcd u() const;  // u_m = alpha_m conj(phi_m)
    Eigen::MatrixXcd theta() const { return phi.asDiagonal(); }
    double power() const { return phi.squaredNorm(); }
    void validate(double p_irs_max) const;
};

struct EffectiveChannels {
    std::vector<Eigen::VectorXcd> h_eq;  // h_eq,k with h_eq,k^H = h_bu^H + h_iu^H A Theta G
    Eigen::MatrixXcd f_eq;               // H_BE + H_IE A Theta G
    Eigen::MatrixXcd q;                  // Eve interference covariance
    std::vector<double> mu;              // inter-user interference + AN + noise per user
};

// ---- operations -----------------------------------------------------------

// Rician channels with distance-dependent path loss; deterministic in seed.
ChannelSet generate_channels(const SystemParams& params, std::uint64_t seed);

// ULA steering vector, half-wavelength spacing along the x-axis.
Eigen::VectorXcd ula_steering(int n, double cos_angle);

// L0 (d/d0)^-eta.
double path_loss(const SystemParams& params, double distance, double exponent);

EffectiveChannels effective_channels(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs,
                                     const SystemParams& params);

// Equivalent BS channel of user k and Eve for a given IRS state.
Eigen::VectorXcd equivalent_user_channel(const ChannelSet& ch, const IrsDesign& irs, int k);
Eigen::MatrixXcd equivalent_eve_channel(const ChannelSet& ch, const IrsDesign& irs);

// IRS-originated interference at user k: jamming plus amplified IRS noise.
double irs_interference_at_user(const ChannelSet& ch, const IrsDesign& irs, const SystemParams& params, int k);
// IRS-originated covariance at Eve: H_IE (I-A) Theta Theta^H (I-A) H_IE^H + sigma_I^2 H_IE Theta Theta^H H_IE^H.
Eigen::MatrixXcd irs_covariance_at_eve(const ChannelSet& ch, const IrsDesign& irs, const SystemParams& params);

double user_sinr(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs, const SystemParams& params, int k);
double user_rate(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs, const SystemParams& params, int k);

class SingularQError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The four equivalent expressions of the Eve capacity bound, in bit/s/Hz.
struct EveCapacityForms {
    double det_form = 0.0;     // log2 det(I + Q^-1 F w w^H F^H)
    double scalar_form = 0.0;  // log2(1 + w^H F^H Q^-1 F w)
    double trace_form = 0.0;   // log2(1 + Tr(Q^-1 F w w^H F^H))
    double lambda_form = 0.0;  // log2(1 + lambda_max(Q^-1/2 F w w^H F^H Q^-1/2))
};

// Requires Q with lambda_min > 1e-12 lambda_max; throws SingularQError otherwise.
EveCapacityForms eve_capacity_forms(const Eigen::MatrixXcd& q, const Eigen::VectorXcd& fw);

// Eve capacity for user k. A rank-deficient Q is handled on its range: if
// F w_k has no component in the numerical null space of Q the capacity uses
// the pseudo-inverse, otherwise it is +inf. Throws SingularQError when Q = 0.
double eve_capacity(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs, const SystemParams& params,
                    int k);
double eve_capacity_from(const Eigen::MatrixXcd& q, const Eigen::VectorXcd& fw);

double secrecy_rate(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs, const SystemParams& params,
                    int k);

double total_power(const BsDesign& bs, const IrsDesign& irs);

struct FeasibilityReport {
    std::vector<double> c1;  // gamma_U,k - gamma_min,k
    std::vector<double> c2;  // C_max,k - C_E,k
    double c3 = 0.0;         // lambda_min(Z_B)
    double c4 = 0.0;         // -max_m min(alpha_m, 1 - alpha_m)
    double c5 = 0.0;         // P_I^max - ||Theta||_F^2
    bool q_singular = false;
    bool feasible = false;

    double worst() const;
};

FeasibilityReport check_feasibility(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs,
                                    const SystemParams& params, double tol);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Sample-level SINR estimate for user k from n_samples draws of the
// transmitted symbols, BS AN, IRS AN, IRS noise and user noise.
Estimate empirical_sinr(const ChannelSet& ch, const BsDesign& bs, const IrsDesign& irs, const SystemParams& params,
                        int k, long n_samples, std::uint64_t seed);

}  // namespace airs

#endif
