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

#include "airs/sysmodel.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace airs {

namespace {

struct Link {
    Point2 from;
    Point2 to;
    int n_from;
    int n_to;
    double exponent;
    double rician;
};

double distance(Point2 a, Point2 b) { return std::hypot(b.x - a.x, b.y - a.y); }

// Direction cosine of b as seen from a, relative to the array axis (x).
double direction_cos(Point2 a, Point2 b) { return (b.x - a.x) / distance(a, b); }

// n_to x n_from channel matrix of one link.
Eigen::MatrixXcd draw_link(const SystemParams& p, const Link& l, std::mt19937_64& rng) {
    const double d = distance(l.from, l.to);
    if (!(d > 0.0)) throw std::invalid_argument("generate_channels: zero distance between nodes");
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    Eigen::MatrixXcd nlos(l.n_to, l.n_from);
    for (int j = 0; j < l.n_from; ++j)
        for (int i = 0; i < l.n_to; ++i) nlos(i, j) = cd(nd(rng), nd(rng));
    const Eigen::VectorXcd a_to = ula_steering(l.n_to, direction_cos(l.to, l.from));
    const Eigen::VectorXcd a_from = ula_steering(l.n_from, direction_cos(l.from, l.to));
    const Eigen::MatrixXcd los = a_to * a_from.adjoint();
    const double b = l.rician;
    return std::sqrt(path_loss(p, d, l.exponent)) *
           (std::sqrt(b / (1.0 + b)) * los + std::sqrt(1.0 / (1.0 + b)) * nlos);
}

}  // namespace

Eigen::VectorXcd ula_steering(int n, double cos_angle) {
    Eigen::VectorXcd a(n);
    for (int i = 0; i < n; ++i) a(i) = std::polar(1.0, std::numbers::pi * i * cos_angle);
    return a;
}

double path_loss(const SystemParams& params, double distance, double exponent) {
    return params.reference_loss() * std::pow(distance / params.ref_distance, -exponent);
}

ChannelSet ChannelSet::first_elements(int m) const {
    if (m < 1 || m > n_irs()) throw std::invalid_argument("first_elements: m outside [1, n_irs]");
    ChannelSet out = *this;
    out.g = g.topRows(m);
    for (auto& h : out.h_iu) h = h.head(m).eval();
    out.h_ie = h_ie.leftCols(m);
    return out;
}

ChannelSet generate_channels(const SystemParams& p, std::uint64_t seed) {
    p.validate();
    std::mt19937_64 rng(seed);
    const auto& e = p.pathloss_exponents;
    const auto& r = p.rician_factors;
    ChannelSet ch;
    ch.g = draw_link(p, {p.bs, p.irs, p.n_tx, p.n_irs, e.bi, r.bi}, rng);
    for (int k = 0; k < p.n_users; ++k) {
        // Row channel IRS -> user is h_iu^H; store its conjugate transpose.
        const Eigen::MatrixXcd row = draw_link(p, {p.irs, p.users[k], p.n_irs, 1, e.iu, r.iu}, rng);
        ch.h_iu.push_back(row.adjoint());
    }
    ch.h_ie = draw_link(p, {p.irs, p.eve, p.n_irs, p.n_eve, e.ie, r.ie}, rng);
    for (int k = 0; k < p.n_users; ++k) {
        const Eigen::MatrixXcd row = draw_link(p, {p.bs, p.users[k], p.n_tx, 1, e.bu, r.bu}, rng);
        ch.h_bu.push_back(row.adjoint());
    }
    ch.h_be = draw_link(p, {p.bs, p.eve, p.n_tx, p.n_eve, e.be, r.be}, rng);
    return ch;
}

}  // namespace airs
