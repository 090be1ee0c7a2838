#pragma once

#include <Eigen/Dense>
#include <random>

#include "osmosis/discretize.hpp"
#include "osmosis/drift.hpp"
#include "osmosis/image.hpp"

namespace oracle {

// Dense osmosis operator assembled face by face from the finite-volume
// flux form: each face contributes (u_next - u_prev)/h^2 -+ d (u_next +
// u_prev)/(2h) symmetrically to its two cells. Scatter-structured on
// purpose; the library computes the same operator as a per-pixel gather.
Eigen::MatrixXd dense_operator(const osmosis::DriftField& d);

// Same assembly restricted to the faces of one axis, with that axis's
// diagonal contributions only.
Eigen::MatrixXd dense_directional(const osmosis::DriftField& d, osmosis::Axis axis);

Eigen::VectorXd to_vector(const osmosis::Image& u, int channel = 0);
osmosis::Image to_image(const Eigen::VectorXd& v, int width, int height,
                        double spacing = 1.0);

Eigen::VectorXd dense_explicit_step(const osmosis::DriftField& d,
                                    const Eigen::VectorXd& u, double tau);
Eigen::VectorXd dense_implicit_step(const osmosis::DriftField& d,
                                    const Eigen::VectorXd& u, double tau);
Eigen::VectorXd dense_aos_step(const osmosis::DriftField& d, const Eigen::VectorXd& u,
                               double tau);

osmosis::Image random_image(std::mt19937& rng, int width, int height, double lo,
                            double hi, int channels = 1);
osmosis::DriftField random_drift(std::mt19937& rng, int width, int height,
                                 double amplitude, double spacing = 1.0);

// Strictly positive low-frequency field, away from zero; suitable as a
// drift reference.
osmosis::Image smooth_positive(std::mt19937& rng, int width, int height);

double sup_norm(const osmosis::Image& img, int channel = 0);
double sup_diff(const osmosis::Image& a, const osmosis::Image& b);

}  // namespace oracle
