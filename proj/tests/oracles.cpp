#include "oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

namespace {

void scatter_face(Eigen::MatrixXd& a, int p, int q, double dval, double h) {
    const double diff = 1.0 / (h * h);
    const double drift = dval / (2.0 * h);
    a(p, q) += diff - drift;
    a(p, p) += -diff - drift;
    a(q, p) += diff + drift;
    a(q, q) += -diff + drift;
}

}  // namespace

Eigen::MatrixXd dense_operator(const osmosis::DriftField& d) {
    const int w = d.width();
    const int h = d.height();
    const double spacing = d.spacing();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(w * h, w * h);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i + 1 < w; ++i)
            scatter_face(a, j * w + i, j * w + i + 1, d.d1(i, j), spacing);
    for (int j = 0; j + 1 < h; ++j)
        for (int i = 0; i < w; ++i)
            scatter_face(a, j * w + i, (j + 1) * w + i, d.d2(i, j), spacing);
    return a;
}

Eigen::MatrixXd dense_directional(const osmosis::DriftField& d, osmosis::Axis axis) {
    const int w = d.width();
    const int h = d.height();
    const double spacing = d.spacing();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(w * h, w * h);
    if (axis == osmosis::Axis::horizontal) {
        for (int j = 0; j < h; ++j)
            for (int i = 0; i + 1 < w; ++i)
                scatter_face(a, j * w + i, j * w + i + 1, d.d1(i, j), spacing);
    } else {
        for (int j = 0; j + 1 < h; ++j)
            for (int i = 0; i < w; ++i)
                scatter_face(a, j * w + i, (j + 1) * w + i, d.d2(i, j), spacing);
    }
    return a;
}

Eigen::VectorXd to_vector(const osmosis::Image& u, int channel) {
    auto src = u.channel(channel);
    Eigen::VectorXd v(static_cast<Eigen::Index>(src.size()));
    for (std::size_t k = 0; k < src.size(); ++k) v[static_cast<Eigen::Index>(k)] = src[k];
    return v;
}

osmosis::Image to_image(const Eigen::VectorXd& v, int width, int height, double spacing) {
    std::vector<double> samples(static_cast<std::size_t>(width) * height);
    for (std::size_t k = 0; k < samples.size(); ++k)
        samples[k] = v[static_cast<Eigen::Index>(k)];
    osmosis::Image img = osmosis::Image::from_samples(width, height, 1, std::move(samples));
    img.set_spacing(spacing);
    return img;
}

Eigen::VectorXd dense_explicit_step(const osmosis::DriftField& d,
                                    const Eigen::VectorXd& u, double tau) {
    return u + tau * (dense_operator(d) * u);
}

Eigen::VectorXd dense_implicit_step(const osmosis::DriftField& d,
                                    const Eigen::VectorXd& u, double tau) {
    const Eigen::MatrixXd a = dense_operator(d);
    const Eigen::MatrixXd m =
        Eigen::MatrixXd::Identity(a.rows(), a.cols()) - tau * a;
    return m.partialPivLu().solve(u);
}

Eigen::VectorXd dense_aos_step(const osmosis::DriftField& d, const Eigen::VectorXd& u,
                               double tau) {
    const Eigen::MatrixXd identity =
        Eigen::MatrixXd::Identity(u.size(), u.size());
    const Eigen::MatrixXd m1 =
        identity - 2.0 * tau * dense_directional(d, osmosis::Axis::horizontal);
    const Eigen::MatrixXd m2 =
        identity - 2.0 * tau * dense_directional(d, osmosis::Axis::vertical);
    return 0.5 * (m1.partialPivLu().solve(u) + m2.partialPivLu().solve(u));
}

osmosis::Image random_image(std::mt19937& rng, int width, int height, double lo,
                            double hi, int channels) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> samples(static_cast<std::size_t>(width) * height * channels);
    for (double& v : samples) v = dist(rng);
    return osmosis::Image::from_samples(width, height, channels, std::move(samples));
}

osmosis::DriftField random_drift(std::mt19937& rng, int width, int height,
                                 double amplitude, double spacing) {
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    std::vector<double> d1(static_cast<std::size_t>(width - 1) * height);
    std::vector<double> d2(static_cast<std::size_t>(width) * (height - 1));
    for (double& v : d1) v = dist(rng);
    for (double& v : d2) v = dist(rng);
    return osmosis::DriftField::from_components(width, height, std::move(d1),
                                                std::move(d2), spacing);
}

osmosis::Image smooth_positive(std::mt19937& rng, int width, int height) {
    std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
    std::uniform_real_distribution<double> amp(0.1, 0.5);
    const double p1 = phase(rng), p2 = phase(rng), p3 = phase(rng);
    const double a1 = amp(rng), a2 = amp(rng), a3 = amp(rng);
    std::vector<double> samples(static_cast<std::size_t>(width) * height);
    for (int j = 0; j < height; ++j)
        for (int i = 0; i < width; ++i) {
            const double x = static_cast<double>(i) / std::max(1, width - 1);
            const double y = static_cast<double>(j) / std::max(1, height - 1);
            const double wave = a1 * std::sin(6.28 * x + p1) +
                                a2 * std::cos(6.28 * y + p2) +
                                a3 * std::sin(3.14 * (x + y) + p3);
            samples[static_cast<std::size_t>(j) * width + i] = 100.0 * std::exp(wave);
        }
    return osmosis::Image::from_samples(width, height, 1, std::move(samples));
}

double sup_norm(const osmosis::Image& img, int channel) {
    double best = 0.0;
    for (double v : img.channel(channel)) best = std::max(best, std::abs(v));
    return best;
}

double sup_diff(const osmosis::Image& a, const osmosis::Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("sup_diff: shape mismatch");
    double best = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        auto pa = a.channel(c);
        auto pb = b.channel(c);
        for (std::size_t k = 0; k < pa.size(); ++k)
            best = std::max(best, std::abs(pa[k] - pb[k]));
    }
    return best;
}

}  // namespace oracle
