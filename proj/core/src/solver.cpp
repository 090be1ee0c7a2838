#include "osmosis/solver.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "osmosis/errors.hpp"
#include "osmosis/parallel.hpp"

namespace osmosis {

namespace {

std::atomic<long long> g_aos_factorizations{0};

void check_shapes(const DriftField& d, const Image& u) {
    if (u.channels() != 1)
        throw ValidationError("time steppers expect a single-channel image, got " +
                              std::to_string(u.channels()) + " channels");
    if (u.width() != d.width() || u.height() != d.height())
        throw ValidationError("image " + std::to_string(u.width()) + "x" +
                              std::to_string(u.height()) + " does not match drift grid " +
                              std::to_string(d.width()) + "x" + std::to_string(d.height()));
    if (u.spacing() != d.spacing())
        throw ValidationError("image and drift field disagree on grid spacing");
}

// dst = src + tau * A(src); tau = 0 gives a plain copy of A applied.
void stencil_step(const DriftField& d, const double* src, double* dst, double tau) {
    const int w = d.width();
    const int h = d.height();
    const double hs = d.spacing();
    const double inv_h2 = 1.0 / (hs * hs);
    const double inv_2h = 1.0 / (2.0 * hs);
    for (int j = 0; j < h; ++j) {
        const double* row = src + static_cast<std::size_t>(j) * w;
        double* orow = dst + static_cast<std::size_t>(j) * w;
        for (int i = 0; i < w; ++i) {
            const double c = row[i];
            double acc = 0.0;
            if (i + 1 < w) {
                const double g = d.d1(i, j);
                acc += (row[i + 1] - c) * inv_h2 - g * (row[i + 1] + c) * inv_2h;
            }
            if (i > 0) {
                const double g = d.d1(i - 1, j);
                acc += (row[i - 1] - c) * inv_h2 + g * (row[i - 1] + c) * inv_2h;
            }
            if (j + 1 < h) {
                const double g = d.d2(i, j);
                acc += (row[i + w] - c) * inv_h2 - g * (row[i + w] + c) * inv_2h;
            }
            if (j > 0) {
                const double g = d.d2(i, j - 1);
                acc += (row[i - w] - c) * inv_h2 + g * (row[i - w] + c) * inv_2h;
            }
            orow[i] = c + tau * acc;
        }
    }
}

// dst = (I - tau*A) src, the implicit system matrix applied matrix-free.
void shifted_apply(const DriftField& d, double tau, const double* src, double* dst) {
    stencil_step(d, src, dst, -tau);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct BicgstabOutcome {
    int iterations = 0;
    double residual = 0.0;  // relative
};

// Jacobi-preconditioned BiCGStab for (I - tau*A) x = b. The system is
// penta-diagonal and non-symmetric; the operator is applied matrix-free.
// x enters as the initial guess. Residuals are re-verified against the
// true residual before convergence is declared.
BicgstabOutcome bicgstab_shifted(const DriftField& d, double tau,
                                 const std::vector<double>& b, std::vector<double>& x,
                                 double tol, int max_iter) {
    const std::size_t n = b.size();
    const double norm_b = norm2(b);
    if (norm_b == 0.0) {
        x.assign(n, 0.0);
        return {0, 0.0};
    }
    const double target = tol * norm_b;

    // Jacobi diagonal of (I - tau*A).
    std::vector<double> inv_m(n);
    {
        Image diag = operator_diagonal(d);
        auto dd = diag.channel(0);
        for (std::size_t k = 0; k < n; ++k) {
            const double m = 1.0 - tau * dd[k];
            inv_m[k] = std::abs(m) > 1e-14 ? 1.0 / m : 1.0;
        }
    }

    std::vector<double> r(n), rt(n), p(n), v(n), s(n), t(n), phat(n), shat(n);
    shifted_apply(d, tau, x.data(), r.data());
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - r[k];
    rt = r;

    double res = norm2(r);
    if (res <= target) return {0, res / norm_b};

    double rho = 1.0, alpha = 1.0, omega = 1.0;
    bool first = true;

    auto true_residual = [&]() {
        shifted_apply(d, tau, x.data(), t.data());
        for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - t[k];
        return norm2(r);
    };

    int it = 0;
    while (it < max_iter) {
        ++it;
        const double rho_next = dot(rt, r);
        if (std::abs(rho_next) < 1e-300 * norm_b * norm_b) {
            // Serious breakdown: restart with the current residual.
            rt = r;
            rho = dot(r, r);
            if (rho < 1e-300) {
                res = true_residual();
                if (res <= target) return {it, res / norm_b};
                break;
            }
            p = r;
            first = false;
        } else if (first) {
            p = r;
            rho = rho_next;
            first = false;
        } else {
            const double beta = (rho_next / rho) * (alpha / omega);
            for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * (p[k] - omega * v[k]);
            rho = rho_next;
        }

        for (std::size_t k = 0; k < n; ++k) phat[k] = p[k] * inv_m[k];
        shifted_apply(d, tau, phat.data(), v.data());
        const double gamma = dot(rt, v);
        if (std::abs(gamma) < 1e-300) {
            rt = r;
            first = true;
            continue;
        }
        alpha = rho / gamma;
        for (std::size_t k = 0; k < n; ++k) s[k] = r[k] - alpha * v[k];
        if (norm2(s) <= target) {
            for (std::size_t k = 0; k < n; ++k) x[k] += alpha * phat[k];
            res = true_residual();
            if (res <= target) return {it, res / norm_b};
            continue;
        }

        for (std::size_t k = 0; k < n; ++k) shat[k] = s[k] * inv_m[k];
        shifted_apply(d, tau, shat.data(), t.data());
        const double tt = dot(t, t);
        omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
        for (std::size_t k = 0; k < n; ++k) x[k] += alpha * phat[k] + omega * shat[k];
        for (std::size_t k = 0; k < n; ++k) r[k] = s[k] - omega * t[k];

        res = norm2(r);
        if (res <= target) {
            res = true_residual();
            if (res <= target) return {it, res / norm_b};
        }
        if (omega == 0.0) {
            rt = r;
            first = true;
        }
    }
    throw ConvergenceError("implicit step failed to reach relative residual " +
                               std::to_string(tol) + " within " + std::to_string(max_iter) +
                               " iterations (reached " + std::to_string(res / norm_b) + ")",
                           res / norm_b, it);
}

void factorize_lines(const DirectionalSystem& sys, double tau, FactoredLines& out) {
    const int w = sys.width;
    const int h = sys.height;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    out.axis = sys.axis;
    out.width = w;
    out.height = h;
    out.lower.assign(n, 0.0);
    out.inv_diag.assign(n, 0.0);
    out.upper.assign(n, 0.0);

    const double two_tau = 2.0 * tau;
    std::vector<double> shifted_diag(n), shifted_lower(n);
    for (std::size_t k = 0; k < n; ++k) {
        shifted_diag[k] = 1.0 - two_tau * sys.diag[k];
        shifted_lower[k] = -two_tau * sys.lower[k];
        out.upper[k] = -two_tau * sys.upper[k];
    }

    const char* name = sys.axis == Axis::horizontal ? "row" : "column";
    auto broke = [&](int line) {
        throw Error(std::string("tridiagonal factorisation of (I - 2 tau A_n) broke down on ") +
                    name + " " + std::to_string(line));
    };

    if (sys.axis == Axis::horizontal) {
        for (int j = 0; j < h; ++j) {
            const std::size_t base = static_cast<std::size_t>(j) * w;
            double piv = shifted_diag[base];
            if (std::abs(piv) < 1e-300) broke(j);
            out.inv_diag[base] = 1.0 / piv;
            for (int i = 1; i < w; ++i) {
                const std::size_t p = base + i;
                const double l = shifted_lower[p] * out.inv_diag[p - 1];
                out.lower[p] = l;
                piv = shifted_diag[p] - l * out.upper[p - 1];
                if (std::abs(piv) < 1e-300) broke(j);
                out.inv_diag[p] = 1.0 / piv;
            }
        }
    } else {
        for (int i = 0; i < w; ++i) {
            const double piv = shifted_diag[i];
            if (std::abs(piv) < 1e-300) broke(i);
            out.inv_diag[i] = 1.0 / piv;
        }
        for (int j = 1; j < h; ++j) {
            const std::size_t p0 = static_cast<std::size_t>(j) * w;
            for (int i = 0; i < w; ++i) {
                const std::size_t p = p0 + i;
                const double l = shifted_lower[p] * out.inv_diag[p - w];
                out.lower[p] = l;
                const double piv = shifted_diag[p] - l * out.upper[p - w];
                if (std::abs(piv) < 1e-300) broke(i);
                out.inv_diag[p] = 1.0 / piv;
            }
        }
    }
}

// Nonnegative off-diagonals of A_n make (I - 2 tau A_n) an M-matrix:
// its off-diagonals are then nonpositive while every column still sums
// to exactly 1 (zero column sums of A_n), so the transpose is strictly
// diagonally dominant and the resolvent preserves nonnegativity.
bool positivity_of(const DirectionalSystem& sys) {
    for (std::size_t k = 0; k < sys.diag.size(); ++k)
        if (sys.lower[k] < 0.0 || sys.upper[k] < 0.0) return false;
    return true;
}

void solve_horizontal(const FactoredLines& f, const double* src, double* dst,
                      int row_begin, int row_end) {
    const int w = f.width;
    for (int j = row_begin; j < row_end; ++j) {
        const std::size_t base = static_cast<std::size_t>(j) * w;
        dst[base] = src[base];
        for (int i = 1; i < w; ++i)
            dst[base + i] = src[base + i] - f.lower[base + i] * dst[base + i - 1];
        dst[base + w - 1] *= f.inv_diag[base + w - 1];
        for (int i = w - 2; i >= 0; --i)
            dst[base + i] = (dst[base + i] - f.upper[base + i] * dst[base + i + 1]) *
                            f.inv_diag[base + i];
    }
}

// All columns of [col_begin, col_end) march together so the inner loop
// stays contiguous in memory.
void solve_vertical(const FactoredLines& f, const double* src, double* dst,
                    int col_begin, int col_end) {
    const int w = f.width;
    const int h = f.height;
    for (int i = col_begin; i < col_end; ++i) dst[i] = src[i];
    for (int j = 1; j < h; ++j) {
        const std::size_t p0 = static_cast<std::size_t>(j) * w;
        for (int i = col_begin; i < col_end; ++i)
            dst[p0 + i] = src[p0 + i] - f.lower[p0 + i] * dst[p0 + i - w];
    }
    const std::size_t last = static_cast<std::size_t>(h - 1) * w;
    for (int i = col_begin; i < col_end; ++i) dst[last + i] *= f.inv_diag[last + i];
    for (int j = h - 2; j >= 0; --j) {
        const std::size_t p0 = static_cast<std::size_t>(j) * w;
        for (int i = col_begin; i < col_end; ++i)
            dst[p0 + i] = (dst[p0 + i] - f.upper[p0 + i] * dst[p0 + i + w]) *
                          f.inv_diag[p0 + i];
    }
}

long long step_count(double time_horizon, double tau) {
    const double ratio = time_horizon / tau;
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) < 1e-9 * std::max(1.0, std::abs(ratio)) && nearest >= 1.0)
        return static_cast<long long>(nearest);
    return static_cast<long long>(std::ceil(ratio));
}

Image evolve_channel(const Image& f, const DriftField& d, const SolverConfig& config,
                     const Observer& observer, int channel, int threads) {
    check_shapes(d, f);
    const long long steps = step_count(config.time_horizon, config.tau);

    double tau_max = std::numeric_limits<double>::infinity();
    DirectionalFactors factors;
    if (config.scheme == Scheme::explicit_euler) {
        tau_max = check_explicit_bound(d);
        if (config.tau > tau_max)
            throw StepSizeError("explicit scheme refused: tau=" + std::to_string(config.tau) +
                                    " exceeds the positivity bound tau_max=" +
                                    std::to_string(tau_max),
                                tau_max);
    } else if (config.scheme == Scheme::aos) {
        factors = factorize_aos(d, config.tau);
    }

    Image u = f;
    Image next(f.width(), f.height(), 1);
    next.set_spacing(f.spacing());
    for (long long k = 1; k <= steps; ++k) {
        switch (config.scheme) {
            case Scheme::explicit_euler:
                stencil_step(d, u.channel(0).data(), next.channel(0).data(), config.tau);
                break;
            case Scheme::implicit_euler: {
                std::vector<double> x(u.channel(0).begin(), u.channel(0).end());
                std::vector<double> b = x;
                bicgstab_shifted(d, config.tau, b, x, config.tolerance,
                                 config.max_iterations);
                std::copy(x.begin(), x.end(), next.channel(0).begin());
                break;
            }
            case Scheme::aos:
                next = step_aos(u, factors, threads);
                break;
        }
        if (observer) {
            auto prev_data = u.channel(0);
            auto next_data = next.channel(0);
            double sum = 0.0, sup = 0.0;
            for (std::size_t q = 0; q < next_data.size(); ++q) {
                sum += next_data[q];
                sup = std::max(sup, std::abs(next_data[q] - prev_data[q]));
            }
            StepInfo info;
            info.step = k;
            info.channel = channel;
            info.mean = sum / static_cast<double>(next_data.size());
            info.sup_change = sup;
            if (!observer(info)) {
                std::swap(u, next);
                break;
            }
        }
        std::swap(u, next);
    }
    u.set_bit_depth(f.bit_depth());
    return u;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ValidationError("tau must be positive and finite");
    if (!std::isfinite(time_horizon) || time_horizon < tau)
        throw ValidationError("time horizon T must satisfy T >= tau");
    if (!(tolerance > 0.0))
        throw ValidationError("linear-solver tolerance must be positive");
    if (max_iterations < 1)
        throw ValidationError("max iterations must be at least 1");
}

double check_explicit_bound(const DriftField& d) {
    Image diag = operator_diagonal(d);
    double worst = 0.0;
    for (double v : diag.channel(0)) worst = std::max(worst, std::abs(v));
    if (worst == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / worst;
}

Image step_explicit(const Image& u, const DriftField& d, double tau) {
    check_shapes(d, u);
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ValidationError("tau must be positive and finite");
    const double tau_max = check_explicit_bound(d);
    if (tau > tau_max)
        throw StepSizeError("explicit step refused: tau=" + std::to_string(tau) +
                                " exceeds the positivity bound tau_max=" + std::to_string(tau_max),
                            tau_max);
    Image out(u.width(), u.height(), 1);
    out.set_spacing(u.spacing());
    out.set_bit_depth(u.bit_depth());
    stencil_step(d, u.channel(0).data(), out.channel(0).data(), tau);
    return out;
}

Image step_implicit(const Image& u, const DriftField& d, double tau,
                    double tolerance, int max_iterations) {
    check_shapes(d, u);
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ValidationError("tau must be positive and finite");
    if (!(tolerance > 0.0))
        throw ValidationError("tolerance must be positive");
    std::vector<double> x(u.channel(0).begin(), u.channel(0).end());
    std::vector<double> b = x;
    bicgstab_shifted(d, tau, b, x, tolerance, max_iterations);
    Image out(u.width(), u.height(), 1);
    out.set_spacing(u.spacing());
    out.set_bit_depth(u.bit_depth());
    std::copy(x.begin(), x.end(), out.channel(0).begin());
    return out;
}

DirectionalFactors factorize_aos(const DriftField& d, double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ValidationError("tau must be positive and finite");
    const DirectionalSystem a1 = assemble_directional(d, Axis::horizontal);
    const DirectionalSystem a2 = assemble_directional(d, Axis::vertical);
    DirectionalFactors factors;
    factors.tau = tau;
    factorize_lines(a1, tau, factors.horizontal);
    factorize_lines(a2, tau, factors.vertical);
    factors.positivity_guaranteed = positivity_of(a1) && positivity_of(a2);
    g_aos_factorizations.fetch_add(1, std::memory_order_relaxed);
    return factors;
}

Image step_aos(const Image& u, const DirectionalFactors& factors, int threads) {
    if (u.channels() != 1)
        throw ValidationError("step_aos expects a single-channel image");
    if (u.width() != factors.horizontal.width || u.height() != factors.horizontal.height)
        throw ValidationError("image " + std::to_string(u.width()) + "x" +
                              std::to_string(u.height()) + " does not match factor grid " +
                              std::to_string(factors.horizontal.width) + "x" +
                              std::to_string(factors.horizontal.height));

    const int w = u.width();
    const int h = u.height();
    const double* src = u.channel(0).data();

    Image out(w, h, 1);
    out.set_spacing(u.spacing());
    out.set_bit_depth(u.bit_depth());
    std::vector<double> from_rows(static_cast<std::size_t>(w) * h);

    parallel_for(0, h, threads, [&](int begin, int end) {
        solve_horizontal(factors.horizontal, src, from_rows.data(), begin, end);
    });
    double* from_cols = out.channel(0).data();
    parallel_for(0, w, threads, [&](int begin, int end) {
        solve_vertical(factors.vertical, src, from_cols, begin, end);
    });

    double* dst = out.channel(0).data();
    for (std::size_t k = 0; k < from_rows.size(); ++k)
        dst[k] = 0.5 * (from_rows[k] + dst[k]);
    return out;
}

Image evolve(const Image& f, const DriftField& d, const SolverConfig& config,
             const Observer& observer, int threads) {
    config.validate();
    return evolve_channel(f, d, config, observer, 0, threads);
}

Image evolve(const Image& f, const std::vector<DriftField>& drifts,
             const SolverConfig& config, const Observer& observer, int threads) {
    config.validate();
    if (static_cast<int>(drifts.size()) != f.channels())
        throw ValidationError("need one drift field per channel: got " +
                              std::to_string(drifts.size()) + " fields for " +
                              std::to_string(f.channels()) + " channels");
    if (f.channels() == 1) return evolve_channel(f, drifts[0], config, observer, 0, threads);

    Image out(f.width(), f.height(), f.channels());
    out.set_spacing(f.spacing());
    out.set_bit_depth(f.bit_depth());
    parallel_for(0, f.channels(), threads, [&](int begin, int end) {
        for (int c = begin; c < end; ++c) {
            Image result = evolve_channel(extract_channel(f, c), drifts[c], config,
                                          observer, c, 1);
            insert_channel(out, c, result);
        }
    });
    return out;
}

long long aos_factorization_count() {
    return g_aos_factorizations.load(std::memory_order_relaxed);
}

}  // namespace osmosis
