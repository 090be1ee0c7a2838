#ifndef OSMOSIS_SOLVER_HPP
#define OSMOSIS_SOLVER_HPP

#include <functional>
#include <vector>

#include "osmosis/discretize.hpp"
#include "osmosis/drift.hpp"
#include "osmosis/image.hpp"

namespace osmosis {

enum class Scheme { explicit_euler, implicit_euler, aos };

struct SolverConfig {
    Scheme scheme = Scheme::aos;
    double tau = 1e3;            // time step
    double time_horizon = 1e5;   // final time T; step count is ceil(T / tau)
    double tolerance = 1e-10;    // implicit linear-solver relative residual
    int max_iterations = 10000;  // implicit linear-solver iteration cap

    void validate() const;
};

/// Tridiagonal LU factors of the shifted block (I - 2*tau*A_n), one
/// factorisation per grid line, in image layout. upper belongs to the
/// shifted matrix; lower holds elimination multipliers and inv_diag the
/// reciprocal pivots, so each line solve is two sweeps with no division.
struct FactoredLines {
    Axis axis = Axis::horizontal;
    int width = 0;
    int height = 0;
    std::vector<double> lower;
    std::vector<double> inv_diag;
    std::vector<double> upper;
};

/// Factorisations for both directions, reusable across every step of an
/// evolution because the drift and tau stay fixed.
struct DirectionalFactors {
    FactoredLines horizontal;
    FactoredLines vertical;
    double tau = 0.0;
    /// True when both shifted blocks have nonpositive off-diagonals
    /// (faces satisfy |d| <= 2/h); their columns then sum to 1, making
    /// each block an M-matrix, so the averaged resolvents map
    /// nonnegative images to nonnegative images for any tau.
    bool positivity_guaranteed = false;
};

/// Largest time step keeping every stencil weight of (I + tau*A)
/// nonnegative wherever the off-diagonal weights are nonnegative:
/// 1 / max |diag(A)|. For zero drift this is the classic h^2/4 bound.
double check_explicit_bound(const DriftField& d);

/// Forward Euler step u + tau*A(u). Refuses tau above the explicit
/// bound; the StepSizeError carries the admissible maximum.
Image step_explicit(const Image& u, const DriftField& d, double tau);

/// Backward Euler step: solves (I - tau*A) u_next = u matrix-free with
/// Jacobi-preconditioned BiCGStab to the given relative residual.
/// Throws ConvergenceError (carrying the last residual) on failure.
Image step_implicit(const Image& u, const DriftField& d, double tau,
                    double tolerance = 1e-10, int max_iterations = 10000);

/// Builds the per-line LU factors of (I - 2*tau*A_1) and (I - 2*tau*A_2).
DirectionalFactors factorize_aos(const DriftField& d, double tau);

/// Additive operator splitting step: the average of the two directional
/// resolvents applied to u, each realised by per-line substitution
/// sweeps. Unconditionally stable, first order in time.
Image step_aos(const Image& u, const DirectionalFactors& factors, int threads = 1);

/// Per-step report handed to the observer. sup_change is the sup norm of
/// the update u_next - u_prev.
struct StepInfo {
    long long step = 0;
    int channel = 0;
    double mean = 0.0;
    double sup_change = 0.0;
};

/// Return false to stop the evolution early (off by default: the model
/// runs to the configured horizon like the reference experiments).
using Observer = std::function<bool(const StepInfo&)>;

/// Evolves a single channel from f for ceil(T/tau) steps of the selected
/// scheme. AOS factorises once and reuses the factors every step.
Image evolve(const Image& f, const DriftField& d, const SolverConfig& config,
             const Observer& observer = {}, int threads = 1);

/// Multi-channel evolution with one drift field per channel; channels
/// are independent and run concurrently when threads > 1 (the observer
/// must then be thread-safe).
Image evolve(const Image& f, const std::vector<DriftField>& drifts,
             const SolverConfig& config, const Observer& observer = {},
             int threads = 1);

/// Running count of AOS factorisations performed by this process; lets
/// callers verify factors are reused rather than rebuilt per step.
long long aos_factorization_count();

}  // namespace osmosis

#endif  // OSMOSIS_SOLVER_HPP
