#pragma once

#include <span>
#include <string>
#include <vector>

#include "quakeinv/mcmc.hpp"
#include "quakeinv/obsmodel.hpp"

namespace quakeinv::sensitivity {

/// One coordinate of the flattened observation-parameter vector theta.
/// Ordering: observations in list order; within one observation,
/// normal = (mean, std), skew_normal = (mean, std, a), chi = (mu, sigma, dof).
struct ObsParamEntry {
    int obs_idx;
    std::string gauge;
    obsmodel::ObsKind kind;
    obsmodel::ObsFamily family;
    std::string param;
    double value;
};

struct ObsParamVector {
    std::vector<ObsParamEntry> entries;
    static ObsParamVector from_observations(const std::vector<obsmodel::BoundObservation>& obs);
    int dim() const { return static_cast<int>(entries.size()); }
};

/// Partial derivatives of the negative log density Phi with respect to the
/// distribution parameters, evaluated at an observed value in the support
/// interior (DomainError at or beyond the boundary).
std::vector<double> score(const obsmodel::ObsDist& d, double value);

enum class FimMode { absolute, relative };

/// Dense symmetric observation-parameter Fisher information matrix.
struct FIMatrix {
    int dim = 0;
    FimMode mode = FimMode::absolute;
    std::vector<double> m;  // row-major dim x dim
    long samples_used = 0;
    long samples_excluded = 0;

    double at(int i, int j) const { return m[static_cast<std::size_t>(i) * dim + j]; }
    double& at(int i, int j) { return m[static_cast<std::size_t>(i) * dim + j]; }
};

/// Empirical covariance of the concatenated score vectors over the store's
/// posterior set. Relative mode scales score component i by theta_i (the
/// derivative with respect to a relative parameter change). Samples whose
/// forward value leaves an observation's support are excluded and counted.
FIMatrix fim(const mcmc::SampleStore& store, const std::vector<obsmodel::BoundObservation>& obs,
             FimMode mode);

/// Quadratic relative-entropy estimate 0.5 * v' I v for a perturbation of
/// theta in direction v.
double kl_quadratic(const FIMatrix& I, std::span<const double> v);

/// Leading eigenvector by power iteration (residual 1e-10), sign fixed so
/// the largest-magnitude component is positive. `degenerate` flags an
/// eigenvalue multiplicity at the top within tolerance.
struct WorstDirection {
    std::vector<double> direction;
    double eigenvalue = 0.0;
    bool degenerate = false;
};

WorstDirection worst_direction(const FIMatrix& I);

/// Bounds on E_Q[f] - E_P[f] over all Q with relative entropy R from P,
/// traced parametrically in the tilt parameter c and interpolated onto an
/// R grid. The uniform bounds are the sample extremes of f - mean(f).
struct BoundCurve {
    std::vector<double> R;
    std::vector<double> lower, upper;
    double uniform_lower = 0.0, uniform_upper = 0.0;
    bool degenerate = false;
};

BoundCurve expectation_bounds(std::span<const double> f_samples, std::span<const double> r_grid);

/// sqrt(Var(f)) * sqrt(v' I v): a bound on the derivative of E[f] with
/// respect to perturbing the observation parameters along v.
double sensitivity_bound(std::span<const double> f_samples, std::span<const double> v,
                         const FIMatrix& I);

}  // namespace quakeinv::sensitivity
