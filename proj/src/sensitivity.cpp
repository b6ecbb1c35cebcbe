#include "quakeinv/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "quakeinv/errors.hpp"
#include "quakeinv/special.hpp"

namespace quakeinv::sensitivity {

using obsmodel::ObsDist;
using obsmodel::ObsFamily;

ObsParamVector ObsParamVector::from_observations(
    const std::vector<obsmodel::BoundObservation>& obs) {
    ObsParamVector v;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const auto& o = obs[i];
        const int idx = static_cast<int>(i);
        switch (o.dist.family) {
            case ObsFamily::normal:
                v.entries.push_back({idx, o.gauge, o.kind, o.dist.family, "mean", o.dist.p1});
                v.entries.push_back({idx, o.gauge, o.kind, o.dist.family, "std", o.dist.p2});
                break;
            case ObsFamily::skew_normal:
                v.entries.push_back({idx, o.gauge, o.kind, o.dist.family, "mean", o.dist.p1});
                v.entries.push_back({idx, o.gauge, o.kind, o.dist.family, "std", o.dist.p2});
                v.entries.push_back({idx, o.gauge, o.kind, o.dist.family, "a", o.dist.p3});
                break;
            case ObsFamily::chi:
                v.entries.push_back({idx, o.gauge, o.kind, o.dist.family, "mu", o.dist.p1});
                v.entries.push_back({idx, o.gauge, o.kind, o.dist.family, "sigma", o.dist.p2});
                v.entries.push_back({idx, o.gauge, o.kind, o.dist.family, "dof", o.dist.p3});
                break;
        }
    }
    return v;
}

std::vector<double> score(const ObsDist& d, double value) {
    switch (d.family) {
        case ObsFamily::normal: {
            const double mu = d.p1, sigma = d.p2;
            const double r = value - mu;
            return {-r / (sigma * sigma), -r * r / (sigma * sigma * sigma) + 1.0 / sigma};
        }
        case ObsFamily::skew_normal: {
            const double mu = d.p1, sigma = d.p2, a = d.p3;
            const double xt = (value - mu) / sigma;
            const double z = a * xt / std::sqrt(2.0);
            // e^{-z^2} / (1 + erf z), evaluated in log space for deep tails
            const double ratio = std::exp(-z * z - special::log1p_erf(z));
            const double sq2pi = std::sqrt(2.0 / M_PI);
            const double d_mu = -(xt - sq2pi * a * ratio) / sigma;
            const double d_sigma = (1.0 - xt * xt + sq2pi * a * xt * ratio) / sigma;
            const double d_a = -sq2pi * xt * ratio;
            return {d_mu, d_sigma, d_a};
        }
        case ObsFamily::chi: {
            const double mu = d.p1, sigma = d.p2, k = d.p3;
            if (!(value > mu)) {
                std::ostringstream os;
                os << "chi score undefined at value " << value << " <= location " << mu;
                throw DomainError(os.str());
            }
            const double xt = (value - mu) / sigma;
            const double d_mu = -(xt - (k - 1.0) / xt) / sigma;
            const double d_sigma = -(xt * xt - k) / sigma;
            const double d_k = 0.5 * special::ln_2 + 0.5 * special::digamma(0.5 * k) -
                               std::log(xt);
            return {d_mu, d_sigma, d_k};
        }
    }
    return {};
}

FIMatrix fim(const mcmc::SampleStore& store, const std::vector<obsmodel::BoundObservation>& obs,
             FimMode mode) {
    const ObsParamVector theta = ObsParamVector::from_observations(obs);
    const int dim = theta.dim();
    const auto post = store.posterior_set();
    if (post.empty()) throw ConfigError("fim: posterior set is empty");

    FIMatrix I;
    I.dim = dim;
    I.mode = mode;
    I.m.assign(static_cast<std::size_t>(dim) * dim, 0.0);

    // Welford covariance over the per-sample concatenated scores
    std::vector<double> mean(dim, 0.0), delta(dim), s(dim);
    std::vector<double> cov(static_cast<std::size_t>(dim) * dim, 0.0);
    long n = 0;
    for (const auto* rec : post) {
        bool in_support = true;
        int at = 0;
        for (const auto& o : obs) {
            const double value = obsmodel::observable_value(rec->forward, o);
            if (!std::isfinite(value) ||
                (o.dist.family == ObsFamily::chi && value <= o.dist.p1)) {
                in_support = false;
                break;
            }
            const auto sc = score(o.dist, value);
            for (double x : sc) s[at++] = x;
        }
        if (!in_support) {
            ++I.samples_excluded;
            continue;
        }
        if (mode == FimMode::relative)
            for (int i = 0; i < dim; ++i) s[i] *= theta.entries[i].value;
        ++n;
        for (int i = 0; i < dim; ++i) delta[i] = s[i] - mean[i];
        for (int i = 0; i < dim; ++i) mean[i] += delta[i] / n;
        for (int i = 0; i < dim; ++i) {
            const double d2i = s[i] - mean[i];
            double* row = cov.data() + static_cast<std::size_t>(i) * dim;
            for (int j = 0; j <= i; ++j) row[j] += delta[j] * d2i;
        }
    }
    if (n < 1) throw ConfigError("fim: every posterior sample fell outside an observation support");
    I.samples_used = n;

    for (int i = 0; i < dim; ++i)
        for (int j = 0; j <= i; ++j) {
            // lower triangle accumulated with asymmetric deltas; symmetrize
            const double cij = cov[static_cast<std::size_t>(i) * dim + j] / n;
            I.at(i, j) = cij;
            I.at(j, i) = cij;
        }
    return I;
}

double kl_quadratic(const FIMatrix& I, std::span<const double> v) {
    if (static_cast<int>(v.size()) != I.dim)
        throw ConfigError("kl_quadratic: direction dimension mismatch");
    double q = 0.0;
    for (int i = 0; i < I.dim; ++i) {
        double row = 0.0;
        for (int j = 0; j < I.dim; ++j) row += I.at(i, j) * v[j];
        q += v[i] * row;
    }
    return 0.5 * q;
}

namespace {

std::vector<double> mat_vec(const FIMatrix& I, const std::vector<double>& v) {
    std::vector<double> out(I.dim, 0.0);
    for (int i = 0; i < I.dim; ++i) {
        double acc = 0.0;
        for (int j = 0; j < I.dim; ++j) acc += I.at(i, j) * v[j];
        out[i] = acc;
    }
    return out;
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Power iteration for the dominant eigenpair of a PSD matrix.
std::pair<std::vector<double>, double> power_iterate(const FIMatrix& I,
                                                     std::vector<double> v, double tol) {
    const double nv = norm(v);
    for (auto& x : v) x /= nv;
    double lambda = 0.0;
    for (int it = 0; it < 100000; ++it) {
        std::vector<double> w = mat_vec(I, v);
        lambda = 0.0;
        for (int i = 0; i < I.dim; ++i) lambda += v[i] * w[i];
        double resid = 0.0;
        for (int i = 0; i < I.dim; ++i) {
            const double r = w[i] - lambda * v[i];
            resid += r * r;
        }
        if (std::sqrt(resid) <= tol * std::max(1.0, std::abs(lambda))) break;
        const double nw = norm(w);
        if (nw == 0.0) break;  // v is in the null space; lambda = 0
        for (int i = 0; i < I.dim; ++i) v[i] = w[i] / nw;
    }
    return {std::move(v), lambda};
}

}  // namespace

WorstDirection worst_direction(const FIMatrix& I) {
    if (I.dim < 1) throw ConfigError("worst_direction: empty matrix");
    WorstDirection out;
    if (I.dim == 1) {
        out.direction = {1.0};
        out.eigenvalue = I.at(0, 0);
        return out;
    }

    // start from the dominant diagonal entry, slightly de-axised so a
    // symmetric start cannot sit orthogonal to the dominant eigenvector
    int imax = 0;
    for (int i = 1; i < I.dim; ++i)
        if (I.at(i, i) > I.at(imax, imax)) imax = i;
    std::vector<double> v0(I.dim, 1e-3);
    v0[imax] = 1.0;

    auto [v, lambda] = power_iterate(I, v0, 1e-10);

    // deflate and look for a second eigenvalue at the same magnitude
    FIMatrix defl = I;
    for (int i = 0; i < I.dim; ++i)
        for (int j = 0; j < I.dim; ++j) defl.at(i, j) -= lambda * v[i] * v[j];
    std::vector<double> w0(I.dim, 1.0);
    for (int i = 0; i < I.dim; ++i) w0[i] += 1e-3 * i;  // deterministic asymmetry
    auto [v2, lambda2] = power_iterate(defl, w0, 1e-8);
    (void)v2;
    const double scale = std::max(1.0, std::abs(lambda));
    out.degenerate = (lambda - lambda2) <= 1e-8 * scale;

    int big = 0;
    for (int i = 1; i < I.dim; ++i)
        if (std::abs(v[i]) > std::abs(v[big])) big = i;
    if (v[big] < 0)
        for (auto& x : v) x = -x;
    out.direction = std::move(v);
    out.eigenvalue = lambda;
    return out;
}

BoundCurve expectation_bounds(std::span<const double> f_samples, std::span<const double> r_grid) {
    if (f_samples.empty()) throw ConfigError("expectation_bounds: no samples");
    const std::size_t n = f_samples.size();
    double mean = 0.0;
    for (double x : f_samples) mean += x;
    mean /= static_cast<double>(n);

    std::vector<double> ft(n);
    double fmax = -std::numeric_limits<double>::infinity();
    double fmin = std::numeric_limits<double>::infinity();
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ft[i] = f_samples[i] - mean;
        if (!std::isfinite(ft[i])) throw ConfigError("expectation_bounds: non-finite sample");
        fmax = std::max(fmax, ft[i]);
        fmin = std::min(fmin, ft[i]);
        var += ft[i] * ft[i];
    }
    var /= static_cast<double>(n);

    BoundCurve curve;
    curve.uniform_lower = fmin;
    curve.uniform_upper = fmax;
    if (fmax - fmin <= 0.0 || var == 0.0) {
        curve.degenerate = true;
        curve.R.assign(r_grid.begin(), r_grid.end());
        curve.lower.assign(r_grid.size(), 0.0);
        curve.upper.assign(r_grid.size(), 0.0);
        return curve;
    }

    // tilted moments at one c: E1 = E[e^{c ft}] (shifted), t = E2/E1
    auto tilt = [&](double c) {
        double shift = 0.0;
        for (double x : ft) shift = std::max(shift, c * x);
        double e1 = 0.0, e2 = 0.0;
        for (double x : ft) {
            const double w = std::exp(c * x - shift);
            e1 += w;
            e2 += x * w;
        }
        const double t = e2 / e1;
        const double log_e1 = shift + std::log(e1 / static_cast<double>(n));
        return std::pair{t, log_e1};
    };

    const double sd = std::sqrt(var);
    const double c_lo = 1e-3 / sd;
    double c_hi = 1e3 / sd;
    const double r_max_wanted =
        r_grid.empty() ? 0.0 : *std::max_element(r_grid.begin(), r_grid.end());

    // parametric sweep; extend c_hi if the requested range is not covered
    // (the attainable R saturates near log(n) for the sample measure)
    std::vector<double> r_up, b_up, r_lo, b_lo;
    for (int rounds = 0; rounds < 8; ++rounds) {
        r_up.clear();
        b_up.clear();
        r_lo.clear();
        b_lo.clear();
        const int n_c = 200;
        for (int k = 0; k < n_c; ++k) {
            const double c = c_lo * std::pow(c_hi / c_lo, k / double(n_c - 1));
            const auto [tu, log_e1u] = tilt(c);
            const double ru = c * tu - log_e1u;
            if (std::isfinite(ru) && std::isfinite(tu) &&
                (r_up.empty() || ru >= r_up.back())) {
                r_up.push_back(std::max(0.0, ru));
                b_up.push_back(tu);
            }
            const auto [tl, log_e1l] = tilt(-c);
            const double rl = -c * tl - log_e1l;
            if (std::isfinite(rl) && std::isfinite(tl) &&
                (r_lo.empty() || rl >= r_lo.back())) {
                r_lo.push_back(std::max(0.0, rl));
                b_lo.push_back(tl);
            }
        }
        const bool covered = (r_up.empty() || r_lo.empty()) ||
                             (r_up.back() >= r_max_wanted && r_lo.back() >= r_max_wanted);
        const bool saturated = c_hi * sd >= 1e12;
        if (covered || saturated) break;
        c_hi *= 1e3;
    }

    // interpolate a monotone parametric branch onto the R grid
    auto eval_branch = [](const std::vector<double>& r, const std::vector<double>& b,
                          double rq, double beyond) {
        if (rq <= 0.0 || r.empty()) return 0.0;
        if (rq >= r.back()) return beyond;
        const auto it = std::lower_bound(r.begin(), r.end(), rq);
        const std::size_t hi = static_cast<std::size_t>(it - r.begin());
        if (hi == 0) {
            // below the first traced point: interpolate from (0, 0)
            return b[0] * (rq / r[0]);
        }
        const double t = (rq - r[hi - 1]) / (r[hi] - r[hi - 1]);
        return b[hi - 1] + t * (b[hi] - b[hi - 1]);
    };

    curve.R.assign(r_grid.begin(), r_grid.end());
    std::sort(curve.R.begin(), curve.R.end());
    for (double rq : curve.R) {
        curve.upper.push_back(eval_branch(r_up, b_up, rq, fmax));
        curve.lower.push_back(eval_branch(r_lo, b_lo, rq, fmin));
    }
    return curve;
}

double sensitivity_bound(std::span<const double> f_samples, std::span<const double> v,
                         const FIMatrix& I) {
    if (f_samples.empty()) throw ConfigError("sensitivity_bound: no samples");
    double mean = 0.0;
    for (double x : f_samples) mean += x;
    mean /= static_cast<double>(f_samples.size());
    double var = 0.0;
    for (double x : f_samples) var += (x - mean) * (x - mean);
    var = f_samples.size() > 1 ? var / (static_cast<double>(f_samples.size()) - 1.0) : 0.0;
    return std::sqrt(var) * std::sqrt(std::max(0.0, 2.0 * kl_quadratic(I, v)));
}

}  // namespace quakeinv::sensitivity
