// fit.hpp - weighted least squares: a small Levenberg-Marquardt engine and the
// closed-form weighted line fit
//
// Parameters are scaled internally by their initial magnitudes, so models
// mixing ~1e8 rates with ~1 amplitudes stay well conditioned; the covariance
// is reported in natural units.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "photonstat/linalg.hpp"

namespace photonstat {

struct FitResult {
    std::vector<std::string> param_names;
    std::vector<double> params;
    std::vector<double> sigmas;       // sqrt(diag(covariance))
    Matrix covariance;
    double chi2 = 0.0;
    double reduced_chi2 = 0.0;
    int n_iter = 0;
    bool converged = false;
    std::string flag;                 // empty = clean; otherwise a warning tag

    double param(const std::string& name) const { return params[index_of(name)]; }
    double sigma(const std::string& name) const { return sigmas[index_of(name)]; }

  private:
    size_t index_of(const std::string& name) const {
        for (size_t i = 0; i < param_names.size(); ++i)
            if (param_names[i] == name) return i;
        throw std::invalid_argument("fit result: no parameter named " + name);
    }
};

struct LevMarOptions {
    int max_iter = 200;
    double step_tol = 1e-8;   // relative parameter step
    double lambda0 = 1e-3;
};

// model(params) fills the predicted value for every data point.
using ModelFn = std::function<void(std::span<const double> params, std::span<double> out)>;

namespace detail {

inline double chi2_of(std::span<const double> y, std::span<const double> w,
                      std::span<const double> m) {
    double s = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - m[i];
        s += w[i] * r * r;
    }
    return s;
}

// Covariance = inverse of the weighted normal matrix; a tiny ridge is retried
// once if the matrix is numerically singular (flat directions get huge
// uncertainties instead of aborting the fit).
inline bool try_invert(const Matrix& A, Matrix& out) {
    try {
        out = invert_matrix(A);
        return true;
    } catch (const std::runtime_error&) {
        Matrix R = A;
        double dmax = 0.0;
        for (int i = 0; i < A.rows; ++i) dmax = std::max(dmax, std::fabs(A(i, i)));
        const double ridge = (dmax > 0.0 ? dmax : 1.0) * 1e-12;
        for (int i = 0; i < R.rows; ++i) R(i, i) += ridge;
        try {
            out = invert_matrix(R);
            return true;
        } catch (const std::runtime_error&) {
            return false;
        }
    }
}

}  // namespace detail

// Damped Gauss-Newton (Levenberg-Marquardt) with a forward-evaluated model and
// central-difference Jacobian in scaled parameter space. Never throws on
// non-convergence; the result carries converged = false and a flag instead.
inline FitResult levmar_fit(const ModelFn& model, std::span<const double> y,
                            std::span<const double> sigma, std::vector<double> p0,
                            std::vector<std::string> names, LevMarOptions opts = {}) {
    const size_t n = y.size();
    const size_t np = p0.size();
    if (sigma.size() != n) throw std::invalid_argument("levmar: sigma size mismatch");
    if (names.size() != np) throw std::invalid_argument("levmar: name count mismatch");
    if (n < np) throw std::invalid_argument("levmar: fewer points than parameters");

    std::vector<double> w(n);
    for (size_t i = 0; i < n; ++i) {
        if (!(sigma[i] > 0.0)) throw std::invalid_argument("levmar: sigma must be > 0");
        w[i] = 1.0 / (sigma[i] * sigma[i]);
    }

    // internal scaling: p = scale * q, q0 = 1 (or 0 for zero-initialized params)
    std::vector<double> scale(np);
    for (size_t k = 0; k < np; ++k) scale[k] = (p0[k] != 0.0) ? std::fabs(p0[k]) : 1.0;
    std::vector<double> q(np);
    for (size_t k = 0; k < np; ++k) q[k] = p0[k] / scale[k];

    std::vector<double> p(np), m(n), m_trial(n), q_trial(np);
    auto eval = [&](const std::vector<double>& qv, std::span<double> out) {
        for (size_t k = 0; k < np; ++k) p[k] = qv[k] * scale[k];
        model(p, out);
    };

    eval(q, m);
    double chi2 = detail::chi2_of(y, w, m);

    Matrix J(static_cast<int>(n), static_cast<int>(np));
    double lambda = opts.lambda0;
    int iter = 0;
    bool converged = false;

    std::vector<double> mp(n), mm(n);
    for (; iter < opts.max_iter; ++iter) {
        // central-difference Jacobian wrt scaled parameters
        const double h = 1e-6;
        for (size_t k = 0; k < np; ++k) {
            std::vector<double> qk = q;
            qk[k] += h;
            eval(qk, mp);
            qk[k] = q[k] - h;
            eval(qk, mm);
            for (size_t i = 0; i < n; ++i)
                J(static_cast<int>(i), static_cast<int>(k)) = (mp[i] - mm[i]) / (2.0 * h);
        }
        // normal equations
        Matrix A(static_cast<int>(np), static_cast<int>(np));
        std::vector<double> g(np, 0.0);
        for (size_t i = 0; i < n; ++i) {
            const double r = y[i] - m[i];
            for (size_t k = 0; k < np; ++k) {
                g[k] += w[i] * r * J(static_cast<int>(i), static_cast<int>(k));
                for (size_t l = k; l < np; ++l)
                    A(static_cast<int>(k), static_cast<int>(l)) +=
                        w[i] * J(static_cast<int>(i), static_cast<int>(k)) *
                        J(static_cast<int>(i), static_cast<int>(l));
            }
        }
        for (size_t k = 0; k < np; ++k)
            for (size_t l = 0; l < k; ++l)
                A(static_cast<int>(k), static_cast<int>(l)) = A(static_cast<int>(l), static_cast<int>(k));

        bool accepted = false;
        for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
            Matrix Ad = A;
            for (size_t k = 0; k < np; ++k) {
                double d = A(static_cast<int>(k), static_cast<int>(k));
                Ad(static_cast<int>(k), static_cast<int>(k)) = d + lambda * (d > 0.0 ? d : 1.0);
            }
            std::vector<double> step;
            try {
                step = solve_linear_system(Ad, g);
            } catch (const std::runtime_error&) {
                lambda *= 10.0;
                continue;
            }
            for (size_t k = 0; k < np; ++k) q_trial[k] = q[k] + step[k];
            eval(q_trial, m_trial);
            const double chi2_trial = detail::chi2_of(y, w, m_trial);
            double max_step = 0.0;
            for (size_t k = 0; k < np; ++k)
                max_step = std::max(max_step, std::fabs(step[k]) / (std::fabs(q[k]) + 1.0));
            if (chi2_trial <= chi2 && std::isfinite(chi2_trial)) {
                q = q_trial;
                m = m_trial;
                chi2 = chi2_trial;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (max_step < opts.step_tol) converged = true;
            } else if (max_step < opts.step_tol) {
                // steps below tolerance cannot lower chi2: we are at the minimum
                converged = true;
                break;
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted || converged) break;
    }

    FitResult res;
    res.param_names = std::move(names);
    res.params.resize(np);
    for (size_t k = 0; k < np; ++k) res.params[k] = q[k] * scale[k];
    res.chi2 = chi2;
    res.reduced_chi2 = (n > np) ? chi2 / static_cast<double>(n - np) : 0.0;
    res.n_iter = iter + 1;
    res.converged = converged;
    if (!converged) res.flag = "not converged";

    // covariance from the final Jacobian, unscaled
    Matrix A(static_cast<int>(np), static_cast<int>(np));
    {
        const double h = 1e-6;
        for (size_t k = 0; k < np; ++k) {
            std::vector<double> qk = q;
            qk[k] += h;
            eval(qk, mp);
            qk[k] = q[k] - h;
            eval(qk, mm);
            for (size_t i = 0; i < n; ++i)
                J(static_cast<int>(i), static_cast<int>(k)) = (mp[i] - mm[i]) / (2.0 * h);
        }
        for (size_t i = 0; i < n; ++i)
            for (size_t k = 0; k < np; ++k)
                for (size_t l = k; l < np; ++l)
                    A(static_cast<int>(k), static_cast<int>(l)) +=
                        w[i] * J(static_cast<int>(i), static_cast<int>(k)) *
                        J(static_cast<int>(i), static_cast<int>(l));
        for (size_t k = 0; k < np; ++k)
            for (size_t l = 0; l < k; ++l)
                A(static_cast<int>(k), static_cast<int>(l)) = A(static_cast<int>(l), static_cast<int>(k));
    }
    Matrix cov_scaled;
    res.sigmas.assign(np, std::numeric_limits<double>::quiet_NaN());
    if (detail::try_invert(A, cov_scaled)) {
        res.covariance = Matrix(static_cast<int>(np), static_cast<int>(np));
        for (size_t k = 0; k < np; ++k)
            for (size_t l = 0; l < np; ++l)
                res.covariance(static_cast<int>(k), static_cast<int>(l)) =
                    cov_scaled(static_cast<int>(k), static_cast<int>(l)) * scale[k] * scale[l];
        for (size_t k = 0; k < np; ++k) {
            const double v = res.covariance(static_cast<int>(k), static_cast<int>(k));
            res.sigmas[k] = v > 0.0 ? std::sqrt(v) : 0.0;
        }
    } else {
        res.flag = res.flag.empty() ? "singular covariance" : res.flag + "; singular covariance";
    }
    return res;
}

// Weighted fit of y = intercept + slope * x with analytic covariance.
inline FitResult weighted_line_fit(std::span<const double> x, std::span<const double> y,
                                   std::span<const double> sigma,
                                   const std::string& intercept_name = "intercept",
                                   const std::string& slope_name = "slope") {
    const size_t n = x.size();
    if (y.size() != n || sigma.size() != n)
        throw std::invalid_argument("line fit: size mismatch");
    if (n < 2) throw std::invalid_argument("line fit: need at least 2 points");

    double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        if (!(sigma[i] > 0.0)) throw std::invalid_argument("line fit: sigma must be > 0");
        const double w = 1.0 / (sigma[i] * sigma[i]);
        S += w;
        Sx += w * x[i];
        Sy += w * y[i];
        Sxx += w * x[i] * x[i];
        Sxy += w * x[i] * y[i];
    }
    const double delta = S * Sxx - Sx * Sx;
    if (!(delta > 0.0)) throw std::invalid_argument("line fit: degenerate abscissae");

    FitResult res;
    res.param_names = {intercept_name, slope_name};
    const double a = (Sxx * Sy - Sx * Sxy) / delta;
    const double b = (S * Sxy - Sx * Sy) / delta;
    res.params = {a, b};
    res.covariance = Matrix(2, 2);
    res.covariance(0, 0) = Sxx / delta;
    res.covariance(1, 1) = S / delta;
    res.covariance(0, 1) = res.covariance(1, 0) = -Sx / delta;
    res.sigmas = {std::sqrt(Sxx / delta), std::sqrt(S / delta)};
    double chi2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = (y[i] - a - b * x[i]) / sigma[i];
        chi2 += r * r;
    }
    res.chi2 = chi2;
    res.reduced_chi2 = (n > 2) ? chi2 / static_cast<double>(n - 2) : 0.0;
    res.n_iter = 1;
    res.converged = true;
    if (n == 2) res.flag = "two points: exact interpolation, no residual dof";
    return res;
}

}  // namespace photonstat
