#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rqrao {

/// Quasi-Newton settings. Termination fires when the objective change or the
/// largest parameter change drops below its tolerance.
struct OptimizerConfig {
    double tol_objective = 1e-2;
    double tol_parameters = 1e-2;
    int max_iterations = 500;
    int history = 10;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;

    void validate() const {
        if (tol_objective <= 0 || tol_parameters <= 0)
            throw std::invalid_argument("tolerances must be positive");
        if (max_iterations < 1 || history < 1)
            throw std::invalid_argument("iteration and history counts must be positive");
        if (!(0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1))
            throw std::invalid_argument("need 0 < c1 < c2 < 1");
    }
};

struct OptimizeResult {
    std::vector<double> x;
    double objective = 0;
    int iterations = 0;
    bool line_search_failed = false;
    bool converged = false;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sup_norm(const std::vector<double>& a) {
    double s = 0;
    for (double v : a) s = std::max(s, std::abs(v));
    return s;
}

/// Strong-Wolfe line search on phi(t) = f(x + t d), f to be MINIMIZED
/// (bracket then zoom). Returns the accepted step, or 0 on failure.
template <class Phi>
double wolfe_line_search(Phi&& phi, double phi0, double dphi0, double c1, double c2,
                         double& phi_out, int max_evals = 30) {
    if (dphi0 >= 0) return 0;  // not a descent direction

    auto zoom = [&](double tlo, double thi, double phi_lo, int budget) -> double {
        for (int it = 0; it < budget; ++it) {
            double t = 0.5 * (tlo + thi);
            double dphi;
            double ph = phi(t, dphi);
            if (ph > phi0 + c1 * t * dphi0 || ph >= phi_lo) {
                thi = t;
            } else {
                if (std::abs(dphi) <= -c2 * dphi0) {
                    phi_out = ph;
                    return t;
                }
                if (dphi * (thi - tlo) >= 0) thi = tlo;
                tlo = t;
                phi_lo = ph;
            }
            if (std::abs(thi - tlo) < 1e-16 * std::max(1.0, std::abs(tlo))) break;
        }
        return 0;
    };

    double t_prev = 0, phi_prev = phi0;
    double t = 1.0;
    for (int it = 0; it < max_evals; ++it) {
        double dphi;
        double ph = phi(t, dphi);
        if (ph > phi0 + c1 * t * dphi0 || (it > 0 && ph >= phi_prev))
            return zoom(t_prev, t, phi_prev, max_evals - it);
        if (std::abs(dphi) <= -c2 * dphi0) {
            phi_out = ph;
            return t;
        }
        if (dphi >= 0) return zoom(t, t_prev, ph, max_evals - it);
        t_prev = t;
        phi_prev = ph;
        t *= 2.0;
    }
    return 0;
}

} // namespace detail

/// Limited-memory BFGS MAXIMIZING `objective`, which must fill `grad` with
/// the gradient of the objective at x. Line search enforces strong Wolfe
/// conditions on the negated objective; on line-search failure the best
/// iterate reached so far is returned with a flag, never an exception.
inline OptimizeResult lbfgs_maximize(
    const std::function<double(const std::vector<double>&, std::vector<double>&)>& objective,
    std::vector<double> x0, const OptimizerConfig& cfg) {
    cfg.validate();
    const std::size_t dim = x0.size();

    // work in minimization form: g(x) = -objective(x)
    std::vector<double> grad(dim), grad_obj(dim);
    auto eval = [&](const std::vector<double>& x, std::vector<double>& g) {
        double f = objective(x, grad_obj);
        for (std::size_t i = 0; i < dim; ++i) g[i] = -grad_obj[i];
        return -f;
    };

    std::vector<double> x = std::move(x0);
    double f = eval(x, grad);

    OptimizeResult best;
    best.x = x;
    best.objective = -f;

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    std::vector<double> dir(dim), x_new(dim), grad_new(dim), alpha(static_cast<std::size_t>(cfg.history));

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (detail::sup_norm(grad) < 1e-12) {
            best.converged = true;
            break;
        }

        // two-loop recursion
        dir = grad;
        int h = static_cast<int>(s_hist.size());
        for (int i = h - 1; i >= 0; --i) {
            alpha[static_cast<std::size_t>(i)] =
                rho_hist[static_cast<std::size_t>(i)] * detail::dot(s_hist[static_cast<std::size_t>(i)], dir);
            for (std::size_t j = 0; j < dim; ++j)
                dir[j] -= alpha[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)][j];
        }
        if (h > 0) {
            double gamma = detail::dot(s_hist.back(), y_hist.back()) /
                           detail::dot(y_hist.back(), y_hist.back());
            for (double& v : dir) v *= gamma;
        }
        for (int i = 0; i < h; ++i) {
            double beta = rho_hist[static_cast<std::size_t>(i)] * detail::dot(y_hist[static_cast<std::size_t>(i)], dir);
            for (std::size_t j = 0; j < dim; ++j)
                dir[j] += (alpha[static_cast<std::size_t>(i)] - beta) * s_hist[static_cast<std::size_t>(i)][j];
        }
        for (double& v : dir) v = -v;

        double dphi0 = detail::dot(grad, dir);
        if (dphi0 >= 0) {  // fall back to steepest descent
            for (std::size_t j = 0; j < dim; ++j) dir[j] = -grad[j];
            dphi0 = detail::dot(grad, dir);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        double last_t = std::numeric_limits<double>::quiet_NaN();
        auto phi = [&](double t, double& dphi) {
            for (std::size_t j = 0; j < dim; ++j) x_new[j] = x[j] + t * dir[j];
            double ph = eval(x_new, grad_new);
            dphi = detail::dot(grad_new, dir);
            last_t = t;
            return ph;
        };

        double phi_t = 0;
        double t = detail::wolfe_line_search(phi, f, dphi0, cfg.wolfe_c1, cfg.wolfe_c2, phi_t);
        if (t == 0) {
            best.line_search_failed = true;
            break;
        }
        if (last_t != t) {  // refresh x_new/grad_new at the accepted step
            double dphi_unused;
            phi_t = phi(t, dphi_unused);
        }
        double f_new = phi_t;

        std::vector<double> s(dim), y(dim);
        double step_sup = 0;
        for (std::size_t j = 0; j < dim; ++j) {
            s[j] = x_new[j] - x[j];
            y[j] = grad_new[j] - grad[j];
            step_sup = std::max(step_sup, std::abs(s[j]));
        }
        double sy = detail::dot(s, y);
        if (sy > 1e-10 * std::sqrt(detail::dot(s, s)) * std::sqrt(detail::dot(y, y))) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > cfg.history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        double df = std::abs(f_new - f);
        x.swap(x_new);
        grad.swap(grad_new);
        f = f_new;
        best.iterations = iter + 1;
        if (-f > best.objective) {
            best.objective = -f;
            best.x = x;
        }

        if (df < cfg.tol_objective || step_sup < cfg.tol_parameters) {
            best.converged = true;
            break;
        }
    }
    return best;
}

} // namespace rqrao
