#include "morphforge/lbfgs.hpp"

#include "morphforge/errors.hpp"

#include <cmath>
#include <deque>

namespace morphforge::regen {

void FitOptions::validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
    if (!(decay_rate > 0.0 && decay_rate <= 1.0))
        throw ValidationError("decay_rate must lie in (0,1]");
    if (patience < 0) throw ValidationError("patience must be >= 0");
    if (max_iterations < 1) throw ValidationError("max_iterations must be positive");
    if (history_size < 1) throw ValidationError("history_size must be positive");
}

namespace {

struct Pair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho;
};

/// Two-loop recursion: approximates -H * grad using the stored pairs,
/// with the usual gamma = s.y / y.y initial Hessian scaling.
Eigen::VectorXd search_direction(const Eigen::VectorXd& grad, const std::deque<Pair>& history) {
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(history.size());
    for (size_t i = history.size(); i-- > 0;) {
        alpha[i] = history[i].rho * history[i].s.dot(q);
        q -= alpha[i] * history[i].y;
    }
    if (!history.empty()) {
        const Pair& last = history.back();
        const double gamma = last.s.dot(last.y) / last.y.dot(last.y);
        q *= gamma;
    }
    for (size_t i = 0; i < history.size(); ++i) {
        const double beta = history[i].rho * history[i].y.dot(q);
        q += (alpha[i] - beta) * history[i].s;
    }
    return -q;
}

void check_finite(double loss, const Eigen::VectorXd& grad, int iteration) {
    if (!std::isfinite(loss))
        throw OptimizationError("non-finite loss at iteration " + std::to_string(iteration));
    if (!grad.allFinite())
        throw OptimizationError("non-finite gradient at iteration " + std::to_string(iteration));
}

} // namespace

LbfgsResult lbfgs_minimize(const Objective& objective, const Eigen::VectorXd& x0,
                           const FitOptions& opts) {
    opts.validate();

    LbfgsResult res;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd grad(x.size());
    double loss = objective(x, grad);
    check_finite(loss, grad, 0);

    res.x = x;
    res.loss = loss;
    res.trace.push_back(loss);
    if (loss < opts.early_stop_threshold) {
        res.stop = StopReason::EarlyStopThreshold;
        return res;
    }

    std::deque<Pair> history;
    double step = opts.learning_rate;
    int fail_streak = 0;

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        res.iterations = iter;
        const Eigen::VectorXd dir = search_direction(grad, history);
        const Eigen::VectorXd x_new = x + step * dir;
        Eigen::VectorXd grad_new(x.size());
        const double loss_new = objective(x_new, grad_new);
        check_finite(loss_new, grad_new, iter);

        if (loss_new < loss) {
            Pair p;
            p.s = x_new - x;
            p.y = grad_new - grad;
            const double sy = p.s.dot(p.y);
            if (sy > 1e-12 * p.s.norm() * p.y.norm()) {
                p.rho = 1.0 / sy;
                history.push_back(std::move(p));
                if (static_cast<int>(history.size()) > opts.history_size) history.pop_front();
            }
            x = x_new;
            grad = grad_new;
            loss = loss_new;
            res.trace.push_back(loss);
        } else {
            step *= opts.decay_rate;
        }

        if (loss < res.loss) {
            res.loss = loss;
            res.x = x;
            fail_streak = 0;
        } else {
            ++fail_streak;
        }

        if (res.loss < opts.early_stop_threshold) {
            res.stop = StopReason::EarlyStopThreshold;
            return res;
        }
        if (fail_streak > 0 && fail_streak >= opts.patience) {
            res.stop = StopReason::Patience;
            return res;
        }
    }
    res.stop = StopReason::MaxIterations;
    return res;
}

} // namespace morphforge::regen
