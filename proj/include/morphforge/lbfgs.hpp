#ifndef MORPHFORGE_LBFGS_HPP
#define MORPHFORGE_LBFGS_HPP

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace morphforge::regen {

/// Optimizer settings shared by latent fitting and encoder fine-tuning.
struct FitOptions {
    double learning_rate = 0.25;      // initial step length
    double decay_rate = 0.9;          // multiplied into the step on a non-decreasing step
    double early_stop_threshold = 0.5; // absolute loss threshold
    int patience = 10;                // consecutive non-improving iterations allowed
    int max_iterations = 200;
    int history_size = 10;            // L-BFGS memory

    void validate() const; // throws ValidationError
};

/// Loss and gradient at a point.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

enum class StopReason { EarlyStopThreshold, Patience, MaxIterations };

struct LbfgsResult {
    Eigen::VectorXd x;              // best iterate seen
    double loss = 0.0;              // loss at the best iterate
    std::vector<double> trace;      // accepted losses, starting with the initial one
    int iterations = 0;             // candidate evaluations performed after the initial one
    StopReason stop = StopReason::MaxIterations;
};

/// Limited-memory BFGS (two-loop recursion) with a fixed-step policy:
/// the step length starts at learning_rate and is multiplied by decay_rate
/// whenever a candidate fails to decrease the loss. Stops when the loss
/// drops below early_stop_threshold, after `patience` consecutive
/// non-improving iterations, or at max_iterations. Returns the best
/// iterate seen. Throws OptimizationError on non-finite loss/gradient.
LbfgsResult lbfgs_minimize(const Objective& objective, const Eigen::VectorXd& x0,
                           const FitOptions& opts);

} // namespace morphforge::regen

#endif
