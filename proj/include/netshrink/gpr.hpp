#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace netshrink {

// RBF covariance k(x, x') = signal_variance * exp(-(x - x')^2 / (2 l^2)).
struct Kernel {
    double lengthscale = 1.0;
    double signal_variance = 1.0;

    double operator()(double a, double b) const;
    void validate() const;
};

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

// Exact zero-mean Gaussian-process regression in one input dimension,
// mapping a FLOPs reduction factor c in (0, 1.05] to a scaling coefficient.
// Prediction goes through the stored Cholesky factor (two triangular
// solves). Immutable once fitted; safe to share across threads.
class GprModel {
public:
    // Default-constructed models are empty placeholders: predict() rejects
    // them until a fitted model is assigned in.
    GprModel() = default;

    // Builds and factorizes K + noise*I, escalating jitter through
    // {1e-10, 1e-8, 1e-6} if the factorization fails.
    static GprModel fit(const std::vector<double>& inputs,
                        const std::vector<double>& targets,
                        const Kernel& kernel, double noise_variance);

    Posterior predict(double c_star) const;

    double log_marginal_likelihood() const;

    const Eigen::VectorXd& inputs() const { return inputs_; }
    const Eigen::VectorXd& targets() const { return targets_; }
    const Eigen::MatrixXd& cholesky_factor() const { return chol_; }
    const Kernel& kernel() const { return kernel_; }
    double noise_variance() const { return noise_; }
    double jitter() const { return jitter_; }

    const std::string& target_name() const { return target_name_; }
    void set_target_name(std::string name) { target_name_ = std::move(name); }

    // {target, lengthscale, signal_variance, noise_variance, inputs, targets}.
    // Loading refits (the factor is recomputed) and verifies reconstruction.
    std::string to_json_string() const;
    static GprModel from_json_string(const std::string& text);
    static GprModel load(const std::string& path);
    void save(const std::string& path) const;

private:
    Eigen::VectorXd inputs_;
    Eigen::VectorXd targets_;
    Eigen::MatrixXd chol_;  // lower factor L of K + noise*I + jitter*I
    Eigen::VectorXd alpha_; // (K + noise*I)^-1 y
    Kernel kernel_;
    double noise_ = 0.0;
    double jitter_ = 0.0;
    std::string target_name_;
};

struct HyperparamFit {
    Kernel kernel;
    double noise_variance = 0.0;
    double log_likelihood = 0.0;
};

// Deterministic log-space grid search over the marginal likelihood:
// lengthscale 17 points in [0.05, 2], signal variance 9 in [0.01, 4],
// noise variance 9 in [1e-4, 0.25]. Ties break toward larger lengthscale,
// then larger noise. Requires at least 4 training pairs.
HyperparamFit fit_hyperparameters(const std::vector<double>& inputs,
                                  const std::vector<double>& targets);

} // namespace netshrink
