#include "netshrink/gpr.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Cholesky>

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "netshrink/errors.hpp"

namespace netshrink {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr std::array<double, 3> kJitterLadder{1e-10, 1e-8, 1e-6};
constexpr double kMaxInput = 1.05;
} // namespace

double Kernel::operator()(double a, double b) const {
    const double diff = a - b;
    return signal_variance * std::exp(-diff * diff / (2.0 * lengthscale * lengthscale));
}

void Kernel::validate() const {
    if (!(lengthscale > 0.0) || !(signal_variance > 0.0))
        throw domain_error("kernel requires lengthscale > 0 and signal_variance > 0");
}

GprModel GprModel::fit(const std::vector<double>& inputs, const std::vector<double>& targets,
                       const Kernel& kernel, double noise_variance) {
    kernel.validate();
    if (inputs.size() != targets.size())
        throw domain_error("gpr fit: inputs/targets length mismatch");
    const auto m = static_cast<Eigen::Index>(inputs.size());
    if (m < 2) throw domain_error("gpr fit: need at least 2 training pairs");
    if (noise_variance < 0.0) throw domain_error("gpr fit: noise variance must be >= 0");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!std::isfinite(inputs[i]) || !std::isfinite(targets[i]))
            throw domain_error("gpr fit: non-finite training value");
        if (inputs[i] <= 0.0 || inputs[i] > kMaxInput)
            throw domain_error("gpr fit: inputs must lie in (0, 1.05]");
    }
    if (noise_variance == 0.0) {
        // Coincident inputs make the noiseless Gram matrix exactly singular;
        // jitter would paper over it, so refuse up front.
        for (std::size_t i = 0; i < inputs.size(); ++i)
            for (std::size_t j = i + 1; j < inputs.size(); ++j)
                if (inputs[i] == inputs[j])
                    throw domain_error(
                        "gpr fit: duplicate inputs require a positive noise variance");
    }

    GprModel model;
    model.inputs_ = Eigen::Map<const Eigen::VectorXd>(inputs.data(), m);
    model.targets_ = Eigen::Map<const Eigen::VectorXd>(targets.data(), m);
    model.kernel_ = kernel;
    model.noise_ = noise_variance;

    Eigen::MatrixXd gram(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) gram(i, j) = kernel(inputs[i], inputs[j]);
    gram.diagonal().array() += noise_variance;

    double jitter = 0.0;
    for (int attempt = 0;; ++attempt) {
        Eigen::MatrixXd k = gram;
        k.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(k);
        if (llt.info() == Eigen::Success) {
            model.chol_ = llt.matrixL();
            model.jitter_ = jitter;
            break;
        }
        if (attempt >= static_cast<int>(kJitterLadder.size()))
            throw domain_error(
                "gpr fit: Gram matrix is not positive definite even with jitter 1e-6; "
                "training inputs are too close to coincident for the given noise level");
        jitter = kJitterLadder[static_cast<std::size_t>(attempt)];
    }

    // alpha = (K + noise I)^-1 y via the triangular factor.
    model.alpha_ = model.chol_.triangularView<Eigen::Lower>().solve(model.targets_);
    model.chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(model.alpha_);
    return model;
}

Posterior GprModel::predict(double c_star) const {
    if (inputs_.size() == 0) throw domain_error("gpr predict: model has not been fitted");
    if (!std::isfinite(c_star)) throw domain_error("gpr predict: non-finite test point");
    const auto m = inputs_.size();
    Eigen::VectorXd k_star(m);
    for (Eigen::Index i = 0; i < m; ++i) k_star(i) = kernel_(c_star, inputs_(i));

    Posterior post;
    post.mean = k_star.dot(alpha_);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k_star);
    double variance = kernel_(c_star, c_star) + noise_ - v.squaredNorm();
    if (variance < 0.0) {
        if (variance < -1e-10)
            throw domain_error("gpr predict: posterior variance below rounding tolerance");
        variance = 0.0;
    }
    post.variance = variance;
    return post;
}

double GprModel::log_marginal_likelihood() const {
    const auto m = static_cast<double>(inputs_.size());
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < chol_.rows(); ++i) log_det += std::log(chol_(i, i));
    return -0.5 * targets_.dot(alpha_) - log_det - 0.5 * m * std::log(kTwoPi);
}

HyperparamFit fit_hyperparameters(const std::vector<double>& inputs,
                                  const std::vector<double>& targets) {
    if (inputs.size() < 4)
        throw domain_error("fit_hyperparameters: need at least 4 training pairs");

    const auto log_grid = [](double lo, double hi, int count) {
        std::vector<double> grid(count);
        for (int i = 0; i < count; ++i)
            grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
        return grid;
    };
    const std::vector<double> lengthscales = log_grid(0.05, 2.0, 17);
    const std::vector<double> signal_vars = log_grid(0.01, 4.0, 9);
    const std::vector<double> noise_vars = log_grid(1e-4, 0.25, 9);

    bool found = false;
    HyperparamFit best;
    best.log_likelihood = -std::numeric_limits<double>::infinity();

    // Iterating lengthscale then noise in descending order makes the
    // preferred tie-winner (larger l, then larger noise) come first, so a
    // strict improvement test encodes the tie-break.
    for (auto l_it = lengthscales.rbegin(); l_it != lengthscales.rend(); ++l_it)
        for (double sf : signal_vars)
            for (auto n_it = noise_vars.rbegin(); n_it != noise_vars.rend(); ++n_it) {
                const Kernel kernel{*l_it, sf};
                try {
                    const GprModel model = GprModel::fit(inputs, targets, kernel, *n_it);
                    const double ll = model.log_marginal_likelihood();
                    if (ll > best.log_likelihood) {
                        best = {kernel, *n_it, ll};
                        found = true;
                    }
                } catch (const domain_error&) {
                    continue; // factorization failed at this grid point
                }
            }
    if (!found)
        throw domain_error("fit_hyperparameters: every grid point failed to factorize");
    return best;
}

using json = nlohmann::ordered_json;

std::string GprModel::to_json_string() const {
    json j;
    j["target"] = target_name_;
    j["lengthscale"] = kernel_.lengthscale;
    j["signal_variance"] = kernel_.signal_variance;
    j["noise_variance"] = noise_;
    j["inputs"] = std::vector<double>(inputs_.data(), inputs_.data() + inputs_.size());
    j["targets"] = std::vector<double>(targets_.data(), targets_.data() + targets_.size());
    return j.dump(2) + "\n";
}

GprModel GprModel::from_json_string(const std::string& text) {
    json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw input_error("gpr model is not valid JSON");
    try {
        const auto inputs = j.at("inputs").get<std::vector<double>>();
        const auto targets = j.at("targets").get<std::vector<double>>();
        const Kernel kernel{j.at("lengthscale").get<double>(),
                            j.at("signal_variance").get<double>()};
        GprModel model = fit(inputs, targets, kernel, j.at("noise_variance").get<double>());
        model.set_target_name(j.value("target", ""));

        // The factorization was recomputed; verify it reproduces the Gram
        // matrix before trusting the persisted model.
        const auto m = model.inputs_.size();
        Eigen::MatrixXd expected(m, m);
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < m; ++b)
                expected(a, b) = kernel(model.inputs_(a), model.inputs_(b));
        expected.diagonal().array() += model.noise_ + model.jitter_;
        const Eigen::MatrixXd actual =
            model.chol_ * model.chol_.transpose();
        if ((actual - expected).cwiseAbs().maxCoeff() > 1e-8)
            throw input_error("gpr model: factorization check failed after load");
        return model;
    } catch (const json::exception& e) {
        throw input_error(std::string("bad gpr model JSON: ") + e.what());
    }
}

GprModel GprModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open gpr model: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_string(buf.str());
}

void GprModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write gpr model: " + path);
    out << to_json_string();
}

} // namespace netshrink
