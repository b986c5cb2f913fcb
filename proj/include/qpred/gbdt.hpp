#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qpred/training_pool.hpp"

namespace qpred {

// Targets are modeled in log space: y_log = log(1 + seconds).
inline double latency_to_log(double seconds) { return std::log1p(seconds); }
inline double log_to_latency(double y_log) { return std::expm1(y_log); }

// Gaussian negative log-likelihood parameterized by (mu, log sigma^2), up to
// the constant 0.5*log(2*pi). Pure formula, no clamping; the variance floor
// lives in the model.
struct NllGrad {
    double loss;
    double d_mu;
    double d_logvar;
};

inline NllGrad nll_loss(double mu, double logvar, double y_log) {
    const double inv_var = std::exp(-logvar);
    const double r = y_log - mu;
    NllGrad g;
    g.loss = 0.5 * logvar + r * r * inv_var * 0.5;
    g.d_mu = -r * inv_var;
    g.d_logvar = 0.5 - r * r * inv_var * 0.5;
    return g;
}

// Binary regression tree with axis-aligned splits. Child links >= 0 index
// into splits; negative links encode leaf index -(link + 1).
struct RegressionTree {
    struct Split {
        int feature = 0;
        double threshold = 0.0;
        int left = -1;
        int right = -2;
    };
    std::vector<Split> splits;
    std::vector<double> leaves;

    double value(const Eigen::VectorXd& x) const {
        if (splits.empty()) return leaves.empty() ? 0.0 : leaves[0];
        const double* v = x.data();
        int idx = 0;
        for (;;) {
            const Split& s = splits[static_cast<std::size_t>(idx)];
            const int next = v[s.feature] <= s.threshold ? s.left : s.right;
            if (next < 0) return leaves[static_cast<std::size_t>(-next - 1)];
            idx = next;
        }
    }
};

struct GbdtHyperparams {
    int n_estimators = 200;
    int max_depth = 6;
    double learning_rate = 0.1;
    double validation_fraction = 0.2;
    int early_stopping_patience = 20;
    int min_samples_split = 4;
    int min_samples_leaf = 2;
    int quantile_candidates = 32;
    double logvar_floor = -10.0;
    double logvar_ceiling = 20.0;
    double leaf_clip = 5.0;   // per-round cap on fitted leaf values
    std::size_t min_pool = 10;
};

// One probabilistic boosted model: a mu head and a log-variance head, grown
// one tree each per round on the negative NLL gradients.
struct GbdtModel {
    std::vector<RegressionTree> trees_mu;
    std::vector<RegressionTree> trees_logvar;
    double base_mu = 0.0;
    double base_logvar = 0.0;
    GbdtHyperparams params;

    struct Output {
        double mu;        // log-seconds
        double logvar;    // clamped to [floor, ceiling]
        double variance() const { return std::exp(logvar); }
    };

    Output predict(const Eigen::VectorXd& x) const {
        double mu = base_mu;
        double lv = base_logvar;
        for (const auto& t : trees_mu) mu += params.learning_rate * t.value(x);
        for (const auto& t : trees_logvar) lv += params.learning_rate * t.value(x);
        lv = std::max(params.logvar_floor, std::min(params.logvar_ceiling, lv));
        return {mu, lv};
    }

    int rounds() const { return static_cast<int>(trees_mu.size()); }
};

// Point predictor trained on the absolute-error objective; no uncertainty.
struct BaselineModel {
    std::vector<RegressionTree> trees;
    double base = 0.0;
    GbdtHyperparams params;

    double predict_log(const Eigen::VectorXd& x) const {
        double m = base;
        for (const auto& t : trees) m += params.learning_rate * t.value(x);
        return m;
    }
    double predict_seconds(const Eigen::VectorXd& x) const {
        return std::max(0.0, log_to_latency(predict_log(x)));
    }
};

// Throws UnderTrainedError when fewer than params.min_pool examples exist.
GbdtModel fit_gbdt(const TrainingPool& pool, const GbdtHyperparams& params, std::uint64_t seed);
GbdtModel fit_gbdt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y_log,
                   const GbdtHyperparams& params, std::uint64_t seed);

BaselineModel fit_baseline(const TrainingPool& pool, const GbdtHyperparams& params, std::uint64_t seed);
BaselineModel fit_baseline(const Eigen::MatrixXd& x, const Eigen::VectorXd& y_log,
                           const GbdtHyperparams& params, std::uint64_t seed);

// (rows x kLocalFeatureDim, log targets) view of a pool.
void pool_to_matrix(const TrainingPool& pool, Eigen::MatrixXd& x, Eigen::VectorXd& y_log);

}  // namespace qpred
