#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpred/gbdt.hpp"

namespace qpred {

// Mean and decomposed variance of an ensemble prediction, in log space.
// mean_seconds is the back-transformed point prediction for scheduling.
struct Prediction {
    double mean_log = 0.0;
    double model_uncertainty = 0.0;  // variance of member means
    double data_uncertainty = 0.0;   // mean of member variances
    double total_uncertainty = 0.0;  // model + data
    double mean_seconds = 0.0;
};

// mean = (1/K) sum mu_k; model = (1/K) sum (mean - mu_k)^2; data = (1/K) sum var_k.
Prediction combine_members(const std::vector<double>& member_means,
                           const std::vector<double>& member_variances);

struct Ensemble {
    std::vector<GbdtModel> members;

    int size() const { return static_cast<int>(members.size()); }
    Prediction predict(const QueryFeatures& f) const { return predict(f.values); }
    Prediction predict(const Eigen::VectorXd& x) const;
};

// K members over identical data, differing only in the seed that drives each
// member's train/validation row split and split tie-breaking.
Ensemble fit_ensemble(const TrainingPool& pool, const GbdtHyperparams& params, int k,
                      std::uint64_t seed);
Ensemble fit_ensemble(const Eigen::MatrixXd& x, const Eigen::VectorXd& y_log,
                      const GbdtHyperparams& params, int k, std::uint64_t seed);

// Versioned JSON snapshot; reload reproduces predictions bit-exactly.
std::string ensemble_to_json(const Ensemble& e);
Ensemble ensemble_from_json(const std::string& text);

}  // namespace qpred
