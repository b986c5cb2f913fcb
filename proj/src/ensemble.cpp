#include "qpred/ensemble.hpp"

#include <json.hpp>

#include "qpred/errors.hpp"
#include "qpred/rng.hpp"

namespace qpred {
namespace {

using nlohmann::json;

json tree_to_json(const RegressionTree& t, const char* head) {
    json splits = json::array();
    for (const auto& s : t.splits) splits.push_back({s.feature, s.threshold, s.left, s.right});
    return json{{"head", head}, {"splits", splits}, {"leaves", t.leaves}};
}

RegressionTree tree_from_json(const json& j) {
    RegressionTree t;
    for (const auto& s : j.at("splits")) {
        t.splits.push_back({s.at(0).get<int>(), s.at(1).get<double>(), s.at(2).get<int>(),
                            s.at(3).get<int>()});
    }
    t.leaves = j.at("leaves").get<std::vector<double>>();
    return t;
}

json hyperparams_to_json(const GbdtHyperparams& hp) {
    return json{{"n_estimators", hp.n_estimators},
                {"max_depth", hp.max_depth},
                {"learning_rate", hp.learning_rate},
                {"validation_fraction", hp.validation_fraction},
                {"early_stopping_patience", hp.early_stopping_patience},
                {"min_samples_split", hp.min_samples_split},
                {"min_samples_leaf", hp.min_samples_leaf},
                {"quantile_candidates", hp.quantile_candidates},
                {"logvar_floor", hp.logvar_floor},
                {"logvar_ceiling", hp.logvar_ceiling},
                {"leaf_clip", hp.leaf_clip},
                {"min_pool", hp.min_pool}};
}

GbdtHyperparams hyperparams_from_json(const json& j) {
    GbdtHyperparams hp;
    hp.n_estimators = j.at("n_estimators").get<int>();
    hp.max_depth = j.at("max_depth").get<int>();
    hp.learning_rate = j.at("learning_rate").get<double>();
    hp.validation_fraction = j.at("validation_fraction").get<double>();
    hp.early_stopping_patience = j.at("early_stopping_patience").get<int>();
    hp.min_samples_split = j.at("min_samples_split").get<int>();
    hp.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    hp.quantile_candidates = j.at("quantile_candidates").get<int>();
    hp.logvar_floor = j.at("logvar_floor").get<double>();
    hp.logvar_ceiling = j.at("logvar_ceiling").get<double>();
    hp.leaf_clip = j.at("leaf_clip").get<double>();
    hp.min_pool = j.at("min_pool").get<std::size_t>();
    return hp;
}

}  // namespace

Prediction combine_members(const std::vector<double>& member_means,
                           const std::vector<double>& member_variances) {
    const std::size_t k = member_means.size();
    if (k == 0 || member_variances.size() != k)
        throw ValidationError("combine_members: need matching non-empty member outputs");
    Prediction p;
    double sum_mu = 0.0;
    for (double m : member_means) sum_mu += m;
    p.mean_log = sum_mu / static_cast<double>(k);
    double sum_sq = 0.0;
    double sum_var = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double d = p.mean_log - member_means[i];
        sum_sq += d * d;
        sum_var += member_variances[i];
    }
    p.model_uncertainty = sum_sq / static_cast<double>(k);
    p.data_uncertainty = sum_var / static_cast<double>(k);
    p.total_uncertainty = p.model_uncertainty + p.data_uncertainty;
    p.mean_seconds = std::max(0.0, log_to_latency(p.mean_log));
    return p;
}

Prediction Ensemble::predict(const Eigen::VectorXd& x) const {
    std::vector<double> mus(members.size());
    std::vector<double> vars(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        const auto out = members[i].predict(x);
        mus[i] = out.mu;
        vars[i] = out.variance();
    }
    return combine_members(mus, vars);
}

Ensemble fit_ensemble(const Eigen::MatrixXd& x, const Eigen::VectorXd& y_log,
                      const GbdtHyperparams& params, int k, std::uint64_t seed) {
    if (k < 1) throw ValidationError("ensemble size must be >= 1");
    Rng master(seed);
    Ensemble e;
    e.members.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        e.members.push_back(fit_gbdt(x, y_log, params, master.fork(static_cast<std::uint64_t>(i))));
    }
    return e;
}

Ensemble fit_ensemble(const TrainingPool& pool, const GbdtHyperparams& params, int k,
                      std::uint64_t seed) {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    pool_to_matrix(pool, x, y);
    return fit_ensemble(x, y, params, k, seed);
}

std::string ensemble_to_json(const Ensemble& e) {
    json members = json::array();
    for (const auto& m : e.members) {
        json trees = json::array();
        for (const auto& t : m.trees_mu) trees.push_back(tree_to_json(t, "mu"));
        for (const auto& t : m.trees_logvar) trees.push_back(tree_to_json(t, "logvar"));
        members.push_back({{"base_mu", m.base_mu},
                           {"base_logvar", m.base_logvar},
                           {"hyperparams", hyperparams_to_json(m.params)},
                           {"trees", trees}});
    }
    json j{{"version", 1},
           {"k", e.size()},
           {"hyperparams", e.members.empty() ? json::object() : hyperparams_to_json(e.members[0].params)},
           {"members", members}};
    return j.dump();
}

Ensemble ensemble_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SchemaError("ensemble snapshot: invalid JSON");
    if (!j.contains("version") || j["version"].get<int>() != 1)
        throw SchemaError("ensemble snapshot: unsupported version");
    Ensemble e;
    for (const auto& mj : j.at("members")) {
        GbdtModel m;
        m.base_mu = mj.at("base_mu").get<double>();
        m.base_logvar = mj.at("base_logvar").get<double>();
        m.params = hyperparams_from_json(mj.at("hyperparams"));
        for (const auto& tj : mj.at("trees")) {
            if (tj.at("head").get<std::string>() == "mu")
                m.trees_mu.push_back(tree_from_json(tj));
            else
                m.trees_logvar.push_back(tree_from_json(tj));
        }
        e.members.push_back(std::move(m));
    }
    if (e.size() != j.at("k").get<int>()) throw SchemaError("ensemble snapshot: member count mismatch");
    return e;
}

}  // namespace qpred
