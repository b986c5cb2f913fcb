#include "qpred/gbdt.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "qpred/errors.hpp"
#include "qpred/rng.hpp"

namespace qpred {
namespace {

constexpr double kGainEps = 1e-12;

struct BinnedData {
    int n_feats = 0;
    int n_rows = 0;
    int max_bins = 0;
    std::vector<std::vector<double>> thresholds;  // per feature, ascending midpoints
    std::vector<std::uint8_t> bins;               // row-major [row * n_feats + f]
};

// Candidate thresholds are midpoints between adjacent distinct quantiles of
// the training rows, at most `n_candidates` per feature.
BinnedData bin_features(const Eigen::MatrixXd& x, const std::vector<int>& rows, int n_candidates) {
    BinnedData bd;
    bd.n_feats = static_cast<int>(x.cols());
    bd.n_rows = static_cast<int>(rows.size());
    bd.thresholds.resize(static_cast<std::size_t>(bd.n_feats));
    std::vector<double> values(rows.size());
    for (int f = 0; f < bd.n_feats; ++f) {
        for (std::size_t i = 0; i < rows.size(); ++i) values[i] = x(rows[i], f);
        std::sort(values.begin(), values.end());
        auto& thr = bd.thresholds[static_cast<std::size_t>(f)];
        double prev_q = values.front();
        for (int c = 1; c <= n_candidates; ++c) {
            const std::size_t pos = std::min(values.size() - 1, values.size() * static_cast<std::size_t>(c) / static_cast<std::size_t>(n_candidates + 1));
            const double q = values[pos];
            if (q > prev_q) thr.push_back(0.5 * (prev_q + q));
            prev_q = q;
        }
        if (values.back() > prev_q) thr.push_back(0.5 * (prev_q + values.back()));
        if (thr.size() > 254) thr.resize(254);  // keep bin indices in uint8
        bd.max_bins = std::max(bd.max_bins, static_cast<int>(thr.size()) + 1);
    }
    bd.bins.resize(rows.size() * static_cast<std::size_t>(bd.n_feats));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int f = 0; f < bd.n_feats; ++f) {
            const auto& thr = bd.thresholds[static_cast<std::size_t>(f)];
            const double v = x(rows[i], f);
            const auto it = std::lower_bound(thr.begin(), thr.end(), v);
            bd.bins[i * static_cast<std::size_t>(bd.n_feats) + static_cast<std::size_t>(f)] =
                static_cast<std::uint8_t>(it - thr.begin());
        }
    }
    return bd;
}

enum class LeafRule { kMean, kMedian };

// Grows one least-squares tree on `structure` (the negative gradients); leaf
// values aggregate `leaf_src` under `rule` and are clipped to +-leaf_clip.
class TreeBuilder {
public:
    TreeBuilder(const BinnedData& bd, const GbdtHyperparams& hp)
        : bd_(bd), hp_(hp), counts_(static_cast<std::size_t>(bd.n_feats * bd.max_bins)),
          sums_(static_cast<std::size_t>(bd.n_feats * bd.max_bins)),
          feature_order_(static_cast<std::size_t>(bd.n_feats)) {
        std::iota(feature_order_.begin(), feature_order_.end(), 0);
    }

    RegressionTree fit(const std::vector<double>& structure, const std::vector<double>& leaf_src,
                       LeafRule rule, Rng& rng, std::vector<double>& row_pred) {
        tree_ = RegressionTree{};
        row_pred.assign(static_cast<std::size_t>(bd_.n_rows), 0.0);
        order_.resize(static_cast<std::size_t>(bd_.n_rows));
        std::iota(order_.begin(), order_.end(), 0);
        rng.shuffle(feature_order_);
        grow(0, bd_.n_rows, 0, structure, leaf_src, rule, row_pred);
        return std::move(tree_);
    }

private:
    // Returns the link for this subtree: a split index, or -(leaf_idx + 1).
    // Links are patched by index after recursion since splits may reallocate.
    int grow(int begin, int end, int depth, const std::vector<double>& structure,
             const std::vector<double>& leaf_src, LeafRule rule, std::vector<double>& row_pred) {
        const int n = end - begin;
        int best_feature = -1;
        int best_bin = -1;
        double best_gain = 0.0;
        if (depth < hp_.max_depth && n >= hp_.min_samples_split) {
            find_best_split(begin, end, structure, best_feature, best_bin, best_gain);
        }
        if (best_feature < 0) {
            return -(make_leaf(begin, end, leaf_src, rule, row_pred) + 1);
        }
        const double threshold = bd_.thresholds[static_cast<std::size_t>(best_feature)][static_cast<std::size_t>(best_bin)];
        const int split_idx = static_cast<int>(tree_.splits.size());
        tree_.splits.push_back({best_feature, threshold, 0, 0});
        const auto mid_it = std::partition(
            order_.begin() + begin, order_.begin() + end, [&](int row) {
                return bin_of(row, best_feature) <= best_bin;
            });
        const int mid = static_cast<int>(mid_it - order_.begin());
        const int left = grow(begin, mid, depth + 1, structure, leaf_src, rule, row_pred);
        const int right = grow(mid, end, depth + 1, structure, leaf_src, rule, row_pred);
        tree_.splits[static_cast<std::size_t>(split_idx)].left = left;
        tree_.splits[static_cast<std::size_t>(split_idx)].right = right;
        return split_idx;
    }

    int bin_of(int row, int feature) const {
        return bd_.bins[static_cast<std::size_t>(row) * static_cast<std::size_t>(bd_.n_feats) +
                        static_cast<std::size_t>(feature)];
    }

    void find_best_split(int begin, int end, const std::vector<double>& structure,
                         int& best_feature, int& best_bin, double& best_gain) {
        const int n = end - begin;
        std::fill(counts_.begin(), counts_.end(), 0);
        std::fill(sums_.begin(), sums_.end(), 0.0);
        double total = 0.0;
        for (int i = begin; i < end; ++i) {
            const int row = order_[static_cast<std::size_t>(i)];
            const double g = structure[static_cast<std::size_t>(row)];
            total += g;
            const std::uint8_t* row_bins = &bd_.bins[static_cast<std::size_t>(row) * static_cast<std::size_t>(bd_.n_feats)];
            for (int f = 0; f < bd_.n_feats; ++f) {
                const std::size_t slot = static_cast<std::size_t>(f * bd_.max_bins + row_bins[f]);
                counts_[slot] += 1;
                sums_[slot] += g;
            }
        }
        const double parent_score = total * total / static_cast<double>(n);
        best_gain = parent_score + kGainEps;
        for (int fo : feature_order_) {
            const auto& thr = bd_.thresholds[static_cast<std::size_t>(fo)];
            if (thr.empty()) continue;
            int n_left = 0;
            double sum_left = 0.0;
            for (int b = 0; b < static_cast<int>(thr.size()); ++b) {
                const std::size_t slot = static_cast<std::size_t>(fo * bd_.max_bins + b);
                n_left += counts_[slot];
                sum_left += sums_[slot];
                const int n_right = n - n_left;
                if (n_left < hp_.min_samples_leaf || n_right < hp_.min_samples_leaf) continue;
                const double sum_right = total - sum_left;
                const double gain = sum_left * sum_left / static_cast<double>(n_left) +
                                    sum_right * sum_right / static_cast<double>(n_right);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = fo;
                    best_bin = b;
                }
            }
        }
    }

    int make_leaf(int begin, int end, const std::vector<double>& leaf_src, LeafRule rule,
                  std::vector<double>& row_pred) {
        double value = 0.0;
        if (rule == LeafRule::kMean) {
            double s = 0.0;
            for (int i = begin; i < end; ++i) s += leaf_src[static_cast<std::size_t>(order_[static_cast<std::size_t>(i)])];
            value = s / static_cast<double>(end - begin);
        } else {
            scratch_.clear();
            for (int i = begin; i < end; ++i) scratch_.push_back(leaf_src[static_cast<std::size_t>(order_[static_cast<std::size_t>(i)])]);
            const std::size_t mid = scratch_.size() / 2;
            std::nth_element(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(mid), scratch_.end());
            value = scratch_[mid];
            if (scratch_.size() % 2 == 0) {
                const double lower = *std::max_element(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(mid));
                value = 0.5 * (lower + value);
            }
        }
        value = std::clamp(value, -hp_.leaf_clip, hp_.leaf_clip);
        const int leaf_idx = static_cast<int>(tree_.leaves.size());
        tree_.leaves.push_back(value);
        for (int i = begin; i < end; ++i) row_pred[static_cast<std::size_t>(order_[static_cast<std::size_t>(i)])] = value;
        return leaf_idx;
    }

    const BinnedData& bd_;
    const GbdtHyperparams& hp_;
    RegressionTree tree_;
    std::vector<int> order_;
    std::vector<int> counts_;
    std::vector<double> sums_;
    std::vector<int> feature_order_;
    std::vector<double> scratch_;
};

struct RowSplit {
    std::vector<int> train;
    std::vector<int> val;
};

RowSplit split_rows(int n, double val_fraction, Rng& rng) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    const int n_val = static_cast<int>(val_fraction * n);
    RowSplit s;
    s.val.assign(idx.begin(), idx.begin() + n_val);
    s.train.assign(idx.begin() + n_val, idx.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    return s;
}

double clamp_logvar(double lv, const GbdtHyperparams& hp) {
    return std::max(hp.logvar_floor, std::min(hp.logvar_ceiling, lv));
}

}  // namespace

void pool_to_matrix(const TrainingPool& pool, Eigen::MatrixXd& x, Eigen::VectorXd& y_log) {
    const auto entries = pool.entries();
    x.resize(static_cast<Eigen::Index>(entries.size()), kLocalFeatureDim);
    y_log.resize(static_cast<Eigen::Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = entries[i]->features.values;
        y_log[static_cast<Eigen::Index>(i)] = latency_to_log(entries[i]->observed_s);
    }
}

GbdtModel fit_gbdt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y_log,
                   const GbdtHyperparams& hp, std::uint64_t seed) {
    const int n = static_cast<int>(y_log.size());
    if (static_cast<std::size_t>(n) < hp.min_pool)
        throw UnderTrainedError("gbdt: " + std::to_string(n) + " examples, need >= " +
                                std::to_string(hp.min_pool));
    Rng rng(seed);
    RowSplit rs = split_rows(n, hp.validation_fraction, rng);
    const bool has_val = !rs.val.empty();
    const auto& monitor_rows = has_val ? rs.val : rs.train;

    GbdtModel model;
    model.params = hp;
    const int n_train = static_cast<int>(rs.train.size());
    double mean = 0.0;
    for (int r : rs.train) mean += y_log[r];
    mean /= static_cast<double>(n_train);
    double var = 0.0;
    for (int r : rs.train) var += (y_log[r] - mean) * (y_log[r] - mean);
    var /= static_cast<double>(n_train);
    model.base_mu = mean;
    model.base_logvar = clamp_logvar(std::log(std::max(var, std::exp(hp.logvar_floor))), hp);

    BinnedData bd = bin_features(x, rs.train, hp.quantile_candidates);
    TreeBuilder builder(bd, hp);

    std::vector<double> mu_acc(static_cast<std::size_t>(n_train), model.base_mu);
    std::vector<double> lv_acc(static_cast<std::size_t>(n_train), model.base_logvar);
    std::vector<double> mon_mu(monitor_rows.size(), model.base_mu);
    std::vector<double> mon_lv(monitor_rows.size(), model.base_logvar);
    std::vector<double> g_mu(static_cast<std::size_t>(n_train));
    std::vector<double> g_lv(static_cast<std::size_t>(n_train));
    std::vector<double> pred_mu;
    std::vector<double> pred_lv;
    Eigen::VectorXd row_buf(x.cols());

    double best_metric = std::numeric_limits<double>::infinity();
    int best_round = -1;
    for (int round = 0; round < hp.n_estimators; ++round) {
        for (int i = 0; i < n_train; ++i) {
            const NllGrad g = nll_loss(mu_acc[static_cast<std::size_t>(i)],
                                       clamp_logvar(lv_acc[static_cast<std::size_t>(i)], hp),
                                       y_log[rs.train[static_cast<std::size_t>(i)]]);
            g_mu[static_cast<std::size_t>(i)] = -g.d_mu;
            g_lv[static_cast<std::size_t>(i)] = -g.d_logvar;
        }
        model.trees_mu.push_back(builder.fit(g_mu, g_mu, LeafRule::kMean, rng, pred_mu));
        model.trees_logvar.push_back(builder.fit(g_lv, g_lv, LeafRule::kMean, rng, pred_lv));
        for (int i = 0; i < n_train; ++i) {
            mu_acc[static_cast<std::size_t>(i)] += hp.learning_rate * pred_mu[static_cast<std::size_t>(i)];
            lv_acc[static_cast<std::size_t>(i)] += hp.learning_rate * pred_lv[static_cast<std::size_t>(i)];
        }
        double metric = 0.0;
        if (has_val) {
            for (std::size_t i = 0; i < monitor_rows.size(); ++i) {
                row_buf = x.row(monitor_rows[i]);
                mon_mu[i] += hp.learning_rate * model.trees_mu.back().value(row_buf);
                mon_lv[i] += hp.learning_rate * model.trees_logvar.back().value(row_buf);
                metric += nll_loss(mon_mu[i], clamp_logvar(mon_lv[i], hp), y_log[monitor_rows[i]]).loss;
            }
        } else {
            for (int i = 0; i < n_train; ++i)
                metric += nll_loss(mu_acc[static_cast<std::size_t>(i)],
                                   clamp_logvar(lv_acc[static_cast<std::size_t>(i)], hp),
                                   y_log[rs.train[static_cast<std::size_t>(i)]]).loss;
        }
        metric /= static_cast<double>(has_val ? monitor_rows.size() : static_cast<std::size_t>(n_train));
        if (metric < best_metric - 1e-9) {
            best_metric = metric;
            best_round = round;
        } else if (round - best_round >= hp.early_stopping_patience) {
            break;
        }
    }
    model.trees_mu.resize(static_cast<std::size_t>(best_round + 1));
    model.trees_logvar.resize(static_cast<std::size_t>(best_round + 1));
    return model;
}

GbdtModel fit_gbdt(const TrainingPool& pool, const GbdtHyperparams& hp, std::uint64_t seed) {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    pool_to_matrix(pool, x, y);
    return fit_gbdt(x, y, hp, seed);
}

BaselineModel fit_baseline(const Eigen::MatrixXd& x, const Eigen::VectorXd& y_log,
                           const GbdtHyperparams& hp, std::uint64_t seed) {
    const int n = static_cast<int>(y_log.size());
    if (static_cast<std::size_t>(n) < hp.min_pool)
        throw UnderTrainedError("baseline: " + std::to_string(n) + " examples, need >= " +
                                std::to_string(hp.min_pool));
    Rng rng(seed);
    RowSplit rs = split_rows(n, hp.validation_fraction, rng);
    const bool has_val = !rs.val.empty();

    BaselineModel model;
    model.params = hp;
    {
        std::vector<double> ys;
        ys.reserve(rs.train.size());
        for (int r : rs.train) ys.push_back(y_log[r]);
        const std::size_t mid = ys.size() / 2;
        std::nth_element(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(mid), ys.end());
        model.base = ys[mid];
        if (ys.size() % 2 == 0) {
            const double lower = *std::max_element(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(mid));
            model.base = 0.5 * (lower + model.base);
        }
    }

    BinnedData bd = bin_features(x, rs.train, hp.quantile_candidates);
    TreeBuilder builder(bd, hp);
    const int n_train = static_cast<int>(rs.train.size());
    std::vector<double> acc(static_cast<std::size_t>(n_train), model.base);
    std::vector<double> mon(rs.val.size(), model.base);
    std::vector<double> sign_g(static_cast<std::size_t>(n_train));
    std::vector<double> residual(static_cast<std::size_t>(n_train));
    std::vector<double> pred;
    Eigen::VectorXd row_buf(x.cols());

    double best_metric = std::numeric_limits<double>::infinity();
    int best_round = -1;
    for (int round = 0; round < hp.n_estimators; ++round) {
        for (int i = 0; i < n_train; ++i) {
            const double r = y_log[rs.train[static_cast<std::size_t>(i)]] - acc[static_cast<std::size_t>(i)];
            residual[static_cast<std::size_t>(i)] = r;
            sign_g[static_cast<std::size_t>(i)] = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
        }
        model.trees.push_back(builder.fit(sign_g, residual, LeafRule::kMedian, rng, pred));
        for (int i = 0; i < n_train; ++i)
            acc[static_cast<std::size_t>(i)] += hp.learning_rate * pred[static_cast<std::size_t>(i)];
        double metric = 0.0;
        if (has_val) {
            for (std::size_t i = 0; i < rs.val.size(); ++i) {
                row_buf = x.row(rs.val[i]);
                mon[i] += hp.learning_rate * model.trees.back().value(row_buf);
                metric += std::abs(y_log[rs.val[i]] - mon[i]);
            }
            metric /= static_cast<double>(rs.val.size());
        } else {
            for (int i = 0; i < n_train; ++i)
                metric += std::abs(y_log[rs.train[static_cast<std::size_t>(i)]] - acc[static_cast<std::size_t>(i)]);
            metric /= static_cast<double>(n_train);
        }
        if (metric < best_metric - 1e-9) {
            best_metric = metric;
            best_round = round;
        } else if (round - best_round >= hp.early_stopping_patience) {
            break;
        }
    }
    model.trees.resize(static_cast<std::size_t>(best_round + 1));
    return model;
}

BaselineModel fit_baseline(const TrainingPool& pool, const GbdtHyperparams& hp, std::uint64_t seed) {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    pool_to_matrix(pool, x, y);
    return fit_baseline(x, y, hp, seed);
}

}  // namespace qpred
