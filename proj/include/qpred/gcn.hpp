#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "qpred/plan_graph.hpp"

namespace qpred {

struct GcnConfig {
    int hidden_dim = 64;
    int layers = 4;
    double dropout = 0.2;
    int epochs = 40;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;
};

struct GcnExample {
    PlanGraph graph;
    SystemContext ctx;
    double observed_s = 0.0;
};

// log1p + z-score on the numeric slots of node rows and the context vector;
// one-hot slots pass through untouched. Fitted on the training split and
// frozen into the model snapshot.
struct Standardizer {
    Eigen::VectorXd node_mean;  // over node numeric slots
    Eigen::VectorXd node_std;
    Eigen::VectorXd ctx_mean;   // over context numeric slots
    Eigen::VectorXd ctx_std;

    static Standardizer identity();

    Eigen::MatrixXd node_matrix(const PlanGraph& g) const;  // n x kGraphFeatureDim
    Eigen::VectorXd ctx_vector(const SystemContext& ctx) const;
};

// Directed graph convolution over the plan tree: per-node embedding MLP,
// `layers` rounds of child->parent mean aggregation, then a head MLP over
// [root hidden ++ context]. Backward pass is hand-derived; see gcn_grad_check.
class GcnModel {
public:
    struct ConvLayer {
        Eigen::MatrixXd w_self;   // hidden x hidden
        Eigen::MatrixXd w_child;  // hidden x hidden
        Eigen::VectorXd bias;     // hidden
    };

    GcnConfig config;
    Standardizer standardizer;
    Eigen::MatrixXd w_embed;  // hidden x kGraphFeatureDim
    Eigen::VectorXd b_embed;
    std::vector<ConvLayer> conv;
    Eigen::MatrixXd w_head1;  // hidden x (hidden + kContextDim)
    Eigen::VectorXd b_head1;
    Eigen::VectorXd w_head2;  // hidden
    double b_head2 = 0.0;

    static GcnModel init(const GcnConfig& config, std::uint64_t seed);

    double predict_log(const PlanGraph& g, const SystemContext& ctx) const;
    double predict_seconds(const PlanGraph& g, const SystemContext& ctx) const;

    // flat (data pointer, size) views over every parameter tensor, in a fixed order
    std::vector<std::pair<double*, Eigen::Index>> parameter_views();
    Eigen::Index parameter_count() const;

    std::string to_json() const;
    static GcnModel from_json(const std::string& text);
};

// Deterministic given config.seed; returns the parameters with the best
// held-out MSE on log(1 + seconds). Throws ValidationError on empty input.
GcnModel gcn_train(const std::vector<GcnExample>& dataset, const GcnConfig& config);

// Max relative error between analytic parameter gradients of the squared
// error loss and central finite differences (step 1e-4). Dropout disabled.
double gcn_grad_check(GcnModel& model, const GcnExample& example);

// Analytic gradient of (prediction - log1p(observed))^2 wrt all parameters,
// flattened in parameter_views() order. Exposed for the gradient tests.
Eigen::VectorXd gcn_loss_gradient(GcnModel& model, const GcnExample& example);

}  // namespace qpred
