#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fal/errors.hpp"

namespace fal {

// Two affine layers with a tanh hidden activation, then an affine classifier
// head with softmax:
//
//   hidden   = tanh(W1 x + b1)
//   features = W2 hidden + b2          (the pre-softmax representation)
//   logits   = W3 features + b3
//   probs    = softmax(logits)
//
// Parameters are stored flat, row-major, in the order W1,b1,W2,b2,W3,b3.
struct Arch {
    int input_dim = 0;
    int hidden_dim = 0;
    int feature_dim = 0;
    int num_classes = 0;

    int param_count() const {
        return hidden_dim * (input_dim + 1) + feature_dim * (hidden_dim + 1) +
               num_classes * (feature_dim + 1);
    }
    bool operator==(const Arch&) const = default;
};

// Immutable value; every operation below returns a new state.
struct ModelState {
    Arch arch;
    std::vector<double> params;
};

ModelState zero_model(const Arch& arch);

// Weights ~ N(0, 1/sqrt(fan_in)), biases zero.
ModelState random_model(const Arch& arch, std::uint64_t seed);

// Throws ConfigError on a params/arch length mismatch or non-finite entries.
void validate_model(const ModelState& model);

struct LossConfig {
    double mu = 0.0;   // tradeoff weight on the alignment term
    double tau = 0.5;  // softmax temperature, in (0, 1]

    void validate() const;
};

struct ForwardResult {
    std::vector<double> hidden;
    std::vector<double> features;
    std::vector<double> probs;
};

// Full forward pass. Throws ContractError if x has the wrong dimension.
ForwardResult forward(const ModelState& model, std::span<const double> x);

// Argmax class; ties break to the smallest index.
int predict(const ModelState& model, std::span<const double> x);

struct Minibatch {
    std::vector<std::span<const double>> x;
    std::vector<int> y;

    std::size_t size() const { return x.size(); }
};

struct LossResult {
    double loss = 0.0;
    std::vector<double> grad;  // same length as params
};

// Mean cross-entropy over the batch plus its gradient.
LossResult class_loss(const ModelState& model, const Minibatch& batch);

// Which frozen reference a sample's representation is pulled towards.
enum class AlignSource { local, global };

struct AlignAnchor {
    std::span<const double> x;
    AlignSource source = AlignSource::local;
};

// Representation-alignment loss. For each anchor the current model's feature
// vector is compared by cosine similarity against the features of two frozen
// reference models (d_loc, d_glo); the loss is the softmax-form
//   -log( exp(d_*/tau) / (exp(d_loc/tau) + exp(d_glo/tau)) )
// averaged over anchors, where d_* is the similarity to the designated
// source. The gradient is with respect to the current model only; no
// gradient flows into the references. Throws DegenerateFeatureError if any
// involved feature vector has norm below 1e-12.
LossResult align_loss(const ModelState& current, std::span<const AlignAnchor> anchors,
                      const ModelState& prev_local, const ModelState& prev_global,
                      const LossConfig& cfg);

// params' = params - eta * grad.
ModelState sgd_step(const ModelState& model, std::span<const double> grad, double eta);

}  // namespace fal
