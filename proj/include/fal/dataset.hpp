#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fal/errors.hpp"
#include "fal/index_set.hpp"

namespace fal {

struct Sample {
    std::vector<double> x;
    int label = 0;
};

// Sample IDs are indices into `samples`; train and test are disjoint ID sets.
struct Dataset {
    std::vector<Sample> samples;
    IndexSet train_ids;
    IndexSet test_ids;
    int num_classes = 0;

    int dim() const { return samples.empty() ? 0 : static_cast<int>(samples[0].x.size()); }
};

// Gaussian blob per class. Class means sit on the unit hypersphere (evenly
// spaced on the first-two-coordinates circle for dim >= 2); isotropic noise
// with std = spread. IDs interleave classes so that ID-order tie-breaks do
// not favor one class. Per class, the first 80% of draws go to train.
Dataset make_synthetic(int num_classes, int per_class, int dim, double spread,
                       std::uint64_t seed);

// Plain-text import: header "f0,...,fD,label", one comma-separated row per
// sample. The seeded 80/20 train/test split is stratified by class.
Dataset load_dataset_csv(const std::string& path, std::uint64_t split_seed);

enum class PartitionKind { classes_per_client, dirichlet, iid };

struct PartitionSpec {
    PartitionKind kind = PartitionKind::iid;
    int classes_per_client = 0;  // C_k, used by classes_per_client
    double alpha = 0.0;          // used by dirichlet
    int num_clients = 1;
    std::uint64_t seed = 0;

    void validate(int num_classes) const;
};

// The five per-client pools. labeled/unlabeled/dormant partition the
// client's universe; subset is this round's inference candidates; selected
// is transient within the selection step.
struct ClientPools {
    IndexSet labeled;
    IndexSet unlabeled;
    IndexSet dormant;
    IndexSet subset;
    IndexSet selected;

    std::size_t universe_size() const {
        return labeled.size() + unlabeled.size() + dormant.size();
    }
    // Throws ProtocolError if disjointness or containment is violated.
    void validate() const;
};

// Splits the train side across clients. Union over clients equals the train
// set exactly; pairwise disjoint. All samples land in `unlabeled`.
std::vector<ClientPools> partition(const Dataset& ds, const PartitionSpec& spec);

// Moves a seeded uniform draw of ceil(init_fraction * pool size) IDs from
// unlabeled to labeled. Requires labeled to start empty and the draw to be
// nonempty and strictly smaller than the pool.
ClientPools init_labeled(const ClientPools& pools, double init_fraction, std::uint64_t seed);

}  // namespace fal
