#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "fal/acquisition.hpp"
#include "fal/dataset.hpp"
#include "fal/ev.hpp"
#include "fal/fams.hpp"
#include "fal/model.hpp"

namespace fal {

enum class FederationMode { per_round, traditional };
enum class ResetPolicy { continual, random_reset };

struct FederationConfig {
    int num_clients = 1;
    int rounds = 1;
    int local_epochs = 1;   // E
    double learning_rate = 0.1;
    int batch_size = 10;
    FederationMode mode = FederationMode::per_round;
    int interval = 1;                             // traditional: rounds per sampling event
    ResetPolicy reset = ResetPolicy::continual;   // traditional only
    bool isolated = false;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class BehaviorGroup { abco, passive, ordinary, aggressive };

struct BehaviorProfile {
    BehaviorGroup group = BehaviorGroup::abco;
    int budget = 0;   // B_k, samples per annotation event
    int cadence = 1;  // annotate every `cadence` sampling events
};

// Every client annotates `budget` samples every round.
std::vector<BehaviorProfile> abco_profiles(int num_clients, int budget);

// Clients shuffled by seed, then split 2:6:2 into passive/ordinary/
// aggressive annotating 5/7/10 samples every 5/3/1 sampling events.
std::vector<BehaviorProfile> reco_profiles(int num_clients, std::uint64_t seed);

struct RoundRecord {
    int round = 0;
    double global_test_accuracy = 0.0;
    std::vector<double> per_client_mean_ev;
    long long inference_count = 0;  // E * sum_k |subset_k| over trained clients
    std::vector<int> labeled_sizes;
    std::vector<std::vector<int>> selected_ids;
    long long wall_time_ms = 0;  // measured; not part of the deterministic surface

    double mean_ev() const;
    long long labeled_total() const;
};

// Weighted average of client parameters, weights proportional to labeled-set
// sizes. All arches must match; weights must be positive.
ModelState aggregate(const std::vector<std::pair<ModelState, double>>& locals);

// Sub-stream tags for derive_seed(master, {tag, client, round}); public so
// replay-style tests can reproduce the exact randomness of a run.
namespace seed_tag {
inline constexpr std::uint64_t model_init = 1;
inline constexpr std::uint64_t reset = 2;
inline constexpr std::uint64_t local_train = 3;
inline constexpr std::uint64_t awaken = 4;
inline constexpr std::uint64_t subset = 5;
inline constexpr std::uint64_t select = 6;
inline constexpr std::uint64_t partition = 7;
inline constexpr std::uint64_t init_labeled = 8;
inline constexpr std::uint64_t behavior = 9;
}  // namespace seed_tag

struct LocalTrainInput {
    const Dataset* dataset = nullptr;
    const IndexSet* labeled = nullptr;
    const IndexSet* subset = nullptr;      // EV checkpoints run over this set
    const IndexSet* align_pool = nullptr;  // unlabeled IDs that carry a previous-round EV
    const std::map<int, int>* prev_ev = nullptr;
    const ModelState* start_model = nullptr;
    const ModelState* prev_local = nullptr;
    const ModelState* prev_global = nullptr;
    int epochs = 1;
    int batch_size = 10;
    double learning_rate = 0.1;
    LossConfig loss;
    std::uint64_t seed = 0;
};

struct LocalTrainOutput {
    ModelState model;
    EvTracker tracker;  // E epochs recorded, not yet finalized
};

// Runs E epochs of mini-batch SGD on the labeled set. When the alignment
// term is active (mu > 0 and previous-round references present), each
// labeled mini-batch is paired with an equal-size draw from align_pool,
// partitioned against the previous round's mean EV (at-or-below mean ->
// align to the previous local model, above -> to the previous global), and
// the step uses grad(class) + mu * grad(align). After every epoch the
// checkpoint predicts the subset for EV tracking.
LocalTrainOutput local_train(const LocalTrainInput& in);

struct FederationInputs {
    const Dataset* dataset = nullptr;
    std::vector<ClientPools> pools;  // one per client, already seeded with labels
    std::vector<BehaviorProfile> behaviors;
    FederationConfig fed;
    FamsConfig fams;
    LossConfig loss;
    Strategy strategy = Strategy::random;
    int hidden_dim = 16;
    int feature_dim = 8;
    // Score entropy/margin baselines on the received global model instead of
    // the end-of-round local model.
    bool score_on_global = false;
};

// Drives the full protocol: broadcast, per-client awaken/subset/local
// training, acquisition on annotation rounds, freeze, weighted aggregation
// (skipped in isolated mode), evaluation. Deterministic given the seeds.
std::vector<RoundRecord> run_federation(const FederationInputs& in);

double evaluate_accuracy(const ModelState& model, const Dataset& ds, const IndexSet& ids);

bool is_selection_round(const FederationConfig& cfg, int round);
int selection_event_index(const FederationConfig& cfg, int round);

}  // namespace fal
