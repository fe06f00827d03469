#pragma once

#include <map>
#include <span>
#include <vector>

#include "fal/dataset.hpp"
#include "fal/model.hpp"

namespace fal {

// Per-sample flip history across one round's local epochs. flips[0] is
// always 0; the epistemic variation is the number of ones in flips.
struct EvTrace {
    int sample_id = -1;
    std::vector<std::uint8_t> flips;
    int last_prediction = -1;
    std::vector<int> classes_seen;  // sorted distinct predictions
    int ev = -1;                    // set by finalize()

    int distinct_classes() const { return static_cast<int>(classes_seen.size()); }
};

// Records prediction flips over a fixed candidate subset for E consecutive
// epochs (1-based), then yields the per-sample EV map. Each client owns one
// tracker per round.
class EvTracker {
public:
    EvTracker() = default;
    EvTracker(IndexSet subset, int total_epochs);

    // Predicts every subset sample with the checkpoint and records flips.
    // Epochs must arrive in order 1..E.
    void record_epoch(const ModelState& checkpoint, const Dataset& ds, int epoch);

    // Same flip logic fed with precomputed predictions (aligned with the
    // subset order).
    void record_predictions(std::span<const int> predictions, int epoch);

    // Requires exactly E epochs recorded. Sets each trace's ev and returns
    // sample_id -> ev.
    std::map<int, int> finalize();

    int epochs_recorded() const { return epochs_recorded_; }
    int total_epochs() const { return total_epochs_; }
    const IndexSet& subset() const { return subset_; }
    const std::map<int, EvTrace>& traces() const { return traces_; }

private:
    IndexSet subset_;
    int total_epochs_ = 0;
    int epochs_recorded_ = 0;
    std::map<int, EvTrace> traces_;
};

// EV variant that adds the number of distinct predicted classes.
// Requires a finalized trace.
int class_count_ev(const EvTrace& trace);

// Predictive entropy Q = -sum_c p_c ln p_c of the model's softmax output.
double entropy(const ModelState& model, std::span<const double> x);

// |Q(global; x) - Q(local; x)|. Models must share the arch.
double gev(const ModelState& local_model, const ModelState& global_model,
           std::span<const double> x);

}  // namespace fal
