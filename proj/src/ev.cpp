#include "fal/ev.hpp"

#include <cmath>
#include <string>

namespace fal {

EvTracker::EvTracker(IndexSet subset, int total_epochs)
    : subset_(std::move(subset)), total_epochs_(total_epochs) {
    if (total_epochs_ < 1) throw ContractError("EvTracker: total_epochs must be >= 1");
    for (int id : subset_) {
        EvTrace t;
        t.sample_id = id;
        traces_.emplace(id, std::move(t));
    }
}

void EvTracker::record_epoch(const ModelState& checkpoint, const Dataset& ds, int epoch) {
    std::vector<int> preds;
    preds.reserve(subset_.size());
    for (int id : subset_) {
        preds.push_back(predict(checkpoint, ds.samples[static_cast<std::size_t>(id)].x));
    }
    record_predictions(preds, epoch);
}

void EvTracker::record_predictions(std::span<const int> predictions, int epoch) {
    if (epoch != epochs_recorded_ + 1) {
        throw ProtocolError("EvTracker: expected epoch " + std::to_string(epochs_recorded_ + 1) +
                            ", got " + std::to_string(epoch));
    }
    if (epoch > total_epochs_) {
        throw ProtocolError("EvTracker: epoch " + std::to_string(epoch) + " exceeds E=" +
                            std::to_string(total_epochs_));
    }
    if (predictions.size() != subset_.size()) {
        throw ContractError("EvTracker: prediction count does not match subset size");
    }
    for (std::size_t i = 0; i < subset_.size(); ++i) {
        EvTrace& t = traces_.at(subset_[i]);
        const int pred = predictions[i];
        t.flips.push_back(epoch == 1 ? 0 : static_cast<std::uint8_t>(pred != t.last_prediction));
        t.last_prediction = pred;
        idx::insert(t.classes_seen, pred);
    }
    ++epochs_recorded_;
}

std::map<int, int> EvTracker::finalize() {
    if (epochs_recorded_ != total_epochs_) {
        throw ProtocolError("EvTracker: finalize after " + std::to_string(epochs_recorded_) +
                            " of " + std::to_string(total_epochs_) + " epochs");
    }
    std::map<int, int> ev_map;
    for (auto& [id, trace] : traces_) {
        int ev = 0;
        for (std::uint8_t f : trace.flips) ev += f;
        trace.ev = ev;
        ev_map[id] = ev;
    }
    return ev_map;
}

int class_count_ev(const EvTrace& trace) {
    if (trace.ev < 0) throw ProtocolError("class_count_ev: trace not finalized");
    return trace.ev + trace.distinct_classes();
}

double entropy(const ModelState& model, std::span<const double> x) {
    const ForwardResult f = forward(model, x);
    double q = 0.0;
    for (double p : f.probs) {
        if (p > 0.0) q -= p * std::log(p);
    }
    return q;
}

double gev(const ModelState& local_model, const ModelState& global_model,
           std::span<const double> x) {
    if (!(local_model.arch == global_model.arch)) {
        throw ConfigError("gev: models have different architectures");
    }
    return std::abs(entropy(global_model, x) - entropy(local_model, x));
}

}  // namespace fal
