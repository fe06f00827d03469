#include "fal/federation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>

#include "fal/rng.hpp"

namespace fal {
namespace {

struct ClientState {
    ClientPools pools;
    ModelState model;                      // this round's local model (own model in isolated mode)
    ModelState round_start;                // the model this round's training started from
    std::optional<ModelState> prev_local;  // final local model of the previous round
    std::map<int, int> prev_ev;
    std::optional<EvTracker> tracker;      // this round's finalized traces
    std::map<int, int> ev_map;             // this round's EVs
    bool trained_this_round = false;
    std::size_t universe = 0;
};

Minibatch make_batch(const Dataset& ds, const std::vector<int>& ids, std::size_t begin,
                     std::size_t end) {
    Minibatch b;
    b.x.reserve(end - begin);
    b.y.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        const Sample& s = ds.samples[static_cast<std::size_t>(ids[i])];
        b.x.emplace_back(s.x);
        b.y.push_back(s.label);
    }
    return b;
}

double mean_of(const std::map<int, int>& m) {
    if (m.empty()) return 0.0;
    double s = 0.0;
    for (const auto& [id, v] : m) s += v;
    return s / static_cast<double>(m.size());
}

// Scores the candidate subset for one client under the configured strategy
// and returns the selected IDs. cs.round_start is the model the round
// started from: the received global, or the client's own previous model in
// isolated mode.
std::vector<int> select_for_client(const FederationInputs& in, const ClientState& cs, int budget,
                                   std::uint64_t seed) {
    const Dataset& ds = *in.dataset;
    AcquisitionRequest req;
    req.strategy = in.strategy;
    req.budget = budget;
    req.candidates = cs.pools.subset;
    req.seed = seed;

    const ModelState& score_model = in.score_on_global ? cs.round_start : cs.model;
    std::map<int, std::vector<double>> cand_feats;
    std::vector<std::vector<double>> labeled_feats;

    switch (in.strategy) {
        case Strategy::random:
            break;
        case Strategy::entropy:
            for (int id : req.candidates) {
                req.scores[id] = entropy(score_model, ds.samples[static_cast<std::size_t>(id)].x);
            }
            break;
        case Strategy::margin:
            for (int id : req.candidates) {
                std::vector<double> p =
                    forward(score_model, ds.samples[static_cast<std::size_t>(id)].x).probs;
                std::partial_sort(p.begin(), p.begin() + 2, p.end(), std::greater<double>());
                req.scores[id] = p[0] - p[1];
            }
            break;
        case Strategy::coreset:
            for (int id : req.candidates) {
                cand_feats[id] = forward(cs.model, ds.samples[static_cast<std::size_t>(id)].x).features;
            }
            for (int id : cs.pools.labeled) {
                labeled_feats.push_back(forward(cs.model, ds.samples[static_cast<std::size_t>(id)].x).features);
            }
            break;
        case Strategy::ev:
            for (int id : req.candidates) req.scores[id] = cs.ev_map.at(id);
            break;
        case Strategy::ev_plus_gev:
            for (int id : req.candidates) {
                req.scores[id] = cs.ev_map.at(id) +
                                 gev(cs.model, cs.round_start, ds.samples[static_cast<std::size_t>(id)].x);
            }
            break;
        case Strategy::ev_classcount:
            for (int id : req.candidates) {
                req.scores[id] = class_count_ev(cs.tracker->traces().at(id));
            }
            break;
    }
    return select(req, cand_feats, labeled_feats);
}

}  // namespace

void FederationConfig::validate() const {
    if (num_clients < 1) throw ConfigError("federation.num_clients: must be >= 1");
    if (rounds < 1) throw ConfigError("federation.rounds: must be >= 1");
    if (local_epochs < 1) throw ConfigError("federation.local_epochs: must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("federation.learning_rate: must be > 0");
    if (batch_size < 1) throw ConfigError("federation.batch_size: must be >= 1");
    if (mode == FederationMode::traditional && interval < 1) {
        throw ConfigError("federation.interval: must be >= 1");
    }
}

std::vector<BehaviorProfile> abco_profiles(int num_clients, int budget) {
    if (budget < 0) throw ConfigError("behavior.budget: must be >= 0");
    return std::vector<BehaviorProfile>(static_cast<std::size_t>(num_clients),
                                        BehaviorProfile{BehaviorGroup::abco, budget, 1});
}

std::vector<BehaviorProfile> reco_profiles(int num_clients, std::uint64_t seed) {
    // 2:6:2 split by largest remainder, assigned over a seeded shuffle.
    const double shares[3] = {0.2, 0.6, 0.2};
    int counts[3];
    int assigned = 0;
    double rema[3];
    for (int g = 0; g < 3; ++g) {
        const double exact = shares[g] * num_clients;
        counts[g] = static_cast<int>(std::floor(exact));
        rema[g] = exact - counts[g];
        assigned += counts[g];
    }
    while (assigned < num_clients) {
        int best = 0;
        for (int g = 1; g < 3; ++g) {
            if (rema[g] > rema[best]) best = g;
        }
        counts[best] += 1;
        rema[best] = -1.0;
        ++assigned;
    }

    std::vector<int> order(static_cast<std::size_t>(num_clients));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, {seed_tag::behavior}));
    rng.shuffle(order);

    const BehaviorProfile groups[3] = {
        {BehaviorGroup::passive, 5, 5},
        {BehaviorGroup::ordinary, 7, 3},
        {BehaviorGroup::aggressive, 10, 1},
    };
    std::vector<BehaviorProfile> out(static_cast<std::size_t>(num_clients));
    std::size_t pos = 0;
    for (int g = 0; g < 3; ++g) {
        for (int i = 0; i < counts[g]; ++i) {
            out[static_cast<std::size_t>(order[pos++])] = groups[g];
        }
    }
    return out;
}

double RoundRecord::mean_ev() const {
    if (per_client_mean_ev.empty()) return 0.0;
    double s = 0.0;
    for (double v : per_client_mean_ev) s += v;
    return s / static_cast<double>(per_client_mean_ev.size());
}

long long RoundRecord::labeled_total() const {
    long long s = 0;
    for (int v : labeled_sizes) s += v;
    return s;
}

ModelState aggregate(const std::vector<std::pair<ModelState, double>>& locals) {
    if (locals.empty()) throw ProtocolError("aggregate: no local models");
    const Arch& arch = locals.front().first.arch;
    double total = 0.0;
    for (const auto& [m, w] : locals) {
        if (!(m.arch == arch)) throw ConfigError("aggregate: model arch mismatch");
        if (!(w > 0.0)) throw ContractError("aggregate: weights must be positive");
        total += w;
    }
    ModelState out = zero_model(arch);
    for (const auto& [m, w] : locals) {
        const double c = w / total;
        for (std::size_t i = 0; i < out.params.size(); ++i) out.params[i] += c * m.params[i];
    }
    return out;
}

LocalTrainOutput local_train(const LocalTrainInput& in) {
    const Dataset& ds = *in.dataset;
    if (in.labeled->empty()) throw ContractError("local_train: empty labeled set");
    if (in.epochs < 1) throw ContractError("local_train: epochs must be >= 1");
    if (in.batch_size < 1) throw ContractError("local_train: batch_size must be >= 1");
    in.loss.validate();

    const bool align_active = in.loss.mu > 0.0 && in.prev_ev != nullptr && !in.prev_ev->empty() &&
                              in.prev_local != nullptr && in.prev_global != nullptr &&
                              in.align_pool != nullptr && !in.align_pool->empty();
    double mean_prev_ev = 0.0;
    if (align_active) mean_prev_ev = mean_of(*in.prev_ev);

    Rng rng(in.seed);
    ModelState model = *in.start_model;
    EvTracker tracker(*in.subset, in.epochs);

    std::vector<int> order = *in.labeled;
    for (int epoch = 1; epoch <= in.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(in.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(in.batch_size));
            const Minibatch batch = make_batch(ds, order, start, end);
            LossResult step = class_loss(model, batch);

            if (align_active) {
                const std::vector<int> drawn = rng.sample_without_replacement(
                    *in.align_pool, static_cast<int>(batch.size()));
                std::vector<AlignAnchor> anchors;
                anchors.reserve(drawn.size());
                for (int id : drawn) {
                    const double ev = in.prev_ev->at(id);
                    anchors.push_back({ds.samples[static_cast<std::size_t>(id)].x,
                                       ev <= mean_prev_ev ? AlignSource::local : AlignSource::global});
                }
                const LossResult al = align_loss(model, anchors, *in.prev_local, *in.prev_global, in.loss);
                for (std::size_t i = 0; i < step.grad.size(); ++i) {
                    step.grad[i] += in.loss.mu * al.grad[i];
                }
            }
            model = sgd_step(model, step.grad, in.learning_rate);
        }
        tracker.record_epoch(model, ds, epoch);
    }
    return LocalTrainOutput{std::move(model), std::move(tracker)};
}

double evaluate_accuracy(const ModelState& model, const Dataset& ds, const IndexSet& ids) {
    if (ids.empty()) throw ContractError("evaluate_accuracy: empty evaluation set");
    int correct = 0;
    for (int id : ids) {
        const Sample& s = ds.samples[static_cast<std::size_t>(id)];
        if (predict(model, s.x) == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ids.size());
}

bool is_selection_round(const FederationConfig& cfg, int round) {
    if (cfg.mode == FederationMode::per_round) return true;
    return (round + 1) % cfg.interval == 0;
}

int selection_event_index(const FederationConfig& cfg, int round) {
    if (cfg.mode == FederationMode::per_round) return round;
    return (round + 1) / cfg.interval - 1;
}

std::vector<RoundRecord> run_federation(const FederationInputs& in) {
    const Dataset& ds = *in.dataset;
    in.fed.validate();
    in.loss.validate();
    if (in.fams.enabled) in.fams.validate();
    const int K = in.fed.num_clients;
    if (static_cast<int>(in.pools.size()) != K) {
        throw ContractError("run_federation: pools count does not match num_clients");
    }
    if (static_cast<int>(in.behaviors.size()) != K) {
        throw ContractError("run_federation: behaviors count does not match num_clients");
    }
    for (const auto& b : in.behaviors) {
        if (b.budget < 0 || b.cadence < 1) {
            throw ConfigError("behavior: budget must be >= 0 and cadence >= 1");
        }
    }

    const Arch arch{ds.dim(), in.hidden_dim, in.feature_dim, ds.num_classes};
    ModelState global = random_model(arch, derive_seed(in.fed.seed, {seed_tag::model_init}));

    std::vector<ClientState> clients(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        ClientState& cs = clients[static_cast<std::size_t>(k)];
        cs.pools = in.pools[static_cast<std::size_t>(k)];
        cs.pools.validate();
        cs.universe = cs.pools.universe_size();
        cs.model = global;
    }

    std::vector<RoundRecord> records;
    records.reserve(static_cast<std::size_t>(in.fed.rounds));

    for (int r = 0; r < in.fed.rounds; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        RoundRecord rec;
        rec.round = r;

        if (in.fed.mode == FederationMode::traditional &&
            in.fed.reset == ResetPolicy::random_reset && r % in.fed.interval == 0) {
            global = random_model(
                arch, derive_seed(in.fed.seed, {seed_tag::reset, static_cast<std::uint64_t>(r)}));
        }

        // Per-client: awaken, subset sampling, local training with EV checkpoints.
        for (int k = 0; k < K; ++k) {
            ClientState& cs = clients[static_cast<std::size_t>(k)];
            const auto ku = static_cast<std::uint64_t>(k);
            const auto ru = static_cast<std::uint64_t>(r);

            if (in.fams.enabled) {
                cs.pools = awaken(cs.pools, in.fams, derive_seed(in.fed.seed, {seed_tag::awaken, ku, ru}));
                cs.pools = sample_subset(cs.pools, in.fams, r,
                                         derive_seed(in.fed.seed, {seed_tag::subset, ku, ru}));
            } else {
                cs.pools.subset = cs.pools.unlabeled;
                cs.pools.selected.clear();
            }

            cs.round_start = in.fed.isolated ? cs.model : global;
            const ModelState& start = cs.round_start;
            cs.trained_this_round = false;
            cs.tracker.reset();
            cs.ev_map.clear();

            if (cs.pools.labeled.empty()) {
                std::cerr << "[falsim] round " << r << ": client " << k
                          << " has no labeled data, skipping training\n";
                rec.per_client_mean_ev.push_back(0.0);
                continue;
            }

            LocalTrainInput lt;
            lt.dataset = &ds;
            lt.labeled = &cs.pools.labeled;
            lt.subset = &cs.pools.subset;
            const IndexSet align_pool = [&] {
                IndexSet keys;
                keys.reserve(cs.prev_ev.size());
                for (const auto& [id, ev] : cs.prev_ev) keys.push_back(id);
                return idx::set_intersection(keys, cs.pools.unlabeled);
            }();
            lt.align_pool = &align_pool;
            lt.prev_ev = cs.prev_ev.empty() ? nullptr : &cs.prev_ev;
            lt.start_model = &start;
            lt.prev_local = cs.prev_local ? &*cs.prev_local : nullptr;
            // Alignment needs a global reference; isolated mode has none.
            lt.prev_global = in.fed.isolated ? nullptr : &global;
            lt.epochs = in.fed.local_epochs;
            lt.batch_size = in.fed.batch_size;
            lt.learning_rate = in.fed.learning_rate;
            lt.loss = in.loss;
            lt.seed = derive_seed(in.fed.seed, {seed_tag::local_train, ku, ru});

            LocalTrainOutput out = local_train(lt);
            cs.model = std::move(out.model);
            cs.tracker = std::move(out.tracker);
            cs.ev_map = cs.tracker->finalize();
            cs.trained_this_round = true;

            rec.inference_count += static_cast<long long>(in.fed.local_epochs) *
                                   static_cast<long long>(cs.pools.subset.size());
            rec.per_client_mean_ev.push_back(mean_of(cs.ev_map));
        }

        // Acquisition + pool updates on annotation rounds.
        for (int k = 0; k < K; ++k) {
            ClientState& cs = clients[static_cast<std::size_t>(k)];
            const BehaviorProfile& bp = in.behaviors[static_cast<std::size_t>(k)];
            std::vector<int> selected;

            const bool annotates = is_selection_round(in.fed, r) &&
                                   selection_event_index(in.fed, r) % bp.cadence == 0 &&
                                   cs.trained_this_round;
            if (annotates) {
                selected = select_for_client(
                    in, cs, bp.budget,
                    derive_seed(in.fed.seed, {seed_tag::select, static_cast<std::uint64_t>(k),
                                              static_cast<std::uint64_t>(r)}));
                const IndexSet sel = idx::from_unsorted(selected);
                cs.pools.selected = sel;
                cs.pools.validate();
                if (in.fams.enabled) {
                    cs.pools = freeze(cs.pools, cs.ev_map, sel);
                } else {
                    cs.pools.unlabeled = idx::set_difference(cs.pools.unlabeled, sel);
                    cs.pools.subset.clear();
                    cs.pools.selected.clear();
                }
                cs.pools.labeled = idx::set_union(cs.pools.labeled, sel);
            }
            rec.selected_ids.push_back(std::move(selected));
            rec.labeled_sizes.push_back(static_cast<int>(cs.pools.labeled.size()));

            cs.pools.validate();
            if (cs.pools.universe_size() != cs.universe) {
                throw ProtocolError("run_federation: sample conservation violated for client " +
                                    std::to_string(k));
            }
        }

        // Aggregation and evaluation.
        if (in.fed.isolated) {
            double acc = 0.0;
            for (const ClientState& cs : clients) {
                acc += evaluate_accuracy(cs.model, ds, ds.test_ids);
            }
            rec.global_test_accuracy = acc / static_cast<double>(K);
        } else {
            std::vector<std::pair<ModelState, double>> locals;
            for (const ClientState& cs : clients) {
                if (cs.trained_this_round) {
                    locals.emplace_back(cs.model, static_cast<double>(cs.pools.labeled.size()));
                }
            }
            if (locals.empty()) {
                throw ProtocolError("run_federation: no client trained in round " + std::to_string(r));
            }
            global = aggregate(locals);
            rec.global_test_accuracy = evaluate_accuracy(global, ds, ds.test_ids);
        }

        // Keep this round's local model and EVs as the next round's references.
        for (ClientState& cs : clients) {
            if (cs.trained_this_round) {
                cs.prev_local = cs.model;
                cs.prev_ev = cs.ev_map;
            }
        }

        rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace fal
