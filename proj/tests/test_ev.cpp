#include <doctest.h>

#include <cmath>

#include "fal/ev.hpp"
#include "fal/rng.hpp"
#include "oracles.hpp"

using namespace fal;

namespace {

// Feeds a full prediction history (one sample) through the tracker.
EvTrace run_history(const std::vector<int>& history) {
    EvTracker tracker({0}, static_cast<int>(history.size()));
    for (std::size_t e = 0; e < history.size(); ++e) {
        const std::vector<int> preds{history[e]};
        tracker.record_predictions(preds, static_cast<int>(e) + 1);
    }
    tracker.finalize();
    return tracker.traces().at(0);
}

}  // namespace

TEST_CASE("the dog/cat/cat/zebra/cat history has EV 3") {
    // labels: dog=0, cat=1, zebra=2
    const EvTrace t = run_history({0, 1, 1, 2, 1});
    CHECK(t.flips == std::vector<std::uint8_t>{0, 1, 0, 1, 1});
    CHECK(t.ev == 3);
    CHECK(t.distinct_classes() == 3);
    CHECK(class_count_ev(t) == 6);
}

TEST_CASE("constant history has EV 0 and class-count EV 1") {
    const EvTrace t = run_history({4, 4, 4, 4});
    CHECK(t.ev == 0);
    CHECK(class_count_ev(t) == 1);
}

TEST_CASE("EV matches the brute-force adjacent-flip oracle on random histories") {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const int epochs = 1 + rng.uniform_int(10);
        std::vector<int> history(static_cast<std::size_t>(epochs));
        for (int& h : history) h = rng.uniform_int(5);
        const EvTrace t = run_history(history);
        CHECK(t.ev == oracle::flip_count(history));
        CHECK(class_count_ev(t) == oracle::flip_count(history) + oracle::distinct_count(history));
        CHECK(t.ev <= epochs - 1);
        CHECK(t.flips[0] == 0);
    }
}

TEST_CASE("EV edge cases") {
    CHECK(run_history({7}).ev == 0);  // E = 1: no adjacent pair
    std::vector<int> alternating;
    for (int e = 0; e < 10; ++e) alternating.push_back(e % 2);
    CHECK(run_history(alternating).ev == 9);
}

TEST_CASE("EV is invariant under history reversal") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const int epochs = 2 + rng.uniform_int(9);
        std::vector<int> history(static_cast<std::size_t>(epochs));
        for (int& h : history) h = rng.uniform_int(4);
        std::vector<int> reversed(history.rbegin(), history.rend());
        CHECK(run_history(history).ev == run_history(reversed).ev);
    }
}

TEST_CASE("EV is zero exactly when all predictions agree") {
    Rng rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const int epochs = 2 + rng.uniform_int(6);
        std::vector<int> history(static_cast<std::size_t>(epochs));
        for (int& h : history) h = rng.uniform_int(3);
        bool constant = true;
        for (int h : history) constant = constant && h == history[0];
        CHECK((run_history(history).ev == 0) == constant);
    }
}

TEST_CASE("tracker enforces epoch ordering and completion") {
    EvTracker tracker({0, 1}, 3);
    const std::vector<int> preds{0, 1};
    tracker.record_predictions(preds, 1);
    CHECK_THROWS_AS(tracker.record_predictions(preds, 3), ProtocolError);  // skipped epoch 2
    CHECK_THROWS_AS(tracker.record_predictions(preds, 1), ProtocolError);  // replayed epoch
    CHECK_THROWS_AS(tracker.finalize(), ProtocolError);                    // not all epochs seen
    tracker.record_predictions(preds, 2);
    tracker.record_predictions(preds, 3);
    CHECK_THROWS_AS(tracker.record_predictions(preds, 4), ProtocolError);  // beyond E
    const auto ev = tracker.finalize();
    CHECK(ev.at(0) == 0);
    CHECK(ev.at(1) == 0);

    EvTracker mismatched({0, 1, 2}, 2);
    CHECK_THROWS_AS(mismatched.record_predictions(preds, 1), ContractError);
}

TEST_CASE("record_epoch predicts with the checkpoint model") {
    const Dataset ds = make_synthetic(3, 10, 2, 0.1, 21);
    const ModelState zeros = zero_model(Arch{2, 4, 3, 3});
    IndexSet subset{ds.train_ids.begin(), ds.train_ids.begin() + 5};
    EvTracker tracker(subset, 2);
    tracker.record_epoch(zeros, ds, 1);
    tracker.record_epoch(zeros, ds, 2);
    for (const auto& [id, ev] : tracker.finalize()) {
        CHECK(ev == 0);  // constant predictions from a constant model
    }
}

TEST_CASE("entropy of the uniform model is ln C") {
    const ModelState m = zero_model(Arch{2, 4, 3, 4});
    const std::vector<double> x{0.7, -0.1};
    CHECK(entropy(m, x) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("entropy of a near-one-hot output is near zero") {
    ModelState m = zero_model(Arch{2, 4, 3, 4});
    m.params[m.params.size() - 4] = 30.0;  // one dominant class bias
    const std::vector<double> x{0.0, 0.0};
    CHECK(entropy(m, x) < 0.01);
}

TEST_CASE("entropy matches direct summation over forward probabilities") {
    Rng rng(23);
    const Arch arch{3, 6, 4, 5};
    for (int trial = 0; trial < 50; ++trial) {
        const ModelState m = random_model(arch, rng.next_u64());
        std::vector<double> x(3);
        for (double& v : x) v = rng.normal();
        const auto probs = forward(m, x).probs;
        double want = 0.0;
        for (double p : probs) want -= p * std::log(p);
        CHECK(std::abs(entropy(m, x) - want) < 1e-12);
    }
}

TEST_CASE("gev is the absolute entropy difference") {
    Rng rng(29);
    const Arch arch{3, 6, 4, 5};
    const ModelState a = random_model(arch, 1);
    const ModelState b = random_model(arch, 2);
    std::vector<double> x{0.2, -0.4, 0.9};

    CHECK(gev(a, a, x) == 0.0);
    CHECK(gev(a, b, x) == gev(b, a, x));
    CHECK(gev(a, b, x) == doctest::Approx(std::abs(entropy(a, x) - entropy(b, x))).epsilon(1e-15));
    CHECK(gev(a, b, x) >= 0.0);
    CHECK(gev(a, b, x) <= std::log(5.0));

    const ModelState other = random_model(Arch{3, 6, 4, 4}, 3);
    CHECK_THROWS_AS(gev(a, other, x), ConfigError);
}

TEST_CASE("class_count_ev requires a finalized trace") {
    EvTrace t;
    t.sample_id = 0;
    CHECK_THROWS_AS(class_count_ev(t), ProtocolError);
}
