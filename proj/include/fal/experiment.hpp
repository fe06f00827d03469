#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fal/federation.hpp"

namespace fal {

struct SyntheticSpec {
    int num_classes = 2;
    int per_class = 100;
    int dim = 2;
    double spread = 0.2;
    std::uint64_t seed = 0;
};

struct CsvDatasetSpec {
    std::string path;
    std::uint64_t split_seed = 0;
};

struct DatasetSpec {
    enum class Kind { synthetic, csv } kind = Kind::synthetic;
    SyntheticSpec synthetic;
    CsvDatasetSpec csv;
};

struct BehaviorSpec {
    enum class Mode { abco, reco } mode = Mode::abco;
    int budget = 10;  // abco only; reco uses the fixed 5/7/10 group budgets
};

// Everything needed to reproduce a run. Round-trips losslessly through the
// JSON config format.
struct ExperimentSpec {
    std::string schema_version;
    std::string output_dir;
    std::vector<std::uint64_t> seeds;
    DatasetSpec dataset;
    PartitionKind partition_kind = PartitionKind::iid;
    int classes_per_client = 0;
    double dirichlet_alpha = 0.0;
    double init_labeled_fraction = 0.04;
    int hidden_dim = 16;
    int feature_dim = 8;
    FederationConfig fed;  // fed.seed is filled per run, not configured
    BehaviorSpec behavior;
    Strategy strategy = Strategy::random;
    LossConfig loss;
    FamsConfig fams;
    bool score_on_global = false;

    void validate() const;
};

// Parses and validates a spec file. Unknown keys are rejected; defaults
// (tau 0.5, beta 0.4, subset size 500, awaken threshold 3x budget) are
// filled in and appear in the serialized form.
ExperimentSpec load_spec(const std::string& path);
ExperimentSpec spec_from_json(const nlohmann::json& j, const std::string& origin);
nlohmann::json spec_to_json(const ExperimentSpec& spec);

// Builds the dataset named by the spec (shared across run seeds).
Dataset build_dataset(const ExperimentSpec& spec);

// Assembles pools/behaviors/configs for one run seed and executes it.
std::vector<RoundRecord> run_single(const ExperimentSpec& spec, const Dataset& ds,
                                    std::uint64_t run_seed);

// Resolved output location: $FAL_OUTPUT_DIR overrides spec.output_dir.
std::string resolve_output_dir(const ExperimentSpec& spec);

struct ExperimentResult {
    std::string output_dir;
    std::vector<std::string> metrics_files;  // one per seed, relative to output_dir
    std::vector<std::vector<RoundRecord>> per_seed_records;
};

// Runs every seed, writing one metrics CSV per seed plus summary.csv and
// manifest.json. All emitted files are byte-stable across reruns.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Writes records in the metrics CSV format
// (round,accuracy,mean_ev,inference_count,labeled_total,wall_ms).
void write_metrics_csv(const std::string& path, const std::vector<RoundRecord>& records);
std::vector<RoundRecord> read_metrics_csv(const std::string& path);

struct CompareColumn {
    std::string label;  // "<index>:<strategy>"
    std::vector<double> acc_mean;  // per round
    std::vector<double> ev_mean;   // per round
};

struct CompareReport {
    std::string baseline;  // label deltas are measured against
    std::vector<CompareColumn> columns;
    std::vector<double> final_accuracy_delta;  // per column, vs baseline
    int rounds = 0;
};

// Runs each spec (strategies/loss toggles may differ; everything else must
// match) and aggregates per-round means from the raw metrics files. Deltas
// are against the random strategy when present, else the first spec.
CompareReport compare(std::vector<ExperimentSpec> specs, std::optional<int> seed_count);

void write_compare_csv(const std::string& dir, const CompareReport& report);

}  // namespace fal
