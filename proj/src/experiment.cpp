#include "fal/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fal/rng.hpp"
#include "fal/version.hpp"

namespace fal {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void bad_key(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) bad_key(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
        if (allowed.find(key) == allowed.end()) bad_key(path + "." + key, "unknown key");
    }
}

const json& require(const json& j, const std::string& path, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) bad_key(path + "." + key, "missing required key");
    return *it;
}

double get_double(const json& j, const std::string& path, const std::string& key) {
    const json& v = require(j, path, key);
    if (!v.is_number()) bad_key(path + "." + key, "expected a number");
    return v.get<double>();
}

int get_int(const json& j, const std::string& path, const std::string& key) {
    const json& v = require(j, path, key);
    if (!v.is_number_integer()) bad_key(path + "." + key, "expected an integer");
    return v.get<int>();
}

std::uint64_t get_u64(const json& j, const std::string& path, const std::string& key) {
    const json& v = require(j, path, key);
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
        bad_key(path + "." + key, "expected a nonnegative integer");
    }
    if (v.is_number_integer() && v.get<long long>() < 0) {
        bad_key(path + "." + key, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& path, const std::string& key) {
    const json& v = require(j, path, key);
    if (!v.is_string()) bad_key(path + "." + key, "expected a string");
    return v.get<std::string>();
}

bool get_bool_or(const json& j, const std::string& path, const std::string& key, bool fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean()) bad_key(path + "." + key, "expected a boolean");
    return it->get<bool>();
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Settings that must match across compared specs: everything except the
// strategy, the loss toggles, and the output location.
json shared_settings(const ExperimentSpec& spec) {
    json j = spec_to_json(spec);
    j.erase("strategy");
    j.erase("loss");
    j.erase("output_dir");
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

void ExperimentSpec::validate() const {
    if (schema_version != kSpecSchemaVersion) {
        throw ConfigError("schema_version: expected '" + std::string(kSpecSchemaVersion) +
                          "', got '" + schema_version + "'");
    }
    if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
    if (seeds.empty()) throw ConfigError("seeds: need at least one seed");
    if (dataset.kind == DatasetSpec::Kind::synthetic) {
        if (dataset.synthetic.num_classes < 2) throw ConfigError("dataset.num_classes: must be >= 2");
        if (dataset.synthetic.per_class < 1) throw ConfigError("dataset.per_class: must be >= 1");
        if (dataset.synthetic.dim < 1) throw ConfigError("dataset.dim: must be >= 1");
        if (dataset.synthetic.spread < 0.0) throw ConfigError("dataset.spread: must be >= 0");
    } else if (dataset.csv.path.empty()) {
        throw ConfigError("dataset.path: must not be empty");
    }
    if (!(init_labeled_fraction > 0.0 && init_labeled_fraction < 1.0)) {
        throw ConfigError("init_labeled_fraction: must be in (0,1)");
    }
    if (hidden_dim < 1) throw ConfigError("model.hidden_dim: must be >= 1");
    if (feature_dim < 1) throw ConfigError("model.feature_dim: must be >= 1");
    fed.validate();
    if (behavior.mode == BehaviorSpec::Mode::abco && behavior.budget < 0) {
        throw ConfigError("behavior.budget: must be >= 0");
    }
    loss.validate();
    if (fams.enabled) fams.validate();
    switch (partition_kind) {
        case PartitionKind::classes_per_client:
            if (classes_per_client < 1) throw ConfigError("partition.classes_per_client: must be >= 1");
            break;
        case PartitionKind::dirichlet:
            if (!(dirichlet_alpha > 0.0)) throw ConfigError("partition.alpha: must be > 0");
            break;
        case PartitionKind::iid:
            break;
    }
}

ExperimentSpec spec_from_json(const json& j, const std::string& origin) {
    check_keys(j, origin,
               {"schema_version", "output_dir", "seeds", "dataset", "partition",
                "init_labeled_fraction", "model", "federation", "behavior", "strategy", "loss",
                "fams", "score_on_global"});

    ExperimentSpec spec;
    spec.schema_version =
        j.contains("schema_version") ? get_string(j, origin, "schema_version") : kSpecSchemaVersion;
    spec.output_dir = get_string(j, origin, "output_dir");

    const json& jseeds = require(j, origin, "seeds");
    if (!jseeds.is_array() || jseeds.empty()) bad_key(origin + ".seeds", "expected a nonempty array");
    for (const auto& s : jseeds) {
        if (!s.is_number_integer() && !s.is_number_unsigned()) {
            bad_key(origin + ".seeds", "expected integer seeds");
        }
        spec.seeds.push_back(s.get<std::uint64_t>());
    }

    {
        const json& jd = require(j, origin, "dataset");
        const std::string path = origin + ".dataset";
        const std::string type = get_string(jd, path, "type");
        if (type == "synthetic") {
            check_keys(jd, path, {"type", "num_classes", "per_class", "dim", "spread", "seed"});
            spec.dataset.kind = DatasetSpec::Kind::synthetic;
            spec.dataset.synthetic.num_classes = get_int(jd, path, "num_classes");
            spec.dataset.synthetic.per_class = get_int(jd, path, "per_class");
            spec.dataset.synthetic.dim = get_int(jd, path, "dim");
            spec.dataset.synthetic.spread = get_double(jd, path, "spread");
            spec.dataset.synthetic.seed = get_u64(jd, path, "seed");
        } else if (type == "csv") {
            check_keys(jd, path, {"type", "path", "split_seed"});
            spec.dataset.kind = DatasetSpec::Kind::csv;
            spec.dataset.csv.path = get_string(jd, path, "path");
            spec.dataset.csv.split_seed = get_u64(jd, path, "split_seed");
        } else {
            bad_key(path + ".type", "must be 'synthetic' or 'csv'");
        }
    }

    {
        const json& jp = require(j, origin, "partition");
        const std::string path = origin + ".partition";
        const std::string kind = get_string(jp, path, "kind");
        if (kind == "classes_per_client") {
            check_keys(jp, path, {"kind", "classes_per_client"});
            spec.partition_kind = PartitionKind::classes_per_client;
            spec.classes_per_client = get_int(jp, path, "classes_per_client");
        } else if (kind == "dirichlet") {
            check_keys(jp, path, {"kind", "alpha"});
            spec.partition_kind = PartitionKind::dirichlet;
            spec.dirichlet_alpha = get_double(jp, path, "alpha");
        } else if (kind == "iid") {
            check_keys(jp, path, {"kind"});
            spec.partition_kind = PartitionKind::iid;
        } else {
            bad_key(path + ".kind", "must be 'classes_per_client', 'dirichlet' or 'iid'");
        }
    }

    spec.init_labeled_fraction = get_double(j, origin, "init_labeled_fraction");

    {
        const json& jm = require(j, origin, "model");
        const std::string path = origin + ".model";
        check_keys(jm, path, {"hidden_dim", "feature_dim"});
        spec.hidden_dim = get_int(jm, path, "hidden_dim");
        spec.feature_dim = get_int(jm, path, "feature_dim");
    }

    {
        const json& jf = require(j, origin, "federation");
        const std::string path = origin + ".federation";
        check_keys(jf, path,
                   {"num_clients", "rounds", "local_epochs", "learning_rate", "batch_size", "mode",
                    "interval", "reset", "isolated"});
        spec.fed.num_clients = get_int(jf, path, "num_clients");
        spec.fed.rounds = get_int(jf, path, "rounds");
        spec.fed.local_epochs = get_int(jf, path, "local_epochs");
        spec.fed.learning_rate = get_double(jf, path, "learning_rate");
        spec.fed.batch_size = get_int(jf, path, "batch_size");
        const std::string mode =
            jf.contains("mode") ? get_string(jf, path, "mode") : std::string("per_round");
        if (mode == "per_round") {
            spec.fed.mode = FederationMode::per_round;
        } else if (mode == "traditional") {
            spec.fed.mode = FederationMode::traditional;
        } else {
            bad_key(path + ".mode", "must be 'per_round' or 'traditional'");
        }
        spec.fed.interval = jf.contains("interval") ? get_int(jf, path, "interval") : 1;
        const std::string reset =
            jf.contains("reset") ? get_string(jf, path, "reset") : std::string("continual");
        if (reset == "continual") {
            spec.fed.reset = ResetPolicy::continual;
        } else if (reset == "random") {
            spec.fed.reset = ResetPolicy::random_reset;
        } else {
            bad_key(path + ".reset", "must be 'continual' or 'random'");
        }
        spec.fed.isolated = get_bool_or(jf, path, "isolated", false);
    }

    {
        const json& jb = require(j, origin, "behavior");
        const std::string path = origin + ".behavior";
        const std::string mode = get_string(jb, path, "mode");
        if (mode == "abco") {
            check_keys(jb, path, {"mode", "budget"});
            spec.behavior.mode = BehaviorSpec::Mode::abco;
            spec.behavior.budget = get_int(jb, path, "budget");
        } else if (mode == "reco") {
            check_keys(jb, path, {"mode"});
            spec.behavior.mode = BehaviorSpec::Mode::reco;
            spec.behavior.budget = 10;  // aggressive-group budget, used for default thresholds
        } else {
            bad_key(path + ".mode", "must be 'abco' or 'reco'");
        }
    }

    spec.strategy = strategy_from_name(get_string(j, origin, "strategy"));

    if (j.contains("loss")) {
        const json& jl = j.at("loss");
        const std::string path = origin + ".loss";
        check_keys(jl, path, {"mu", "tau"});
        spec.loss.mu = jl.contains("mu") ? get_double(jl, path, "mu") : 0.0;
        spec.loss.tau = jl.contains("tau") ? get_double(jl, path, "tau") : 0.5;
        if (!(spec.loss.tau > 0.0 && spec.loss.tau <= 1.0)) {
            bad_key(path + ".tau", "must be in (0,1]");
        }
        if (spec.loss.mu < 0.0) bad_key(path + ".mu", "must be >= 0");
    } else {
        spec.loss = LossConfig{0.0, 0.5};
    }

    {
        spec.fams = FamsConfig{};
        spec.fams.awaken_threshold = 3 * std::max(1, spec.behavior.budget);
        if (j.contains("fams")) {
            const json& jf = j.at("fams");
            const std::string path = origin + ".fams";
            check_keys(jf, path, {"enabled", "subset_size", "awaken_threshold", "awaken_ratio"});
            spec.fams.enabled = get_bool_or(jf, path, "enabled", true);
            if (jf.contains("subset_size")) spec.fams.subset_size = get_int(jf, path, "subset_size");
            if (jf.contains("awaken_threshold")) {
                spec.fams.awaken_threshold = get_int(jf, path, "awaken_threshold");
            }
            if (jf.contains("awaken_ratio")) {
                spec.fams.awaken_ratio = get_double(jf, path, "awaken_ratio");
            }
        }
    }

    spec.score_on_global = get_bool_or(j, origin, "score_on_global", false);

    spec.validate();
    return spec;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open spec file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": JSON parse error: " + e.what());
    }
    return spec_from_json(j, path);
}

json spec_to_json(const ExperimentSpec& spec) {
    json j;
    j["schema_version"] = spec.schema_version;
    j["output_dir"] = spec.output_dir;
    j["seeds"] = spec.seeds;
    if (spec.dataset.kind == DatasetSpec::Kind::synthetic) {
        j["dataset"] = {{"type", "synthetic"},
                        {"num_classes", spec.dataset.synthetic.num_classes},
                        {"per_class", spec.dataset.synthetic.per_class},
                        {"dim", spec.dataset.synthetic.dim},
                        {"spread", spec.dataset.synthetic.spread},
                        {"seed", spec.dataset.synthetic.seed}};
    } else {
        j["dataset"] = {{"type", "csv"},
                        {"path", spec.dataset.csv.path},
                        {"split_seed", spec.dataset.csv.split_seed}};
    }
    switch (spec.partition_kind) {
        case PartitionKind::classes_per_client:
            j["partition"] = {{"kind", "classes_per_client"},
                              {"classes_per_client", spec.classes_per_client}};
            break;
        case PartitionKind::dirichlet:
            j["partition"] = {{"kind", "dirichlet"}, {"alpha", spec.dirichlet_alpha}};
            break;
        case PartitionKind::iid:
            j["partition"] = {{"kind", "iid"}};
            break;
    }
    j["init_labeled_fraction"] = spec.init_labeled_fraction;
    j["model"] = {{"hidden_dim", spec.hidden_dim}, {"feature_dim", spec.feature_dim}};
    j["federation"] = {
        {"num_clients", spec.fed.num_clients},
        {"rounds", spec.fed.rounds},
        {"local_epochs", spec.fed.local_epochs},
        {"learning_rate", spec.fed.learning_rate},
        {"batch_size", spec.fed.batch_size},
        {"mode", spec.fed.mode == FederationMode::per_round ? "per_round" : "traditional"},
        {"interval", spec.fed.interval},
        {"reset", spec.fed.reset == ResetPolicy::continual ? "continual" : "random"},
        {"isolated", spec.fed.isolated}};
    if (spec.behavior.mode == BehaviorSpec::Mode::abco) {
        j["behavior"] = {{"mode", "abco"}, {"budget", spec.behavior.budget}};
    } else {
        j["behavior"] = {{"mode", "reco"}};
    }
    j["strategy"] = strategy_name(spec.strategy);
    j["loss"] = {{"mu", spec.loss.mu}, {"tau", spec.loss.tau}};
    j["fams"] = {{"enabled", spec.fams.enabled},
                 {"subset_size", spec.fams.subset_size},
                 {"awaken_threshold", spec.fams.awaken_threshold},
                 {"awaken_ratio", spec.fams.awaken_ratio}};
    j["score_on_global"] = spec.score_on_global;
    return j;
}

Dataset build_dataset(const ExperimentSpec& spec) {
    if (spec.dataset.kind == DatasetSpec::Kind::synthetic) {
        const SyntheticSpec& s = spec.dataset.synthetic;
        return make_synthetic(s.num_classes, s.per_class, s.dim, s.spread, s.seed);
    }
    return load_dataset_csv(spec.dataset.csv.path, spec.dataset.csv.split_seed);
}

std::vector<RoundRecord> run_single(const ExperimentSpec& spec, const Dataset& ds,
                                    std::uint64_t run_seed) {
    PartitionSpec pspec;
    pspec.kind = spec.partition_kind;
    pspec.classes_per_client = spec.classes_per_client;
    pspec.alpha = spec.dirichlet_alpha;
    pspec.num_clients = spec.fed.num_clients;
    pspec.seed = derive_seed(run_seed, {seed_tag::partition});

    FederationInputs in;
    in.dataset = &ds;
    in.pools = partition(ds, pspec);
    for (std::size_t k = 0; k < in.pools.size(); ++k) {
        in.pools[k] = init_labeled(in.pools[k], spec.init_labeled_fraction,
                                   derive_seed(run_seed, {seed_tag::init_labeled, k}));
    }
    in.behaviors = spec.behavior.mode == BehaviorSpec::Mode::abco
                       ? abco_profiles(spec.fed.num_clients, spec.behavior.budget)
                       : reco_profiles(spec.fed.num_clients, run_seed);
    in.fed = spec.fed;
    in.fed.seed = run_seed;
    in.fams = spec.fams;
    in.loss = spec.loss;
    in.strategy = spec.strategy;
    in.hidden_dim = spec.hidden_dim;
    in.feature_dim = spec.feature_dim;
    in.score_on_global = spec.score_on_global;
    return run_federation(in);
}

std::string resolve_output_dir(const ExperimentSpec& spec) {
    if (const char* env = std::getenv("FAL_OUTPUT_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return spec.output_dir;
}

void write_metrics_csv(const std::string& path, const std::vector<RoundRecord>& records) {
    // wall_ms is emitted as 0: metrics files are part of the byte-identical
    // determinism surface, so measured timings stay out of them.
    std::ostringstream out;
    out << "round,accuracy,mean_ev,inference_count,labeled_total,wall_ms\n";
    for (const RoundRecord& r : records) {
        out << r.round << ',' << fmt6(r.global_test_accuracy) << ',' << fmt6(r.mean_ev()) << ','
            << r.inference_count << ',' << r.labeled_total() << ',' << 0 << '\n';
    }
    write_text_file(path, out.str());
}

std::vector<RoundRecord> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open metrics file: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "round,accuracy,mean_ev,inference_count,labeled_total,wall_ms") {
        throw ConfigError(path + ": unexpected metrics header");
    }
    std::vector<RoundRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        RoundRecord r;
        double mean_ev = 0.0;
        long long labeled_total = 0;
        long long wall = 0;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lld,%lld,%lld", &r.round,
                        &r.global_test_accuracy, &mean_ev, &r.inference_count, &labeled_total,
                        &wall) != 6) {
            throw ConfigError(path + ": malformed row '" + line + "'");
        }
        r.per_client_mean_ev = {mean_ev};
        r.labeled_sizes = {static_cast<int>(labeled_total)};
        r.wall_time_ms = wall;
        records.push_back(std::move(r));
    }
    return records;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult result;
    result.output_dir = resolve_output_dir(spec);

    std::error_code ec;
    fs::create_directories(result.output_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + result.output_dir);
    {
        // Fail on unwritable targets before any compute starts.
        const std::string probe = result.output_dir + "/.write_probe";
        std::ofstream p(probe, std::ios::trunc);
        if (!p) throw IoError("output directory not writable: " + result.output_dir);
        p.close();
        fs::remove(probe, ec);
    }

    const Dataset ds = build_dataset(spec);
    const std::string strat = strategy_name(spec.strategy);

    for (std::uint64_t seed : spec.seeds) {
        std::vector<RoundRecord> records = run_single(spec, ds, seed);
        const std::string fname = "metrics_" + strat + "_seed" + std::to_string(seed) + ".csv";
        write_metrics_csv(result.output_dir + "/" + fname, records);
        result.metrics_files.push_back(fname);
        result.per_seed_records.push_back(std::move(records));
    }

    // summary.csv: per-round accuracy mean/std across seeds.
    {
        std::ostringstream out;
        out << "strategy,round,acc_mean,acc_std\n";
        const std::size_t n = result.per_seed_records.size();
        for (int r = 0; r < spec.fed.rounds; ++r) {
            double mean = 0.0;
            for (const auto& recs : result.per_seed_records) {
                mean += recs[static_cast<std::size_t>(r)].global_test_accuracy;
            }
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (const auto& recs : result.per_seed_records) {
                const double d = recs[static_cast<std::size_t>(r)].global_test_accuracy - mean;
                var += d * d;
            }
            const double std_dev = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
            out << strat << ',' << r << ',' << fmt6(mean) << ',' << fmt6(std_dev) << '\n';
        }
        write_text_file(result.output_dir + "/summary.csv", out.str());
    }

    // manifest.json describes every emitted file.
    {
        json manifest;
        manifest["schema_version"] = kSpecSchemaVersion;
        manifest["code_version"] = kVersion;
        manifest["spec"] = spec_to_json(spec);
        manifest["seeds"] = spec.seeds;
        // Fixed policies a reader of the outputs should know about.
        manifest["policies"] = {
            {"awakened_samples", "EV traces reset; awakened samples are re-inferred fresh"},
            {"wall_ms_column", "always 0 in files; measured timing goes to stdout"}};
        json files = json::array();
        for (const std::string& f : result.metrics_files) files.push_back(f);
        files.push_back("summary.csv");
        files.push_back("manifest.json");
        manifest["files"] = files;
        write_text_file(result.output_dir + "/manifest.json", manifest.dump(2) + "\n");
    }
    return result;
}

CompareReport compare(std::vector<ExperimentSpec> specs, std::optional<int> seed_count) {
    if (specs.empty()) throw ConfigError("compare: no specs given");
    if (seed_count) {
        if (*seed_count < 1) throw ConfigError("compare: --seeds must be >= 1");
        for (ExperimentSpec& s : specs) {
            s.seeds.clear();
            for (int i = 0; i < *seed_count; ++i) s.seeds.push_back(static_cast<std::uint64_t>(i + 1));
        }
    }

    const json base_shared = shared_settings(specs.front());
    for (std::size_t i = 1; i < specs.size(); ++i) {
        if (shared_settings(specs[i]) != base_shared) {
            throw ConfigError("compare: spec " + std::to_string(i) +
                              " differs from spec 0 beyond strategy/loss toggles");
        }
    }

    const std::string base_dir = resolve_output_dir(specs.front());
    CompareReport report;
    report.rounds = specs.front().fed.rounds;

    std::vector<ExperimentResult> results;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        ExperimentSpec s = specs[i];
        s.output_dir = base_dir + "/cmp" + std::to_string(i) + "_" + strategy_name(s.strategy);
        results.push_back(run_experiment(s));

        CompareColumn col;
        col.label = std::to_string(i) + ":" + strategy_name(s.strategy);
        col.acc_mean.assign(static_cast<std::size_t>(report.rounds), 0.0);
        col.ev_mean.assign(static_cast<std::size_t>(report.rounds), 0.0);
        // Aggregate from the raw metrics files rather than in-memory records.
        for (const std::string& f : results.back().metrics_files) {
            const auto records = read_metrics_csv(results.back().output_dir + "/" + f);
            if (static_cast<int>(records.size()) != report.rounds) {
                throw ProtocolError("compare: metrics file " + f + " has wrong row count");
            }
            for (int r = 0; r < report.rounds; ++r) {
                col.acc_mean[static_cast<std::size_t>(r)] +=
                    records[static_cast<std::size_t>(r)].global_test_accuracy;
                col.ev_mean[static_cast<std::size_t>(r)] +=
                    records[static_cast<std::size_t>(r)].mean_ev();
            }
        }
        const double n = static_cast<double>(results.back().metrics_files.size());
        for (int r = 0; r < report.rounds; ++r) {
            col.acc_mean[static_cast<std::size_t>(r)] /= n;
            col.ev_mean[static_cast<std::size_t>(r)] /= n;
        }
        report.columns.push_back(std::move(col));
    }

    // Deltas against random when present, else against the first spec.
    std::size_t baseline = 0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (specs[i].strategy == Strategy::random) {
            baseline = i;
            break;
        }
    }
    report.baseline = report.columns[baseline].label;
    const double base_final = report.columns[baseline].acc_mean.back();
    for (const CompareColumn& col : report.columns) {
        report.final_accuracy_delta.push_back(col.acc_mean.back() - base_final);
    }

    write_compare_csv(base_dir, report);
    return report;
}

void write_compare_csv(const std::string& dir, const CompareReport& report) {
    std::ostringstream out;
    out << "round";
    for (const CompareColumn& col : report.columns) {
        out << ',' << col.label << "_acc," << col.label << "_ev";
    }
    out << '\n';
    for (int r = 0; r < report.rounds; ++r) {
        out << r;
        for (const CompareColumn& col : report.columns) {
            out << ',' << fmt6(col.acc_mean[static_cast<std::size_t>(r)]) << ','
                << fmt6(col.ev_mean[static_cast<std::size_t>(r)]);
        }
        out << '\n';
    }
    write_text_file(dir + "/comparison.csv", out.str());

    std::ostringstream deltas;
    deltas << "column,final_acc_delta_vs_" << report.baseline << '\n';
    for (std::size_t i = 0; i < report.columns.size(); ++i) {
        deltas << report.columns[i].label << ',' << fmt6(report.final_accuracy_delta[i]) << '\n';
    }
    write_text_file(dir + "/comparison_deltas.csv", deltas.str());
}

}  // namespace fal
