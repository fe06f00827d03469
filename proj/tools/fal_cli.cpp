#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fal/experiment.hpp"
#include "fal/version.hpp"

namespace {

int run_cmd(const std::string& spec_path) {
    const fal::ExperimentSpec spec = fal::load_spec(spec_path);
    const fal::ExperimentResult result = fal::run_experiment(spec);

    long long wall = 0;
    for (const auto& recs : result.per_seed_records) {
        for (const auto& r : recs) wall += r.wall_time_ms;
    }
    std::cout << "wrote " << result.metrics_files.size() << " metrics file(s), summary.csv and "
              << "manifest.json to " << result.output_dir << " (" << wall << " ms compute)\n";
    for (std::size_t i = 0; i < result.per_seed_records.size(); ++i) {
        const auto& recs = result.per_seed_records[i];
        std::cout << "  seed " << spec.seeds[i] << ": final accuracy "
                  << recs.back().global_test_accuracy << ", labeled " << recs.back().labeled_total()
                  << "\n";
    }
    return 0;
}

int compare_cmd(const std::vector<std::string>& spec_paths, std::optional<int> seeds) {
    std::vector<fal::ExperimentSpec> specs;
    specs.reserve(spec_paths.size());
    for (const std::string& p : spec_paths) specs.push_back(fal::load_spec(p));
    const fal::CompareReport report = fal::compare(std::move(specs), seeds);

    std::cout << "per-round mean accuracy / mean EV:\n  round";
    for (const auto& col : report.columns) std::cout << "  " << col.label;
    std::cout << "\n";
    for (int r = 0; r < report.rounds; ++r) {
        std::printf("  %5d", r);
        for (const auto& col : report.columns) {
            std::printf("  %.4f/%.3f", col.acc_mean[static_cast<std::size_t>(r)],
                        col.ev_mean[static_cast<std::size_t>(r)]);
        }
        std::printf("\n");
    }
    std::cout << "final-round accuracy deltas vs " << report.baseline << ":\n";
    for (std::size_t i = 0; i < report.columns.size(); ++i) {
        std::printf("  %-16s %+.4f\n", report.columns[i].label.c_str(),
                    report.final_accuracy_delta[i]);
    }
    return 0;
}

int validate_cmd(const std::string& spec_path) {
    const fal::ExperimentSpec spec = fal::load_spec(spec_path);
    std::cout << fal::spec_to_json(spec).dump(2) << "\n" << spec_path << ": OK\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"falsim: federated active learning simulator"};
    app.set_version_flag("--version", fal::kVersion);
    app.require_subcommand(1);

    std::string run_spec;
    CLI::App* run = app.add_subcommand("run", "run an experiment spec across its seeds");
    run->add_option("spec", run_spec, "experiment spec (JSON)")->required();

    std::vector<std::string> cmp_specs;
    int cmp_seeds = 0;
    CLI::App* cmp = app.add_subcommand("compare", "run several specs and compare strategies");
    cmp->add_option("specs", cmp_specs, "experiment specs (JSON)")->required()->expected(-1);
    cmp->add_option("--seeds", cmp_seeds, "override: use seeds 1..N for every spec");

    std::string val_spec;
    CLI::App* val = app.add_subcommand("validate", "parse a spec and echo the resolved form");
    val->add_option("spec", val_spec, "experiment spec (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_cmd(run_spec);
        if (cmp->parsed()) {
            return compare_cmd(cmp_specs,
                               cmp_seeds > 0 ? std::optional<int>(cmp_seeds) : std::nullopt);
        }
        if (val->parsed()) return validate_cmd(val_spec);
    } catch (const fal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
