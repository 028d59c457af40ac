// loadsig: appliance signature extraction from whole-house 1 Hz power data.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "loadsig/error.hpp"
#include "loadsig/heaterbench.hpp"
#include "loadsig/pipeline.hpp"
#include "loadsig/sigdb.hpp"
#include "loadsig/synthhome.hpp"

namespace {

using namespace loadsig;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitMismatch = 3;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Data, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorKind::Data, "write failed for " + path);
}

std::vector<ConditionRow> conditions_from(const std::string& spec) {
    if (spec == "builtin:default") return default_condition_table();
    return load_condition_table(spec);
}

struct ExtractOpts {
    std::string input;
    std::string conditions = "builtin:default";
    std::string params;
    std::string out;
    std::string events_out;
    std::string cycles_out;
    std::string epoch;
};

int cmd_extract(const ExtractOpts& o) {
    const auto table = conditions_from(o.conditions);
    const auto params = o.params.empty() ? PipelineParams{} : load_pipeline_params(o.params);
    auto rec = load_recording(o.input);
    if (!o.epoch.empty()) {
        auto e = Epoch::parse(o.epoch);
        e.explicit_value = true;
        rec = rec.with_epoch(e);
    }
    const auto result = extract(rec, table, params);
    const auto db = make_database(result);
    save_database(db, o.out);
    if (!o.events_out.empty()) write_text(o.events_out, format_events_csv(detect_events(rec, params.detect)));
    if (!o.cycles_out.empty()) write_text(o.cycles_out, format_cycles_csv(db));
    std::cout << "recording: " << rec.duration() << " s from " << rec.epoch().to_string() << ", "
              << result.event_count << " events\n";
    std::cout << format_extraction_summary(result);
    std::cout << "database written to " << o.out << "\n";
    return kExitOk;
}

struct SimulateOpts {
    std::string scenario = "builtin:default";
    std::uint64_t seed = 1;
    int days = 0;  // 0: the scenario's own
    std::string out_prefix;
    int waveform_seconds = 0;
};

int cmd_simulate(const SimulateOpts& o) {
    SynthResult data;
    std::function<SynthResult()> run;
    if (o.scenario == "builtin:heater-lab") {
        run = [&] { return heater_lab_scenarios(o.seed).data; };
    } else {
        const auto sc = o.scenario == "builtin:default" ? default_scenario() : load_scenario(o.scenario);
        const int days = o.days > 0 ? o.days : sc.days;
        run = [sc, days, &o] { return generate(sc, o.seed, days); };
    }
    data = run();
    if (!(run().recording == data.recording)) throw Error(ErrorKind::Data, "generator output is not deterministic");

    const auto samples = o.out_prefix + "_samples.csv";
    const auto truth = o.out_prefix + "_truth.csv";
    save_samples_csv(data.recording, samples);
    write_text(truth, format_truth_csv(data.truth.events));
    std::cout << "wrote " << samples << " (" << data.recording.duration() << " s) and " << truth << " ("
              << data.truth.events.size() << " events)\n";
    if (o.waveform_seconds > 0) {
        const auto frames = o.out_prefix + "_frames.bin";
        save_waveform_frames(synthesize_waveforms(data.recording, data.recording.start(),
                                                  data.recording.start() + o.waveform_seconds),
                             frames);
        std::cout << "wrote " << frames << "\n";
    }
    return kExitOk;
}

int cmd_evaluate(const std::string& db_path, const std::string& truth_path, const std::string& out) {
    const auto db = load_database(db_path);
    const auto truth = load_truth_csv(truth_path);
    const auto report = evaluate(db, truth);
    std::cout << format_eval_table(report);
    if (!out.empty()) write_text(out, format_eval_json(report));
    return kExitOk;
}

int cmd_heater_bench(std::uint64_t seed) {
    const auto report = run_heater_bench(seed);
    std::cout << format_heater_report(report);
    return report.all_match ? kExitOk : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Appliance load signature extraction"};
    app.require_subcommand(1);

    ExtractOpts ex;
    auto* extract_cmd = app.add_subcommand("extract", "Extract appliance signatures from a recording");
    extract_cmd->add_option("--input", ex.input, "Samples CSV or waveform frame file")->required();
    extract_cmd->add_option("--conditions", ex.conditions, "Condition table JSON or builtin:default");
    extract_cmd->add_option("--params", ex.params, "Pipeline parameter JSON");
    extract_cmd->add_option("--out", ex.out, "Signature database to write")->required();
    extract_cmd->add_option("--events-out", ex.events_out, "Also write detected events as CSV");
    extract_cmd->add_option("--cycles-out", ex.cycles_out, "Also write reconstructed cycles as CSV");
    extract_cmd->add_option("--epoch", ex.epoch, "Wall-clock time of the first sample, YYYY-MM-DDTHH:MM:SS");

    SimulateOpts sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic recording with ground truth");
    sim_cmd->add_option("--scenario", sim.scenario, "Scenario JSON, builtin:default or builtin:heater-lab");
    sim_cmd->add_option("--seed", sim.seed, "Random seed");
    sim_cmd->add_option("--days", sim.days, "Days to generate (default: the scenario's)")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--out-prefix", sim.out_prefix, "Output path prefix")->required();
    sim_cmd->add_option("--waveform-seconds", sim.waveform_seconds, "Also write waveform frames for the first N s")
        ->check(CLI::NonNegativeNumber);

    std::string db_path, truth_path, report_out;
    auto* eval_cmd = app.add_subcommand("evaluate", "Compare a signature database with a truth log");
    eval_cmd->add_option("--db", db_path, "Signature database")->required();
    eval_cmd->add_option("--truth", truth_path, "Ground-truth CSV")->required();
    eval_cmd->add_option("--out", report_out, "Write the report as JSON");

    std::uint64_t bench_seed = 1;
    auto* bench_cmd = app.add_subcommand("heater-bench", "Run the heater association benchmark");
    bench_cmd->add_option("--seed", bench_seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*extract_cmd) return cmd_extract(ex);
        if (*sim_cmd) return cmd_simulate(sim);
        if (*eval_cmd) return cmd_evaluate(db_path, truth_path, report_out);
        if (*bench_cmd) return cmd_heater_bench(bench_seed);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::Config ? kExitConfig : kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitConfig;
}
