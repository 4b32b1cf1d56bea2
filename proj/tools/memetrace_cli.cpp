#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "memetrace/config.hpp"
#include "memetrace/errors.hpp"
#include "memetrace/pipeline.hpp"
#include "memetrace/synth.hpp"

namespace fs = std::filesystem;
using namespace memetrace;

namespace {

struct Common {
    std::string run_dir = "run";
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool strict = false;
    bool lenient = false;
    StageArgs args;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--run-dir", c.run_dir, "Run directory for artifacts")->capture_default_str();
    sub->add_option("--config", c.config, "INI config file");
    sub->add_option("--seed", c.seed, "Override [run] seed");
    sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
    auto* s = sub->add_flag("--strict", c.strict, "Abort on the first malformed input line");
    auto* l = sub->add_flag("--lenient", c.lenient, "Skip malformed input lines");
    s->excludes(l);
}

RunContext make_context(const Common& c) {
    RunContext ctx;
    ctx.run_dir = c.run_dir;
    if (!c.config.empty()) {
        ctx.config = load_config(c.config);
    } else if (fs::exists(ctx.run_dir / "config.resolved.ini")) {
        ctx.config = load_config(ctx.run_dir / "config.resolved.ini");
    }
    if (c.seed) ctx.config.seed = *c.seed;
    if (c.threads) ctx.config.threads = *c.threads;
    if (c.strict) ctx.config.strict = true;
    if (c.lenient) ctx.config.strict = false;
    ctx.args = c.args;
    return ctx;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"memetrace: track image memes across web communities"};
    app.require_subcommand(1);

    Common common;
    std::string selected;
    auto add_stage = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub, common);
        sub->callback([&, name] { selected = name; });
        return sub;
    };

    add_stage("hash", "Hash post images (or load pre-hashed posts)");
    add_stage("pairwise", "Neighborhoods of seed-community hashes within eps");
    add_stage("cluster", "DBSCAN over the stored neighborhoods");
    add_stage("sweep", "Cluster count and noise share per eps");
    add_stage("annotate", "Match cluster medoids to the annotation corpus");
    add_stage("metric-graph", "Cluster graph under the custom distance");
    add_stage("dendrogram", "Single-linkage dendrogram of annotated clusters");
    add_stage("associate", "Assign every post image to its nearest medoid");
    add_stage("report", "Popularity, temporal and score reports");
    add_stage("hawkes-fit", "Fit per-cluster Hawkes models and attribute influence");
    auto* sim = add_stage("hawkes-sim", "Simulate events from a Hawkes model");
    sim->add_option("--model", common.args.model, "Model JSON (default: largest fitted cluster)");
    sim->add_option("--horizon", common.args.horizon, "Horizon in time units")->capture_default_str();
    auto* inf = add_stage("influence", "Influence percentages of an event stream under a model");
    inf->add_option("--model", common.args.model, "Model JSON (default: largest fitted cluster)");
    inf->add_option("--events", common.args.events, "Events JSONL (default: simulated_events.jsonl)");
    add_stage("kappa", "Fleiss' kappa of the annotation ratings");
    add_stage("all", "Run every stage in order");

    std::string synth_dir;
    SynthOptions synth_opts;
    auto* synth = app.add_subcommand("synth", "Write a small synthetic demo corpus");
    synth->add_option("dir", synth_dir, "Output directory")->required();
    synth->add_option("--seed", synth_opts.seed, "Generator seed")->capture_default_str();
    synth->callback([&] { selected = "synth"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (selected == "synth") {
            write_synthetic_corpus(synth_dir, synth_opts);
            std::cout << "wrote synthetic corpus to " << synth_dir << "\n";
            return 0;
        }
        const RunContext ctx = make_context(common);
        if (selected == "all")
            run_all(ctx);
        else
            run_stage(selected, ctx);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const MissingArtifact& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
