#include "apex/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "apex/maintenance.hpp"
#include "apex/memory.hpp"
#include "apex/orchestrator.hpp"
#include "apex/sim.hpp"

namespace apex {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, std::string_view text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + p.string());
}

struct Paths {
    fs::path root;
    fs::path ns(const std::string& name) const {
        if (name.empty() || name.find('/') != std::string::npos || name == "." || name == "..") {
            throw Error(ErrorCode::InvalidArgument, "bad namespace name '" + name + "'");
        }
        return root / name;
    }
    fs::path log(const std::string& name) const { return ns(name) / "log.jsonl"; }
    fs::path metrics(const std::string& name) const { return ns(name) / "metrics.json"; }
};

std::unique_ptr<Memory> open_existing(const Paths& paths, const std::string& name) {
    if (!fs::exists(paths.log(name))) {
        throw Error(ErrorCode::NotFound, "namespace '" + name + "' does not exist (run init first)");
    }
    return Memory::open(paths.ns(name));
}

StructuralSignature parse_sig(const std::string& text) {
    StructuralSignature sig;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        sig.ops.push_back(is_op_id(item) ? item : op_id_from_text(item));
    }
    return sig;
}

Json diagnostics_json(const std::vector<Orchestrator::EpochResult>& details) {
    Json out = Json::array();
    int epoch = 0;
    for (const auto& d : details) {
        std::size_t empty = 0, pos = 0, neg = 0, failures = 0, committed = 0;
        for (const auto& o : d.outcomes) {
            if (o.positives + o.negatives == 0) ++empty;
            pos += o.positives;
            neg += o.negatives;
            failures += o.hook_failure ? 1 : 0;
            committed += o.committed ? 1 : 0;
        }
        const double n = d.outcomes.empty() ? 1.0 : static_cast<double>(d.outcomes.size());
        out.push_back({{"epoch", ++epoch},
                       {"empty_retrievals", empty},
                       {"mean_positives", static_cast<double>(pos) / n},
                       {"mean_negatives", static_cast<double>(neg) / n},
                       {"hook_failures", failures},
                       {"committed", committed}});
    }
    return out;
}

std::string summary_table(const MetricsLedger& ledger) {
    std::string out = "epoch      SR     CSR  mean_iter  first_attempt\n";
    for (const auto& e : ledger.epochs) {
        char line[96];
        std::snprintf(line, sizeof line, "%5d  %6.3f  %6.3f  %9.3f  %13.3f\n", e.epoch, e.sr, e.csr,
                      e.mean_iterations, e.first_attempt_rate);
        out += line;
    }
    out += "flips (consecutive FAIL->PASS): " + std::to_string(ledger.flips.size()) + "\n";
    return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Experience-memory engine and learning-loop simulator", "apex"};
    app.require_subcommand(1);
    std::string root = "apex_data";
    bool verbose = false;
    app.add_option("--root", root, "Directory holding namespaces");
    app.add_flag("-v,--verbose", verbose, "Debug logging");

    std::string ns, file, out_file, task_text, sig_text, exp_id, preset_name = "A2", tasks_file,
        config_file, commit_mode, domains_text;
    int epochs = 1, parallelism = 1, max_iterations = 0, count = 200;
    std::uint64_t seed = 1;
    std::vector<std::string> inputs;

    auto* init = app.add_subcommand("init", "Create an empty namespace");
    init->add_option("ns", ns)->required();

    auto* seed_cmd = app.add_subcommand("seed", "Import seed experiences (one serialized record per line)");
    seed_cmd->add_option("ns", ns)->required();
    seed_cmd->add_option("file", file)->required();

    auto* run = app.add_subcommand("run", "Run simulated epochs against a namespace");
    run->add_option("ns", ns)->required();
    run->add_option("--preset", preset_name, "A0 A1 A2 A3 R1 EG1 EG2 A5");
    run->add_option("--config", config_file, "JSON config overriding the preset");
    run->add_option("--epochs", epochs)->check(CLI::PositiveNumber);
    run->add_option("--seed", seed);
    run->add_option("--tasks", tasks_file, "Task file; generated from the seed when absent");
    run->add_option("--count", count, "Generated task count")->check(CLI::PositiveNumber);
    run->add_option("--domains", domains_text, "Comma-separated domains for generated tasks");
    run->add_option("--parallelism", parallelism)->check(CLI::PositiveNumber);
    run->add_option("--max-iterations", max_iterations)->check(CLI::PositiveNumber);
    run->add_option("--commit-mode", commit_mode)->check(CLI::IsMember({"immediate", "epoch_boundary"}));

    auto* retrieve_cmd = app.add_subcommand("retrieve", "Rank stored experiences for a task");
    retrieve_cmd->add_option("ns", ns)->required();
    retrieve_cmd->add_option("--task", task_text)->required();
    retrieve_cmd->add_option("--sig", sig_text, "Comma-separated operations")->required();
    retrieve_cmd->add_option("--preset", preset_name);

    auto* inspect = app.add_subcommand("inspect", "Print one experience");
    inspect->add_option("ns", ns)->required();
    inspect->add_option("id", exp_id)->required();

    auto* compact_cmd = app.add_subcommand("compact", "Archive dominated experiences, consolidate templates");
    compact_cmd->add_option("ns", ns)->required();

    auto* metrics = app.add_subcommand("metrics", "Write the last run's metrics ledger");
    metrics->add_option("ns", ns)->required();
    metrics->add_option("--out", out_file);

    auto* export_cmd = app.add_subcommand("export", "Write the namespace log");
    export_cmd->add_option("ns", ns)->required();
    export_cmd->add_option("file", file)->required();

    auto* import_cmd = app.add_subcommand("import", "Load an exported log into a fresh namespace");
    import_cmd->add_option("ns", ns)->required();
    import_cmd->add_option("file", file)->required();

    auto* plot = app.add_subcommand("plot", "Render SR/CSR learning curves to SVG");
    plot->add_option("inputs", inputs, "Namespaces or metrics files")->required();
    plot->add_option("--out", out_file)->required();

    auto* gen = app.add_subcommand("gen-tasks", "Write a synthetic task file");
    gen->add_option("--seed", seed);
    gen->add_option("--count", count)->check(CLI::PositiveNumber);
    gen->add_option("--domains", domains_text);
    gen->add_option("--out", out_file)->required();

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);
    const Paths paths{root};
    auto domain_list = [&] {
        std::vector<std::string> d;
        std::stringstream ss(domains_text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) d.push_back(item);
        }
        return d;
    };

    try {
        if (*init) {
            if (fs::exists(paths.log(ns))) throw Error(ErrorCode::DuplicateId, "namespace '" + ns + "' exists");
            Memory::open(paths.ns(ns));
            out << "initialized " << paths.ns(ns).string() << "\n";
        } else if (*seed_cmd) {
            auto mem = open_existing(paths, ns);
            EntityResolver resolver(*mem);
            std::stringstream lines(read_file(file));
            std::string line;
            std::size_t n = 0, lineno = 0;
            while (std::getline(lines, line)) {
                ++lineno;
                if (line.empty() || line.front() == '#') continue;
                ExperienceRecord rec;
                try {
                    rec = parse_experience(line);
                } catch (const Error& e) {
                    throw Error(e.code(), "seed line " + std::to_string(lineno) + ": " + e.what());
                }
                auto r = commit(resolver, std::move(rec));
                out << "seeded " << render_id(NodeKind::Experience, r.id) << "\n";
                ++n;
            }
            out << n << " experiences seeded\n";
        } else if (*run) {
            auto mem = open_existing(paths, ns);
            PrgiiConfig cfg = preset(preset_name);
            if (!config_file.empty()) {
                Json j = Json::parse(read_file(config_file));
                if (!j.contains("preset")) j["preset"] = preset_name;
                cfg = config_from_json(j);
            }
            if (run->count("--parallelism")) cfg.parallelism = parallelism;
            if (max_iterations > 0) cfg.max_iterations = max_iterations;
            if (!commit_mode.empty()) cfg.commit_mode = commit_mode_from_string(commit_mode);
            const auto world = sim::World::generate(seed);
            const auto tasks = tasks_file.empty()
                                   ? world.generate_tasks(static_cast<std::size_t>(count), seed, domain_list())
                                   : sim::load_tasks(world, tasks_file);
            sim::SimHooks hooks(tasks, seed);
            Orchestrator orch(*mem, cfg, hooks.hooks(), world.canon());
            std::vector<Orchestrator::EpochResult> details;
            const auto ledger = orch.run_epochs(sim::specs(tasks), epochs, &details);
            Json doc = {{"config", config_to_json(cfg)},
                        {"seed", seed},
                        {"tasks", tasks.size()},
                        {"ledger", ledger_to_json(ledger)},
                        {"diagnostics", diagnostics_json(details)}};
            write_file(paths.metrics(ns), doc.dump(2) + "\n");
            out << cfg.name << " on " << tasks.size() << " tasks\n" << summary_table(ledger);
        } else if (*retrieve_cmd) {
            auto mem = open_existing(paths, ns);
            const auto cfg = preset(preset_name);
            const auto bundle = mem->read([&](const Memory& m) {
                return retrieve(m, m.embedder().embed(task_text), parse_sig(sig_text), cfg.retrieval);
            });
            out << bundle_to_json(bundle).dump(2) << "\n";
        } else if (*inspect) {
            auto mem = open_existing(paths, ns);
            const NodeId id = parse_node_id(exp_id);
            const auto* entry = mem->experience(id);
            if (!entry) throw Error(ErrorCode::NotFound, "no experience " + exp_id);
            Json doc = {{"id", render_id(NodeKind::Experience, id)},
                        {"commit_seq", entry->commit_seq},
                        {"archived", mem->is_archived(id)},
                        {"record", to_json(entry->record)}};
            out << doc.dump(2) << "\n";
        } else if (*compact_cmd) {
            auto mem = open_existing(paths, ns);
            const auto report = mem->write([](Memory& m) { return compact(m); });
            out << report_to_json(report).dump(2) << "\n";
        } else if (*metrics) {
            const auto text = read_file(paths.metrics(ns));
            const Json doc = Json::parse(text);
            const auto ledger = ledger_from_json(doc.at("ledger"));
            if (!out_file.empty()) {
                write_file(out_file, doc.dump(2) + "\n");
                out << "wrote " << out_file << "\n";
            }
            out << summary_table(ledger);
        } else if (*export_cmd) {
            auto mem = open_existing(paths, ns);
            mem->export_to(file);
            out << "exported " << mem->log_lines().size() << " lines to " << file << "\n";
        } else if (*import_cmd) {
            if (fs::exists(paths.log(ns))) {
                throw Error(ErrorCode::DuplicateId, "namespace '" + ns + "' exists; import needs a fresh one");
            }
            auto mem = Memory::import_text(read_file(file));
            fs::create_directories(paths.ns(ns));
            mem->export_to(paths.log(ns));
            out << "imported " << mem->experiences().size() << " experiences into " << ns << "\n";
        } else if (*plot) {
            std::vector<std::pair<std::string, MetricsLedger>> runs;
            for (const auto& in : inputs) {
                const fs::path p = fs::is_regular_file(in) ? fs::path(in) : paths.metrics(in);
                const Json doc = Json::parse(read_file(p));
                std::string label = in;
                if (doc.contains("config")) label = doc["config"].value("name", in) + " (" + in + ")";
                runs.emplace_back(label, ledger_from_json(doc.at("ledger")));
            }
            write_file(out_file, render_learning_curves_svg(runs));
            out << "wrote " << out_file << "\n";
        } else if (*gen) {
            const auto world = sim::World::generate(seed);
            const auto tasks = world.generate_tasks(static_cast<std::size_t>(count), seed, domain_list());
            write_file(out_file, sim::tasks_to_text(tasks));
            out << "wrote " << tasks.size() << " tasks to " << out_file << "\n";
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Json::exception& e) {
        err << "error: malformed JSON: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace apex
