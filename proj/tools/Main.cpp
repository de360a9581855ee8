#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scitrend/Errors.h"
#include "scitrend/Pipeline.h"
#include "scitrend/Random.h"
#include "scitrend/Synthetic.h"
#include "scitrend/Util.h"

namespace fs = std::filesystem;

namespace {

using namespace scitrend;

struct CommonFlags {
    std::string configPath;
    std::uint64_t seed = 0;
    std::string outDir;
    std::vector<std::string> formats;
};

void addCommonFlags(CLI::App* sub, CommonFlags& flags) {
    sub->add_option("--config", flags.configPath, "Key-value config file (see README for the schema)");
    sub->add_option("--seed", flags.seed, "Master seed; overrides the config value");
    sub->add_option("--out", flags.outDir, "Output directory; overrides the config value");
    sub->add_option("--format", flags.formats, "Report formats: csv, json, md (repeat or comma-separate)")
        ->delimiter(',');
}

PipelineConfig buildConfig(const CLI::App* sub, const CommonFlags& flags) {
    PipelineConfig config;
    if (!flags.configPath.empty()) {
        config = loadPipelineConfig(flags.configPath);
    }
    if (sub->count("--seed") > 0) {
        config.seed = flags.seed;
    }
    if (sub->count("--out") > 0) {
        config.outDir = flags.outDir;
    }
    return config;
}

template <typename Body>
auto stageWrap(const char* stage, Body&& body) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

// Writes files through one tracker so a failure removes everything already
// written, leaving no partial outputs behind.
class OutputWriter {
public:
    explicit OutputWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    ~OutputWriter() {
        if (!committed_) {
            for (const auto& path : written_) {
                std::error_code ec;
                fs::remove(path, ec);
            }
        }
    }

    void write(const std::string& name, const std::string& content) {
        fs::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw Error("cannot open for writing: " + path.string());
        }
        out << content;
        out.flush();
        if (!out) {
            throw Error("write failed: " + path.string());
        }
        written_.push_back(path);
    }

    void commit() {
        committed_ = true;
        for (const auto& path : written_) {
            std::cout << path.string() << "\n";
        }
    }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool committed_ = false;
};

std::string manifestText(const Report& report) {
    std::string text = "stage\tinput_hash\toutput_hash\n";
    for (const auto& entry : report.manifest) {
        text += entry.stage + "\t" + entry.inputHash + "\t" + entry.outputHash + "\n";
    }
    return text;
}

// Runs the full deterministic pipeline and keeps only the artifacts the
// subcommand is about (plus the stage manifest for auditing).
void emitSubset(const PipelineConfig& config, const std::function<bool(const std::string&)>& select,
                const std::function<void(const Report&)>& check = {}) {
    Report report = runPipeline(config);
    if (check) {
        check(report);
    }
    OutputWriter writer(config.outDir);
    for (const auto& [name, content] : report.artifacts) {
        if (select(name)) {
            writer.write(name, content);
        }
    }
    writer.write("manifest.tsv", manifestText(report));
    writer.commit();
}

void runIngest(const PipelineConfig& config) {
    stageWrap("ingest", [&] {
        if (config.corpusPath.empty()) {
            throw ConfigError("no corpus path configured (set corpus=... or pass --config)");
        }
        std::ifstream in(config.corpusPath, std::ios::binary);
        if (!in) {
            throw ParseError("cannot open corpus file: " + config.corpusPath.string());
        }
        Corpus raw = parseCorpus(in, config.parse);
        Corpus kept = config.filterRare ? filterRareEntities(raw, config.minPapers) : raw;

        std::ostringstream corpusOut;
        serializeCorpus(kept, corpusOut);

        nlohmann::ordered_json stats;
        stats["papers"] = raw.size();
        stats["entities_raw"] = raw.entityIndex().size();
        stats["entities_kept"] = kept.entityIndex().size();
        if (!raw.empty()) {
            stats["min_year"] = raw.minYear();
            stats["max_year"] = raw.maxYear();
        }
        nlohmann::ordered_json perType;
        for (EntityType type : kEntityTypes) {
            perType[toString(type)] = kept.entitiesOfType(type).size();
        }
        stats["entities_by_type"] = std::move(perType);

        OutputWriter writer(config.outDir);
        writer.write("corpus_filtered.jsonl", corpusOut.str());
        writer.write("corpus_stats.json", stats.dump(2) + "\n");
        writer.commit();
        return 0;
    });
}

void runSynth(const CLI::App* sub, const CommonFlags& flags, const SyntheticCorpusSpec& spec,
              std::size_t semVariables, std::size_t semSamples, const std::string& semNoise,
              double semCoefficient) {
    stageWrap("synth", [&] {
        if (sub->count("--seed") == 0) {
            throw ConfigError("synth requires --seed");
        }
        if (semVariables < 2) {
            throw ConfigError("--sem-vars must be at least 2");
        }
        SemSpec semSpec;
        semSpec.variables = semVariables;
        for (std::size_t i = 0; i + 1 < semVariables; ++i) {
            semSpec.edges.push_back({i, i + 1, semCoefficient});
        }
        if (semNoise == "uniform") {
            semSpec.noise = NoiseFamily::Uniform;
        } else if (semNoise == "laplace") {
            semSpec.noise = NoiseFamily::Laplace;
        } else {
            throw ConfigError("--sem-noise must be uniform or laplace");
        }

        SyntheticCorpus synthetic = generateSyntheticCorpus(spec, flags.seed);
        SemSample sem = generateSem(semSpec, semSamples, deriveSeed(flags.seed, 0x53454dULL));

        std::ostringstream corpusOut;
        serializeCorpus(synthetic.corpus, corpusOut);
        std::ostringstream truthOut;
        writeGroundTruthJson(synthetic, &semSpec, &sem, truthOut);
        std::ostringstream semOut;
        writeMatrixCsv(sem.names, sem.columns, semOut);

        fs::path dir = sub->count("--out") > 0 ? fs::path(flags.outDir) : fs::path("out");
        OutputWriter writer(dir);
        writer.write("corpus.jsonl", corpusOut.str());
        writer.write("ground_truth.json", truthOut.str());
        writer.write("sem.csv", semOut.str());
        writer.commit();
        return 0;
    });
}

bool startsWith(const std::string& text, const std::string& prefix) {
    return text.rfind(prefix, 0) == 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantifies research-topic trends in a TDMM-tagged corpus and ranks causally driving entities"};
    app.set_version_flag("--version", std::string("scitrend ") + kVersion);
    app.require_subcommand(1);

    CommonFlags flags;
    SyntheticCorpusSpec synthSpec;
    std::size_t semVariables = 3;
    std::size_t semSamples = 5000;
    std::string semNoise = "uniform";
    double semCoefficient = 0.8;

    auto* ingest = app.add_subcommand("ingest", "Parse and filter a corpus; write the kept corpus and stats");
    auto* variables = app.add_subcommand("variables", "Assemble the (task, year pair) variable samples");
    auto* regress = app.add_subcommand("regress", "Fit the yearly task-count trend regression");
    auto* discover = app.add_subcommand("discover", "Estimate the causal structure over the variables");
    auto* effect = app.add_subcommand("effect", "Estimate dose-response curves of entity change on frequency shift");
    auto* rank = app.add_subcommand("rank", "Rank candidate causes per task, period, and entity type");
    auto* baselineCmd = app.add_subcommand("baseline", "NPMI correlation rankings for comparison");
    auto* reportCmd = app.add_subcommand("report", "Run the pipeline and write the report in the chosen formats");
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus and SEM matrix with ground truth");
    auto* run = app.add_subcommand("run", "Full pipeline: all analyses, reports, and exports");

    for (CLI::App* sub : {ingest, variables, regress, discover, effect, rank, baselineCmd, reportCmd, run}) {
        addCommonFlags(sub, flags);
        sub->get_option("--config")->required();
    }
    addCommonFlags(synth, flags);
    synth->get_option("--seed")->required();
    synth->add_option("--start-year", synthSpec.startYear, "First corpus year");
    synth->add_option("--years", synthSpec.years, "Number of years");
    synth->add_option("--papers-per-year", synthSpec.papersPerYear, "Papers per year (minimum 5)");
    synth->add_option("--other-tasks", synthSpec.otherTasks, "Background task count");
    synth->add_flag("!--no-adversary", synthSpec.adversary, "Skip the constant high-NPMI entity");
    synth->add_option("--sem-vars", semVariables, "Chain SEM variable count");
    synth->add_option("--sem-samples", semSamples, "Rows in the SEM matrix");
    synth->add_option("--sem-noise", semNoise, "SEM noise family: uniform or laplace");
    synth->add_option("--sem-coefficient", semCoefficient, "Chain edge coefficient");

    ingest->callback([&] { runIngest(buildConfig(ingest, flags)); });
    variables->callback([&] {
        emitSubset(buildConfig(variables, flags), [](const std::string& n) { return n == "samples.csv"; });
    });
    regress->callback([&] {
        emitSubset(buildConfig(regress, flags), [](const std::string& n) { return n == "regression.csv"; });
    });
    discover->callback([&] {
        emitSubset(
            buildConfig(discover, flags),
            [](const std::string& n) { return n == "graph.json" || n == "edges.csv"; },
            [](const Report& report) {
                if (!report.graph) {
                    throw StageError("discover", report.graphNote);
                }
            });
    });
    effect->callback([&] {
        emitSubset(
            buildConfig(effect, flags),
            [](const std::string& n) { return n == "effects.csv" || startsWith(n, "effect_curve_"); },
            [](const Report& report) {
                if (report.effects.empty()) {
                    std::string joined;
                    for (const auto& note : report.effectNotes) {
                        joined += (joined.empty() ? "" : "; ") + note;
                    }
                    throw StageError("effects", joined.empty() ? "no effects estimated" : joined);
                }
            });
    });
    rank->callback([&] {
        emitSubset(buildConfig(rank, flags), [](const std::string& n) { return n == "rankings.csv"; });
    });
    baselineCmd->callback([&] {
        emitSubset(buildConfig(baselineCmd, flags), [](const std::string& n) { return n == "baseline.csv"; });
    });
    auto emitFull = [&](const CLI::App* sub) {
        PipelineConfig config = buildConfig(sub, flags);
        Report report = runPipeline(config);
        auto written = emitReport(report, config.outDir, flags.formats);
        for (const auto& path : written) {
            std::cout << path.string() << "\n";
        }
    };
    reportCmd->callback([&] { emitFull(reportCmd); });
    run->callback([&] { emitFull(run); });
    synth->callback([&] { runSynth(synth, flags, synthSpec, semVariables, semSamples, semNoise, semCoefficient); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const StageError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "[config] " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "[error] " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "[internal] " << e.what() << "\n";
        return 1;
    }
    return 0;
}
