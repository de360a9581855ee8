#include "scitrend/Pipeline.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "scitrend/Errors.h"
#include "scitrend/Random.h"
#include "scitrend/Util.h"

namespace scitrend {

namespace {

using ordered_json = nlohmann::ordered_json;

const std::vector<std::string> kSampleColumns = {"freq_shift",     "stability",     "change_task",
                                                 "change_dataset", "change_method", "change_metric"};

// Shorter rendering for markdown tables; CSV and JSON keep full precision.
std::string formatShort(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.4g", value);
    return buffer;
}

long long parseIntegerStrict(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    long long value = 0;
    try {
        value = std::stoll(trim(text), &used);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an integer: '" + text + "'");
    }
    if (used != trim(text).size()) {
        throw ConfigError("config key '" + key + "': not an integer: '" + text + "'");
    }
    return value;
}

std::uint64_t parseSeedValue(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    std::uint64_t value = 0;
    try {
        value = std::stoull(trim(text), &used);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an unsigned integer: '" + text + "'");
    }
    if (used != trim(text).size()) {
        throw ConfigError("config key '" + key + "': not an unsigned integer: '" + text + "'");
    }
    return value;
}

std::size_t parseSizeValue(const std::string& key, const std::string& text) {
    long long value = parseIntegerStrict(key, text);
    if (value < 0) {
        throw ConfigError("config key '" + key + "': must be nonnegative");
    }
    return static_cast<std::size_t>(value);
}

int parseIntValue(const std::string& key, const std::string& text) {
    long long value = parseIntegerStrict(key, text);
    if (value < -1000000 || value > 1000000) {
        throw ConfigError("config key '" + key + "': out of range");
    }
    return static_cast<int>(value);
}

double parseDoubleValue(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(trim(text), &used);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: '" + text + "'");
    }
    if (used != trim(text).size()) {
        throw ConfigError("config key '" + key + "': not a number: '" + text + "'");
    }
    return value;
}

bool parseBoolValue(const std::string& key, const std::string& text) {
    std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") {
        return true;
    }
    if (t == "false" || t == "0" || t == "no" || t == "off") {
        return false;
    }
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

std::vector<std::string> splitList(const std::string& text) {
    std::vector<std::string> items;
    std::string current;
    for (char c : text) {
        if (c == ',') {
            std::string item = trim(current);
            if (!item.empty()) {
                items.push_back(item);
            }
            current.clear();
        } else {
            current += c;
        }
    }
    std::string item = trim(current);
    if (!item.empty()) {
        items.push_back(item);
    }
    return items;
}

// "label:start-end", "start-end", or a single year.
Period parsePeriodSpec(const std::string& spec) {
    std::string label;
    std::string range = trim(spec);
    auto colon = range.find(':');
    if (colon != std::string::npos) {
        label = trim(range.substr(0, colon));
        range = trim(range.substr(colon + 1));
    }
    Period period;
    auto dash = range.find('-');
    if (dash == std::string::npos) {
        period.start = parseIntValue("periods", range);
        period.end = period.start;
    } else {
        period.start = parseIntValue("periods", range.substr(0, dash));
        period.end = parseIntValue("periods", range.substr(dash + 1));
    }
    period.label = label.empty() ? range : label;
    return period;
}

std::string periodsToText(const std::vector<Period>& periods) {
    std::string out;
    for (const auto& period : periods) {
        if (!out.empty()) {
            out += ",";
        }
        out += period.label + ":" + std::to_string(period.start) + "-" + std::to_string(period.end);
    }
    return out;
}

std::string joinList(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) {
            out += ",";
        }
        out += item;
    }
    return out;
}

std::uint64_t hashCorpus(const Corpus& corpus) {
    std::ostringstream out;
    serializeCorpus(corpus, out);
    return fnv1a64(out.str());
}

template <typename Body>
auto runStage(const char* name, Body&& body) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::vector<std::vector<double>> completeColumns(const std::vector<VariableSample>& samples) {
    std::vector<std::vector<double>> columns(kSampleColumns.size());
    for (const auto& sample : samples) {
        if (!sample.complete()) {
            continue;
        }
        columns[0].push_back(*sample.freqShift);
        columns[1].push_back(*sample.stability);
        std::size_t j = 2;
        for (EntityType type : kEntityTypes) {
            columns[j++].push_back(*sample.changeByType.at(type));
        }
    }
    return columns;
}

RankedCauses emptyRanked(const Entity& task, const Period& period, EffectOutcome outcome) {
    RankedCauses ranked;
    ranked.task = task;
    ranked.period = period;
    ranked.outcome = outcome;
    for (EntityType type : kEntityTypes) {
        ranked.byType[type];
    }
    return ranked;
}

std::string renderSamplesCsv(const std::vector<VariableSample>& samples) {
    std::ostringstream out;
    writeSamplesCsv(samples, out);
    return out.str();
}

std::string renderRegressionCsv(const std::vector<PeriodRegression>& regressions) {
    std::ostringstream out;
    out << "period,start,end,n,intercept,intercept_p";
    for (EntityType type : kEntityTypes) {
        out << ",coef_" << toString(type) << ",p_" << toString(type);
    }
    out << ",r_squared,note\n";
    for (const auto& row : regressions) {
        out << csvEscape(row.period.label) << "," << row.period.start << "," << row.period.end << ",";
        if (row.fit) {
            const RegressionFit& fit = *row.fit;
            out << fit.samples << "," << formatDouble(fit.intercept) << "," << formatDouble(fit.interceptPValue);
            for (std::size_t j = 0; j < fit.coefficients.size(); ++j) {
                out << "," << formatDouble(fit.coefficients[j]) << "," << formatDouble(fit.pValues[j]);
            }
            out << "," << formatDouble(fit.rSquared) << ",";
        } else {
            out << ",,";
            for (std::size_t j = 0; j < kEntityTypes.size(); ++j) {
                out << ",,";
            }
            out << "," << csvEscape(row.note);
        }
        out << "\n";
    }
    return out.str();
}

std::string renderEffectsCsv(const std::vector<EffectEstimate>& effects) {
    std::ostringstream out;
    out << "treatment,outcome,samples,scalar_effect,weight_clip,weight_min,weight_max\n";
    for (const auto& effect : effects) {
        out << csvEscape(effect.treatment) << "," << csvEscape(effect.outcome) << "," << effect.samples << ","
            << formatDouble(effect.scalarEffect) << "," << formatDouble(effect.weightClip) << ","
            << formatDouble(effect.weightMin) << "," << formatDouble(effect.weightMax) << "\n";
    }
    return out.str();
}

// Shared shape for causal rankings and the correlation baseline so the two
// exports can be diffed column for column.
void appendRankingRows(std::ostringstream& out, const std::string& task, const std::string& period,
                       EntityType type, const std::vector<RankedCause>& entries) {
    if (entries.empty()) {
        out << csvEscape(task) << "," << csvEscape(period) << "," << toString(type) << ",,-,,,\n";
        return;
    }
    for (std::size_t rank = 0; rank < entries.size(); ++rank) {
        const RankedCause& entry = entries[rank];
        out << csvEscape(task) << "," << csvEscape(period) << "," << toString(type) << "," << (rank + 1) << ","
            << csvEscape(entry.entity.canonical) << "," << formatDouble(entry.scalarEffect) << ","
            << entry.cooccurrence << "," << entry.samples << "\n";
    }
}

std::string renderRankingsCsv(const std::vector<TaskPeriodAnalysis>& analyses) {
    std::ostringstream out;
    out << "task,period,type,rank,entity,score,cooccurrence,samples\n";
    for (const auto& analysis : analyses) {
        for (EntityType type : kEntityTypes) {
            auto it = analysis.causal.byType.find(type);
            appendRankingRows(out, analysis.causal.task.canonical, analysis.causal.period.label, type,
                              it == analysis.causal.byType.end() ? std::vector<RankedCause>{} : it->second);
        }
    }
    return out.str();
}

std::string renderBaselineCsv(const std::vector<TaskPeriodAnalysis>& analyses) {
    std::ostringstream out;
    out << "task,period,type,rank,entity,score,cooccurrence,samples\n";
    for (const auto& analysis : analyses) {
        const std::string& task = analysis.causal.task.canonical;
        const std::string& period = analysis.causal.period.label;
        for (EntityType type : kEntityTypes) {
            auto it = analysis.baseline.find(type);
            if (it == analysis.baseline.end() || it->second.empty()) {
                out << csvEscape(task) << "," << csvEscape(period) << "," << toString(type) << ",,-,,,\n";
                continue;
            }
            for (std::size_t rank = 0; rank < it->second.size(); ++rank) {
                const BaselineRankEntry& entry = it->second[rank];
                out << csvEscape(task) << "," << csvEscape(period) << "," << toString(type) << "," << (rank + 1)
                    << "," << csvEscape(entry.entity.canonical) << "," << formatDouble(entry.score) << ","
                    << entry.joint << ",\n";
            }
        }
    }
    return out.str();
}

std::string renderGraphJson(const CausalGraph& graph) {
    std::ostringstream out;
    writeCausalGraphJson(graph, out);
    return out.str();
}

std::string renderEdgesCsv(const CausalGraph& graph) {
    std::ostringstream out;
    writeEdgeListCsv(graph, out);
    return out.str();
}

std::string renderStabilityCsv(const EdgeStability& stability) {
    std::ostringstream out;
    writeEdgeStabilityCsv(stability, out);
    return out.str();
}

std::string renderCurveCsv(const EffectEstimate& estimate) {
    std::ostringstream out;
    writeEffectCurveCsv(estimate, out);
    return out.str();
}

void renderRankedTable(std::ostringstream& md, const std::map<EntityType, std::vector<RankedCause>>& byType,
                       const std::map<EntityType, std::vector<BaselineRankEntry>>* baseline, std::size_t topK) {
    md << "| rank |";
    for (EntityType type : kEntityTypes) {
        md << " " << toString(type) << " |";
    }
    md << "\n|---|";
    for (std::size_t i = 0; i < kEntityTypes.size(); ++i) {
        md << "---|";
    }
    md << "\n";
    std::size_t rows = 1;
    for (EntityType type : kEntityTypes) {
        if (baseline != nullptr) {
            auto it = baseline->find(type);
            if (it != baseline->end()) {
                rows = std::max(rows, it->second.size());
            }
        } else {
            auto it = byType.find(type);
            if (it != byType.end()) {
                rows = std::max(rows, it->second.size());
            }
        }
    }
    rows = std::min(rows, topK);
    for (std::size_t r = 0; r < rows; ++r) {
        md << "| " << (r + 1) << " |";
        for (EntityType type : kEntityTypes) {
            std::string cell = "-";
            if (baseline != nullptr) {
                auto it = baseline->find(type);
                if (it != baseline->end() && r < it->second.size()) {
                    const auto& entry = it->second[r];
                    cell = entry.entity.canonical + " (" + formatShort(entry.score) + ")";
                }
            } else {
                auto it = byType.find(type);
                if (it != byType.end() && r < it->second.size()) {
                    const auto& entry = it->second[r];
                    cell = entry.entity.canonical + " (" + formatShort(entry.scalarEffect) + ")";
                }
            }
            md << " " << cell << " |";
        }
        md << "\n";
    }
}

std::string renderReportMd(const Report& report, const PipelineConfig& config) {
    std::ostringstream md;
    md << "# Research topic trend report\n\n";
    md << "- version: " << report.version << "\n";
    md << "- config hash: " << toHex(report.configHash) << "\n";
    md << "- seed: " << report.seed << "\n";
    if (config.sgns.threads > 1) {
        md << "- warning: embeddings trained with " << config.sgns.threads
           << " threads; outputs are not bit-reproducible\n";
    }
    md << "\n## Corpus\n\n";
    md << "| papers | entities (raw) | entities (kept) | years |\n|---|---|---|---|\n";
    md << "| " << report.papersTotal << " | " << report.entitiesBeforeFilter << " | " << report.entitiesAfterFilter
       << " | " << report.minYear << "-" << report.maxYear << " |\n\n";
    md << "Analyzed tasks:";
    for (const auto& task : report.tasks) {
        md << " `" << task.canonical << "`";
    }
    md << "\n\nEmbedding spaces: " << report.embeddedYears.size() << " years";
    if (!report.embeddedYears.empty()) {
        md << " (" << report.embeddedYears.front() << "-" << report.embeddedYears.back() << ")";
    }
    md << ", " << report.truncatedDocs << " documents truncated at " << config.sgns.maxDocMentions
       << " mentions.\n";

    md << "\n## Task count trend regression\n\n";
    md << "Yearly distinct-task counts regressed on cumulative entity counts per type.\n\n";
    md << "| period | n | intercept |";
    for (EntityType type : kEntityTypes) {
        md << " " << toString(type) << " |";
    }
    md << " R^2 |\n|---|---|---|";
    for (std::size_t i = 0; i < kEntityTypes.size(); ++i) {
        md << "---|";
    }
    md << "---|\n";
    for (const auto& row : report.regressions) {
        md << "| " << row.period.label << " |";
        if (row.fit) {
            const RegressionFit& fit = *row.fit;
            md << " " << fit.samples << " | " << formatShort(fit.intercept) << " |";
            for (std::size_t j = 0; j < fit.coefficients.size(); ++j) {
                md << " " << formatShort(fit.coefficients[j]) << " (p=" << formatShort(fit.pValues[j]) << ") |";
            }
            md << " " << formatShort(fit.rSquared) << " |\n";
        } else {
            md << " - | - |";
            for (std::size_t j = 0; j < kEntityTypes.size(); ++j) {
                md << " - |";
            }
            md << " - |\n";
        }
    }
    bool anyRegressionNote = false;
    for (const auto& row : report.regressions) {
        if (!row.note.empty()) {
            if (!anyRegressionNote) {
                md << "\n";
                anyRegressionNote = true;
            }
            md << "- " << row.period.label << ": " << row.note << "\n";
        }
    }

    md << "\n## Observational samples\n\n";
    md << "Rows are (task, year pair) observations of frequency shift, stability, and per-type entity change.\n\n";
    md << "- samples: " << report.samples.size() << "\n";
    md << "- complete rows: " << report.completeSamples << "\n";
    md << "- rows dropped from discovery (incomplete): " << (report.samples.size() - report.completeSamples)
       << "\n";

    md << "\n## Causal structure\n\n";
    if (report.graph) {
        const CausalGraph& graph = *report.graph;
        md << "Discovered ordering:";
        for (std::size_t idx : graph.order) {
            md << " `" << graph.variables[idx] << "`";
        }
        md << " (n=" << graph.samples << ").\n\n";
        if (graph.edgeCount() == 0) {
            md << "No edge survived the familywise " << formatShort(graph.significance) << " level test.\n";
        } else {
            md << "| cause | effect | strength | p | significant |\n|---|---|---|---|---|\n";
            for (std::size_t effect = 0; effect < graph.variables.size(); ++effect) {
                for (std::size_t cause = 0; cause < graph.variables.size(); ++cause) {
                    if (graph.strengths[effect][cause] == 0.0) {
                        continue;
                    }
                    md << "| " << graph.variables[cause] << " | " << graph.variables[effect] << " | "
                       << formatShort(graph.strengths[effect][cause]) << " | "
                       << formatShort(graph.pValues[effect][cause]) << " | "
                       << (graph.significant[effect][cause] ? "yes" : "no") << " |\n";
                }
            }
        }
    } else {
        md << "Not estimated: " << report.graphNote << "\n";
    }

    md << "\n## Edge stability under noise\n\n";
    if (report.edgeStability) {
        const EdgeStability& stability = *report.edgeStability;
        md << "Edge survival frequency over " << stability.trials << " noise trials (" << stability.failedTrials
           << " failed).\n\n";
        md << "| effect \\ cause |";
        for (const auto& name : stability.variables) {
            md << " " << name << " |";
        }
        md << "\n|---|";
        for (std::size_t i = 0; i < stability.variables.size(); ++i) {
            md << "---|";
        }
        md << "\n";
        for (std::size_t effect = 0; effect < stability.variables.size(); ++effect) {
            md << "| " << stability.variables[effect] << " |";
            for (std::size_t cause = 0; cause < stability.variables.size(); ++cause) {
                if (cause == effect) {
                    md << " - |";
                } else {
                    md << " " << formatShort(stability.probability[effect][cause]) << " |";
                }
            }
            md << "\n";
        }
    } else {
        md << "Not estimated: " << report.sensitivityNote << "\n";
    }

    md << "\n## Dose-response effects\n\n";
    if (report.effects.empty()) {
        md << "No effect curves estimated.\n";
    } else {
        md << "| treatment | outcome | n | scalar effect | weight clip |\n|---|---|---|---|---|\n";
        for (const auto& effect : report.effects) {
            md << "| " << effect.treatment << " | " << effect.outcome << " | " << effect.samples << " | "
               << formatShort(effect.scalarEffect) << " | " << formatShort(effect.weightClip) << " |\n";
        }
    }
    for (const auto& note : report.effectNotes) {
        md << "- " << note << "\n";
    }

    md << "\n## Ranked causes per task and period\n\n";
    md << "Entities ranked by |scalar effect| on the task outcome; `-` marks types without enough data.\n";
    for (const auto& analysis : report.analyses) {
        md << "\n### `" << analysis.causal.task.canonical << "` " << analysis.causal.period.label << " (outcome "
           << toString(analysis.causal.outcome) << ", " << analysis.causal.yearPairs << " year pairs)\n\n";
        renderRankedTable(md, analysis.causal.byType, nullptr, 1000);
    }

    md << "\n## Correlation baseline (NPMI)\n\n";
    md << "Strongest sentence-level associations per type for the same task and period slices.\n";
    for (const auto& analysis : report.analyses) {
        md << "\n### `" << analysis.causal.task.canonical << "` " << analysis.causal.period.label << "\n\n";
        renderRankedTable(md, analysis.causal.byType, &analysis.baseline, 1000);
    }

    md << "\n## Correlation versus causation\n\n";
    if (report.divergences.empty()) {
        md << "The causal and NPMI rankings agree on every top entity.\n";
    } else {
        md << "Type columns where the top causal entity differs from the top correlate:\n\n";
        for (const auto& line : report.divergences) {
            md << "- " << line << "\n";
        }
    }
    md << "\n";
    if (report.pearsonFreqStability) {
        md << "Pearson correlation between frequency shift and stability across samples: "
           << formatShort(*report.pearsonFreqStability) << ".\n";
    } else {
        md << "Pearson correlation between frequency shift and stability: " << report.pearsonNote << "\n";
    }

    md << "\n## Provenance\n\n";
    md << "Effective configuration (hash " << toHex(report.configHash) << "):\n\n```\n"
       << report.configEcho << "```\n\nStage input/output hashes are listed in `manifest.tsv`.\n";
    return md.str();
}

ordered_json entityJson(const Entity& entity) {
    return ordered_json{{"entity", entity.canonical}, {"type", toString(entity.type)}};
}

ordered_json periodJson(const Period& period) {
    return ordered_json{{"label", period.label}, {"start", period.start}, {"end", period.end}};
}

std::string renderReportJson(const Report& report) {
    ordered_json j;
    j["version"] = report.version;
    j["config_hash"] = toHex(report.configHash);
    j["seed"] = report.seed;
    j["config"] = report.configEcho;

    ordered_json corpus;
    corpus["papers"] = report.papersTotal;
    corpus["entities_raw"] = report.entitiesBeforeFilter;
    corpus["entities_kept"] = report.entitiesAfterFilter;
    corpus["min_year"] = report.minYear;
    corpus["max_year"] = report.maxYear;
    corpus["window"] = ordered_json{{"start", report.windowStart}, {"end", report.windowEnd}};
    corpus["tasks"] = ordered_json::array();
    for (const auto& task : report.tasks) {
        corpus["tasks"].push_back(entityJson(task));
    }
    corpus["embedded_years"] = report.embeddedYears;
    corpus["truncated_docs"] = report.truncatedDocs;
    j["corpus"] = std::move(corpus);

    j["regressions"] = ordered_json::array();
    for (const auto& row : report.regressions) {
        ordered_json entry;
        entry["period"] = periodJson(row.period);
        if (row.fit) {
            const RegressionFit& fit = *row.fit;
            entry["n"] = fit.samples;
            entry["intercept"] = fit.intercept;
            entry["intercept_p"] = fit.interceptPValue;
            ordered_json coefs;
            for (std::size_t k = 0; k < row.regressors.size(); ++k) {
                coefs[toString(row.regressors[k])] = ordered_json{{"coefficient", fit.coefficients[k]},
                                                                  {"std_error", fit.standardErrors[k]},
                                                                  {"p_value", fit.pValues[k]}};
            }
            entry["coefficients"] = std::move(coefs);
            entry["r_squared"] = fit.rSquared;
        } else {
            entry["note"] = row.note;
        }
        j["regressions"].push_back(std::move(entry));
    }

    j["samples"] = ordered_json{{"total", report.samples.size()},
                                {"complete", report.completeSamples},
                                {"dropped", report.samples.size() - report.completeSamples}};

    if (report.graph) {
        const CausalGraph& graph = *report.graph;
        ordered_json g;
        g["variables"] = graph.variables;
        g["order"] = graph.order;
        g["samples"] = graph.samples;
        g["significance"] = graph.significance;
        g["edges"] = ordered_json::array();
        for (std::size_t effect = 0; effect < graph.variables.size(); ++effect) {
            for (std::size_t cause = 0; cause < graph.variables.size(); ++cause) {
                if (graph.strengths[effect][cause] == 0.0) {
                    continue;
                }
                g["edges"].push_back(ordered_json{{"cause", graph.variables[cause]},
                                                  {"effect", graph.variables[effect]},
                                                  {"strength", graph.strengths[effect][cause]},
                                                  {"p_value", graph.pValues[effect][cause]},
                                                  {"significant", bool(graph.significant[effect][cause])}});
            }
        }
        j["graph"] = std::move(g);
    } else {
        j["graph"] = nullptr;
        j["graph_note"] = report.graphNote;
    }

    if (report.edgeStability) {
        const EdgeStability& stability = *report.edgeStability;
        j["edge_stability"] = ordered_json{{"variables", stability.variables},
                                           {"trials", stability.trials},
                                           {"failed_trials", stability.failedTrials},
                                           {"probability", stability.probability}};
    } else {
        j["edge_stability"] = nullptr;
        j["edge_stability_note"] = report.sensitivityNote;
    }

    j["effects"] = ordered_json::array();
    for (const auto& effect : report.effects) {
        j["effects"].push_back(ordered_json{{"treatment", effect.treatment},
                                            {"outcome", effect.outcome},
                                            {"samples", effect.samples},
                                            {"scalar_effect", effect.scalarEffect},
                                            {"weight_clip", effect.weightClip},
                                            {"weight_min", effect.weightMin},
                                            {"weight_max", effect.weightMax},
                                            {"grid", effect.grid},
                                            {"curve", effect.curve}});
    }
    j["effect_notes"] = report.effectNotes;

    j["rankings"] = ordered_json::array();
    j["baseline"] = ordered_json::array();
    for (const auto& analysis : report.analyses) {
        ordered_json causal;
        causal["task"] = entityJson(analysis.causal.task);
        causal["period"] = periodJson(analysis.causal.period);
        causal["outcome"] = toString(analysis.causal.outcome);
        causal["year_pairs"] = analysis.causal.yearPairs;
        ordered_json byType;
        for (EntityType type : kEntityTypes) {
            ordered_json entries = ordered_json::array();
            auto it = analysis.causal.byType.find(type);
            if (it != analysis.causal.byType.end()) {
                for (const auto& entry : it->second) {
                    entries.push_back(ordered_json{{"entity", entry.entity.canonical},
                                                   {"scalar_effect", entry.scalarEffect},
                                                   {"cooccurrence", entry.cooccurrence},
                                                   {"samples", entry.samples}});
                }
            }
            byType[toString(type)] = std::move(entries);
        }
        causal["by_type"] = std::move(byType);
        j["rankings"].push_back(std::move(causal));

        ordered_json base;
        base["task"] = entityJson(analysis.causal.task);
        base["period"] = periodJson(analysis.causal.period);
        ordered_json baseTypes;
        for (EntityType type : kEntityTypes) {
            ordered_json entries = ordered_json::array();
            auto it = analysis.baseline.find(type);
            if (it != analysis.baseline.end()) {
                for (const auto& entry : it->second) {
                    entries.push_back(ordered_json{{"entity", entry.entity.canonical},
                                                   {"npmi", entry.score},
                                                   {"cooccurrence", entry.joint}});
                }
            }
            baseTypes[toString(type)] = std::move(entries);
        }
        base["by_type"] = std::move(baseTypes);
        j["baseline"].push_back(std::move(base));
    }

    if (report.pearsonFreqStability) {
        j["pearson_freq_stability"] = *report.pearsonFreqStability;
    } else {
        j["pearson_freq_stability"] = nullptr;
        j["pearson_note"] = report.pearsonNote;
    }
    j["divergences"] = report.divergences;

    j["manifest"] = ordered_json::array();
    for (const auto& entry : report.manifest) {
        j["manifest"].push_back(
            ordered_json{{"stage", entry.stage}, {"input", entry.inputHash}, {"output", entry.outputHash}});
    }
    return j.dump(2) + "\n";
}

}  // namespace

const std::vector<Period>& defaultPeriods() {
    static const std::vector<Period> periods = {{"1979-1989", 1979, 1989},
                                                {"1990-2002", 1990, 2002},
                                                {"2003-2017", 2003, 2017},
                                                {"2018-2022", 2018, 2022}};
    return periods;
}

PipelineConfig pipelineConfigFromKeyValues(const std::map<std::string, std::string>& keyValues) {
    PipelineConfig config;
    for (const auto& [key, value] : keyValues) {
        if (key == "corpus") {
            config.corpusPath = value;
        } else if (key == "out_dir") {
            config.outDir = value;
        } else if (key == "periods") {
            config.periods.clear();
            for (const auto& spec : splitList(value)) {
                config.periods.push_back(parsePeriodSpec(spec));
            }
        } else if (key == "tasks") {
            config.tasks = splitList(value);
        } else if (key == "auto_tasks") {
            config.autoTasks = parseSizeValue(key, value);
        } else if (key == "filter_rare") {
            config.filterRare = parseBoolValue(key, value);
        } else if (key == "min_papers") {
            config.minPapers = parseSizeValue(key, value);
        } else if (key == "min_year") {
            config.parse.minYear = parseIntValue(key, value);
        } else if (key == "max_year") {
            config.parse.maxYear = parseIntValue(key, value);
        } else if (key == "embed_dim") {
            config.sgns.dim = parseIntValue(key, value);
        } else if (key == "embed_negatives") {
            config.sgns.negatives = parseIntValue(key, value);
        } else if (key == "embed_epochs") {
            config.sgns.epochs = parseIntValue(key, value);
        } else if (key == "embed_learning_rate") {
            config.sgns.learningRate = parseDoubleValue(key, value);
        } else if (key == "embed_unigram_power") {
            config.sgns.unigramPower = parseDoubleValue(key, value);
        } else if (key == "embed_max_doc_mentions") {
            config.sgns.maxDocMentions = parseSizeValue(key, value);
        } else if (key == "embed_threads") {
            config.sgns.threads = parseIntValue(key, value);
        } else if (key == "aggregation") {
            config.aggregation = aggregationFromString(trim(value));
        } else if (key == "neighbors") {
            config.neighbors = parseSizeValue(key, value);
        } else if (key == "min_samples") {
            config.minSamples = parseSizeValue(key, value);
        } else if (key == "top_k") {
            config.topK = parseSizeValue(key, value);
        } else if (key == "sensitivity_trials") {
            config.sensitivityTrials = parseSizeValue(key, value);
        } else if (key == "significance") {
            config.significance = parseDoubleValue(key, value);
        } else if (key == "rank_outcome") {
            config.rankOutcome = effectOutcomeFromString(trim(value));
        } else if (key == "task_sections") {
            config.taskSections = splitList(value);
        } else if (key == "seed") {
            config.seed = parseSeedValue(key, value);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    return config;
}

PipelineConfig loadPipelineConfig(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    std::ostringstream raw;
    raw << in.rdbuf();
    std::istringstream stream(raw.str());
    PipelineConfig config = pipelineConfigFromKeyValues(parseKeyValues(stream));
    config.configSource = raw.str();
    return config;
}

void validatePipelineConfig(const PipelineConfig& config) {
    if (config.corpusPath.empty()) {
        throw ConfigError("no corpus path configured (set corpus=...)");
    }
    if (!std::filesystem::exists(config.corpusPath)) {
        throw ConfigError("corpus file not found: " + config.corpusPath.string());
    }
    if (!config.seed) {
        throw ConfigError("no seed configured; set seed= in the config or pass --seed");
    }
    if (config.periods.empty()) {
        throw ConfigError("at least one period is required");
    }
    std::set<std::string> labels;
    for (const auto& period : config.periods) {
        if (period.start > period.end) {
            throw ConfigError("period '" + period.label + "' ends before it starts");
        }
        if (!labels.insert(period.label).second) {
            throw ConfigError("duplicate period label '" + period.label + "'");
        }
    }
    std::vector<Period> sorted = config.periods;
    std::sort(sorted.begin(), sorted.end(),
              [](const Period& a, const Period& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i - 1].end >= sorted[i].start) {
            throw ConfigError("periods '" + sorted[i - 1].label + "' and '" + sorted[i].label + "' overlap");
        }
    }
    if (config.tasks.empty() && config.autoTasks == 0) {
        throw ConfigError("no tasks requested: set tasks= or auto_tasks > 0");
    }
    if (config.parse.minYear > config.parse.maxYear) {
        throw ConfigError("min_year exceeds max_year");
    }
    if (config.sgns.dim <= 0 || config.sgns.epochs <= 0 || config.sgns.negatives < 1) {
        throw ConfigError("embedding config needs dim > 0, epochs > 0, negatives >= 1");
    }
    if (config.sgns.learningRate <= 0.0) {
        throw ConfigError("embedding learning rate must be positive");
    }
    if (config.sgns.threads < 1) {
        throw ConfigError("embed_threads must be at least 1");
    }
    if (config.neighbors == 0) {
        throw ConfigError("neighbors must be at least 1");
    }
    if (config.topK == 0) {
        throw ConfigError("top_k must be at least 1");
    }
    if (config.sensitivityTrials < 10) {
        throw ConfigError("sensitivity_trials must be at least 10");
    }
    if (!(config.significance > 0.0 && config.significance < 1.0)) {
        throw ConfigError("significance must lie strictly between 0 and 1");
    }
    if (config.taskSections.empty()) {
        throw ConfigError("task_sections must not be empty");
    }
}

std::string canonicalConfigText(const PipelineConfig& config) {
    // out_dir is deliberately absent: it decides where files land, not what
    // gets computed, so two runs into different directories share a hash.
    std::map<std::string, std::string> kv;
    kv["aggregation"] = toString(config.aggregation);
    kv["auto_tasks"] = std::to_string(config.autoTasks);
    kv["corpus"] = config.corpusPath.string();
    kv["embed_dim"] = std::to_string(config.sgns.dim);
    kv["embed_epochs"] = std::to_string(config.sgns.epochs);
    kv["embed_learning_rate"] = formatDouble(config.sgns.learningRate);
    kv["embed_max_doc_mentions"] = std::to_string(config.sgns.maxDocMentions);
    kv["embed_negatives"] = std::to_string(config.sgns.negatives);
    kv["embed_threads"] = std::to_string(config.sgns.threads);
    kv["embed_unigram_power"] = formatDouble(config.sgns.unigramPower);
    kv["filter_rare"] = config.filterRare ? "true" : "false";
    kv["max_year"] = std::to_string(config.parse.maxYear);
    kv["min_papers"] = std::to_string(config.minPapers);
    kv["min_samples"] = std::to_string(config.minSamples);
    kv["min_year"] = std::to_string(config.parse.minYear);
    kv["neighbors"] = std::to_string(config.neighbors);
    kv["periods"] = periodsToText(config.periods);
    kv["rank_outcome"] = toString(config.rankOutcome);
    kv["seed"] = config.seed ? std::to_string(*config.seed) : "";
    kv["sensitivity_trials"] = std::to_string(config.sensitivityTrials);
    kv["significance"] = formatDouble(config.significance);
    kv["task_sections"] = joinList(config.taskSections);
    kv["tasks"] = joinList(config.tasks);
    kv["top_k"] = std::to_string(config.topK);
    std::string out;
    for (const auto& [key, value] : kv) {
        out += key + "=" + value + "\n";
    }
    return out;
}

Report runPipeline(const PipelineConfig& config) {
    validatePipelineConfig(config);

    Report report;
    report.version = kVersion;
    report.seed = *config.seed;
    report.configEcho = canonicalConfigText(config);
    report.configHash = fnv1a64(report.configEcho);

    auto addManifest = [&report](const std::string& stage, std::uint64_t input, std::uint64_t output) {
        report.manifest.push_back({stage, toHex(input), toHex(output)});
    };
    const std::string sourceText = config.configSource.empty() ? report.configEcho : config.configSource;
    addManifest("config", fnv1a64(sourceText), report.configHash);

    Corpus corpus;
    std::uint64_t corpusHash = 0;
    {
        Corpus raw = runStage("ingest", [&] {
            std::ifstream in(config.corpusPath, std::ios::binary);
            if (!in) {
                throw ParseError("cannot open corpus file: " + config.corpusPath.string());
            }
            Corpus parsed = parseCorpus(in, config.parse);
            if (parsed.empty()) {
                throw ParseError("corpus contains no papers in the configured year range");
            }
            return parsed;
        });
        std::uint64_t rawHash = hashCorpus(raw);
        addManifest("ingest", hashFile(config.corpusPath), rawHash);
        report.papersTotal = raw.size();
        report.entitiesBeforeFilter = raw.entityIndex().size();
        report.minYear = raw.minYear();
        report.maxYear = raw.maxYear();

        corpus = runStage("filter", [&] {
            return config.filterRare ? filterRareEntities(raw, config.minPapers) : std::move(raw);
        });
        corpusHash = config.filterRare ? hashCorpus(corpus) : rawHash;
        addManifest("filter", rawHash, corpusHash);
        report.entitiesAfterFilter = corpus.entityIndex().size();
    }

    const std::vector<Entity> tasks = runStage("tasks", [&] {
        std::vector<Entity> chosen;
        if (!config.tasks.empty()) {
            std::set<Entity> seen;
            for (const auto& name : config.tasks) {
                Entity task{normalizeEntity(name), EntityType::Task};
                if (!corpus.contains(task)) {
                    throw DomainError("configured task not present after filtering: '" + task.canonical + "'");
                }
                if (seen.insert(task).second) {
                    chosen.push_back(task);
                }
            }
        } else {
            std::vector<std::pair<std::size_t, Entity>> counts;
            for (const auto& [entity, papers] : corpus.entityIndex()) {
                if (entity.type == EntityType::Task) {
                    counts.emplace_back(papers.size(), entity);
                }
            }
            std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
                if (a.first != b.first) {
                    return a.first > b.first;
                }
                return a.second < b.second;
            });
            for (std::size_t i = 0; i < counts.size() && i < config.autoTasks; ++i) {
                chosen.push_back(counts[i].second);
            }
            if (chosen.empty()) {
                throw DomainError("corpus has no task entities after filtering");
            }
        }
        return chosen;
    });
    report.tasks = tasks;
    std::uint64_t tasksHash = 0;
    {
        std::string joined;
        for (const auto& task : tasks) {
            joined += task.canonical + "\n";
        }
        tasksHash = fnv1a64(joined);
    }
    addManifest("tasks", corpusHash, tasksHash);

    int periodLo = config.periods.front().start;
    int periodHi = config.periods.front().end;
    for (const auto& period : config.periods) {
        periodLo = std::min(periodLo, period.start);
        periodHi = std::max(periodHi, period.end);
    }
    report.windowStart = std::max(periodLo, report.minYear);
    report.windowEnd = std::min(periodHi, report.maxYear);

    SpacesByYear spaces;
    runStage("embed", [&] {
        if (report.windowStart > report.windowEnd) {
            throw DomainError("configured periods do not intersect the corpus years " +
                              std::to_string(report.minYear) + "-" + std::to_string(report.maxYear));
        }
        for (int year = report.windowStart; year <= report.windowEnd; ++year) {
            if (corpus.paperCount(year) == 0) {
                continue;
            }
            Period slice{std::to_string(year), year, year};
            auto sequences = buildEntitySequences(corpus, slice);
            if (sequences.empty()) {
                continue;
            }
            SgnsConfig sgns = config.sgns;
            sgns.seed = deriveSeed(*config.seed, static_cast<std::uint64_t>(year));
            spaces.emplace(year, trainSgns(sequences, sgns, slice));
        }
        if (spaces.empty()) {
            throw DomainError("no year in the analysis window has enough mentions to train embeddings");
        }
        return 0;
    });
    std::uint64_t embedHash = 0;
    {
        std::ostringstream all;
        for (const auto& [year, space] : spaces) {
            report.embeddedYears.push_back(year);
            report.truncatedDocs += space.truncatedDocs();
            space.save(all);
        }
        embedHash = fnv1a64(all.str());
    }
    addManifest("embed", corpusHash, embedHash);

    std::uint64_t samplesHash = 0;
    runStage("samples", [&] {
        std::set<std::pair<int, int>> pairSet;
        for (int year = report.windowStart; year < report.windowEnd; ++year) {
            if (corpus.paperCount(year) > 0 && corpus.paperCount(year + 1) > 0) {
                pairSet.emplace(year, year + 1);
            }
        }
        for (const auto& period : config.periods) {
            int lo = std::max(period.start, report.windowStart);
            int hi = std::min(period.end, report.windowEnd);
            std::optional<int> first;
            std::optional<int> last;
            for (int year = lo; year <= hi; ++year) {
                if (corpus.paperCount(year) > 0) {
                    if (!first) {
                        first = year;
                    }
                    last = year;
                }
            }
            if (first && last && *first < *last) {
                pairSet.emplace(*first, *last);
            }
        }
        if (pairSet.empty()) {
            throw DomainError("no eligible year pairs inside the analysis window");
        }
        std::vector<std::pair<int, int>> yearPairs(pairSet.begin(), pairSet.end());
        AssembleOptions options;
        options.aggregation = config.aggregation;
        options.neighbors = config.neighbors;
        options.taskSections = config.taskSections;
        report.samples = assembleSamples(corpus, tasks, yearPairs, spaces, options);
        report.completeSamples = completeCount(report.samples);
        return 0;
    });
    report.artifacts["samples.csv"] = renderSamplesCsv(report.samples);
    samplesHash = fnv1a64(report.artifacts["samples.csv"]);
    addManifest("samples", embedHash, samplesHash);

    runStage("regress", [&] {
        auto fitRange = [&](const Period& period) {
            PeriodRegression row;
            row.period = period;
            row.regressors.assign(kEntityTypes.begin(), kEntityTypes.end());
            try {
                row.fit = fitMlr(buildTrendDesign(corpus, period.start, period.end, row.regressors));
            } catch (const Error& e) {
                row.note = e.what();
            }
            return row;
        };
        report.regressions.push_back(fitRange(Period{"full", report.windowStart, report.windowEnd}));
        for (const auto& period : config.periods) {
            report.regressions.push_back(fitRange(period));
        }
        return 0;
    });
    report.artifacts["regression.csv"] = renderRegressionCsv(report.regressions);
    addManifest("regress", corpusHash, fnv1a64(report.artifacts["regression.csv"]));

    const std::vector<std::vector<double>> columns = completeColumns(report.samples);
    runStage("discover", [&] {
        const std::size_t needed = LingamOptions{}.samplesPerVariable * kSampleColumns.size();
        if (columns[0].size() < needed) {
            report.graphNote = "insufficient complete samples for discovery: " +
                               std::to_string(columns[0].size()) + " < " + std::to_string(needed);
            return 0;
        }
        LingamOptions options;
        options.significance = config.significance;
        try {
            report.graph = directLingam(columns, kSampleColumns, options);
        } catch (const DomainError& e) {
            report.graphNote = e.what();
        }
        return 0;
    });
    if (report.graph) {
        report.artifacts["graph.json"] = renderGraphJson(*report.graph);
        report.artifacts["edges.csv"] = renderEdgesCsv(*report.graph);
    }
    addManifest("discover", samplesHash,
                fnv1a64(report.graph ? report.artifacts["graph.json"] : report.graphNote));

    runStage("sensitivity", [&] {
        if (!report.graph) {
            report.sensitivityNote = "skipped: no causal graph";
            return 0;
        }
        SensitivityOptions options;
        options.trials = config.sensitivityTrials;
        options.seed = deriveSeed(*config.seed, 0x73656e73ULL);
        options.lingam.significance = config.significance;
        std::vector<std::size_t> noiseColumns = {2, 3, 4, 5};
        try {
            report.edgeStability = sensitivityAnalysis(columns, noiseColumns, kSampleColumns, options);
        } catch (const DomainError& e) {
            report.sensitivityNote = e.what();
        }
        return 0;
    });
    if (report.edgeStability) {
        report.artifacts["edge_stability.csv"] = renderStabilityCsv(*report.edgeStability);
    }
    addManifest("sensitivity", samplesHash,
                fnv1a64(report.edgeStability ? report.artifacts["edge_stability.csv"]
                                             : report.sensitivityNote));

    runStage("effects", [&] {
        for (std::size_t j = 2; j < kSampleColumns.size(); ++j) {
            const std::string& treatment = kSampleColumns[j];
            try {
                TreatmentDensity density = estimateTreatmentDensity(columns[j]);
                EffectEstimate estimate = splineEffect(columns[j], columns[0], density.sampleDensities, {},
                                                       treatment, kSampleColumns[0]);
                report.effects.push_back(std::move(estimate));
            } catch (const DomainError& e) {
                report.effectNotes.push_back(treatment + ": " + std::string(e.what()));
            }
        }
        return 0;
    });
    report.artifacts["effects.csv"] = renderEffectsCsv(report.effects);
    for (const auto& effect : report.effects) {
        report.artifacts["effect_curve_" + effect.treatment + ".csv"] = renderCurveCsv(effect);
    }
    addManifest("effects", samplesHash, fnv1a64(report.artifacts["effects.csv"]));

    runStage("rank", [&] {
        RankOptions options;
        options.topK = config.topK;
        options.minSamples = config.minSamples;
        options.outcome = config.rankOutcome;
        options.neighbors = config.neighbors;
        options.taskSections = config.taskSections;
        for (const auto& task : tasks) {
            for (const auto& period : config.periods) {
                TaskPeriodAnalysis analysis;
                try {
                    analysis.causal = rankCauses(corpus, task, period, &spaces, options);
                } catch (const DomainError&) {
                    analysis.causal = emptyRanked(task, period, config.rankOutcome);
                }
                report.analyses.push_back(std::move(analysis));
            }
        }
        return 0;
    });
    report.artifacts["rankings.csv"] = renderRankingsCsv(report.analyses);
    addManifest("rank", samplesHash, fnv1a64(report.artifacts["rankings.csv"]));

    runStage("baseline", [&] {
        for (auto& analysis : report.analyses) {
            analysis.baseline =
                npmiRankings(corpus, analysis.causal.task, analysis.causal.period, config.topK);
        }
        std::vector<double> u;
        std::vector<double> v;
        for (const auto& sample : report.samples) {
            if (sample.freqShift && sample.stability) {
                u.push_back(*sample.freqShift);
                v.push_back(*sample.stability);
            }
        }
        try {
            if (u.size() < 3) {
                throw DomainError("needs at least 3 samples with both fields, have " +
                                  std::to_string(u.size()));
            }
            report.pearsonFreqStability = pearson(u, v);
        } catch (const DomainError& e) {
            report.pearsonNote = e.what();
        }
        for (const auto& analysis : report.analyses) {
            for (EntityType type : kEntityTypes) {
                auto causalIt = analysis.causal.byType.find(type);
                auto baseIt = analysis.baseline.find(type);
                if (causalIt == analysis.causal.byType.end() || causalIt->second.empty() ||
                    baseIt == analysis.baseline.end() || baseIt->second.empty()) {
                    continue;
                }
                const Entity& causalTop = causalIt->second.front().entity;
                const Entity& baseTop = baseIt->second.front().entity;
                if (causalTop != baseTop) {
                    report.divergences.push_back("task '" + analysis.causal.task.canonical + "' period " +
                                                 analysis.causal.period.label + " " + toString(type) +
                                                 ": causal top '" + causalTop.canonical + "' vs npmi top '" +
                                                 baseTop.canonical + "'");
                }
            }
        }
        return 0;
    });
    report.artifacts["baseline.csv"] = renderBaselineCsv(report.analyses);
    addManifest("baseline", corpusHash, fnv1a64(report.artifacts["baseline.csv"]));

    runStage("report", [&] {
        report.artifacts["report.md"] = renderReportMd(report, config);
        report.artifacts["report.json"] = renderReportJson(report);
        return 0;
    });
    addManifest("report", report.configHash, fnv1a64(report.artifacts.at("report.md")));

    return report;
}

std::vector<std::filesystem::path> emitReport(const Report& report, const std::filesystem::path& outDir,
                                              const std::vector<std::string>& formats) {
    std::set<std::string> wanted(formats.begin(), formats.end());
    if (wanted.empty()) {
        wanted = {"md", "csv", "json"};
    }
    for (const auto& format : wanted) {
        if (format != "md" && format != "csv" && format != "json") {
            throw ConfigError("unknown report format '" + format + "' (expected md, csv, or json)");
        }
    }

    std::vector<std::filesystem::path> written;
    auto cleanup = [&written]() {
        for (const auto& path : written) {
            std::error_code ec;
            std::filesystem::remove(path, ec);
        }
    };

    try {
        std::filesystem::create_directories(outDir);
        auto writeFile = [&](const std::string& name, const std::string& content) {
            std::filesystem::path path = outDir / name;
            std::ofstream out(path, std::ios::binary);
            if (!out) {
                throw StageError("report", "cannot open for writing: " + path.string());
            }
            out << content;
            out.flush();
            if (!out) {
                throw StageError("report", "write failed: " + path.string());
            }
            written.push_back(path);
        };

        for (const auto& [name, content] : report.artifacts) {
            auto dot = name.rfind('.');
            std::string extension = dot == std::string::npos ? "" : name.substr(dot + 1);
            if (wanted.count(extension) != 0) {
                writeFile(name, content);
            }
        }

        std::string manifest = "stage\tinput_hash\toutput_hash\n";
        for (const auto& entry : report.manifest) {
            manifest += entry.stage + "\t" + entry.inputHash + "\t" + entry.outputHash + "\n";
        }
        writeFile("manifest.tsv", manifest);
    } catch (...) {
        cleanup();
        throw;
    }
    return written;
}

}  // namespace scitrend
