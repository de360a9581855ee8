#include "scitrend/Corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "scitrend/Errors.h"

namespace scitrend {

namespace {

const std::vector<std::string> kTaskSections = {"title", "abstract", "experiment", "caption"};

using Json = nlohmann::ordered_json;

[[noreturn]] void lineError(std::size_t lineNo, const std::string& message) {
    throw ParseError("line " + std::to_string(lineNo) + ": " + message);
}

PaperRecord paperFromJson(const Json& record, std::size_t lineNo, const ParseOptions& options) {
    if (!record.is_object()) {
        lineError(lineNo, "paper record must be a JSON object");
    }
    PaperRecord paper;

    auto idIt = record.find("id");
    if (idIt == record.end() || !idIt->is_string() || idIt->get<std::string>().empty()) {
        lineError(lineNo, "missing or invalid \"id\"");
    }
    paper.id = idIt->get<std::string>();

    auto yearIt = record.find("year");
    if (yearIt == record.end() || !yearIt->is_number_integer()) {
        lineError(lineNo, "missing or invalid \"year\"");
    }
    paper.year = yearIt->get<int>();
    if (paper.year < options.minYear || paper.year > options.maxYear) {
        lineError(lineNo, "year " + std::to_string(paper.year) + " outside configured range [" +
                              std::to_string(options.minYear) + ", " + std::to_string(options.maxYear) + "]");
    }

    auto sectionsIt = record.find("sections");
    if (sectionsIt == record.end()) {
        return paper;
    }
    if (!sectionsIt->is_array()) {
        lineError(lineNo, "\"sections\" must be an array");
    }
    std::set<std::string> seenNames;
    for (const auto& sectionJson : *sectionsIt) {
        if (!sectionJson.is_object()) {
            lineError(lineNo, "section must be an object");
        }
        Section section;
        auto nameIt = sectionJson.find("name");
        if (nameIt == sectionJson.end() || !nameIt->is_string()) {
            lineError(lineNo, "section missing \"name\"");
        }
        section.name = nameIt->get<std::string>();
        if (!seenNames.insert(section.name).second) {
            lineError(lineNo, "duplicate section name \"" + section.name + "\" in paper " + paper.id);
        }
        auto sentencesIt = sectionJson.find("sentences");
        if (sentencesIt != sectionJson.end()) {
            if (!sentencesIt->is_array()) {
                lineError(lineNo, "\"sentences\" must be an array");
            }
            for (const auto& sentenceJson : *sentencesIt) {
                if (!sentenceJson.is_array()) {
                    lineError(lineNo, "sentence must be an array of mentions");
                }
                Sentence sentence;
                for (const auto& mentionJson : sentenceJson) {
                    if (!mentionJson.is_object()) {
                        lineError(lineNo, "mention must be an object");
                    }
                    auto surfaceIt = mentionJson.find("surface");
                    auto typeIt = mentionJson.find("type");
                    if (surfaceIt == mentionJson.end() || !surfaceIt->is_string()) {
                        lineError(lineNo, "mention missing \"surface\"");
                    }
                    if (typeIt == mentionJson.end() || !typeIt->is_string()) {
                        lineError(lineNo, "mention missing \"type\"");
                    }
                    Mention mention;
                    try {
                        mention.type = entityTypeFromString(typeIt->get<std::string>());
                        mention.surface = normalizeEntity(surfaceIt->get<std::string>());
                    } catch (const Error& e) {
                        lineError(lineNo, e.what());
                    }
                    sentence.push_back(std::move(mention));
                }
                section.sentences.push_back(std::move(sentence));
            }
        }
        paper.sections.push_back(std::move(section));
    }
    return paper;
}

Json paperToJson(const PaperRecord& paper) {
    Json record;
    record["id"] = paper.id;
    record["year"] = paper.year;
    Json sections = Json::array();
    for (const auto& section : paper.sections) {
        Json sectionJson;
        sectionJson["name"] = section.name;
        Json sentences = Json::array();
        for (const auto& sentence : section.sentences) {
            Json sentenceJson = Json::array();
            for (const auto& mention : sentence) {
                Json mentionJson;
                mentionJson["surface"] = mention.surface;
                mentionJson["type"] = toString(mention.type);
                sentenceJson.push_back(std::move(mentionJson));
            }
            sentences.push_back(std::move(sentenceJson));
        }
        sectionJson["sentences"] = std::move(sentences);
        sections.push_back(std::move(sectionJson));
    }
    record["sections"] = std::move(sections);
    return record;
}

}  // namespace

const std::string& toString(EntityType type) {
    static const std::string names[] = {"task", "dataset", "method", "metric"};
    return names[static_cast<int>(type)];
}

EntityType entityTypeFromString(const std::string& text) {
    for (EntityType type : kEntityTypes) {
        if (text == toString(type)) {
            return type;
        }
    }
    throw ParseError("unknown entity type \"" + text + "\" (expected task, dataset, method, or metric)");
}

Corpus::Corpus(std::vector<PaperRecord> papers) : papers_(std::move(papers)) {
    std::set<std::string> ids;
    for (std::size_t row = 0; row < papers_.size(); ++row) {
        const PaperRecord& paper = papers_[row];
        if (!ids.insert(paper.id).second) {
            throw DomainError("duplicate paper id \"" + paper.id + "\"");
        }
        std::set<std::string> names;
        for (const auto& section : paper.sections) {
            if (!names.insert(section.name).second) {
                throw DomainError("duplicate section name \"" + section.name + "\" in paper " + paper.id);
            }
            for (const auto& sentence : section.sentences) {
                for (const auto& mention : sentence) {
                    entityIndex_[mention.entity()].insert(paper.id);
                }
            }
        }
        ++yearIndex_[paper.year];
        yearRows_[paper.year].push_back(row);
    }
}

std::size_t Corpus::paperCount(int year) const {
    auto it = yearIndex_.find(year);
    return it == yearIndex_.end() ? 0 : it->second;
}

const std::vector<std::size_t>& Corpus::paperRowsInYear(int year) const {
    static const std::vector<std::size_t> kEmpty;
    auto it = yearRows_.find(year);
    return it == yearRows_.end() ? kEmpty : it->second;
}

bool Corpus::contains(const Entity& entity) const {
    return entityIndex_.find(entity) != entityIndex_.end();
}

std::vector<Entity> Corpus::entitiesOfType(EntityType type) const {
    std::vector<Entity> out;
    for (const auto& [entity, ids] : entityIndex_) {
        if (entity.type == type) {
            out.push_back(entity);
        }
    }
    return out;
}

int Corpus::minYear() const {
    if (yearIndex_.empty()) {
        throw DomainError("empty corpus has no year range");
    }
    return yearIndex_.begin()->first;
}

int Corpus::maxYear() const {
    if (yearIndex_.empty()) {
        throw DomainError("empty corpus has no year range");
    }
    return yearIndex_.rbegin()->first;
}

Corpus parseCorpus(std::istream& input, const ParseOptions& options) {
    std::vector<PaperRecord> papers;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(input, line)) {
        ++lineNo;
        bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
        if (blank) {
            continue;
        }
        Json record;
        try {
            record = Json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            lineError(lineNo, std::string("malformed JSON: ") + e.what());
        }
        papers.push_back(paperFromJson(record, lineNo, options));
    }
    try {
        return Corpus(std::move(papers));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

Corpus parseCorpusFile(const std::string& path, const ParseOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open corpus file: " + path);
    }
    return parseCorpus(in, options);
}

void serializeCorpus(const Corpus& corpus, std::ostream& out) {
    for (const auto& paper : corpus.papers()) {
        out << paperToJson(paper).dump() << '\n';
    }
}

std::string normalizeEntity(const std::string& surface) {
    std::string out;
    out.reserve(surface.size());
    bool pendingSpace = false;
    for (unsigned char c : surface) {
        if (std::isspace(c)) {
            pendingSpace = !out.empty();
            continue;
        }
        if (pendingSpace) {
            out += ' ';
            pendingSpace = false;
        }
        out += static_cast<char>(std::tolower(c));
    }
    if (out.empty()) {
        throw DomainError("entity surface is empty after normalization: \"" + surface + "\"");
    }
    return out;
}

Corpus filterRareEntities(const Corpus& corpus, std::size_t minPapers) {
    if (minPapers < 1) {
        throw DomainError("min_papers must be at least 1");
    }
    std::set<Entity> kept;
    for (const auto& [entity, ids] : corpus.entityIndex()) {
        if (ids.size() > minPapers) {
            kept.insert(entity);
        }
    }
    std::vector<PaperRecord> papers = corpus.papers();
    for (auto& paper : papers) {
        for (auto& section : paper.sections) {
            for (auto& sentence : section.sentences) {
                std::erase_if(sentence, [&](const Mention& m) { return kept.count(m.entity()) == 0; });
            }
        }
    }
    return Corpus(std::move(papers));
}

const std::vector<std::string>& defaultTaskSections() {
    return kTaskSections;
}

std::vector<Entity> assignPaperTasks(const PaperRecord& paper, const std::vector<std::string>& sectionsOfInterest) {
    if (sectionsOfInterest.empty()) {
        throw DomainError("sections_of_interest must not be empty");
    }
    std::map<Entity, std::size_t> counts;
    for (const auto& section : paper.sections) {
        if (std::find(sectionsOfInterest.begin(), sectionsOfInterest.end(), section.name) ==
            sectionsOfInterest.end()) {
            continue;
        }
        for (const auto& sentence : section.sentences) {
            for (const auto& mention : sentence) {
                if (mention.type == EntityType::Task) {
                    ++counts[mention.entity()];
                }
            }
        }
    }
    std::size_t best = 0;
    for (const auto& [entity, count] : counts) {
        best = std::max(best, count);
    }
    std::vector<Entity> tasks;
    for (const auto& [entity, count] : counts) {
        if (count == best && best > 0) {
            tasks.push_back(entity);
        }
    }
    return tasks;  // map iteration already gives lexicographic order
}

std::size_t cooccurrenceCount(const Corpus& corpus, const Entity& x, const Entity& y, int year) {
    if (x == y) {
        throw DomainError("cooccurrence_count requires two distinct entities");
    }
    std::size_t count = 0;
    for (std::size_t row : corpus.paperRowsInYear(year)) {
        for (const auto& section : corpus.papers()[row].sections) {
            for (const auto& sentence : section.sentences) {
                bool hasX = false;
                bool hasY = false;
                for (const auto& mention : sentence) {
                    hasX = hasX || mention.entity() == x;
                    hasY = hasY || mention.entity() == y;
                }
                if (hasX && hasY) {
                    ++count;
                }
            }
        }
    }
    return count;
}

std::map<int, std::map<Entity, std::size_t>> cooccurrencesWithTask(const Corpus& corpus, const Entity& task) {
    std::map<int, std::map<Entity, std::size_t>> counts;
    for (const auto& paper : corpus.papers()) {
        for (const auto& section : paper.sections) {
            for (const auto& sentence : section.sentences) {
                bool hasTask = false;
                for (const auto& mention : sentence) {
                    if (mention.entity() == task) {
                        hasTask = true;
                        break;
                    }
                }
                if (!hasTask) {
                    continue;
                }
                std::set<Entity> distinct;
                for (const auto& mention : sentence) {
                    distinct.insert(mention.entity());
                }
                distinct.erase(task);
                for (const auto& entity : distinct) {
                    ++counts[paper.year][entity];
                }
            }
        }
    }
    return counts;
}

}  // namespace scitrend
