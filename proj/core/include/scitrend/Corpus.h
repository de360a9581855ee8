#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace scitrend {

enum class EntityType { Task, Dataset, Method, Metric };

inline constexpr std::array<EntityType, 4> kEntityTypes = {
    EntityType::Task, EntityType::Dataset, EntityType::Method, EntityType::Metric};

const std::string& toString(EntityType type);
EntityType entityTypeFromString(const std::string& text);

// Identity of a tagged concept: the normalized surface plus its type. The
// same string as a task and as a method stays two distinct entities.
struct Entity {
    std::string canonical;
    EntityType type = EntityType::Task;

    bool operator==(const Entity&) const = default;
    auto operator<=>(const Entity&) const = default;
};

// One tagged span inside a sentence. Surfaces are normalized at parse time,
// so mention.surface equals the canonical form afterwards.
struct Mention {
    std::string surface;
    EntityType type = EntityType::Task;

    Entity entity() const { return Entity{surface, type}; }

    bool operator==(const Mention&) const = default;
};

using Sentence = std::vector<Mention>;

struct Section {
    std::string name;
    std::vector<Sentence> sentences;

    bool operator==(const Section&) const = default;
};

struct PaperRecord {
    std::string id;
    int year = 0;
    std::vector<Section> sections;

    bool operator==(const PaperRecord&) const = default;
};

// Inclusive year range with a display label.
struct Period {
    std::string label;
    int start = 0;
    int end = 0;

    bool contains(int year) const { return year >= start && year <= end; }
    bool operator==(const Period&) const = default;
};

// Immutable collection of papers with entity and year indices. Construction
// validates unique paper ids and per-paper unique section names.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<PaperRecord> papers);

    const std::vector<PaperRecord>& papers() const { return papers_; }
    const std::map<Entity, std::set<std::string>>& entityIndex() const { return entityIndex_; }
    const std::map<int, std::size_t>& yearIndex() const { return yearIndex_; }

    std::size_t size() const { return papers_.size(); }
    bool empty() const { return papers_.empty(); }

    std::size_t paperCount(int year) const;
    const std::vector<std::size_t>& paperRowsInYear(int year) const;
    bool contains(const Entity& entity) const;
    std::vector<Entity> entitiesOfType(EntityType type) const;
    int minYear() const;  // throws DomainError when empty
    int maxYear() const;

private:
    std::vector<PaperRecord> papers_;
    std::map<Entity, std::set<std::string>> entityIndex_;
    std::map<int, std::size_t> yearIndex_;
    std::map<int, std::vector<std::size_t>> yearRows_;
};

struct ParseOptions {
    int minYear = 1800;
    int maxYear = 2100;
};

// Reads JSON-lines paper records (see README for the schema). Every mention
// surface is normalized; malformed lines raise ParseError with the line
// number rather than being dropped.
Corpus parseCorpus(std::istream& input, const ParseOptions& options = {});
Corpus parseCorpusFile(const std::string& path, const ParseOptions& options = {});

// Writes the corpus back as JSON-lines, one paper per line, deterministic
// field order. parse(serialize(c)) == c.
void serializeCorpus(const Corpus& corpus, std::ostream& out);

// Lowercases, trims, and collapses internal whitespace runs to single
// spaces. Throws DomainError when nothing is left.
std::string normalizeEntity(const std::string& surface);

// Keeps only entities appearing in strictly more than minPapers papers;
// mentions of dropped entities disappear from sentences, papers stay.
Corpus filterRareEntities(const Corpus& corpus, std::size_t minPapers = 5);

const std::vector<std::string>& defaultTaskSections();

// Tasks a paper is about: the task entities with the maximal mention count
// across the selected sections. All ties are returned, sorted; empty when no
// task is mentioned there.
std::vector<Entity> assignPaperTasks(const PaperRecord& paper,
                                     const std::vector<std::string>& sectionsOfInterest = defaultTaskSections());

// Number of sentences in papers of `year` mentioning both x and y, each
// sentence counted once however often either is repeated.
std::size_t cooccurrenceCount(const Corpus& corpus, const Entity& x, const Entity& y, int year);

// Per-year sentence co-occurrence counts between every entity and `task`,
// one pass over the corpus. Inner maps never contain `task` itself.
std::map<int, std::map<Entity, std::size_t>> cooccurrencesWithTask(const Corpus& corpus, const Entity& task);

}  // namespace scitrend
