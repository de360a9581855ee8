#include "scitrend/Baseline.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "scitrend/Errors.h"

namespace scitrend {

namespace {

bool inSlice(const PaperRecord& paper, const std::optional<Period>& slice) {
    return !slice || slice->contains(paper.year);
}

}  // namespace

CooccurrenceStats collectCooccurrenceStats(const Corpus& corpus, const Entity& x, const Entity& y,
                                           const std::optional<Period>& slice) {
    if (x == y) {
        throw DomainError("cooccurrence stats require two distinct entities");
    }
    CooccurrenceStats stats;
    for (const auto& paper : corpus.papers()) {
        if (!inSlice(paper, slice)) {
            continue;
        }
        for (const auto& section : paper.sections) {
            for (const auto& sentence : section.sentences) {
                ++stats.total;
                bool hasX = false;
                bool hasY = false;
                for (const auto& mention : sentence) {
                    hasX = hasX || mention.entity() == x;
                    hasY = hasY || mention.entity() == y;
                }
                stats.x += hasX;
                stats.y += hasY;
                stats.joint += hasX && hasY;
            }
        }
    }
    return stats;
}

double npmi(const CooccurrenceStats& stats) {
    if (stats.x == 0 || stats.y == 0) {
        throw DomainError("npmi requires both entities to occur at least once");
    }
    if (stats.joint > std::min(stats.x, stats.y) || std::max(stats.x, stats.y) > stats.total) {
        throw DomainError("inconsistent co-occurrence counts");
    }
    if (stats.joint == 0) {
        return -1.0;
    }
    if (stats.x == stats.joint && stats.y == stats.joint) {
        return 1.0;  // only ever occur together; also covers joint == total
    }
    double n = static_cast<double>(stats.total);
    double px = static_cast<double>(stats.x) / n;
    double py = static_cast<double>(stats.y) / n;
    double pxy = static_cast<double>(stats.joint) / n;
    double value = std::log(pxy / (px * py)) / -std::log(pxy);
    return std::clamp(value, -1.0, 1.0);
}

double pearson(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) {
        throw DomainError("pearson requires equal-length vectors");
    }
    if (u.size() < 3) {
        throw DomainError("pearson requires at least 3 observations");
    }
    double n = static_cast<double>(u.size());
    double meanU = 0.0;
    double meanV = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        meanU += u[i];
        meanV += v[i];
    }
    meanU /= n;
    meanV /= n;
    double cov = 0.0;
    double varU = 0.0;
    double varV = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double du = u[i] - meanU;
        double dv = v[i] - meanV;
        cov += du * dv;
        varU += du * du;
        varV += dv * dv;
    }
    if (varU == 0.0 || varV == 0.0) {
        throw DomainError("pearson is undefined for constant input");
    }
    return std::clamp(cov / std::sqrt(varU * varV), -1.0, 1.0);
}

std::map<EntityType, std::vector<BaselineRankEntry>> npmiRankings(const Corpus& corpus, const Entity& task,
                                                                  const std::optional<Period>& slice,
                                                                  std::size_t topK) {
    std::size_t total = 0;
    std::map<Entity, std::size_t> occurs;
    std::map<Entity, std::size_t> joint;
    for (const auto& paper : corpus.papers()) {
        if (!inSlice(paper, slice)) {
            continue;
        }
        for (const auto& section : paper.sections) {
            for (const auto& sentence : section.sentences) {
                ++total;
                std::set<Entity> distinct;
                for (const auto& mention : sentence) {
                    distinct.insert(mention.entity());
                }
                bool hasTask = distinct.count(task) > 0;
                for (const auto& entity : distinct) {
                    ++occurs[entity];
                    if (hasTask && entity != task) {
                        ++joint[entity];
                    }
                }
            }
        }
    }
    auto taskIt = occurs.find(task);
    std::map<EntityType, std::vector<BaselineRankEntry>> rankings;
    if (taskIt == occurs.end()) {
        return rankings;
    }
    for (const auto& [entity, jointCount] : joint) {
        CooccurrenceStats stats{occurs[entity], taskIt->second, jointCount, total};
        rankings[entity.type].push_back({entity, npmi(stats), jointCount});
    }
    for (auto& [type, entries] : rankings) {
        std::sort(entries.begin(), entries.end(), [](const BaselineRankEntry& a, const BaselineRankEntry& b) {
            if (a.score != b.score) {
                return a.score > b.score;
            }
            if (a.joint != b.joint) {
                return a.joint > b.joint;
            }
            return a.entity < b.entity;
        });
        if (entries.size() > topK) {
            entries.resize(topK);
        }
    }
    return rankings;
}

}  // namespace scitrend
