#include "Support/Oracles.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

using scitrend::EmbeddingSpace;
using scitrend::Entity;
using scitrend::PaperRecord;

std::size_t cooccurrence(const std::vector<PaperRecord>& papers, const Entity& a, const Entity& b, int year) {
    std::size_t count = 0;
    for (const auto& paper : papers) {
        if (paper.year != year) {
            continue;
        }
        for (const auto& section : paper.sections) {
            for (const auto& sentence : section.sentences) {
                bool hasA = false;
                bool hasB = false;
                for (const auto& mention : sentence) {
                    if (mention.surface == a.canonical && mention.type == a.type) {
                        hasA = true;
                    }
                    if (mention.surface == b.canonical && mention.type == b.type) {
                        hasB = true;
                    }
                }
                if (hasA && hasB) {
                    ++count;
                }
            }
        }
    }
    return count;
}

std::vector<Entity> paperTasks(const PaperRecord& paper, const std::vector<std::string>& sections) {
    std::map<Entity, std::size_t> counts;
    for (const auto& section : paper.sections) {
        bool interesting = false;
        for (const auto& name : sections) {
            if (section.name == name) {
                interesting = true;
            }
        }
        if (!interesting) {
            continue;
        }
        for (const auto& sentence : section.sentences) {
            for (const auto& mention : sentence) {
                if (mention.type == scitrend::EntityType::Task) {
                    ++counts[Entity{mention.surface, mention.type}];
                }
            }
        }
    }
    std::size_t best = 0;
    for (const auto& [entity, count] : counts) {
        best = std::max(best, count);
    }
    std::vector<Entity> result;
    for (const auto& [entity, count] : counts) {
        if (count == best && best > 0) {
            result.push_back(entity);
        }
    }
    std::sort(result.begin(), result.end());
    return result;
}

double taskFrequency(const std::vector<PaperRecord>& papers, const Entity& task, int year,
                     const std::vector<std::string>& sections) {
    std::size_t total = 0;
    std::size_t onTask = 0;
    for (const auto& paper : papers) {
        if (paper.year != year) {
            continue;
        }
        ++total;
        auto tasks = paperTasks(paper, sections);
        for (const auto& t : tasks) {
            if (t == task) {
                ++onTask;
            }
        }
    }
    if (total == 0) {
        throw std::runtime_error("oracle: no papers in year");
    }
    return static_cast<double>(onTask) / static_cast<double>(total);
}

double frequencyShift(const std::vector<PaperRecord>& papers, const Entity& task, int t1, int t2,
                      const std::vector<std::string>& sections) {
    double f1 = taskFrequency(papers, task, t1, sections);
    double f2 = taskFrequency(papers, task, t2, sections);
    return (f2 - f1) / static_cast<double>(t2 - t1);
}

double entityChange(const std::vector<PaperRecord>& papers, const Entity& x, const Entity& task, int t1,
                    int t2) {
    std::set<Entity> sameType;
    for (const auto& paper : papers) {
        for (const auto& section : paper.sections) {
            for (const auto& sentence : section.sentences) {
                for (const auto& mention : sentence) {
                    if (mention.type == x.type) {
                        sameType.insert(Entity{mention.surface, mention.type});
                    }
                }
            }
        }
    }
    sameType.erase(task);
    double denominator = 0.0;
    for (const auto& e : sameType) {
        denominator += static_cast<double>(cooccurrence(papers, e, task, t1));
        denominator += static_cast<double>(cooccurrence(papers, e, task, t2));
    }
    if (denominator == 0.0) {
        return -1.0;
    }
    double c1 = static_cast<double>(cooccurrence(papers, x, task, t1));
    double c2 = static_cast<double>(cooccurrence(papers, x, task, t2));
    return std::abs(c1 - c2) / denominator;
}

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

std::vector<Entity> nearestNeighbors(const EmbeddingSpace& space, const Entity& e, std::size_t l) {
    const auto& vectors = space.vectors();
    const auto& reference = vectors.at(e);
    std::vector<std::pair<double, Entity>> scored;
    for (const auto& [other, values] : vectors) {
        if (other == e) {
            continue;
        }
        scored.emplace_back(cosine(reference, values), other);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return a.second < b.second;
    });
    std::vector<Entity> result;
    for (std::size_t i = 0; i < l && i < scored.size(); ++i) {
        result.push_back(scored[i].second);
    }
    return result;
}

double stability(const EmbeddingSpace& s1, const EmbeddingSpace& s2, const Entity& task, std::size_t l) {
    auto n1 = oracle::nearestNeighbors(s1, task, l);
    auto n2 = oracle::nearestNeighbors(s2, task, l);
    std::set<Entity> set1(n1.begin(), n1.end());
    std::set<Entity> set2(n2.begin(), n2.end());
    std::set<Entity> all(set1.begin(), set1.end());
    all.insert(set2.begin(), set2.end());
    std::size_t shared = 0;
    for (const auto& e : set1) {
        if (set2.count(e) != 0) {
            ++shared;
        }
    }
    if (all.empty()) {
        return 1.0;
    }
    return static_cast<double>(shared) / static_cast<double>(all.size());
}

double npmi(std::size_t joint, std::size_t x, std::size_t y, std::size_t total) {
    if (joint == 0) {
        return -1.0;
    }
    if (x == joint && y == joint) {
        return 1.0;
    }
    double pxy = static_cast<double>(joint) / static_cast<double>(total);
    double px = static_cast<double>(x) / static_cast<double>(total);
    double py = static_cast<double>(y) / static_cast<double>(total);
    double value = std::log(pxy / (px * py)) / -std::log(pxy);
    return std::min(1.0, std::max(-1.0, value));
}

double pearson(const std::vector<double>& u, const std::vector<double>& v) {
    double meanU = 0.0;
    double meanV = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        meanU += u[i];
        meanV += v[i];
    }
    meanU /= static_cast<double>(u.size());
    meanV /= static_cast<double>(v.size());
    double num = 0.0;
    double du = 0.0;
    double dv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        num += (u[i] - meanU) * (v[i] - meanV);
        du += (u[i] - meanU) * (u[i] - meanU);
        dv += (v[i] - meanV) * (v[i] - meanV);
    }
    return num / std::sqrt(du * dv);
}

std::vector<double> olsNormalEquations(const std::vector<std::vector<double>>& columns,
                                       const std::vector<double>& target) {
    const std::size_t n = target.size();
    const std::size_t p = columns.size() + 1;
    std::vector<std::vector<long double>> xtx(p, std::vector<long double>(p, 0.0L));
    std::vector<long double> xty(p, 0.0L);
    auto cell = [&](std::size_t r, std::size_t j) -> long double {
        return j == 0 ? 1.0L : static_cast<long double>(columns[j - 1][r]);
    };
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                xtx[i][j] += cell(r, i) * cell(r, j);
            }
            xty[i] += cell(r, i) * static_cast<long double>(target[r]);
        }
    }
    // Gaussian elimination with partial pivoting.
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::abs(static_cast<double>(xtx[r][col])) > std::abs(static_cast<double>(xtx[pivot][col]))) {
                pivot = r;
            }
        }
        std::swap(xtx[col], xtx[pivot]);
        std::swap(xty[col], xty[pivot]);
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col || xtx[col][col] == 0.0L) {
                continue;
            }
            long double factor = xtx[r][col] / xtx[col][col];
            for (std::size_t c = 0; c < p; ++c) {
                xtx[r][c] -= factor * xtx[col][c];
            }
            xty[r] -= factor * xty[col];
        }
    }
    std::vector<double> beta(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        beta[i] = xtx[i][i] == 0.0L ? 0.0 : static_cast<double>(xty[i] / xtx[i][i]);
    }
    return beta;
}

}  // namespace oracle
