#include "trustbed/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace trustbed::analysis {

void RunTally::add(const InteractionRecord& r) {
    auto& cells = cells_[indexOf(r.group)];
    if (r.interactionIndex == 0) {
        return;
    }
    if (cells.size() < r.interactionIndex) {
        cells.resize(r.interactionIndex);
    }
    Cell& cell = cells[r.interactionIndex - 1];
    cell.sum += r.ug;
    ++cell.count;
}

std::optional<double> RunTally::mean(ConsumerGroup group, std::uint32_t interaction) const {
    const auto& cells = cells_[indexOf(group)];
    if (interaction == 0 || interaction > cells.size() || cells[interaction - 1].count == 0) {
        return std::nullopt;
    }
    const Cell& cell = cells[interaction - 1];
    return cell.sum / static_cast<double>(cell.count);
}

std::uint32_t RunTally::maxInteraction(ConsumerGroup group) const {
    return static_cast<std::uint32_t>(cells_[indexOf(group)].size());
}

std::vector<SeriesPoint> aggregate(std::span<const RunTally> runs) {
    std::vector<SeriesPoint> points;
    const std::size_t minRuns = std::min<std::size_t>(2, runs.size());
    for (auto group : kAllGroups) {
        std::uint32_t longest = 0;
        for (const auto& run : runs) {
            longest = std::max(longest, run.maxInteraction(group));
        }
        for (std::uint32_t k = 1; k <= longest; ++k) {
            SeriesPoint point;
            point.group = group;
            point.interaction = k;
            for (const auto& run : runs) {
                if (auto m = run.mean(group, k)) {
                    point.perRunMeans.push_back(*m);
                }
            }
            if (point.perRunMeans.empty() || point.perRunMeans.size() < minRuns) {
                continue;
            }
            double total = 0.0;
            for (double m : point.perRunMeans) {
                total += m;
            }
            point.pooledMean = total / static_cast<double>(point.perRunMeans.size());
            points.push_back(std::move(point));
        }
    }
    return points;
}

std::vector<SeriesPoint> aggregate(std::span<const InteractionRecord> records, std::size_t nisr) {
    if (records.empty()) {
        return {};
    }
    // Runs are keyed by id; any id is accepted so long as there are at most
    // `nisr` distinct ones, and run order follows id order.
    std::map<std::uint32_t, RunTally> byRun;
    for (const auto& r : records) {
        byRun[r.runId].add(r);
    }
    std::vector<RunTally> runs;
    runs.reserve(std::max(nisr, byRun.size()));
    for (auto& [id, tally] : byRun) {
        runs.push_back(std::move(tally));
    }
    // Runs that produced no records still count towards the run total.
    while (runs.size() < nisr) {
        runs.emplace_back();
    }
    return aggregate(runs);
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double betaContinuedFraction(double a, double b, double x) {
    constexpr int kMaxIterations = 500;
    constexpr double kEpsilon = 1e-15;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) {
        d = kTiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEpsilon) {
            break;
        }
    }
    return h;
}

}  // namespace

double incompleteBeta(double a, double b, double x) {
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    const double logFront =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(logFront);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betaContinuedFraction(a, b, x) / a;
    }
    return 1.0 - front * betaContinuedFraction(b, a, 1.0 - x) / b;
}

double studentTwoSidedP(double t, double df) {
    if (std::isinf(t)) {
        return 0.0;
    }
    return incompleteBeta(0.5 * df, 0.5, df / (df + t * t));
}

namespace {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
};

Moments momentsOf(std::span<const double> xs) {
    Moments m;
    for (double x : xs) {
        m.mean += x;
    }
    m.mean /= static_cast<double>(xs.size());
    for (double x : xs) {
        m.variance += (x - m.mean) * (x - m.mean);
    }
    m.variance /= static_cast<double>(xs.size() - 1);
    return m;
}

}  // namespace

TTestResult welchTTest(std::span<const double> a, std::span<const double> b, double alpha) {
    TTestResult result;
    if (a.size() < 2 || b.size() < 2) {
        return result;
    }
    const auto ma = momentsOf(a);
    const auto mb = momentsOf(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = ma.variance / na;
    const double vb = mb.variance / nb;
    const double se2 = va + vb;
    const double diff = ma.mean - mb.mean;

    if (se2 <= 0.0) {
        result.df = na + nb - 2.0;
        if (diff == 0.0) {
            return result;
        }
        result.t = diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        result.pValue = 0.0;
        result.significant = true;
        return result;
    }
    result.t = diff / std::sqrt(se2);
    result.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    result.pValue = studentTwoSidedP(result.t, result.df);
    result.significant = result.pValue < alpha;
    return result;
}

GroupRanks rankGroups(const GroupMeans& means, const Significance& significant) {
    std::vector<std::size_t> present;
    for (std::size_t g = 0; g < means.size(); ++g) {
        if (means[g]) {
            present.push_back(g);
        }
    }
    std::stable_sort(present.begin(), present.end(),
                     [&means](std::size_t a, std::size_t b) { return *means[a] > *means[b]; });
    GroupRanks ranks;
    int rank = static_cast<int>(means.size());
    for (std::size_t i = 0; i < present.size(); ++i) {
        if (i > 0 && significant[present[i - 1]][present[i]]) {
            rank = static_cast<int>(means.size() - i);
        }
        ranks[present[i]] = rank;
    }
    return ranks;
}

std::vector<RankedRow> rankSeries(std::span<const SeriesPoint> points, double alpha) {
    std::map<std::uint32_t, std::array<const SeriesPoint*, 3>> byInteraction;
    for (const auto& p : points) {
        byInteraction[p.interaction][indexOf(p.group)] = &p;
    }
    std::vector<RankedRow> rows;
    rows.reserve(byInteraction.size());
    for (const auto& [k, slots] : byInteraction) {
        RankedRow row;
        row.interaction = k;
        Significance sig{};
        for (std::size_t g = 0; g < 3; ++g) {
            if (slots[g] != nullptr) {
                row.means[g] = slots[g]->pooledMean;
                row.runs[g] = slots[g]->perRunMeans.size();
            }
        }
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t b = a + 1; b < 3; ++b) {
                if (slots[a] == nullptr || slots[b] == nullptr) {
                    continue;
                }
                const bool s = welchTTest(slots[a]->perRunMeans, slots[b]->perRunMeans, alpha).significant;
                sig[a][b] = s;
                sig[b][a] = s;
            }
        }
        row.ranks = rankGroups(row.means, sig);
        rows.push_back(row);
    }
    return rows;
}

std::optional<double> windowMean(std::span<const RankedRow> rows, ConsumerGroup group, Window window) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& row : rows) {
        if (row.interaction < window.first || row.interaction > window.last) {
            continue;
        }
        if (const auto& m = row.means[indexOf(group)]) {
            total += *m;
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return total / static_cast<double>(n);
}

std::vector<SummaryCell> summarize(std::span<const RankedRow> rows, std::span<const Window> windows) {
    std::vector<SummaryCell> cells;
    for (auto group : kAllGroups) {
        for (const auto& w : windows) {
            SummaryCell cell{group, w, windowMean(rows, group, w), 0};
            for (const auto& row : rows) {
                if (row.interaction >= w.first && row.interaction <= w.last && row.means[indexOf(group)]) {
                    ++cell.points;
                }
            }
            cells.push_back(cell);
        }
    }
    return cells;
}

}  // namespace trustbed::analysis
