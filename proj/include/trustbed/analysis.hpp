#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trustbed/engine.hpp"
#include "trustbed/types.hpp"

namespace trustbed::analysis {

inline constexpr double kSignificance = 0.05;

struct SeriesPoint {
    ConsumerGroup group = ConsumerGroup::NoTrustModel;
    std::uint32_t interaction = 0;
    std::vector<double> perRunMeans;
    double pooledMean = 0.0;
};

// Per-(group, interaction) sums for one run. Lets the batch runner fold a
// run's records as soon as the run finishes.
class RunTally {
public:
    void add(const InteractionRecord& r);
    // Mean UG of the run's k-th interactions for `group`, if any occurred.
    std::optional<double> mean(ConsumerGroup group, std::uint32_t interaction) const;
    std::uint32_t maxInteraction(ConsumerGroup group) const;

private:
    struct Cell {
        double sum = 0.0;
        std::size_t count = 0;
    };
    std::array<std::vector<Cell>, 3> cells_;
};

// Points are sorted by (group, interaction). A point needs at least
// min(2, runs) contributing runs.
std::vector<SeriesPoint> aggregate(std::span<const RunTally> runs);
std::vector<SeriesPoint> aggregate(std::span<const InteractionRecord> records, std::size_t nisr);

struct TTestResult {
    bool significant = false;
    double t = 0.0;
    double df = 0.0;
    double pValue = 1.0;
};

// Regularized incomplete beta I_x(a, b).
double incompleteBeta(double a, double b, double x);

// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees.
double studentTwoSidedP(double t, double df);

// Welch's unequal-variance two-sample test. Samples with fewer than two
// points yield a non-significant result.
TTestResult welchTTest(std::span<const double> a, std::span<const double> b,
                       double alpha = kSignificance);

using GroupMeans = std::array<std::optional<double>, 3>;
using Significance = std::array<std::array<bool, 3>, 3>;
using GroupRanks = std::array<std::optional<int>, 3>;

// Groups sorted by mean, best first; neighbours whose difference is not
// significant share a cluster. The best cluster gets rank 3 and each later
// cluster gets 3 minus the number of groups ranked above it.
GroupRanks rankGroups(const GroupMeans& means, const Significance& significant);

struct RankedRow {
    std::uint32_t interaction = 0;
    GroupMeans means;
    GroupRanks ranks;
    std::array<std::size_t, 3> runs{};
};

std::vector<RankedRow> rankSeries(std::span<const SeriesPoint> points, double alpha = kSignificance);

struct Window {
    std::uint32_t first = 1;
    std::uint32_t last = 1;
};

// Mean of the per-interaction means of `group` over the rows inside the
// window; nullopt if the window holds no point for the group.
std::optional<double> windowMean(std::span<const RankedRow> rows, ConsumerGroup group, Window window);

struct SummaryCell {
    ConsumerGroup group = ConsumerGroup::NoTrustModel;
    Window window;
    std::optional<double> mean;
    std::size_t points = 0;
};

std::vector<SummaryCell> summarize(std::span<const RankedRow> rows, std::span<const Window> windows);

}  // namespace trustbed::analysis
