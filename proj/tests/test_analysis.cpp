#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "trustbed/analysis.hpp"
#include "trustbed/random.hpp"

using namespace trustbed;
using namespace trustbed::analysis;

namespace {

InteractionRecord rec(std::uint32_t run, ConsumerGroup g, std::uint64_t consumer, std::uint32_t k, double ug) {
    return {run, g, AgentId{consumer}, k, static_cast<int>(k), ug};
}

const SeriesPoint* find(const std::vector<SeriesPoint>& pts, ConsumerGroup g, std::uint32_t k) {
    for (const auto& p : pts) {
        if (p.group == g && p.interaction == k) return &p;
    }
    return nullptr;
}

struct DirectWelch {
    double t;
    double df;
};

// Textbook formulas evaluated term by term.
DirectWelch directWelch(const std::vector<double>& a, const std::vector<double>& b) {
    auto mean = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : x) s += v;
        return s / static_cast<double>(x.size());
    };
    auto var = [&](const std::vector<double>& x) {
        const double m = mean(x);
        double s = 0.0;
        for (double v : x) s += (v - m) * (v - m);
        return s / static_cast<double>(x.size() - 1);
    };
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double sa = var(a) / na;
    const double sb = var(b) / nb;
    const double t = (mean(a) - mean(b)) / std::sqrt(sa + sb);
    const double df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    return {t, df};
}

double boostTwoSided(double t, double df) {
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace

TEST_CASE("aggregation") {
    SUBCASE("single run gives single-sample means") {
        const std::vector<InteractionRecord> rs{rec(0, ConsumerGroup::Ca, 1, 1, 2.0),
                                                rec(0, ConsumerGroup::Ca, 1, 2, 4.0)};
        const auto pts = aggregate(rs, 1);
        REQUIRE(pts.size() == 2);
        CHECK(find(pts, ConsumerGroup::Ca, 1)->pooledMean == 2.0);
        CHECK(find(pts, ConsumerGroup::Ca, 2)->pooledMean == 4.0);
    }

    SUBCASE("pooled mean is the mean of run means") {
        const std::vector<InteractionRecord> rs{rec(0, ConsumerGroup::Fire, 1, 1, 2.0),
                                                rec(0, ConsumerGroup::Fire, 2, 1, 4.0),
                                                rec(1, ConsumerGroup::Fire, 3, 1, 5.0)};
        const auto pts = aggregate(rs, 2);
        const auto* p = find(pts, ConsumerGroup::Fire, 1);
        REQUIRE(p);
        CHECK(p->perRunMeans == std::vector<double>{3.0, 5.0});
        CHECK(p->pooledMean == 4.0);
        CHECK(find(pts, ConsumerGroup::Ca, 1) == nullptr);
    }

    SUBCASE("points seen in a single run of several are dropped") {
        const std::vector<InteractionRecord> rs{rec(0, ConsumerGroup::Ca, 1, 1, 2.0),
                                                rec(1, ConsumerGroup::Ca, 2, 1, 4.0),
                                                rec(1, ConsumerGroup::Ca, 2, 2, 4.0)};
        const auto pts = aggregate(rs, 2);
        CHECK(find(pts, ConsumerGroup::Ca, 1) != nullptr);
        CHECK(find(pts, ConsumerGroup::Ca, 2) == nullptr);
    }

    SUBCASE("empty input") { CHECK(aggregate(std::span<const InteractionRecord>{}, 3).empty()); }

    SUBCASE("record order does not matter") {
        Rng rng(31);
        std::vector<InteractionRecord> rs;
        for (std::uint32_t run = 0; run < 4; ++run) {
            for (std::uint64_t c = 0; c < 20; ++c) {
                const auto g = kAllGroups[c % 3];
                for (std::uint32_t k = 1; k <= 1 + rng.index(8); ++k) {
                    rs.push_back(rec(run, g, c, k, std::round(rng.uniform(-10.0, 10.0) * 8.0) / 8.0));
                }
            }
        }
        const auto a = aggregate(rs, 4);
        rng.shuffle(std::span<InteractionRecord>(rs));
        const auto b = aggregate(rs, 4);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i].group == b[i].group);
            REQUIRE(a[i].interaction == b[i].interaction);
            REQUIRE(a[i].perRunMeans == b[i].perRunMeans);
        }
    }
}

TEST_CASE("incomplete beta matches Boost") {
    Rng rng(32);
    for (int i = 0; i < 500; ++i) {
        const double a = rng.uniform(0.1, 60.0);
        const double b = rng.uniform(0.1, 60.0);
        const double x = rng.uniform();
        REQUIRE(incompleteBeta(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-10));
    }
    CHECK(incompleteBeta(2.0, 3.0, 0.0) == 0.0);
    CHECK(incompleteBeta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("Welch t-test") {
    SUBCASE("identical samples are not significant") {
        const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
        const auto r = welchTTest(a, a);
        CHECK_FALSE(r.significant);
        CHECK(r.t == 0.0);
    }

    SUBCASE("well separated samples are significant") {
        Rng rng(33);
        std::vector<double> a;
        std::vector<double> b;
        for (int i = 0; i < 30; ++i) {
            a.push_back(rng.normal(6.0, 0.1));
            b.push_back(rng.normal(3.0, 0.1));
        }
        CHECK(welchTTest(a, b).significant);
    }

    SUBCASE("textbook fixture against the direct formula and Boost") {
        const std::vector<double> a{19.1, 20.3, 18.7, 21.5, 20.0, 19.8, 22.1, 18.9, 20.6, 21.0};
        const std::vector<double> b{17.2, 18.9, 16.5, 19.8, 18.1, 17.7, 20.3, 16.9, 18.4, 19.1};
        const auto r = welchTTest(a, b);
        const auto d = directWelch(a, b);
        CHECK(std::abs(r.t - d.t) < 1e-9);
        CHECK(std::abs(r.df - d.df) < 1e-9);
        CHECK(std::abs(r.pValue - boostTwoSided(d.t, d.df)) < 1e-9);
    }

    SUBCASE("random samples against the oracles") {
        Rng rng(34);
        for (int trial = 0; trial < 300; ++trial) {
            std::vector<double> a(2 + rng.index(30));
            std::vector<double> b(2 + rng.index(30));
            const double shift = rng.uniform(-2.0, 2.0);
            for (auto& v : a) v = rng.normal(0.0, rng.uniform(0.1, 3.0));
            for (auto& v : b) v = rng.normal(shift, rng.uniform(0.1, 3.0));
            const auto r = welchTTest(a, b);
            const auto d = directWelch(a, b);
            const double p = boostTwoSided(d.t, d.df);
            REQUIRE(std::abs(r.t - d.t) < 1e-9 * std::max(1.0, std::abs(d.t)));
            REQUIRE(std::abs(r.df - d.df) < 1e-9 * std::max(1.0, d.df));
            REQUIRE(std::abs(r.pValue - p) < 1e-9);
            REQUIRE(r.significant == (p < 0.05));
        }
    }

    SUBCASE("swapping samples negates t") {
        Rng rng(35);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> a(5);
            std::vector<double> b(7);
            for (auto& v : a) v = rng.uniform(-10.0, 10.0);
            for (auto& v : b) v = rng.uniform(-5.0, 10.0);
            const auto ab = welchTTest(a, b);
            const auto ba = welchTTest(b, a);
            REQUIRE(ab.t == doctest::Approx(-ba.t));
            REQUIRE(ab.significant == ba.significant);
        }
    }

    SUBCASE("too few points are not significant") {
        const std::vector<double> one{5.0};
        const std::vector<double> many{0.0, 0.1, 0.2};
        CHECK_FALSE(welchTTest(one, many).significant);
    }

    SUBCASE("zero variance with different means is significant") {
        const std::vector<double> a{2.0, 2.0, 2.0};
        const std::vector<double> b{1.0, 1.0};
        CHECK(welchTTest(a, b).significant);
        CHECK_FALSE(welchTTest(a, a).significant);
    }
}

TEST_CASE("ranking") {
    auto allSignificant = [] {
        Significance s{};
        for (auto& row : s) row.fill(true);
        return s;
    };

    SUBCASE("fully separated") {
        const auto r = rankGroups({6.0, 3.0, 0.0}, allSignificant());
        CHECK(r == GroupRanks{3, 2, 1});
    }

    SUBCASE("top pair tied") {
        auto s = allSignificant();
        s[0][1] = s[1][0] = false;
        CHECK(rankGroups({6.0, 5.9, 0.0}, s) == GroupRanks{3, 3, 1});
    }

    SUBCASE("nothing significant") { CHECK(rankGroups({6.0, 3.0, 0.0}, Significance{}) == GroupRanks{3, 3, 3}); }

    SUBCASE("top pair tied in another group order") {
        auto s = allSignificant();
        s[1][2] = s[2][1] = false;
        CHECK(rankGroups({0.0, 5.0, 4.9}, s) == GroupRanks{1, 3, 3});
    }

    SUBCASE("bottom pair tied") {
        auto s = allSignificant();
        s[1][2] = s[2][1] = false;
        CHECK(rankGroups({6.0, 1.0, 1.1}, s) == GroupRanks{3, 2, 2});
    }

    SUBCASE("merging is transitive") {
        auto s = allSignificant();
        s[0][1] = s[1][0] = false;
        s[1][2] = s[2][1] = false;
        CHECK(rankGroups({3.0, 2.0, 1.0}, s) == GroupRanks{3, 3, 3});
    }

    SUBCASE("missing groups are unranked") {
        const auto r = rankGroups({std::nullopt, 2.0, 1.0}, allSignificant());
        CHECK_FALSE(r[0].has_value());
        CHECK(r[1] == 3);
        CHECK(r[2] == 2);
    }
}

TEST_CASE("ranked series are invariant under affine transforms") {
    Rng rng(36);
    std::vector<SeriesPoint> points;
    for (std::uint32_t k = 1; k <= 40; ++k) {
        for (auto g : kAllGroups) {
            SeriesPoint p;
            p.group = g;
            p.interaction = k;
            const double centre = static_cast<double>(indexOf(g)) * rng.uniform(0.0, 1.5);
            for (int run = 0; run < 10; ++run) {
                p.perRunMeans.push_back(rng.normal(centre, 1.0));
            }
            p.pooledMean = std::accumulate(p.perRunMeans.begin(), p.perRunMeans.end(), 0.0) / 10.0;
            points.push_back(p);
        }
    }
    auto transformed = points;
    for (auto& p : transformed) {
        for (auto& v : p.perRunMeans) v = 2.5 * v - 3.0;
        p.pooledMean = 2.5 * p.pooledMean - 3.0;
    }
    const auto a = rankSeries(points);
    const auto b = rankSeries(transformed);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].ranks == b[i].ranks);
        REQUIRE(a[i].runs == std::array<std::size_t, 3>{10, 10, 10});
    }
}

TEST_CASE("window summaries") {
    std::vector<RankedRow> rows;
    for (std::uint32_t k = 1; k <= 20; ++k) {
        RankedRow row;
        row.interaction = k;
        row.means = {5.0, static_cast<double>(k), std::nullopt};
        rows.push_back(row);
    }

    CHECK(*windowMean(rows, ConsumerGroup::NoTrustModel, {3, 17}) == 5.0);
    CHECK(*windowMean(rows, ConsumerGroup::Fire, {7, 7}) == 7.0);
    CHECK_FALSE(windowMean(rows, ConsumerGroup::Ca, {1, 20}));
    CHECK_FALSE(windowMean(rows, ConsumerGroup::Fire, {30, 40}));

    const std::vector<Window> windows{{1, 10}, {11, 20}};
    const auto cells = summarize(rows, windows);
    for (const auto& c : cells) {
        if (c.group != ConsumerGroup::Fire) continue;
        // Recompute from scratch: mean of k over the window.
        double total = 0.0;
        for (std::uint32_t k = c.window.first; k <= c.window.last; ++k) total += k;
        CHECK(*c.mean == doctest::Approx(total / (c.window.last - c.window.first + 1)));
        CHECK(c.points == 10);
    }
}

TEST_CASE("window summaries agree with a recomputation from records") {
    Rng rng(37);
    std::vector<InteractionRecord> rs;
    for (std::uint32_t run = 0; run < 3; ++run) {
        for (std::uint64_t c = 0; c < 9; ++c) {
            for (std::uint32_t k = 1; k <= 12; ++k) {
                rs.push_back(rec(run, kAllGroups[c % 3], c, k, rng.uniform(-10.0, 10.0)));
            }
        }
    }
    const auto rows = rankSeries(aggregate(rs, 3));
    for (const Window w : {Window{1, 4}, Window{5, 12}}) {
        for (auto g : kAllGroups) {
            double total = 0.0;
            for (std::uint32_t k = w.first; k <= w.last; ++k) {
                double runTotal = 0.0;
                for (std::uint32_t run = 0; run < 3; ++run) {
                    double s = 0.0;
                    int n = 0;
                    for (const auto& r : rs) {
                        if (r.runId == run && r.group == g && r.interactionIndex == k) {
                            s += r.ug;
                            ++n;
                        }
                    }
                    runTotal += s / n;
                }
                total += runTotal / 3.0;
            }
            CHECK(*windowMean(rows, g, w) == doctest::Approx(total / (w.last - w.first + 1)).epsilon(1e-12));
        }
    }
}
