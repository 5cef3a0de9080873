#include <catch2/catch_amalgamated.hpp>

#include "micflow/core.hpp"
#include "micflow/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

using namespace micflow;

namespace {

// Oracle for rank_equipartition: enumerate every tie-respecting split into
// exactly min(bins, #clumps) groups and minimize the max deviation from
// n/bins, breaking ties lexicographically by larger earlier bins.
std::vector<std::size_t> oracle_equipartition_sizes(std::vector<double> values, std::size_t bins)
{
    std::sort(values.begin(), values.end());
    std::vector<std::size_t> clump_sizes;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i == 0 || values[i] != values[i - 1])
            clump_sizes.push_back(1);
        else
            ++clump_sizes.back();
    }
    const std::size_t m = clump_sizes.size();
    const std::size_t r = std::min(bins, m);
    const double target = static_cast<double>(values.size()) / static_cast<double>(r);

    std::vector<std::size_t> best;
    double best_dev = 1e300;
    // choose r-1 of the m-1 boundaries
    std::vector<std::size_t> pick(r - 1);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t idx, std::size_t from) {
        if (idx == r - 1) {
            std::vector<std::size_t> sizes;
            std::size_t prev = 0;
            for (std::size_t b : pick) {
                std::size_t s = 0;
                for (std::size_t c = prev; c < b; ++c)
                    s += clump_sizes[c];
                sizes.push_back(s);
                prev = b;
            }
            std::size_t s = 0;
            for (std::size_t c = prev; c < m; ++c)
                s += clump_sizes[c];
            sizes.push_back(s);
            double dev = 0.0;
            for (std::size_t sz : sizes)
                dev = std::max(dev, std::abs(static_cast<double>(sz) - target));
            if (dev < best_dev - 1e-12 || (std::abs(dev - best_dev) <= 1e-12 && sizes > best)) {
                best_dev = dev;
                best = sizes;
            }
            return;
        }
        for (std::size_t b = from; b + (r - 1 - idx) <= m; ++b) {
            pick[idx] = b;
            rec(idx + 1, b + 1);
        }
    };
    if (r == 1)
        best = { values.size() };
    else
        rec(0, 1);
    return best;
}

std::vector<std::size_t> partition_sizes(const Partition& p, std::size_t n)
{
    std::vector<std::size_t> sizes;
    std::size_t prev = 0;
    for (std::size_t c : p.cuts) {
        sizes.push_back(c - prev);
        prev = c;
    }
    sizes.push_back(n - prev);
    return sizes;
}

} // namespace

TEST_CASE("rank_equipartition splits untied values evenly")
{
    std::vector<double> v;
    for (int i = 1; i <= 10; ++i)
        v.push_back(i);
    const Partition p = rank_equipartition(v, 2);
    REQUIRE(p.cuts == std::vector<std::size_t> { 5 });
    REQUIRE(partition_sizes(p, 10) == std::vector<std::size_t> { 5, 5 });
}

TEST_CASE("rank_equipartition never splits a clump")
{
    const std::vector<double> v(10, 3.0);
    const Partition p = rank_equipartition(v, 2);
    REQUIRE(p.bins() == 1);
    REQUIRE(p.cuts.empty());
}

TEST_CASE("rank_equipartition matches the documented remainder rule on ties")
{
    const std::vector<double> v { 1, 1, 1, 2, 3, 4 };
    const Partition p = rank_equipartition(v, 3);
    REQUIRE(partition_sizes(p, 6) == std::vector<std::size_t> { 3, 2, 1 });
}

TEST_CASE("rank_equipartition agrees with enumeration oracle on random tied inputs")
{
    Rng rng(20240817);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 3 + rng.below(12);
        const std::size_t bins = 1 + rng.below(5);
        std::vector<double> v(n);
        for (auto& x : v)
            x = static_cast<double>(rng.below(5)); // plenty of ties
        const auto expect = oracle_equipartition_sizes(v, bins);
        const auto got = partition_sizes(rank_equipartition(v, bins), n);
        INFO("n=" << n << " bins=" << bins);
        REQUIRE(got == expect);
    }
}

TEST_CASE("rank_equipartition rejects bad input")
{
    REQUIRE_THROWS_AS(rank_equipartition({}, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(rank_equipartition({ 1.0, 2.0 }, 0), std::invalid_argument);
}

TEST_CASE("apply_grid bins diagonal points")
{
    const Sample s({ 1, 2, 3, 4 }, { 1, 2, 3, 4 });
    const Grid g(rank_equipartition(s.x, 2, Axis::X), rank_equipartition(s.y, 2, Axis::Y));
    const CountMatrix c = apply_grid(s, g);
    REQUIRE(c.rows == 2);
    REQUIRE(c.cols == 2);
    CHECK(c.at(0, 0) == 2.0);
    CHECK(c.at(0, 1) == 0.0);
    CHECK(c.at(1, 0) == 0.0);
    CHECK(c.at(1, 1) == 2.0);
}

TEST_CASE("apply_grid with trivial grid puts everything in one cell")
{
    const Sample s({ 1, 5, 2, 9 }, { 0, 3, 7, 1 });
    Partition px, py;
    px.axis = Axis::X;
    py.axis = Axis::Y;
    const CountMatrix c = apply_grid(s, Grid(px, py));
    REQUIRE(c.rows == 1);
    REQUIRE(c.cols == 1);
    CHECK(c.at(0, 0) == 4.0);
}

TEST_CASE("apply_grid matches a naive per-point scan on random grids")
{
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 8;
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = rng.uniform();
            ys[i] = rng.uniform();
        }
        const Sample s(xs, ys);
        const Grid g(rank_equipartition(xs, 3, Axis::X), rank_equipartition(ys, 2, Axis::Y));
        const CountMatrix got = apply_grid(s, g);

        // naive scan: bin each point by counting smaller values
        auto rank_of = [](const std::vector<double>& v, double x) {
            std::size_t r = 0;
            for (double w : v)
                if (w < x)
                    ++r;
            return r;
        };
        CountMatrix expect(g.rows.bins(), g.columns.bins());
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t cb = bin_of_rank(g.columns.cuts, rank_of(xs, xs[i]));
            const std::size_t rb = bin_of_rank(g.rows.cuts, rank_of(ys, ys[i]));
            expect.at(rb, cb) += 1.0;
        }
        REQUIRE(got.cells == expect.cells);
        REQUIRE(got.total() == static_cast<double>(n));
    }
}

TEST_CASE("apply_grid rejects cuts through ties")
{
    const Sample s({ 1, 1, 2, 3 }, { 1, 2, 3, 4 });
    Partition px;
    px.axis = Axis::X;
    px.cuts = { 1 }; // splits the two tied x values
    Partition py;
    py.axis = Axis::Y;
    REQUIRE_THROWS_AS(apply_grid(s, Grid(px, py)), std::invalid_argument);
}

TEST_CASE("entropy anchors")
{
    CHECK(entropy({ 0.5, 0.5 }) == 1.0);
    CHECK(entropy({ 1.0, 0.0 }) == 0.0);
    // direct evaluation of -sum p log2 p
    CHECK_THAT(entropy({ 0.25, 0.75 }), Catch::Matchers::WithinAbs(0.811278124459133, 1e-12));
    REQUIRE_THROWS_AS(entropy({ -0.1, 1.1 }), std::invalid_argument);
    REQUIRE_THROWS_AS(entropy({ 0.0, 0.0 }), std::invalid_argument);
}

TEST_CASE("entropy respects the configured base")
{
    const double bits = entropy({ 0.25, 0.75 });
    const double nats = entropy({ 0.25, 0.75 }, InfoConfig(std::exp(1.0)));
    CHECK_THAT(nats, Catch::Matchers::WithinAbs(bits * std::log(2.0), 1e-12));
}

TEST_CASE("mutual information anchors")
{
    CHECK(mutual_information(CountMatrix(2, 2, { 0.5, 0.0, 0.0, 0.5 })) == 1.0);
    CHECK_THAT(mutual_information(CountMatrix(2, 2, { 0.25, 0.25, 0.25, 0.25 })),
        Catch::Matchers::WithinAbs(0.0, 1e-12));
    // direct evaluation of sum p log2(p / (px py))
    CHECK_THAT(mutual_information(CountMatrix(2, 2, { 0.4, 0.1, 0.1, 0.4 })),
        Catch::Matchers::WithinAbs(0.278071905112638, 1e-12));
    REQUIRE_THROWS_AS(mutual_information(CountMatrix(2, 2, { 0, 0, 0, 0 })), std::invalid_argument);
}

TEST_CASE("mutual information properties on random matrices")
{
    Rng rng(8912);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + rng.below(4), l = 2 + rng.below(4);
        CountMatrix m(k, l);
        for (auto& c : m.cells)
            c = std::floor(rng.uniform() * 6.0);
        if (!(m.total() > 0))
            m.at(0, 0) = 1.0;
        const double mi = mutual_information(m);
        CHECK(mi >= 0.0);
        CHECK(mi <= std::log2(static_cast<double>(std::min(k, l))) + 1e-12);
        // symmetry
        CHECK_THAT(mutual_information(m.transposed()), Catch::Matchers::WithinAbs(mi, 1e-12));
        // outer product of the marginals has zero MI
        const auto rm = m.row_marginal();
        const auto cm = m.col_marginal();
        CountMatrix outer(k, l);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < l; ++j)
                outer.at(i, j) = rm[i] * cm[j];
        if (outer.total() > 0)
            CHECK_THAT(mutual_information(outer), Catch::Matchers::WithinAbs(0.0, 1e-9));
        // base change
        const double nats = mutual_information(m, InfoConfig(std::exp(1.0)));
        CHECK_THAT(nats, Catch::Matchers::WithinAbs(mi * std::log(2.0), 1e-12));
    }
}

TEST_CASE("grid refinement never decreases mutual information")
{
    Rng rng(5150);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 24;
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = rng.uniform();
            ys[i] = 0.6 * xs[i] + 0.4 * rng.uniform();
        }
        const Sample s(xs, ys);
        Grid g(rank_equipartition(xs, 3, Axis::X), rank_equipartition(ys, 3, Axis::Y));
        const double base = mutual_information(apply_grid(s, g));

        // add one more cut to the columns at a fresh rank
        Grid refined = g;
        for (std::size_t cand = 1; cand < n; ++cand) {
            if (std::find(refined.columns.cuts.begin(), refined.columns.cuts.end(), cand) == refined.columns.cuts.end()) {
                refined.columns.cuts.push_back(cand);
                std::sort(refined.columns.cuts.begin(), refined.columns.cuts.end());
                break;
            }
        }
        const double finer = mutual_information(apply_grid(s, refined));
        CHECK(finer >= base - 1e-12);
    }
}

TEST_CASE("normalized_score anchors and errors")
{
    CHECK(normalized_score(1.0, 2, 9) == 1.0);
    CHECK(normalized_score(0.0, 5, 3) == 0.0);
    CHECK_THAT(normalized_score(0.613, 2, 3), Catch::Matchers::WithinAbs(0.613, 1e-12));
    REQUIRE_THROWS_AS(normalized_score(0.5, 1, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(normalized_score(-0.1, 2, 3), std::invalid_argument);
}

TEST_CASE("normalized_score is base independent")
{
    const InfoConfig nats(std::exp(1.0));
    const double mi_bits = 0.7;
    const double mi_nats = mi_bits * std::log(2.0);
    CHECK_THAT(normalized_score(mi_nats, 3, 4, nats),
        Catch::Matchers::WithinAbs(normalized_score(mi_bits, 3, 4), 1e-12));
}

TEST_CASE("sample construction validates input")
{
    REQUIRE_THROWS_AS(Sample({ 1.0 }, { 2.0 }), std::invalid_argument);
    REQUIRE_THROWS_AS(Sample({ 1.0, std::nan("") }, { 2.0, 3.0 }), std::invalid_argument);
    REQUIRE_THROWS_AS(Sample({ 1.0, 2.0 }, { 2.0 }), std::invalid_argument);
}
