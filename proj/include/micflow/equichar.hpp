#ifndef MICFLOW_EQUICHAR_HPP
#define MICFLOW_EQUICHAR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "micflow/axis_optimizer.hpp"
#include "micflow/core.hpp"
#include "micflow/parallel.hpp"

namespace micflow {

// Estimator knobs: the grid budget exponent in B(n) = n^alpha and the clump
// factor c that scales the master partitions searched by the fast algorithm.
struct EstimatorConfig {
    double alpha = 0.6;
    double c = 5.0;

    EstimatorConfig() = default;
    EstimatorConfig(double a, double cc)
        : alpha(a)
        , c(cc)
    {
        if (!(alpha > 0.0) || !(alpha < 1.0))
            throw std::invalid_argument("EstimatorConfig: alpha must lie in (0, 1)");
        if (!(c >= 1.0))
            throw std::invalid_argument("EstimatorConfig: c must be >= 1");
    }

    std::size_t budget(std::size_t n) const
    {
        const double b = std::floor(std::pow(static_cast<double>(n), alpha));
        return std::max<std::size_t>(4, static_cast<std::size_t>(b));
    }
};

// Domain of the triangle: all (k, l) with k, l >= 2 and k*l <= B, sorted by
// (k, l).
inline std::vector<std::pair<std::size_t, std::size_t>> admissible_pairs(std::size_t budget)
{
    if (budget < 4)
        throw std::invalid_argument("admissible_pairs: budget must be >= 4");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t k = 2; 2 * k <= budget; ++k)
        for (std::size_t l = 2; k * l <= budget; ++l)
            pairs.emplace_back(k, l);
    return pairs;
}

// Sparse triangular slice of a sample (equi)characteristic matrix.
struct CharTriangle {
    enum class Kind { exact_equichar,
        clumped };

    std::size_t budget = 0;
    Kind kind = Kind::exact_equichar;
    double clump_c = 0.0; // meaningful for Kind::clumped
    std::vector<std::pair<std::size_t, std::size_t>> domain; // sorted (k, l)
    std::vector<double> scores; // parallel to domain, each in [0, 1]

    double score(std::size_t k, std::size_t l) const
    {
        const auto it = std::lower_bound(domain.begin(), domain.end(), std::make_pair(k, l));
        if (it == domain.end() || *it != std::make_pair(k, l))
            throw std::out_of_range("CharTriangle::score: pair outside domain");
        return scores[static_cast<std::size_t>(it - domain.begin())];
    }

    std::size_t size() const { return domain.size(); }

    // first pair (in domain order) attaining the maximum
    std::pair<std::size_t, std::size_t> argmax() const
    {
        std::size_t best = 0;
        for (std::size_t i = 1; i < scores.size(); ++i)
            if (scores[i] > scores[best])
                best = i;
        return domain[best];
    }
};

inline double mic_e(const CharTriangle& tri)
{
    if (tri.scores.empty())
        throw std::invalid_argument("mic_e: empty triangle");
    return *std::max_element(tri.scores.begin(), tri.scores.end());
}

inline double tic_e(const CharTriangle& tri)
{
    if (tri.scores.empty())
        throw std::invalid_argument("tic_e: empty triangle");
    double s = 0.0;
    for (double v : tri.scores)
        s += v;
    return s;
}

namespace detail {

    struct RankedAxis {
        std::vector<std::size_t> order; // point indices sorted by value
        std::vector<std::size_t> rank; // rank[i] = position of point i
        std::vector<std::size_t> clumps; // clump boundary prefix over ranks
    };

    inline RankedAxis rank_axis(const std::vector<double>& v)
    {
        RankedAxis ax;
        const std::size_t n = v.size();
        ax.order.resize(n);
        std::iota(ax.order.begin(), ax.order.end(), std::size_t { 0 });
        std::stable_sort(ax.order.begin(), ax.order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        ax.rank.resize(n);
        for (std::size_t p = 0; p < n; ++p)
            ax.rank[ax.order[p]] = p;
        ax.clumps.push_back(0);
        for (std::size_t p = 1; p <= n; ++p)
            if (p == n || v[ax.order[p]] != v[ax.order[p - 1]])
                ax.clumps.push_back(p);
        return ax;
    }

    // Master partitions for the clump algorithm, built by recursive median
    // splitting of the clump sequence. The cut introduced at recursion depth
    // d belongs to every master of level > d, so masters are nested and the
    // level-a master is a coarsening of the level-b master for a <= b.
    struct MedianMasterTree {
        std::vector<std::size_t> cut_rank; // rank position of each recorded cut
        std::vector<std::size_t> cut_depth;
        std::size_t max_depth = 0;

        explicit MedianMasterTree(const std::vector<std::size_t>& clump_prefix)
        {
            split(clump_prefix, 0, clump_prefix.size() - 1, 0);
            std::vector<std::size_t> idx(cut_rank.size());
            std::iota(idx.begin(), idx.end(), std::size_t { 0 });
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return cut_rank[a] < cut_rank[b]; });
            std::vector<std::size_t> cr(cut_rank.size()), cd(cut_rank.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                cr[i] = cut_rank[idx[i]];
                cd[i] = cut_depth[idx[i]];
            }
            cut_rank = std::move(cr);
            cut_depth = std::move(cd);
        }

        // cuts of the master with at least `target` bins (power-of-two
        // rounded), saturating at the full clump partition
        std::vector<std::size_t> cuts_for_target(std::size_t target) const
        {
            std::size_t level = 0;
            while ((std::size_t { 1 } << level) < target)
                ++level;
            if (level > max_depth)
                level = max_depth + 1; // everything
            std::vector<std::size_t> cuts;
            for (std::size_t i = 0; i < cut_rank.size(); ++i)
                if (cut_depth[i] < level)
                    cuts.push_back(cut_rank[i]);
            return cuts;
        }

    private:
        void split(const std::vector<std::size_t>& prefix, std::size_t lo, std::size_t hi, std::size_t depth)
        {
            if (hi - lo <= 1)
                return;
            const double mid = 0.5 * (static_cast<double>(prefix[lo]) + static_cast<double>(prefix[hi]));
            std::size_t best = lo + 1;
            double best_d = std::abs(static_cast<double>(prefix[best]) - mid);
            for (std::size_t b = lo + 2; b < hi; ++b) {
                const double d = std::abs(static_cast<double>(prefix[b]) - mid);
                if (d < best_d) {
                    best_d = d;
                    best = b;
                }
            }
            cut_rank.push_back(prefix[best]);
            cut_depth.push_back(depth);
            max_depth = std::max(max_depth, depth + 1);
            split(prefix, lo, best, depth + 1);
            split(prefix, best, hi, depth + 1);
        }
    };

    // One half of the triangle: entries (k, l) with k <= min(l, B/l), the
    // row axis optimized against a column equipartition into l bins.
    // `master_cuts_for(k_max)` supplies the row-axis master for the sweep.
    template <class MasterFn>
    void sweep_half(const RankedAxis& col_axis, const RankedAxis& row_axis,
        std::size_t budget, const MasterFn& master_cuts_for,
        bool skip_diagonal, bool transpose_pairs,
        std::vector<std::pair<std::size_t, std::size_t>>& domain,
        std::vector<double>& scores, int threads)
    {
        const std::size_t n = col_axis.rank.size();

        // column rank of each point in row order
        std::vector<std::size_t> cr_by_row(n);
        for (std::size_t p = 0; p < n; ++p)
            cr_by_row[p] = col_axis.rank[row_axis.order[p]];

        const std::size_t l_hi = budget / 2;
        std::vector<std::vector<std::pair<std::size_t, std::size_t>>> dom_l(l_hi + 1);
        std::vector<std::vector<double>> sc_l(l_hi + 1);

        parallel_for(
            l_hi - 1, [&](std::size_t li) {
                const std::size_t l = li + 2;
                const std::size_t k_max = std::min(l, budget / l);
                if (k_max < 2)
                    return;
                const std::vector<std::size_t> col_cuts = equipartition_cuts(col_axis.clumps, l);
                const std::vector<std::size_t> master = master_cuts_for(k_max);
                const std::size_t rows = master.size() + 1;
                const std::size_t cols = col_cuts.size() + 1;

                // O(1) column lookup per point
                std::vector<std::uint32_t> col_of_rank(n);
                {
                    std::size_t c = 0;
                    for (std::size_t p = 0; p < n; ++p) {
                        while (c < col_cuts.size() && col_cuts[c] <= p)
                            ++c;
                        col_of_rank[p] = static_cast<std::uint32_t>(c);
                    }
                }

                MasterBinnedCounts counts(rows, cols);
                std::size_t row = 0;
                for (std::size_t p = 0; p < n; ++p) {
                    while (row < master.size() && master[row] <= p)
                        ++row;
                    counts.at(row, col_of_rank[cr_by_row[p]]) += 1.0;
                }

                const AxisOptimum opt = optimize_axis(counts, k_max);
                for (std::size_t k = 2; k <= k_max; ++k) {
                    if (skip_diagonal && k == l)
                        continue;
                    const double denom = std::log2(static_cast<double>(k));
                    const double score = std::clamp(opt.mi(k) / denom, 0.0, 1.0);
                    if (transpose_pairs)
                        dom_l[l].emplace_back(l, k);
                    else
                        dom_l[l].emplace_back(k, l);
                    sc_l[l].push_back(score);
                }
            },
            threads);

        for (std::size_t l = 2; l <= l_hi; ++l) {
            domain.insert(domain.end(), dom_l[l].begin(), dom_l[l].end());
            scores.insert(scores.end(), sc_l[l].begin(), sc_l[l].end());
        }
    }

    inline CharTriangle assemble_triangle(const Sample& sample, const EstimatorConfig& cfg,
        bool clumped, int threads)
    {
        if (sample.n() < 4)
            throw std::invalid_argument("equichar: need at least 4 points");
        const std::size_t budget = cfg.budget(sample.n());

        CharTriangle tri;
        tri.budget = budget;
        tri.kind = clumped ? CharTriangle::Kind::clumped : CharTriangle::Kind::exact_equichar;
        tri.clump_c = clumped ? cfg.c : 0.0;

        const RankedAxis ax = rank_axis(sample.x);
        const RankedAxis ay = rank_axis(sample.y);

        if (clumped) {
            // per the Appendix-H regimes the master has >= c * k_max(l) bins,
            // rounded up to a power of two; the median tree keeps masters
            // nested across levels and saturates at the full clump partition
            const MedianMasterTree tree_y(ay.clumps);
            const MedianMasterTree tree_x(ax.clumps);
            auto master_y = [&](std::size_t k_max) {
                return tree_y.cuts_for_target(static_cast<std::size_t>(std::ceil(cfg.c * static_cast<double>(k_max))));
            };
            auto master_x = [&](std::size_t k_max) {
                return tree_x.cuts_for_target(static_cast<std::size_t>(std::ceil(cfg.c * static_cast<double>(k_max))));
            };
            sweep_half(ax, ay, budget, master_y, false, false, tri.domain, tri.scores, threads);
            sweep_half(ay, ax, budget, master_x, true, true, tri.domain, tri.scores, threads);
        } else {
            auto master_y = [&](std::size_t) {
                return std::vector<std::size_t>(ay.clumps.begin() + 1, ay.clumps.end() - 1);
            };
            auto master_x = [&](std::size_t) {
                return std::vector<std::size_t>(ax.clumps.begin() + 1, ax.clumps.end() - 1);
            };
            sweep_half(ax, ay, budget, master_y, false, false, tri.domain, tri.scores, threads);
            sweep_half(ay, ax, budget, master_x, true, true, tri.domain, tri.scores, threads);
        }

        std::vector<std::size_t> idx(tri.domain.size());
        std::iota(idx.begin(), idx.end(), std::size_t { 0 });
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return tri.domain[a] < tri.domain[b]; });
        std::vector<std::pair<std::size_t, std::size_t>> dom(idx.size());
        std::vector<double> sc(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            dom[i] = tri.domain[idx[i]];
            sc[i] = tri.scores[idx[i]];
        }
        tri.domain = std::move(dom);
        tri.scores = std::move(sc);
        return tri;
    }

} // namespace detail

// Exact sample equicharacteristic triangle: the optimized axis may cut
// anywhere ties permit. O(n^2 B^2); intended for modest n.
inline CharTriangle equichar_exact(const Sample& sample, const EstimatorConfig& cfg = {}, int threads = 1)
{
    return detail::assemble_triangle(sample, cfg, false, threads);
}

// Fast clumped variant: the optimized axis is restricted to sub-partitions
// of a median-split master equipartition of roughly c * k bins. O(n + B^2.5).
inline CharTriangle equichar_clump(const Sample& sample, const EstimatorConfig& cfg = {}, int threads = 1)
{
    return detail::assemble_triangle(sample, cfg, true, threads);
}

} // namespace micflow

#endif // MICFLOW_EQUICHAR_HPP
