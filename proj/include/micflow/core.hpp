#ifndef MICFLOW_CORE_HPP
#define MICFLOW_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "micflow/common.hpp"

namespace micflow {

enum class Axis { X,
    Y };

// A finite sample of n ordered (x, y) pairs. Immutable after construction.
struct Sample {
    std::vector<double> x;
    std::vector<double> y;

    Sample() = default;
    Sample(std::vector<double> xs, std::vector<double> ys)
        : x(std::move(xs))
        , y(std::move(ys))
    {
        if (x.size() != y.size())
            throw std::invalid_argument("Sample: x/y length mismatch");
        if (x.size() < 2)
            throw std::invalid_argument("Sample: need at least 2 points");
        if (!all_finite(x) || !all_finite(y))
            throw std::invalid_argument("Sample: coordinates must be finite");
    }

    std::size_t n() const { return x.size(); }

    Sample transposed() const
    {
        Sample s;
        s.x = y;
        s.y = x;
        return s;
    }
};

// One-dimensional partition of an axis by rank position: a cut at r splits
// sorted ranks [0, r) from [r, n). Cuts are strictly increasing and, when the
// partition was built against data, never separate tied values.
struct Partition {
    Axis axis = Axis::X;
    std::vector<std::size_t> cuts;

    std::size_t bins() const { return cuts.size() + 1; }
};

struct Grid {
    Partition columns; // X axis
    Partition rows; // Y axis

    Grid() = default;
    Grid(Partition cols, Partition rws)
        : columns(std::move(cols))
        , rows(std::move(rws))
    {
        if (columns.axis != Axis::X || rows.axis != Axis::Y)
            throw std::invalid_argument("Grid: columns must partition X and rows Y");
    }
};

// Joint cell counts (or masses) induced by a grid; rows index the Y bins.
struct CountMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> cells;

    CountMatrix() = default;
    CountMatrix(std::size_t k, std::size_t l)
        : rows(k)
        , cols(l)
        , cells(k * l, 0.0)
    {
    }
    CountMatrix(std::size_t k, std::size_t l, std::vector<double> data)
        : rows(k)
        , cols(l)
        , cells(std::move(data))
    {
        if (cells.size() != k * l)
            throw std::invalid_argument("CountMatrix: cell count mismatch");
        for (double c : cells)
            if (!(c >= 0.0) || !std::isfinite(c))
                throw std::invalid_argument("CountMatrix: cells must be finite and >= 0");
    }

    double& at(std::size_t i, std::size_t j) { return cells[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return cells[i * cols + j]; }

    double total() const { return std::accumulate(cells.begin(), cells.end(), 0.0); }

    CountMatrix transposed() const
    {
        CountMatrix t(cols, rows);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                t.at(j, i) = at(i, j);
        return t;
    }

    std::vector<double> row_marginal() const
    {
        std::vector<double> m(rows, 0.0);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                m[i] += at(i, j);
        return m;
    }

    std::vector<double> col_marginal() const
    {
        std::vector<double> m(cols, 0.0);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                m[j] += at(i, j);
        return m;
    }
};

namespace detail {

    // Runs of equal values in sorted order. prefix[j] = number of points in the
    // first j clumps; prefix.front() == 0, prefix.back() == n.
    inline std::vector<std::size_t> clump_prefix_sorted(const std::vector<double>& sorted)
    {
        std::vector<std::size_t> prefix { 0 };
        for (std::size_t i = 1; i <= sorted.size(); ++i)
            if (i == sorted.size() || sorted[i] != sorted[i - 1])
                prefix.push_back(i);
        return prefix;
    }

    // Min/max number of groups needed to split the boundary sequence into
    // consecutive groups whose sums lie in [lo, hi]. Infeasible prefixes get
    // min = SIZE_MAX, max = 0. Sliding-window extrema over predecessor sets.
    struct GroupCountRange {
        std::vector<std::size_t> min_groups;
        std::vector<std::size_t> max_groups;
    };

    inline GroupCountRange group_count_range(const std::vector<std::size_t>& prefix, double lo, double hi)
    {
        const std::size_t m = prefix.size() - 1;
        constexpr std::size_t kInf = static_cast<std::size_t>(-1);
        GroupCountRange r;
        r.min_groups.assign(m + 1, kInf);
        r.max_groups.assign(m + 1, 0);
        r.min_groups[0] = 0;
        r.max_groups[0] = 0;

        std::deque<std::size_t> qmin, qmax; // candidate predecessor indices
        std::size_t enq = 0;
        for (std::size_t j = 1; j <= m; ++j) {
            const double s = static_cast<double>(prefix[j]);
            // predecessors i with s - prefix[i] in [lo, hi]; the hi edge is
            // enforced on dequeue since it only advances
            while (enq < j && static_cast<double>(prefix[enq]) <= s - lo + 1e-9) {
                if (r.min_groups[enq] != kInf) {
                    while (!qmin.empty() && r.min_groups[qmin.back()] >= r.min_groups[enq])
                        qmin.pop_back();
                    qmin.push_back(enq);
                    while (!qmax.empty() && r.max_groups[qmax.back()] <= r.max_groups[enq])
                        qmax.pop_back();
                    qmax.push_back(enq);
                }
                ++enq;
            }
            while (!qmin.empty() && static_cast<double>(prefix[qmin.front()]) < s - hi - 1e-9)
                qmin.pop_front();
            while (!qmax.empty() && static_cast<double>(prefix[qmax.front()]) < s - hi - 1e-9)
                qmax.pop_front();
            if (!qmin.empty()) {
                r.min_groups[j] = r.min_groups[qmin.front()] + 1;
                r.max_groups[j] = r.max_groups[qmax.front()] + 1;
            }
        }
        return r;
    }

    // Same, from the right: groups needed for the suffix starting at boundary j.
    inline GroupCountRange suffix_group_count_range(const std::vector<std::size_t>& prefix, double lo, double hi)
    {
        const std::size_t m = prefix.size() - 1;
        const std::size_t n = prefix.back();
        std::vector<std::size_t> rev(prefix.size());
        for (std::size_t j = 0; j < prefix.size(); ++j)
            rev[j] = n - prefix[m - j];
        GroupCountRange rr = group_count_range(rev, lo, hi);
        GroupCountRange out;
        out.min_groups.resize(prefix.size());
        out.max_groups.resize(prefix.size());
        for (std::size_t j = 0; j < prefix.size(); ++j) {
            out.min_groups[j] = rr.min_groups[m - j];
            out.max_groups[j] = rr.max_groups[m - j];
        }
        return out;
    }

} // namespace detail

namespace detail {

    // Equipartition cut positions over a precomputed clump prefix. Exactly
    // min(bins, #clumps) bins; max deviation from n/bins minimized; remaining
    // ties broken by making earlier bins larger.
    inline std::vector<std::size_t> equipartition_cuts(const std::vector<std::size_t>& prefix, std::size_t bins)
    {
        const std::size_t n = prefix.back();
        const std::size_t m = prefix.size() - 1; // number of clumps
        std::vector<std::size_t> cuts;

        const std::size_t r = std::min(bins, m);
        if (r == m)
            return { prefix.begin() + 1, prefix.end() - 1 };
        if (m == n) {
            // no ties: ceil-sized bins first, floor-sized after
            const std::size_t q = n / r, extra = n % r;
            std::size_t pos = 0;
            for (std::size_t i = 0; i + 1 < r; ++i) {
                pos += q + (i < extra ? 1 : 0);
                cuts.push_back(pos);
            }
            return cuts;
        }

        // Ties present and fewer bins than clumps: achievable max deviations
        // are |z - n/r| for integer group sizes z, i.e. u/r for integer u.
        // Binary search the smallest feasible u.
        const double target = static_cast<double>(n) / static_cast<double>(r);
        auto feasible = [&](std::size_t u) {
            const double d = static_cast<double>(u) / static_cast<double>(r);
            const auto gc = group_count_range(prefix, target - d, target + d);
            return gc.min_groups[m] <= r && r <= gc.max_groups[m];
        };
        std::size_t lo = 0, hi = n * r;
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (feasible(mid))
                hi = mid;
            else
                lo = mid + 1;
        }
        const double d = static_cast<double>(lo) / static_cast<double>(r);
        const double wlo = target - d, whi = target + d;

        // Greedy reconstruction, largest feasible group first (extra mass
        // lands in earlier bins), constrained so the suffix still admits the
        // exact bin count.
        const auto suf = suffix_group_count_range(prefix, wlo, whi);
        std::size_t pos = 0, used = 0;
        while (pos < m) {
            const std::size_t remaining = r - used - 1;
            bool advanced = false;
            for (std::size_t j = m; j > pos; --j) {
                const double g = static_cast<double>(prefix[j] - prefix[pos]);
                if (g > whi + 1e-9)
                    continue;
                if (g < wlo - 1e-9)
                    break;
                if (suf.min_groups[j] <= remaining && remaining <= suf.max_groups[j]) {
                    if (j < m)
                        cuts.push_back(prefix[j]);
                    pos = j;
                    ++used;
                    advanced = true;
                    break;
                }
            }
            if (!advanced)
                throw std::logic_error("equipartition_cuts: reconstruction failed");
        }
        return cuts;
    }

} // namespace detail

// Partition of the value ranks into `bins` groups of as-equal-as-possible
// size. Tied values are never separated; subject to that constraint the
// maximum deviation of any bin size from n/bins is minimized, and remaining
// ties are broken by making earlier bins larger. Asking for more bins than
// there are distinct values yields one bin per distinct value.
inline Partition rank_equipartition(const std::vector<double>& values, std::size_t bins, Axis axis = Axis::X)
{
    if (values.empty())
        throw std::invalid_argument("rank_equipartition: empty input");
    if (bins < 1)
        throw std::invalid_argument("rank_equipartition: bins must be >= 1");
    if (!all_finite(values))
        throw std::invalid_argument("rank_equipartition: values must be finite");

    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    Partition part;
    part.axis = axis;
    part.cuts = detail::equipartition_cuts(detail::clump_prefix_sorted(sorted), bins);
    return part;
}

// Bin index of sorted-rank p under the cut set: number of cuts <= p.
inline std::size_t bin_of_rank(const std::vector<std::size_t>& cuts, std::size_t p)
{
    return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), p) - cuts.begin());
}

namespace detail {

    // Per-point bin assignment for one axis. Validates cut range and the tie
    // rule against the data.
    inline std::vector<std::size_t> axis_bins(const std::vector<double>& values, const Partition& part)
    {
        const std::size_t n = values.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t { 0 });
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

        std::size_t prev = 0;
        for (std::size_t c : part.cuts) {
            if (c < 1 || c >= n || (prev != 0 && c <= prev))
                throw std::invalid_argument("Partition: cuts must be strictly increasing in [1, n)");
            if (values[order[c - 1]] == values[order[c]])
                throw std::invalid_argument("Partition: cut separates tied values");
            prev = c;
        }

        std::vector<std::size_t> bin(n);
        std::size_t b = 0;
        for (std::size_t p = 0; p < n; ++p) {
            while (b < part.cuts.size() && part.cuts[b] <= p)
                ++b;
            bin[order[p]] = b;
        }
        return bin;
    }

} // namespace detail

// Joint cell counts of a sample under a grid; cell (i, j) counts the points
// in row bin i and column bin j, and mass is conserved exactly.
inline CountMatrix apply_grid(const Sample& sample, const Grid& grid)
{
    const auto col = detail::axis_bins(sample.x, grid.columns);
    const auto row = detail::axis_bins(sample.y, grid.rows);
    CountMatrix counts(grid.rows.bins(), grid.columns.bins());
    for (std::size_t i = 0; i < sample.n(); ++i)
        counts.at(row[i], col[i]) += 1.0;
    return counts;
}

// Shannon entropy of a (not necessarily normalized) nonnegative marginal.
inline double entropy(const std::vector<double>& marginal, const InfoConfig& cfg = {})
{
    double total = 0.0;
    for (double w : marginal) {
        if (w < 0.0 || !std::isfinite(w))
            throw std::invalid_argument("entropy: entries must be finite and >= 0");
        total += w;
    }
    if (!(total > 0.0))
        throw std::invalid_argument("entropy: total mass must be positive");
    double h = 0.0;
    for (double w : marginal)
        h -= plog2(w / total);
    return cfg.from_bits(std::max(h, 0.0));
}

// Plug-in discrete mutual information I = H(rows) + H(cols) - H(joint).
// No estimator correction is applied.
inline double mutual_information(const CountMatrix& counts, const InfoConfig& cfg = {})
{
    const double total = counts.total();
    if (!(total > 0.0))
        throw std::invalid_argument("mutual_information: total mass must be positive");
    double h_rows = 0.0, h_cols = 0.0, h_joint = 0.0;
    for (double m : counts.row_marginal())
        h_rows -= plog2(m / total);
    for (double m : counts.col_marginal())
        h_cols -= plog2(m / total);
    for (double c : counts.cells) {
        if (c < 0.0)
            throw std::invalid_argument("mutual_information: negative cell");
        h_joint -= plog2(c / total);
    }
    return cfg.from_bits(std::max(h_rows + h_cols - h_joint, 0.0));
}

// Characteristic-matrix normalization: mi / log min{k, l}, in matching bases.
inline double normalized_score(double mi, std::size_t k, std::size_t l, const InfoConfig& cfg = {})
{
    if (k < 2 || l < 2)
        throw std::invalid_argument("normalized_score: requires k, l >= 2");
    if (mi < 0.0)
        throw std::invalid_argument("normalized_score: mi must be >= 0");
    const double denom = cfg.from_bits(std::log2(static_cast<double>(std::min(k, l))));
    return mi / denom;
}

} // namespace micflow

#endif // MICFLOW_CORE_HPP
