#ifndef MICFLOW_AXIS_OPTIMIZER_HPP
#define MICFLOW_AXIS_OPTIMIZER_HPP

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "micflow/core.hpp"

namespace micflow {

// Joint counts of the master-partition rows against the fixed column
// partition; rows index the master bins.
using MasterBinnedCounts = CountMatrix;

// Results of the one-axis optimization: for every partition size i in
// {2, ..., k}, the maximal mutual information (bits) over sub-partitions of
// the master with at most i bins, plus the witness cut set expressed as
// master-row boundary indices (0 < idx < |master|).
struct AxisOptimum {
    std::size_t max_size = 0;
    std::vector<double> best_mi; // best_mi[i - 2], bits
    std::vector<std::vector<std::size_t>> best_cuts; // best_cuts[i - 2]

    double mi(std::size_t i) const
    {
        if (i < 2 || i > max_size)
            throw std::out_of_range("AxisOptimum::mi: size out of range");
        return best_mi[i - 2];
    }
    const std::vector<std::size_t>& cuts(std::size_t i) const
    {
        if (i < 2 || i > max_size)
            throw std::out_of_range("AxisOptimum::cuts: size out of range");
        return best_cuts[i - 2];
    }
};

namespace detail {

    // Prefix machinery: for a block of master rows [a, b), the additive group
    // weight is  w(a,b) = -p log p + sum_j q_j log q_j  with p the block mass
    // fraction and q_j the block's per-column fractions. The total MI of a
    // grouping is then H(columns) + sum of group weights, which makes the
    // optimization a segmented DP.
    struct BlockWeights {
        std::size_t m = 0, l = 0;
        double total = 0.0;
        std::vector<double> col_prefix; // (m+1) x l
        std::vector<double> mass_prefix; // m+1

        explicit BlockWeights(const MasterBinnedCounts& counts)
            : m(counts.rows)
            , l(counts.cols)
        {
            col_prefix.assign((m + 1) * l, 0.0);
            mass_prefix.assign(m + 1, 0.0);
            for (std::size_t r = 0; r < m; ++r) {
                double rowsum = 0.0;
                for (std::size_t j = 0; j < l; ++j) {
                    const double c = counts.at(r, j);
                    col_prefix[(r + 1) * l + j] = col_prefix[r * l + j] + c;
                    rowsum += c;
                }
                mass_prefix[r + 1] = mass_prefix[r] + rowsum;
            }
            total = mass_prefix[m];
        }

        double weight(std::size_t a, std::size_t b) const
        {
            const double* lo = &col_prefix[a * l];
            const double* hi = &col_prefix[b * l];
            double s = 0.0;
            for (std::size_t j = 0; j < l; ++j)
                s += plog2((hi[j] - lo[j]) / total);
            return s - plog2((mass_prefix[b] - mass_prefix[a]) / total);
        }

        double column_entropy() const
        {
            double h = 0.0;
            for (std::size_t j = 0; j < l; ++j)
                h -= plog2(col_prefix[m * l + j] / total);
            return h;
        }
    };

} // namespace detail

// Exact MI-maximizing sub-partitions of the master for every size up to k,
// against the fixed columns. Dynamic program over the top-most remaining cut;
// O(|master|^2 k l) with O(1) block marginals from prefix sums.
inline AxisOptimum optimize_axis(const MasterBinnedCounts& counts, std::size_t k)
{
    if (k < 2)
        throw std::invalid_argument("optimize_axis: k must be >= 2");
    const std::size_t m = counts.rows;
    AxisOptimum out;
    out.max_size = k;
    out.best_mi.assign(k - 1, 0.0);
    out.best_cuts.assign(k - 1, {});
    if (m < 2)
        return out; // only the trivial partition exists

    detail::BlockWeights bw(counts);
    if (!(bw.total > 0.0))
        throw std::invalid_argument("optimize_axis: counts must have positive mass");
    const double h_cols = bw.column_entropy();
    const std::size_t kk = std::min(k, m);

    // The weight table is shared by every DP level; materialize it when it
    // fits, otherwise fall back to on-the-fly evaluation.
    const bool table = m <= 1500;
    std::vector<double> wtab;
    auto tri_at = [m](std::size_t a, std::size_t b) {
        return a * (2 * m - a - 1) / 2 + (b - a - 1);
    };
    if (table) {
        wtab.resize(m * (m + 1) / 2);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a + 1; b <= m; ++b)
                wtab[tri_at(a, b)] = bw.weight(a, b);
    }
    auto weight = [&](std::size_t a, std::size_t b) {
        return table ? wtab[tri_at(a, b)] : bw.weight(a, b);
    };

    // G[r][a]: best sum of group weights for master rows [a, m) split into
    // exactly r groups. Suffix orientation so witnesses can be rebuilt
    // front-to-back (smallest cut first on ties).
    constexpr double kNegInf = -1e300;
    std::vector<std::vector<double>> G(kk + 1, std::vector<double>(m + 1, kNegInf));
    for (std::size_t a = 0; a < m; ++a)
        G[1][a] = weight(a, m);
    for (std::size_t r = 2; r <= kk; ++r) {
        for (std::size_t a = 0; a + r <= m; ++a) {
            double best = kNegInf;
            for (std::size_t b = a + 1; b + (r - 1) <= m; ++b) {
                const double v = weight(a, b) + G[r - 1][b];
                if (v > best)
                    best = v;
            }
            G[r][a] = best;
        }
    }

    for (std::size_t i = 2; i <= k; ++i) {
        const std::size_t cap = std::min(i, kk);
        // prefer fewer bins on ties
        std::size_t r_star = 1;
        double best = G[1][0];
        for (std::size_t r = 2; r <= cap; ++r)
            if (G[r][0] > best) {
                best = G[r][0];
                r_star = r;
            }
        out.best_mi[i - 2] = std::max(h_cols + best, 0.0);

        // forward walk, smallest boundary first on ties
        std::vector<std::size_t> cuts;
        std::size_t a = 0;
        for (std::size_t r = r_star; r > 1; --r) {
            for (std::size_t b = a + 1; b + (r - 1) <= m; ++b) {
                if (weight(a, b) + G[r - 1][b] == G[r][a]) {
                    cuts.push_back(b);
                    a = b;
                    break;
                }
            }
        }
        out.best_cuts[i - 2] = std::move(cuts);
    }
    return out;
}

// Exhaustive-enumeration oracle with the same contract as optimize_axis.
// Evaluates every cut subset through the plain mutual_information path so it
// stays independent of the DP.
inline AxisOptimum brute_force_axis(const MasterBinnedCounts& counts, std::size_t k)
{
    if (k < 2)
        throw std::invalid_argument("brute_force_axis: k must be >= 2");
    const std::size_t m = counts.rows;
    if (m > 20)
        throw std::invalid_argument("brute_force_axis: master too large (> 20 rows)");

    AxisOptimum out;
    out.max_size = k;
    out.best_mi.assign(k - 1, 0.0);
    out.best_cuts.assign(k - 1, {});
    if (m < 2)
        return out;

    const std::size_t l = counts.cols;
    const std::size_t kk = std::min(k, m);
    std::vector<double> best_by_groups(kk + 1, -1.0);
    std::vector<std::vector<std::size_t>> cuts_by_groups(kk + 1);

    const std::size_t nb = m - 1; // candidate boundaries 1..m-1
    for (std::size_t mask = 0; mask < (std::size_t { 1 } << nb); ++mask) {
        const std::size_t groups = static_cast<std::size_t>(__builtin_popcountll(mask)) + 1;
        if (groups > kk)
            continue;
        std::vector<std::size_t> cuts;
        for (std::size_t b = 0; b < nb; ++b)
            if (mask & (std::size_t { 1 } << b))
                cuts.push_back(b + 1);
        CountMatrix grouped(groups, l);
        std::size_t g = 0;
        for (std::size_t r = 0; r < m; ++r) {
            if (g < cuts.size() && r == cuts[g])
                ++g;
            for (std::size_t j = 0; j < l; ++j)
                grouped.at(g, j) += counts.at(r, j);
        }
        const double mi = mutual_information(grouped);
        if (mi > best_by_groups[groups]) {
            best_by_groups[groups] = mi;
            cuts_by_groups[groups] = std::move(cuts);
        }
    }

    for (std::size_t i = 2; i <= k; ++i) {
        const std::size_t cap = std::min(i, kk);
        std::size_t r_star = 1;
        double best = best_by_groups[1];
        for (std::size_t r = 2; r <= cap; ++r)
            if (best_by_groups[r] > best) {
                best = best_by_groups[r];
                r_star = r;
            }
        out.best_mi[i - 2] = best;
        out.best_cuts[i - 2] = cuts_by_groups[r_star];
    }
    return out;
}

// Materialize a witness as a rank-position Partition, given the master
// partition it sub-divides.
inline Partition subpartition_to_ranks(const Partition& master, const std::vector<std::size_t>& row_boundaries, std::size_t n)
{
    Partition p;
    p.axis = master.axis;
    for (std::size_t b : row_boundaries) {
        if (b == 0 || b > master.cuts.size())
            throw std::invalid_argument("subpartition_to_ranks: boundary outside master");
        p.cuts.push_back(master.cuts[b - 1]);
    }
    (void)n;
    return p;
}

} // namespace micflow

#endif // MICFLOW_AXIS_OPTIMIZER_HPP
