#pragma once

#include "linalg.hpp"

#include <utility>
#include <vector>

namespace ncdirac {

/// A pair partition of {0,...,2k-1}; each pair is stored with first < second.
struct PairPartition {
    std::vector<std::pair<int, int>> pairs;
};

inline constexpr int kMaxWickWord = 16;

namespace detail {

inline void enumerate_pairings_rec(std::vector<bool>& used, std::vector<std::pair<int, int>>& cur,
                                   std::vector<PairPartition>& out) {
    const int n = static_cast<int>(used.size());
    int first = -1;
    for (int i = 0; i < n; ++i)
        if (!used[i]) {
            first = i;
            break;
        }
    if (first < 0) {
        out.push_back(PairPartition{cur});
        return;
    }
    used[first] = true;
    for (int j = first + 1; j < n; ++j) {
        if (used[j]) continue;
        used[j] = true;
        cur.emplace_back(first, j);
        enumerate_pairings_rec(used, cur, out);
        cur.pop_back();
        used[j] = false;
    }
    used[first] = false;
}

inline double ipow(double q, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= q;
    return r;
}

}  // namespace detail

/// All pair partitions of a word of even length two_k (empty list for odd lengths).
/// The smallest unpaired index is always paired first, so the order is deterministic.
inline std::vector<PairPartition> enumerate_pair_partitions(int two_k) {
    if (two_k < 0 || two_k > kMaxWickWord)
        throw std::invalid_argument("enumerate_pair_partitions: word length out of budget [0,16]");
    std::vector<PairPartition> out;
    if (two_k % 2 != 0) return out;
    std::vector<bool> used(two_k, false);
    std::vector<std::pair<int, int>> cur;
    detail::enumerate_pairings_rec(used, cur, out);
    return out;
}

/// Number of crossings: pairs (i,j),(k,l) with i < k < j < l.
inline int crossings(const PairPartition& p) {
    int c = 0;
    const auto& ps = p.pairs;
    for (size_t a = 0; a < ps.size(); ++a)
        for (size_t b = 0; b < ps.size(); ++b) {
            if (a == b) continue;
            if (ps[a].first < ps[b].first && ps[b].first < ps[a].second &&
                ps[a].second < ps[b].second)
                ++c;
        }
    return c;
}

/// Inversion count of a permutation of {0,...,n-1}, by merge counting.
inline long long inversions(std::vector<int> perm) {
    const size_t n = perm.size();
    std::vector<int> tmp(n);
    long long count = 0;
    for (size_t width = 1; width < n; width *= 2) {
        for (size_t lo = 0; lo + width < n; lo += 2 * width) {
            const size_t mid = lo + width;
            const size_t hi = std::min(lo + 2 * width, n);
            size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (perm[i] <= perm[j]) tmp[k++] = perm[i++];
                else {
                    count += static_cast<long long>(mid - i);
                    tmp[k++] = perm[j++];
                }
            }
            while (i < mid) tmp[k++] = perm[i++];
            while (j < hi) tmp[k++] = perm[j++];
            std::copy(tmp.begin() + lo, tmp.begin() + hi, perm.begin() + lo);
        }
    }
    return count;
}

/// Vacuum trace of s_q(f_1)...s_q(f_n) by the pair-partition expansion:
/// sum over pairings of q^crossings * prod <f_i, f_j> (i < j in each pair).
inline Complex wick_trace(double q, const std::vector<ComplexVector>& vectors) {
    const int n = static_cast<int>(vectors.size());
    if (n > kMaxWickWord) throw std::invalid_argument("wick_trace: word length out of budget");
    if (n == 0) return Complex(1.0, 0.0);
    if (n % 2 != 0) return Complex(0.0, 0.0);
    for (int i = 1; i < n; ++i)
        if (vectors[i].size() != vectors[0].size())
            throw std::invalid_argument("wick_trace: inconsistent vector dimensions");
    Complex acc(0.0, 0.0);
    for (const PairPartition& p : enumerate_pair_partitions(n)) {
        Complex prod(1.0, 0.0);
        for (const auto& [i, j] : p.pairs) prod *= vectors[i].dot(vectors[j]);
        acc += detail::ipow(q, crossings(p)) * prod;
    }
    return acc;
}

}  // namespace ncdirac
