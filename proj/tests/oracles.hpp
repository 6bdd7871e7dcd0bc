// SPDX-License-Identifier: Apache-2.0
//
// Independent brute-force reference implementations used by the unit tests
// and the acceptance suite. They deliberately avoid the library's code paths:
// plain loops, direct summation, long double where it helps.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cvecwe/cwe_id.hpp"
#include "cvecwe/logreg.hpp"
#include "cvecwe/metrics.hpp"
#include "cvecwe/vectorizer.hpp"

namespace cvecwe::oracle {

// ---------------------------------------------------------------- Clopper-Pearson

// P[Bin(n,p) <= k] by direct summation of the pmf, with each term built from
// a running product instead of log-gamma.
inline long double binomial_cdf(std::size_t k, std::size_t n, long double p) {
    if (p <= 0.0L) return 1.0L;
    if (p >= 1.0L) return k >= n ? 1.0L : 0.0L;
    // Start from the mode-free end: pmf(0) = (1-p)^n, then pmf(i+1) = pmf(i) * (n-i)/(i+1) * p/(1-p).
    // (1-p)^n underflows for large n and p near 1, so accumulate in log space
    // per term and exponentiate individually.
    const long double lp = std::log(p);
    const long double lq = std::log1p(-p);
    long double log_choose = 0.0L;
    long double total = 0.0L;
    for (std::size_t i = 0; i <= k; ++i) {
        if (i > 0) log_choose += std::log(static_cast<long double>(n - i + 1)) - std::log(static_cast<long double>(i));
        total += std::exp(log_choose + static_cast<long double>(i) * lp + static_cast<long double>(n - i) * lq);
    }
    return std::min(total, 1.0L);
}

// Bisection on the directly summed CDF; 200 halvings is far past long double
// resolution.
inline std::pair<double, double> clopper_pearson(std::size_t x, std::size_t n, double alpha) {
    const long double half = static_cast<long double>(alpha) / 2.0L;
    long double lo = 0.0L;
    long double hi = 1.0L;
    if (x > 0) {
        // P[X >= x] = 1 - cdf(x-1) increases with p.
        long double a = 0.0L, b = 1.0L;
        for (int i = 0; i < 200; ++i) {
            const long double m = (a + b) / 2.0L;
            if (1.0L - binomial_cdf(x - 1, n, m) < half) a = m; else b = m;
        }
        lo = (a + b) / 2.0L;
    }
    if (x < n) {
        // P[X <= x] decreases with p.
        long double a = 0.0L, b = 1.0L;
        for (int i = 0; i < 200; ++i) {
            const long double m = (a + b) / 2.0L;
            if (binomial_cdf(x, n, m) > half) a = m; else b = m;
        }
        hi = (a + b) / 2.0L;
    }
    return {static_cast<double>(lo), static_cast<double>(hi)};
}

// ---------------------------------------------------------------- classification metrics

struct Sample {
    std::string id;
    int gold;
    std::vector<int> ranked;  // class numbers, best first
};

inline PredictionSet to_predictions(const std::vector<Sample>& samples) {
    PredictionSet p;
    for (const auto& s : samples) {
        std::vector<ScoredLabel> ranked;
        double score = 1.0;
        for (int c : s.ranked) {
            ranked.push_back({CweId(static_cast<std::uint32_t>(c)), score});
            score /= 2.0;
        }
        p.add(s.id, std::move(ranked));
    }
    return p;
}

inline GoldLabels to_gold(const std::vector<Sample>& samples) {
    GoldLabels g;
    for (const auto& s : samples) g[s.id] = CweId(static_cast<std::uint32_t>(s.gold));
    return g;
}

inline double topk(const std::vector<Sample>& samples, std::size_t k) {
    std::size_t hit = 0;
    for (const auto& s : samples) {
        for (std::size_t i = 0; i < s.ranked.size() && i < k; ++i) {
            if (s.ranked[i] == s.gold) {
                ++hit;
                break;
            }
        }
    }
    return static_cast<double>(hit) / static_cast<double>(samples.size());
}

struct F1Row {
    int cls;
    std::size_t support;
    double precision, recall, f1;
};

struct F1Oracle {
    std::vector<F1Row> rows;  // gold classes, ascending
    double macro, weighted;
};

// Builds the full confusion matrix (gold x predicted) and reads everything
// off it.
inline F1Oracle f1(const std::vector<Sample>& samples) {
    std::map<int, std::map<int, std::size_t>> cm;
    std::map<int, bool> in_gold;
    for (const auto& s : samples) {
        ++cm[s.gold][s.ranked.front()];
        in_gold[s.gold] = true;
    }
    F1Oracle out{{}, 0.0, 0.0};
    std::size_t total_support = 0;
    for (const auto& [c, present] : in_gold) {
        (void)present;
        std::size_t tp = cm[c][c];
        std::size_t row_sum = 0, col_sum = 0;
        for (const auto& [gc, preds] : cm) {
            for (const auto& [pc, count] : preds) {
                if (gc == c) row_sum += count;
                if (pc == c) col_sum += count;
            }
        }
        const double p = col_sum ? static_cast<double>(tp) / static_cast<double>(col_sum) : 0.0;
        const double r = row_sum ? static_cast<double>(tp) / static_cast<double>(row_sum) : 0.0;
        const double f = (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
        out.rows.push_back({c, row_sum, p, r, f});
        total_support += row_sum;
    }
    for (const auto& row : out.rows) {
        out.macro += row.f1 / static_cast<double>(out.rows.size());
        out.weighted += row.f1 * static_cast<double>(row.support) / static_cast<double>(total_support);
    }
    return out;
}

struct AccRow {
    int cls;
    std::size_t support, correct;
    double accuracy;
};

// Selection sort by (support desc, class asc) so the ordering logic shares
// nothing with std::sort comparators in the library.
inline std::vector<AccRow> per_class(const std::vector<Sample>& samples) {
    std::map<int, std::pair<std::size_t, std::size_t>> agg;
    for (const auto& s : samples) {
        auto& a = agg[s.gold];
        ++a.first;
        if (s.ranked.front() == s.gold) ++a.second;
    }
    std::vector<AccRow> rows;
    for (const auto& [c, a] : agg) rows.push_back({c, a.first, a.second, static_cast<double>(a.second) / static_cast<double>(a.first)});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t best = i;
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
            if (rows[j].support > rows[best].support || (rows[j].support == rows[best].support && rows[j].cls < rows[best].cls)) best = j;
        }
        std::swap(rows[i], rows[best]);
    }
    return rows;
}

// ---------------------------------------------------------------- logistic regression

// Mean softmax cross-entropy + (l2/2)*||W||^2, written from the definition
// with dense vectors.
inline double objective(const LinearModel& m, const std::vector<SparseVector>& x, const std::vector<std::size_t>& y, double l2) {
    const std::size_t c = m.num_classes();
    long double total = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<long double> dense(m.num_features, 0.0L);
        for (const auto& e : x[i]) dense[e.index] = e.weight;
        std::vector<long double> z(c);
        for (std::size_t k = 0; k < c; ++k) {
            long double s = m.bias[k];
            for (std::size_t f = 0; f < m.num_features; ++f) s += m.weights[k * m.num_features + f] * dense[f];
            z[k] = s;
        }
        long double mx = z[0];
        for (auto v : z) mx = std::max(mx, v);
        long double sum = 0.0L;
        for (auto v : z) sum += std::exp(v - mx);
        total += -(z[y[i]] - mx - std::log(sum));
    }
    long double reg = 0.0L;
    for (double w : m.weights) reg += static_cast<long double>(w) * w;
    return static_cast<double>(total / static_cast<long double>(x.size()) + 0.5L * l2 * reg);
}

// ---------------------------------------------------------------- tf-idf

inline std::map<std::string, double> idf(const std::vector<std::vector<std::string>>& tokenized_docs) {
    std::map<std::string, std::size_t> df;
    for (const auto& doc : tokenized_docs) {
        std::map<std::string, bool> seen;
        for (const auto& t : doc) seen[t] = true;
        for (const auto& [t, _] : seen) ++df[t];
    }
    std::map<std::string, double> out;
    const double n = static_cast<double>(tokenized_docs.size());
    for (const auto& [t, d] : df) out[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(d))) + 1.0;
    return out;
}

}  // namespace cvecwe::oracle
