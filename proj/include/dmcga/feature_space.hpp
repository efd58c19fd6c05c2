#pragma once

// Decorrelation of the retained features: each feature becomes a point in
// sample space, KMeans groups similar features, and one random member per
// cluster forms the feature space searched by the GA.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "dmcga/data.hpp"
#include "dmcga/errors.hpp"
#include "dmcga/random.hpp"

namespace dmcga {

struct FeaturePointSet {
    std::vector<std::vector<double>> points;  // one min-max normalized column per feature
    std::vector<std::size_t> source_indices;

    std::size_t size() const noexcept { return points.size(); }
};

struct KMeansOptions {
    std::size_t max_iters = 300;
    double tol = 1e-4;
    std::size_t restarts = 1;
};

struct Clustering {
    std::size_t q = 0;
    std::vector<std::size_t> assignment;
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
    std::vector<double> inertia_history;  // one entry per Lloyd iteration
    std::size_t iterations = 0;
};

struct FeatureSpace {
    std::vector<std::size_t> indices;  // original feature indices, ordered by cluster id
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return indices.size(); }
};

/// Min-max normalizes each selected column to [0, 1]; constant columns map
/// to zeros.
inline FeaturePointSet make_point_set(const FeatureMatrix& matrix, std::span<const std::size_t> features) {
    FeaturePointSet set;
    set.source_indices.assign(features.begin(), features.end());
    set.points.reserve(features.size());
    for (std::size_t j : features) {
        const auto col = matrix.column(j);
        const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        const double range = *hi - *lo;
        std::vector<double> p(col.size(), 0.0);
        if (range > 0.0)
            for (std::size_t i = 0; i < col.size(); ++i) p[i] = std::clamp((col[i] - *lo) / range, 0.0, 1.0);
        set.points.push_back(std::move(p));
    }
    return set;
}

inline std::size_t effective_q(std::size_t retained, std::size_t requested_q) {
    if (retained < 1) throw ArgumentError("need at least one retained feature");
    return std::min(requested_q, retained);
}

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        d += t * t;
    }
    return d;
}

inline std::vector<std::vector<double>> kmeanspp_seed(const FeaturePointSet& set, std::size_t q, Rng& rng) {
    const std::size_t n = set.size();
    std::vector<std::vector<double>> centroids;
    centroids.reserve(q);
    centroids.push_back(set.points[uniform_index(rng, n)]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(set.points[i], centroids.back());
    while (centroids.size() < q) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = n - 1;
        if (total > 0.0) {
            const double u = uniform_unit(rng) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        } else {
            // every point coincides with a centroid; duplicates get repaired later
            pick = uniform_index(rng, n);
        }
        centroids.push_back(set.points[pick]);
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], squared_distance(set.points[i], centroids.back()));
    }
    return centroids;
}

inline Clustering lloyd(const FeaturePointSet& set, std::size_t q, Rng& rng, const KMeansOptions& opts) {
    const std::size_t n = set.size();
    const std::size_t dim = set.points.front().size();
    Clustering result;
    result.q = q;
    result.centroids = kmeanspp_seed(set, q, rng);
    result.assignment.assign(n, 0);
    std::vector<double> dist(n);

    for (std::size_t iter = 0; iter < std::max<std::size_t>(opts.max_iters, 1); ++iter) {
        std::vector<std::size_t> sizes(q, 0);
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < q; ++c) {
                const double d = squared_distance(set.points[i], result.centroids[c]);
                if (d < best) {
                    best = d;
                    result.assignment[i] = c;
                }
            }
            dist[i] = best;
            ++sizes[result.assignment[i]];
        }

        // Empty-cluster repair: hand the worst-fitting point of a multi-member
        // cluster to the empty one.
        for (std::size_t c = 0; c < q; ++c) {
            if (sizes[c] != 0) continue;
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i)
                if (sizes[result.assignment[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
            if (far == n) throw InvariantError("kmeans repair found no donor point");
            --sizes[result.assignment[far]];
            result.assignment[far] = c;
            ++sizes[c];
            dist[far] = 0.0;
            result.centroids[c] = set.points[far];
        }

        std::vector<std::vector<double>> next(q, std::vector<double>(dim, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            auto& acc = next[result.assignment[i]];
            for (std::size_t k = 0; k < dim; ++k) acc[k] += set.points[i][k];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < q; ++c) {
            for (double& v : next[c]) v /= static_cast<double>(sizes[c]);
            shift = std::max(shift, squared_distance(next[c], result.centroids[c]));
        }
        result.centroids = std::move(next);

        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            inertia += squared_distance(set.points[i], result.centroids[result.assignment[i]]);
        result.inertia = inertia;
        result.inertia_history.push_back(inertia);
        result.iterations = iter + 1;
        if (std::sqrt(shift) < opts.tol) break;
    }
    return result;
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeding. With restarts > 1 the run with
/// the lowest inertia wins (earliest on ties).
inline Clustering kmeans(const FeaturePointSet& points, std::size_t q, std::uint64_t seed,
                         const KMeansOptions& opts = {}) {
    if (q < 1) throw ArgumentError("q must be at least 1");
    if (q > points.size()) throw TooFewPoints(q, points.size());
    Rng rng = make_rng(seed);
    Clustering best;
    for (std::size_t r = 0; r < std::max<std::size_t>(opts.restarts, 1); ++r) {
        auto run = detail::lloyd(points, q, rng, opts);
        if (r == 0 || run.inertia < best.inertia) best = std::move(run);
    }
    return best;
}

/// Draws one member per cluster uniformly; output ordered by cluster id.
inline FeatureSpace build_feature_space(const Clustering& clustering, std::span<const std::size_t> source_indices,
                                        std::uint64_t seed) {
    if (clustering.assignment.size() != source_indices.size())
        throw ArgumentError("assignment and source index counts differ");
    std::vector<std::vector<std::size_t>> members(clustering.q);
    for (std::size_t i = 0; i < clustering.assignment.size(); ++i)
        members.at(clustering.assignment[i]).push_back(source_indices[i]);

    Rng rng = make_rng(seed);
    FeatureSpace space;
    space.seed = seed;
    for (std::size_t c = 0; c < clustering.q; ++c) {
        if (members[c].empty()) throw EmptyCluster(c);
        space.indices.push_back(members[c][uniform_index(rng, members[c].size())]);
    }
    return space;
}

}  // namespace dmcga
