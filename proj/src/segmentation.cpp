#include "causalseg/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "causalseg/errors.hpp"
#include "causalseg/rng.hpp"

namespace causalseg {

std::string segment_method_name(SegmentMethod m) {
    switch (m) {
        case SegmentMethod::cate_quantile: return "cate_quantile";
        case SegmentMethod::kmeans: return "kmeans";
        case SegmentMethod::random: return "random";
        case SegmentMethod::single: return "single";
    }
    return "unknown";
}

SegmentAssignment segment_by_cate(const Eigen::VectorXd& cate, int k) {
    const Eigen::Index n = cate.size();
    if (k < 2) throw ValidationError("segment_by_cate: k must be >= 2, got " + std::to_string(k));
    if (n < k) {
        throw ValidationError("segment_by_cate: k=" + std::to_string(k) + " exceeds N=" +
                              std::to_string(n));
    }
    if (!cate.allFinite()) throw ValidationError("segment_by_cate: non-finite cate values");

    std::vector<double> sorted(cate.begin(), cate.end());
    std::sort(sorted.begin(), sorted.end());

    SegmentAssignment out;
    out.k = k;
    out.method = SegmentMethod::cate_quantile;
    out.thresholds.reserve(static_cast<size_t>(k - 1));
    for (int j = 1; j < k; ++j) {
        // rank ceil(j*N/k), 1-based: the lowest order statistic with at least
        // a j/k fraction of the sample at or below it
        const auto rank = (static_cast<size_t>(j) * static_cast<size_t>(n) +
                           static_cast<size_t>(k) - 1) /
                          static_cast<size_t>(k);
        out.thresholds.push_back(sorted[rank - 1]);
    }

    out.labels.resize(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        int label = 0;
        for (double t : out.thresholds) {
            if (t < cate(i)) ++label;
        }
        out.labels[static_cast<size_t>(i)] = label;
    }
    return out;
}

namespace {

Eigen::Index nearest_centroid(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& x,
                              double* dist2_out = nullptr) {
    Eigen::Index best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        const double d2 = (x - centroids.row(c)).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = c;
        }
    }
    if (dist2_out) *dist2_out = best_d2;
    return best;
}

Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& X, int k, Rng& rng) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd centroids(k, X.cols());
    centroids.row(0) = X.row(static_cast<Eigen::Index>(rng.below(static_cast<uint64_t>(n))));

    Eigen::VectorXd d2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    for (int c = 1; c < k; ++c) {
        for (Eigen::Index i = 0; i < n; ++i) {
            d2(i) = std::min(d2(i), (X.row(i) - centroids.row(c - 1)).squaredNorm());
        }
        const double total = d2.sum();
        Eigen::Index pick;
        if (total > 0.0) {
            // sample proportional to squared distance from the chosen set
            const double u = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        } else {
            // every point coincides with a chosen centroid; any pick works
            pick = static_cast<Eigen::Index>(rng.below(static_cast<uint64_t>(n)));
        }
        centroids.row(c) = X.row(pick);
    }
    return centroids;
}

}  // namespace

KmeansResult kmeans(const Eigen::MatrixXd& X, int k, uint64_t seed, double tol, int max_iter) {
    const Eigen::Index n = X.rows();
    if (k < 1) throw ValidationError("kmeans: k must be >= 1, got " + std::to_string(k));
    if (n < k) {
        throw ValidationError("kmeans: k=" + std::to_string(k) + " exceeds N=" +
                              std::to_string(n));
    }
    if (!X.allFinite()) throw ValidationError("kmeans: non-finite input");
    if (!(tol >= 0.0)) throw ValidationError("kmeans: tol must be >= 0");
    if (max_iter < 1) throw ValidationError("kmeans: max_iter must be >= 1");

    Rng rng(seed);
    Eigen::MatrixXd centroids = kmeanspp_init(X, k, rng);
    std::vector<Eigen::Index> labels(static_cast<size_t>(n), 0);

    int iterations = 0;
    for (; iterations < max_iter; ++iterations) {
        for (Eigen::Index i = 0; i < n; ++i) {
            labels[static_cast<size_t>(i)] = nearest_centroid(centroids, X.row(i));
        }

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, X.cols());
        std::vector<Eigen::Index> counts(static_cast<size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(labels[static_cast<size_t>(i)]) += X.row(i);
            ++counts[static_cast<size_t>(labels[static_cast<size_t>(i)])];
        }

        Eigen::MatrixXd next = centroids;
        std::vector<bool> taken(static_cast<size_t>(n), false);
        for (Eigen::Index c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] > 0) {
                next.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<size_t>(c)]);
            } else {
                // reseed an empty cluster to the point farthest from its
                // assigned centroid (skipping points already used as repairs)
                Eigen::Index far = -1;
                double far_d2 = -1.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    if (taken[static_cast<size_t>(i)]) continue;
                    const double d2 =
                        (X.row(i) - centroids.row(labels[static_cast<size_t>(i)])).squaredNorm();
                    if (d2 > far_d2) {
                        far_d2 = d2;
                        far = i;
                    }
                }
                next.row(c) = X.row(far);
                taken[static_cast<size_t>(far)] = true;
            }
        }

        double max_shift = 0.0;
        for (Eigen::Index c = 0; c < k; ++c) {
            max_shift = std::max(max_shift, (next.row(c) - centroids.row(c)).norm());
        }
        centroids = next;
        if (max_shift <= tol) {
            ++iterations;
            break;
        }
    }

    // final labeling against the settled centroids, then canonical reindexing
    // by ascending centroid norm (ties broken lexicographically by coordinates)
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double d2 = 0.0;
        labels[static_cast<size_t>(i)] = nearest_centroid(centroids, X.row(i), &d2);
        inertia += d2;
    }

    std::vector<Eigen::Index> order(static_cast<size_t>(k));
    for (int c = 0; c < k; ++c) order[static_cast<size_t>(c)] = c;
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double na = centroids.row(a).norm();
        const double nb = centroids.row(b).norm();
        if (na != nb) return na < nb;
        return std::lexicographical_compare(
            centroids.row(a).data(), centroids.row(a).data() + centroids.cols(),
            centroids.row(b).data(), centroids.row(b).data() + centroids.cols());
    });
    std::vector<int> relabel(static_cast<size_t>(k), 0);
    for (int pos = 0; pos < k; ++pos) relabel[static_cast<size_t>(order[pos])] = pos;

    KmeansResult result;
    result.centroids.resize(k, X.cols());
    for (int pos = 0; pos < k; ++pos) result.centroids.row(pos) = centroids.row(order[pos]);
    result.assignment.k = k;
    result.assignment.method = SegmentMethod::kmeans;
    result.assignment.labels.resize(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        result.assignment.labels[static_cast<size_t>(i)] =
            relabel[static_cast<size_t>(labels[static_cast<size_t>(i)])];
    }
    result.inertia = inertia;
    result.iterations = iterations;
    return result;
}

long long segment_movement(const SegmentAssignment& prev, const SegmentAssignment& curr) {
    if (prev.labels.size() != curr.labels.size()) {
        throw ValidationError("segment_movement: assignments cover different populations (" +
                              std::to_string(prev.labels.size()) + " vs " +
                              std::to_string(curr.labels.size()) + ")");
    }
    if (prev.k != curr.k) {
        throw ValidationError("segment_movement: segment counts differ (" +
                              std::to_string(prev.k) + " vs " + std::to_string(curr.k) + ")");
    }
    if (prev.method != SegmentMethod::cate_quantile ||
        curr.method != SegmentMethod::cate_quantile) {
        throw ValidationError(
            "segment_movement: only cate_quantile assignments are comparable; labels from other "
            "methods have no canonical order");
    }
    long long moved = 0;
    for (size_t i = 0; i < prev.labels.size(); ++i) {
        if (prev.labels[i] != curr.labels[i]) ++moved;
    }
    return moved;
}

Eigen::MatrixXd one_hot_labels(const SegmentAssignment& s) {
    if (s.k < 1) throw ValidationError("one_hot_labels: assignment has no segments");
    Eigen::MatrixXd out =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.labels.size()), s.k);
    for (size_t i = 0; i < s.labels.size(); ++i) {
        const int label = s.labels[i];
        if (label < 0 || label >= s.k) {
            throw ValidationError("one_hot_labels: label " + std::to_string(label) +
                                  " outside [0, " + std::to_string(s.k) + ")");
        }
        out(static_cast<Eigen::Index>(i), label) = 1.0;
    }
    return out;
}

}  // namespace causalseg
