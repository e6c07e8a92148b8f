#pragma once
// Quantile segmentation over CATE scores, a deterministic Lloyd's k-means
// baseline (k-means++ seeding), and the segment-movement metric that drives
// the iteration loop's stopping rule.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace causalseg {

// cate_quantile labels are canonically ordered (higher label = higher CATE);
// the other methods carry no such ordering. random/single exist for the
// loop's initial-segmentation bookkeeping.
enum class SegmentMethod { cate_quantile, kmeans, random, single };

std::string segment_method_name(SegmentMethod m);

struct SegmentAssignment {
    std::vector<int> labels;         // N values in [0, k)
    int k = 0;
    std::vector<double> thresholds;  // k-1 cut points; ascending (cate_quantile only)
    SegmentMethod method = SegmentMethod::cate_quantile;
};

// Thresholds at the j/k empirical quantiles (j = 1..k-1, lowest order
// statistic at or above rank ceil(j*N/k)); label = number of thresholds
// strictly below the unit's value, so ties at a threshold go to the lower
// segment. Constant input degenerates to all-zero labels with coincident
// thresholds — documented, not an error.
SegmentAssignment segment_by_cate(const Eigen::VectorXd& cate, int k);

struct KmeansResult {
    SegmentAssignment assignment;  // method == kmeans
    Eigen::MatrixXd centroids;     // k x d, ordered by ascending norm
    double inertia = 0.0;          // sum of squared point-to-centroid distances
    int iterations = 0;
};

// Lloyd's algorithm, k-means++ seeded, deterministic given (X, k, seed, tol,
// max_iter). Empty clusters are repaired by reseeding to the point farthest
// from its assigned centroid. Labels are reindexed so cluster 0 has the
// smallest centroid norm.
KmeansResult kmeans(const Eigen::MatrixXd& X, int k, uint64_t seed, double tol = 1e-6,
                    int max_iter = 100);

// Count of units whose label changed between two assignments. Restricted to
// cate_quantile pairs: only their labels share a canonical order, so raw
// disagreement is meaningful without any cluster matching.
long long segment_movement(const SegmentAssignment& prev, const SegmentAssignment& curr);

// N x k one-hot indicator matrix of the labels (loop feedback features).
Eigen::MatrixXd one_hot_labels(const SegmentAssignment& s);

}  // namespace causalseg
