#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace causalseg {

// One observational/experimental dataset: N units with covariates, a binary
// treatment flag (1 = promoted, 0 = control) and a real-valued outcome.
// Immutable after construction; all consumers take it by const reference.
struct Dataset {
    std::vector<long long> unit_ids;
    Eigen::MatrixXd covariates;  // N x d
    std::vector<int> treatment;  // values in {0,1}, both arms non-empty
    Eigen::VectorXd outcome;
    std::vector<std::string> covariate_names;  // size d

    Eigen::Index n() const { return covariates.rows(); }
    Eigen::Index dim() const { return covariates.cols(); }

    std::vector<Eigen::Index> arm_indices(int arm) const;
    Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

// Throws ValidationError on any broken invariant: mismatched lengths, N < 2,
// treatment outside {0,1}, an empty arm, or non-finite values.
void validate_dataset(const Dataset& ds);

// Maps logical roles onto file column names. Covariates may be listed
// explicitly; when empty, every unmapped column is a covariate in file order.
// When id_column is unset, unit ids are 0-based row numbers.
struct ColumnSchema {
    std::optional<std::string> id_column;
    std::string treatment_column = "treatment";
    std::string outcome_column = "outcome";
    std::vector<std::string> covariate_columns;
};

Dataset load_csv(const std::string& path, const ColumnSchema& schema);

// Canonical layout: unit_id, <covariates...>, treatment, outcome. A file in
// canonical layout and formatting round-trips byte-identically through
// load_csv + save_csv.
void save_csv(const Dataset& ds, const std::string& path);

struct OverlapReport {
    double min_propensity = 0.0;
    double max_propensity = 0.0;
    Eigen::Index n_below_lo = 0;
    Eigen::Index n_above_hi = 0;
    bool violated = false;
};

// Positivity diagnostic: counts units whose assignment propensity falls
// outside [lo, hi].
OverlapReport overlap_report(const Dataset& ds, const Eigen::VectorXd& propensity,
                             double lo, double hi);

// Keeps exactly the units with lo <= e(x) <= hi (closed interval), original
// order preserved. Throws if either arm would become empty.
Dataset positivity_trim(const Dataset& ds, const Eigen::VectorXd& propensity,
                        double lo, double hi);

}  // namespace causalseg
