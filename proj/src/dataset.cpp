#include "causalseg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "causalseg/csv.hpp"
#include "causalseg/errors.hpp"

namespace causalseg {

std::vector<Eigen::Index> Dataset::arm_indices(int arm) const {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n(); ++i) {
        if (treatment[static_cast<size_t>(i)] == arm) idx.push_back(i);
    }
    return idx;
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
    Dataset out;
    out.covariate_names = covariate_names;
    out.unit_ids.reserve(rows.size());
    out.treatment.reserve(rows.size());
    out.covariates.resize(static_cast<Eigen::Index>(rows.size()), dim());
    out.outcome.resize(static_cast<Eigen::Index>(rows.size()));
    Eigen::Index r = 0;
    for (const Eigen::Index i : rows) {
        out.unit_ids.push_back(unit_ids[static_cast<size_t>(i)]);
        out.treatment.push_back(treatment[static_cast<size_t>(i)]);
        out.covariates.row(r) = covariates.row(i);
        out.outcome(r) = outcome(i);
        ++r;
    }
    return out;
}

void validate_dataset(const Dataset& ds) {
    const Eigen::Index n = ds.covariates.rows();
    if (n < 2) throw ValidationError("dataset needs at least 2 units, got " + std::to_string(n));
    if (static_cast<Eigen::Index>(ds.unit_ids.size()) != n ||
        static_cast<Eigen::Index>(ds.treatment.size()) != n || ds.outcome.size() != n) {
        throw ValidationError("dataset column lengths disagree");
    }
    if (static_cast<Eigen::Index>(ds.covariate_names.size()) != ds.covariates.cols()) {
        throw ValidationError("covariate_names length must equal covariate count");
    }
    long n_treated = 0;
    for (size_t i = 0; i < ds.treatment.size(); ++i) {
        const int t = ds.treatment[i];
        if (t != 0 && t != 1) {
            throw ValidationError("treatment must be 0 or 1, row " + std::to_string(i) +
                                  " has " + std::to_string(t));
        }
        n_treated += t;
    }
    if (n_treated == 0) throw ValidationError("treated arm is empty");
    if (n_treated == n) throw ValidationError("control arm is empty");
    if (!ds.covariates.allFinite()) throw ValidationError("covariates contain non-finite values");
    if (!ds.outcome.allFinite()) throw ValidationError("outcome contains non-finite values");
}

namespace {

size_t find_column(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError("schema error: column '" + name + "' not in file");
    return static_cast<size_t>(it - header.begin());
}

double parse_cell(const std::string& cell, size_t row, const std::string& column) {
    double v = 0.0;
    if (!csv::parse_double(cell, v)) {
        throw ParseError("row " + std::to_string(row) + ", column '" + column +
                         "': cannot parse '" + cell + "' as a finite number");
    }
    return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const ColumnSchema& schema) {
    const csv::Table table = csv::read_table(path);

    const size_t treat_col = find_column(table.header, schema.treatment_column);
    const size_t outcome_col = find_column(table.header, schema.outcome_column);
    std::optional<size_t> id_col;
    if (schema.id_column) id_col = find_column(table.header, *schema.id_column);

    std::vector<size_t> cov_cols;
    std::vector<std::string> cov_names;
    if (!schema.covariate_columns.empty()) {
        for (const auto& name : schema.covariate_columns) {
            cov_cols.push_back(find_column(table.header, name));
            cov_names.push_back(name);
        }
    } else {
        std::unordered_set<size_t> reserved{treat_col, outcome_col};
        if (id_col) reserved.insert(*id_col);
        for (size_t c = 0; c < table.header.size(); ++c) {
            if (!reserved.count(c)) {
                cov_cols.push_back(c);
                cov_names.push_back(table.header[c]);
            }
        }
    }
    if (cov_cols.empty()) throw ValidationError("schema error: no covariate columns");

    const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
    Dataset ds;
    ds.covariate_names = cov_names;
    ds.covariates.resize(n, static_cast<Eigen::Index>(cov_cols.size()));
    ds.outcome.resize(n);
    ds.unit_ids.reserve(static_cast<size_t>(n));
    ds.treatment.reserve(static_cast<size_t>(n));

    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (id_col) {
            const double id = parse_cell(row[*id_col], r, table.header[*id_col]);
            if (id != std::floor(id)) {
                throw ParseError("row " + std::to_string(r) + ": unit id '" + row[*id_col] +
                                 "' is not an integer");
            }
            ds.unit_ids.push_back(static_cast<long long>(id));
        } else {
            ds.unit_ids.push_back(static_cast<long long>(r));
        }
        const double t = parse_cell(row[treat_col], r, schema.treatment_column);
        if (t != 0.0 && t != 1.0) {
            throw ParseError("row " + std::to_string(r) + ": treatment value '" + row[treat_col] +
                             "' is not 0 or 1");
        }
        ds.treatment.push_back(static_cast<int>(t));
        ds.outcome(static_cast<Eigen::Index>(r)) = parse_cell(row[outcome_col], r, schema.outcome_column);
        for (size_t c = 0; c < cov_cols.size(); ++c) {
            ds.covariates(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_cell(row[cov_cols[c]], r, cov_names[c]);
        }
    }

    validate_dataset(ds);
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << "unit_id";
    for (const auto& name : ds.covariate_names) out << ',' << name;
    out << ",treatment,outcome\n";
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        out << ds.unit_ids[static_cast<size_t>(i)];
        for (Eigen::Index c = 0; c < ds.dim(); ++c) out << ',' << csv::format_double(ds.covariates(i, c));
        out << ',' << ds.treatment[static_cast<size_t>(i)] << ',' << csv::format_double(ds.outcome(i))
            << '\n';
    }
}

namespace {

void check_propensity_args(const Dataset& ds, const Eigen::VectorXd& propensity, double lo, double hi) {
    if (propensity.size() != ds.n()) {
        throw ValidationError("propensity length " + std::to_string(propensity.size()) +
                              " != dataset size " + std::to_string(ds.n()));
    }
    if (!(0.0 <= lo && lo < hi && hi <= 1.0)) {
        throw ValidationError("require 0 <= lo < hi <= 1");
    }
}

}  // namespace

OverlapReport overlap_report(const Dataset& ds, const Eigen::VectorXd& propensity,
                             double lo, double hi) {
    check_propensity_args(ds, propensity, lo, hi);
    OverlapReport report;
    report.min_propensity = propensity.minCoeff();
    report.max_propensity = propensity.maxCoeff();
    for (Eigen::Index i = 0; i < propensity.size(); ++i) {
        if (propensity(i) < lo) ++report.n_below_lo;
        if (propensity(i) > hi) ++report.n_above_hi;
    }
    report.violated = (report.n_below_lo + report.n_above_hi) > 0;
    return report;
}

Dataset positivity_trim(const Dataset& ds, const Eigen::VectorXd& propensity,
                        double lo, double hi) {
    check_propensity_args(ds, propensity, lo, hi);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        if (propensity(i) >= lo && propensity(i) <= hi) keep.push_back(i);
    }
    Dataset trimmed = ds.subset(keep);
    long n_treated = 0;
    for (const int t : trimmed.treatment) n_treated += t;
    if (trimmed.n() == 0 || n_treated == 0) {
        throw ValidationError("positivity trim emptied the treated arm");
    }
    if (n_treated == trimmed.n()) {
        throw ValidationError("positivity trim emptied the control arm");
    }
    return trimmed;
}

}  // namespace causalseg
