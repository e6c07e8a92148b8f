#include <doctest.h>

#include <causalseg/dataset.hpp>
#include <causalseg/errors.hpp>
#include <cstdio>
#include <fstream>
#include <string>

using namespace causalseg;

namespace {

Dataset tiny_dataset() {
    Dataset ds;
    ds.unit_ids = {10, 11, 12, 13};
    ds.covariates.resize(4, 2);
    ds.covariates << 0.1, 1.0, 0.2, 2.0, 0.3, 3.0, 0.4, 4.0;
    ds.treatment = {0, 1, 0, 1};
    ds.outcome.resize(4);
    ds.outcome << 1.0, 2.0, 3.0, 4.0;
    ds.covariate_names = {"a", "b"};
    return ds;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("validate_dataset accepts a well-formed dataset") {
    CHECK_NOTHROW(validate_dataset(tiny_dataset()));
}

TEST_CASE("validate_dataset rejects structural problems") {
    SUBCASE("too few units") {
        Dataset ds = tiny_dataset().subset({0});
        CHECK_THROWS_AS(validate_dataset(ds), ValidationError);
    }
    SUBCASE("length mismatch") {
        Dataset ds = tiny_dataset();
        ds.unit_ids.pop_back();
        CHECK_THROWS_AS(validate_dataset(ds), ValidationError);
    }
    SUBCASE("name count mismatch") {
        Dataset ds = tiny_dataset();
        ds.covariate_names.push_back("extra");
        CHECK_THROWS_AS(validate_dataset(ds), ValidationError);
    }
    SUBCASE("bad treatment value names the row") {
        Dataset ds = tiny_dataset();
        ds.treatment[2] = 5;
        try {
            validate_dataset(ds);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        }
    }
    SUBCASE("empty treated arm") {
        Dataset ds = tiny_dataset();
        ds.treatment = {0, 0, 0, 0};
        CHECK_THROWS_AS(validate_dataset(ds), ValidationError);
    }
    SUBCASE("empty control arm") {
        Dataset ds = tiny_dataset();
        ds.treatment = {1, 1, 1, 1};
        CHECK_THROWS_AS(validate_dataset(ds), ValidationError);
    }
    SUBCASE("non-finite covariate") {
        Dataset ds = tiny_dataset();
        ds.covariates(1, 1) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(validate_dataset(ds), ValidationError);
    }
    SUBCASE("non-finite outcome") {
        Dataset ds = tiny_dataset();
        ds.outcome(0) = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(validate_dataset(ds), ValidationError);
    }
}

TEST_CASE("arm_indices partitions the rows") {
    const Dataset ds = tiny_dataset();
    CHECK(ds.arm_indices(0) == std::vector<Eigen::Index>{0, 2});
    CHECK(ds.arm_indices(1) == std::vector<Eigen::Index>{1, 3});
}

TEST_CASE("subset picks rows in the requested order") {
    const Dataset ds = tiny_dataset();
    const Dataset sub = ds.subset({3, 0});
    REQUIRE(sub.n() == 2);
    CHECK(sub.unit_ids == std::vector<long long>{13, 10});
    CHECK(sub.treatment == std::vector<int>{1, 0});
    CHECK(sub.outcome(0) == 4.0);
    CHECK(sub.covariates(1, 0) == 0.1);
    CHECK(sub.covariate_names == ds.covariate_names);
}

TEST_CASE("save_csv then load_csv is a bit-exact round trip") {
    const std::string path = "/tmp/causalseg_ds_roundtrip.csv";
    Dataset ds = tiny_dataset();
    ds.covariates(0, 0) = 1.0 / 3.0;  // force a value with no short decimal form
    save_csv(ds, path);

    ColumnSchema schema;
    schema.id_column = "unit_id";
    const Dataset back = load_csv(path, schema);

    CHECK(back.unit_ids == ds.unit_ids);
    CHECK(back.treatment == ds.treatment);
    CHECK(back.covariate_names == ds.covariate_names);
    CHECK((back.covariates - ds.covariates).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.outcome - ds.outcome).cwiseAbs().maxCoeff() == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("load_csv respects an explicit covariate subset") {
    const std::string path = "/tmp/causalseg_ds_subset.csv";
    write_text(path, "unit_id,a,b,treatment,outcome\n1,0.5,9,0,1\n2,0.6,9,1,2\n");
    ColumnSchema schema;
    schema.id_column = "unit_id";
    schema.covariate_columns = {"a"};
    const Dataset ds = load_csv(path, schema);
    CHECK(ds.dim() == 1);
    CHECK(ds.covariate_names == std::vector<std::string>{"a"});
    CHECK(ds.covariates(1, 0) == 0.6);
    std::remove(path.c_str());
}

TEST_CASE("load_csv without id column numbers the rows") {
    const std::string path = "/tmp/causalseg_ds_noid.csv";
    write_text(path, "a,treatment,outcome\n0.5,0,1\n0.6,1,2\n");
    const Dataset ds = load_csv(path, ColumnSchema{});
    CHECK(ds.unit_ids == std::vector<long long>{0, 1});
    std::remove(path.c_str());
}

TEST_CASE("load_csv errors carry the offending location") {
    const std::string path = "/tmp/causalseg_ds_bad.csv";

    SUBCASE("missing column named") {
        write_text(path, "a,outcome\n0.5,1\n0.6,2\n");
        try {
            load_csv(path, ColumnSchema{});
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("treatment") != std::string::npos);
        }
    }
    SUBCASE("non-numeric cell names row and column") {
        write_text(path, "a,treatment,outcome\n0.5,0,1\noops,1,2\n");
        try {
            load_csv(path, ColumnSchema{});
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("row 1") != std::string::npos);
            CHECK(msg.find("'a'") != std::string::npos);
        }
    }
    SUBCASE("treatment outside 0/1") {
        write_text(path, "a,treatment,outcome\n0.5,2,1\n0.6,1,2\n");
        CHECK_THROWS_AS(load_csv(path, ColumnSchema{}), ParseError);
    }
    SUBCASE("fractional unit id") {
        write_text(path, "unit_id,a,treatment,outcome\n1.5,0.5,0,1\n2,0.6,1,2\n");
        ColumnSchema schema;
        schema.id_column = "unit_id";
        CHECK_THROWS_AS(load_csv(path, schema), ParseError);
    }
    std::remove(path.c_str());
}

TEST_CASE("overlap_report counts the tail units") {
    const Dataset ds = tiny_dataset();
    Eigen::VectorXd e(4);
    e << 0.01, 0.5, 0.6, 0.99;
    const OverlapReport rep = overlap_report(ds, e, 0.05, 0.95);
    CHECK(rep.min_propensity == 0.01);
    CHECK(rep.max_propensity == 0.99);
    CHECK(rep.n_below_lo == 1);
    CHECK(rep.n_above_hi == 1);
    CHECK(rep.violated);

    const OverlapReport ok = overlap_report(ds, e, 0.01, 0.99);
    CHECK_FALSE(ok.violated);  // closed interval: boundary values are inside
}

TEST_CASE("positivity_trim keeps the closed interval and is idempotent") {
    Dataset ds = tiny_dataset();
    Eigen::VectorXd e(4);
    e << 0.01, 0.05, 0.6, 0.99;
    const Dataset trimmed = positivity_trim(ds, e, 0.05, 0.95);
    REQUIRE(trimmed.n() == 2);
    CHECK(trimmed.unit_ids == std::vector<long long>{11, 12});

    // trimming the already-trimmed set with its own propensities is a no-op
    Eigen::VectorXd e2(2);
    e2 << 0.05, 0.6;
    const Dataset again = positivity_trim(trimmed, e2, 0.05, 0.95);
    CHECK(again.unit_ids == trimmed.unit_ids);
}

TEST_CASE("positivity_trim refuses to empty an arm") {
    const Dataset ds = tiny_dataset();
    Eigen::VectorXd e(4);
    e << 0.5, 0.99, 0.5, 0.99;  // both treated units out of range
    try {
        positivity_trim(ds, e, 0.05, 0.95);
        FAIL("expected ValidationError");
    } catch (const ValidationError& err) {
        CHECK(std::string(err.what()).find("treated") != std::string::npos);
    }
}

TEST_CASE("overlap helpers reject malformed arguments") {
    const Dataset ds = tiny_dataset();
    Eigen::VectorXd wrong(3);
    wrong << 0.5, 0.5, 0.5;
    CHECK_THROWS_AS(overlap_report(ds, wrong, 0.05, 0.95), ValidationError);
    Eigen::VectorXd e(4);
    e << 0.5, 0.5, 0.5, 0.5;
    CHECK_THROWS_AS(overlap_report(ds, e, 0.9, 0.1), ValidationError);
}
