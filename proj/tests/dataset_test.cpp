#include <doctest.h>

#include <cmath>
#include <set>

#include "corsvm/dataset.hpp"
#include "corsvm/errors.hpp"
#include "corsvm/synthetic.hpp"
#include "test_helpers.hpp"

using namespace corsvm;
using testutil::TempDir;
using testutil::write_text;

TEST_CASE("load_csv reads a small file verbatim") {
    TempDir dir("csv");
    const auto path = write_text(dir.file("small.csv"),
                                 "f_0,f_1,label\n"
                                 "1.5,2.0,1\n"
                                 "-3.25,0.5,2\n"
                                 "0.0,1.0,1\n");
    const RawDataset ds = load_csv(path);
    CHECK(ds.rows() == 3);
    CHECK(ds.dims() == 2);
    CHECK(ds.features(0, 0) == 1.5);
    CHECK(ds.features(1, 0) == -3.25);
    CHECK(ds.labels == std::vector<int>{1, 2, 1});
    CHECK(ds.class_names.count(1) == 1);
    CHECK(ds.class_names.count(2) == 1);
}

TEST_CASE("load_csv errors name the offending line") {
    TempDir dir("csv_err");

    SUBCASE("non-numeric feature") {
        const auto path = write_text(dir.file("bad.csv"),
                                     "f_0,f_1,label\n"
                                     "1.0,2.0,1\n"
                                     "abc,2.0,2\n");
        CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("line 3"), ParseError);
    }
    SUBCASE("ragged row") {
        const auto path = write_text(dir.file("ragged.csv"),
                                     "f_0,f_1,label\n"
                                     "1.0,2\n");
        CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("line 2"), ParseError);
    }
    SUBCASE("non-integer label") {
        const auto path = write_text(dir.file("label.csv"),
                                     "f_0,label\n"
                                     "1.0,2.5\n");
        CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("label"), ParseError);
    }
    SUBCASE("non-finite feature") {
        const auto path = write_text(dir.file("inf.csv"),
                                     "f_0,label\n"
                                     "inf,1\n");
        CHECK_THROWS_AS(load_csv(path), ParseError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_csv(dir.file("nope.csv")), Error); }
}

TEST_CASE("load_csv handles a 200-band 16-class export") {
    TempDir dir("csv_wide");
    const RawDataset blobs = make_blobs(2, 16, 200, 4.0, 1.0, 5);
    const auto path = dir.file("wide.csv");
    write_csv(path, blobs);
    const RawDataset ds = load_csv(path);
    CHECK(ds.dims() == 200);
    CHECK(ds.class_names.size() == 16);

    // The wide input reduces to a two-feature dataset.
    const auto [std_ds, part] = standardize(ds);
    const auto [reduced, t] = pca_reduce(std_ds, 2, part);
    CHECK(reduced.dims() == 2);
    CHECK(t.components.rows() == 2);
    CHECK(t.components.cols() == 200);
    CHECK(t.explained_variance(0) >= t.explained_variance(1));
}

TEST_CASE("csv round-trips values bit-identically") {
    TempDir dir("csv_rt");
    RawDataset ds;
    ds.features.resize(4, 3);
    ds.features << 0.1, -1.0 / 3.0, 1e-300,  //
        12345.678901234567, 2.220446049250313e-16, -7.1,  //
        std::nextafter(1.0, 2.0), -0.0, 3.0,  //
        1e300, 0.30000000000000004, -2.5e-7;
    ds.labels = {1, 2, 3, 4};
    for (int c = 1; c <= 4; ++c) ds.class_names[c] = std::to_string(c);

    const auto path = dir.file("rt.csv");
    write_csv(path, ds);
    const RawDataset back = load_csv(path);
    REQUIRE(back.rows() == ds.rows());
    for (Eigen::Index i = 0; i < ds.rows(); ++i)
        for (Eigen::Index j = 0; j < ds.dims(); ++j) CHECK(back.features(i, j) == ds.features(i, j));
    CHECK(back.labels == ds.labels);
}

TEST_CASE("standardize centers and scales by the sample sd") {
    RawDataset ds;
    ds.features.resize(2, 1);
    ds.features << 1.0, 3.0;
    ds.labels = {1, 1};
    ds.class_names[1] = "1";

    const auto [out, t] = standardize(ds);
    // Hand computation: mean 2, sample sd sqrt(2), so (1,3) -> -+1/sqrt(2).
    const double expected = 1.0 / std::sqrt(2.0);
    CHECK(out.features(0, 0) == doctest::Approx(-expected).epsilon(1e-12));
    CHECK(out.features(1, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(t.column_means(0) == doctest::Approx(2.0));
    CHECK(t.column_scales(0) == doctest::Approx(std::sqrt(2.0)));

    // Output column has mean 0 and sample sd 1.
    const double mean = out.features.col(0).mean();
    const double sd = std::sqrt((out.features.col(0).array() - mean).square().sum() / 1.0);
    CHECK(std::abs(mean) <= 1e-9);
    CHECK(std::abs(sd - 1.0) <= 1e-9);
}

TEST_CASE("standardize maps constant columns to zero with scale 1") {
    RawDataset ds;
    ds.features.resize(3, 2);
    ds.features << 5.0, 1.0, 5.0, 2.0, 5.0, 6.0;
    ds.labels = {1, 1, 1};
    ds.class_names[1] = "1";

    const auto [out, t] = standardize(ds);
    CHECK(out.features(0, 0) == 0.0);
    CHECK(out.features(1, 0) == 0.0);
    CHECK(out.features(2, 0) == 0.0);
    CHECK(t.column_scales(0) == 1.0);
    CHECK(t.column_means(0) == 5.0);
}

TEST_CASE("standardize is idempotent within tolerance") {
    const RawDataset blobs = make_blobs(20, 2, 3, 2.0, 1.5, 9);
    const auto [once, t1] = standardize(blobs);
    const auto [twice, t2] = standardize(once);
    CHECK((twice.features - once.features).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("standardize requires at least two rows") {
    RawDataset ds;
    ds.features.resize(1, 1);
    ds.features << 1.0;
    ds.labels = {1};
    ds.class_names[1] = "1";
    CHECK_THROWS_AS(standardize(ds), SizeError);
}

TEST_CASE("pca on axis-aligned data finds the axis") {
    RawDataset ds;
    ds.features.resize(3, 2);
    ds.features << 1.0, 0.0, 2.0, 0.0, 3.0, 0.0;
    ds.labels = {1, 1, 1};
    ds.class_names[1] = "1";

    const auto [reduced, t] = pca_reduce(ds, 2);
    CHECK(t.components(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(t.components(0, 1)) <= 1e-12);
    CHECK(t.explained_variance(0) == doctest::Approx(1.0));  // sample var of 1,2,3
    CHECK(std::abs(t.explained_variance(1)) <= 1e-12);
    CHECK(reduced.dims() == 2);
}

TEST_CASE("pca with d = D preserves pairwise distances") {
    const RawDataset blobs = make_blobs(6, 2, 4, 2.0, 1.0, 21);
    const auto [std_ds, part] = standardize(blobs);
    const auto [reduced, t] = pca_reduce(std_ds, 4, part);
    for (Eigen::Index i = 0; i < std_ds.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < std_ds.rows(); ++j) {
            const double before = (std_ds.features.row(i) - std_ds.features.row(j)).norm();
            const double after = (reduced.features.row(i) - reduced.features.row(j)).norm();
            CHECK(after == doctest::Approx(before).epsilon(1e-8));
        }
    }
}

TEST_CASE("pca components are orthonormal and eigenvalues sum to the variance") {
    const RawDataset blobs = make_blobs(15, 2, 6, 2.0, 1.2, 33);
    const auto [std_ds, part] = standardize(blobs);
    const auto [reduced, t] = pca_reduce(std_ds, 6, part);

    const Eigen::MatrixXd gram = t.components * t.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-9);

    for (Eigen::Index i = 0; i + 1 < t.explained_variance.size(); ++i)
        CHECK(t.explained_variance(i) >= t.explained_variance(i + 1));

    double total_variance = 0.0;
    for (Eigen::Index c = 0; c < std_ds.dims(); ++c) {
        const auto col = std_ds.features.col(c);
        const double mean = col.mean();
        total_variance += (col.array() - mean).square().sum() /
                          static_cast<double>(std_ds.rows() - 1);
    }
    CHECK(t.explained_variance.sum() == doctest::Approx(total_variance).epsilon(1e-6));
}

TEST_CASE("pca rejects d beyond the feature count") {
    const RawDataset blobs = make_blobs(5, 2, 3, 2.0, 1.0, 4);
    CHECK_THROWS_AS(pca_reduce(blobs, 4), DimensionError);
    CHECK_THROWS_AS(pca_reduce(blobs, 0), DimensionError);
}

TEST_CASE("PcaTransform serializes and applies consistently") {
    const RawDataset blobs = make_blobs(10, 2, 3, 2.5, 1.0, 17);
    const auto [std_ds, part] = standardize(blobs);
    const auto [reduced, t] = pca_reduce(std_ds, 2, part);

    const nlohmann::json j = t;
    const PcaTransform back = j.get<PcaTransform>();
    CHECK(back.column_means == t.column_means);
    CHECK(back.column_scales == t.column_scales);
    CHECK(back.components == t.components);
    CHECK(back.explained_variance == t.explained_variance);

    // Applying the composed transform to raw rows reproduces the projection.
    const Eigen::MatrixXd projected = apply(t, blobs.features);
    CHECK((projected - reduced.features).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("select_pair keeps rows and orients labels") {
    RawDataset ds;
    const int n1 = 46;
    const int n2 = 100;
    ds.features.resize(n1 + n2 + 3, 1);
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) ds.features(i, 0) = double(i);
    ds.labels.assign(static_cast<std::size_t>(n1 + n2 + 3), 3);  // a few rows of a third class
    for (int i = 0; i < n1; ++i) ds.labels[static_cast<std::size_t>(i)] = 1;
    for (int i = 0; i < n2; ++i) ds.labels[static_cast<std::size_t>(n1 + i)] = 2;
    ds.class_names = {{1, "1"}, {2, "2"}, {3, "3"}};

    const BinaryDataset fwd = select_pair(ds, 1, 2);
    CHECK(fwd.rows() == n1 + n2);
    CHECK(fwd.labels[0] == +1);
    CHECK(fwd.labels[static_cast<std::size_t>(n1)] == -1);
    CHECK(fwd.pair == std::pair<int, int>{1, 2});

    const BinaryDataset rev = select_pair(ds, 2, 1);
    CHECK(rev.features == fwd.features);
    for (std::size_t i = 0; i < fwd.labels.size(); ++i) CHECK(rev.labels[i] == -fwd.labels[i]);

    CHECK_THROWS_AS(select_pair(ds, 1, 9), LookupError);
    CHECK_THROWS_AS(select_pair(ds, 1, 1), LookupError);
}

TEST_CASE("split stratifies, partitions and repeats deterministically") {
    const auto ds = testutil::binary_dataset(
        {{0.0}, {1.0}, {2.0}, {3.0}, {4.0}, {5.0}, {6.0}, {7.0}, {8.0}, {9.0}},
        {+1, +1, +1, +1, +1, -1, -1, -1, -1, -1});

    const SplitResult sr = split(ds, 0.2, 7);
    CHECK(sr.train.rows() == 8);
    CHECK(sr.test.rows() == 2);
    int pos = 0;
    int neg = 0;
    for (const int y : sr.test.labels) (y > 0 ? pos : neg)++;
    CHECK(pos == 1);
    CHECK(neg == 1);

    const SplitResult again = split(ds, 0.2, 7);
    CHECK(again.train.features == sr.train.features);
    CHECK(again.test.features == sr.test.features);
    CHECK(again.train.labels == sr.train.labels);

    // Partition: the union of both sides is the original multiset of rows.
    std::multiset<double> all;
    for (Eigen::Index i = 0; i < ds.rows(); ++i) all.insert(ds.features(i, 0));
    std::multiset<double> parts;
    for (Eigen::Index i = 0; i < sr.train.rows(); ++i) parts.insert(sr.train.features(i, 0));
    for (Eigen::Index i = 0; i < sr.test.rows(); ++i) parts.insert(sr.test.features(i, 0));
    CHECK(parts == all);
}

TEST_CASE("split of four balanced rows at one half is two and two") {
    const auto ds =
        testutil::binary_dataset({{0.0}, {1.0}, {2.0}, {3.0}}, {+1, +1, -1, -1});
    const SplitResult sr = split(ds, 0.5, 11);
    CHECK(sr.train.rows() == 2);
    CHECK(sr.test.rows() == 2);
}

TEST_CASE("split validates its inputs") {
    const auto ds = testutil::binary_dataset({{0.0}, {1.0}}, {+1, -1});
    CHECK_THROWS_AS(split(ds, 0.0, 1), Error);
    CHECK_THROWS_AS(split(ds, 1.0, 1), Error);

    const auto tiny = testutil::binary_dataset({{0.0}}, {+1});
    CHECK_THROWS_AS(split(tiny, 0.5, 1), SizeError);
}

TEST_CASE("load_binary_csv requires signed unit labels") {
    TempDir dir("bincsv");
    const auto good = write_text(dir.file("good.csv"),
                                 "f_0,label\n"
                                 "1.0,1\n"
                                 "2.0,-1\n");
    const BinaryDataset ds = load_binary_csv(good);
    CHECK(ds.labels == std::vector<int>{+1, -1});

    const auto bad = write_text(dir.file("bad.csv"),
                                "f_0,label\n"
                                "1.0,2\n");
    CHECK_THROWS_AS(load_binary_csv(bad), ParseError);
}
