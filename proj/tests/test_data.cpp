#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "somkit/clustering.hpp"
#include "somkit/data.hpp"
#include "somkit/error.hpp"

using namespace somkit;

namespace {

std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(SOMKIT_FIXTURE_DIR) / name; }

double choose2(double n) { return n * (n - 1) / 2; }

double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        ra[a[i]] += 1;
        rb[b[i]] += 1;
    }
    double index = 0, sa = 0, sb = 0;
    for (const auto& [key, n] : joint) index += choose2(n);
    for (const auto& [key, n] : ra) sa += choose2(n);
    for (const auto& [key, n] : rb) sb += choose2(n);
    const double expected = sa * sb / choose2(static_cast<double>(a.size()));
    return (index - expected) / ((sa + sb) / 2 - expected);
}

BlobSpec spec(std::size_t n, std::size_t k, std::uint64_t seed) {
    BlobSpec s;
    s.n_samples = n;
    s.n_features = k;
    s.seed = seed;
    return s;
}

}  // namespace

TEST(Blobs, DeterministicAndLabelled) {
    const Dataset a = make_blobs(spec(100, 3, 4)), b = make_blobs(spec(100, 3, 4)), c = make_blobs(spec(100, 3, 5));
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_NE(a.features, c.features);
    ASSERT_TRUE(a.labels.has_value());
    EXPECT_EQ(a.labels->size(), 100u);
    for (int l : *a.labels) {
        EXPECT_GE(l, 0);
        EXPECT_LT(l, 3);
    }
    EXPECT_EQ(a.feature_names, (std::vector<std::string>{"x0", "x1", "x2"}));
    EXPECT_NO_THROW(a.validate());
}

TEST(Blobs, ZeroSpreadPutsSamplesOnCenters) {
    BlobSpec s = spec(60, 2, 1);
    s.cluster_std = 0.0;
    const Dataset d = make_blobs(s);
    std::map<int, std::pair<double, double>> centre;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto [it, fresh] = centre.emplace((*d.labels)[i], std::pair{d.features(i, 0), d.features(i, 1)});
        EXPECT_EQ(it->second.first, d.features(i, 0));
        EXPECT_EQ(it->second.second, d.features(i, 1));
        EXPECT_GE(d.features(i, 0), -10.0);
        EXPECT_LE(d.features(i, 0), 10.0);
    }
}

TEST(Blobs, CentersAreChosenUniformly) {
    const Dataset d = make_blobs(spec(3000, 2, 7));
    std::vector<double> counts(3, 0.0);
    for (int l : *d.labels) counts[l] += 1;
    double chi2 = 0;
    for (double c : counts) chi2 += (c - 1000) * (c - 1000) / 1000;
    // 2 degrees of freedom; p = 0.001 at 13.8.
    EXPECT_LT(chi2, 13.8);
}

TEST(Blobs, KMeansRecoversWellSeparatedGeneratorLabels) {
    // Centres are uniform in the box, so some draws overlap; only draws whose
    // centres sit at least 6 standard deviations apart are checked.
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Dataset d = make_blobs(spec(600, 2, seed));
        std::map<int, std::array<double, 3>> acc;
        for (std::size_t i = 0; i < d.size(); ++i) {
            auto& a = acc[(*d.labels)[i]];
            a[0] += d.features(i, 0);
            a[1] += d.features(i, 1);
            a[2] += 1;
        }
        double min_sep = INFINITY;
        for (const auto& [la, a] : acc) {
            for (const auto& [lb, b] : acc) {
                if (la < lb) min_sep = std::min(min_sep, std::hypot(a[0] / a[2] - b[0] / b[2], a[1] / a[2] - b[1] / b[2]));
            }
        }
        if (min_sep < 6.0) continue;
        ++checked;
        const ClusterResult r = kmeans(d.features, 3, seed);
        EXPECT_GE(adjusted_rand(r.assignment, *d.labels), 0.9) << "seed " << seed;
    }
    EXPECT_GE(checked, 5);
}

TEST(Blobs, RejectsBadSpecs) {
    EXPECT_THROW(make_blobs(spec(0, 2, 0)), ParameterError);
    BlobSpec s = spec(10, 2, 0);
    s.box_min = s.box_max = 1.0;
    EXPECT_THROW(make_blobs(s), ParameterError);
    s = spec(10, 2, 0);
    s.cluster_std = -1;
    EXPECT_THROW(make_blobs(s), ParameterError);
}

TEST(Csv, ThreeRowFixture) {
    const Dataset d = load_csv(fixture("three_rows.csv"), {"y", "cls"});
    EXPECT_EQ(d.features, Matrix(3, 2, std::vector<double>{1.5, -2, 0, 3.25, -7e-3, 4}));
    EXPECT_EQ(*d.target, (std::vector<double>{10, 11.5, 12}));
    EXPECT_EQ(*d.labels, (std::vector<int>{0, 2, 1}));
    EXPECT_EQ(d.feature_names, (std::vector<std::string>{"a", "b"}));
    const Dataset all = load_csv(fixture("three_rows.csv"));
    EXPECT_EQ(all.dim(), 4u);
    EXPECT_FALSE(all.target.has_value());
}

TEST(Csv, ErrorsCiteRowAndColumn) {
    try {
        parse_csv("a,b,c,d\n1,2,3,4\n5,6,7,abc\n");
        FAIL() << "expected an input error";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("row 2, column 4"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_csv("a,b\n1,2\n3\n"), InputError);
    EXPECT_THROW(parse_csv(""), InputError);
    EXPECT_THROW(parse_csv("a,b\n1,2\n", {"zz", std::nullopt}), InputError);
    EXPECT_THROW(parse_csv("a,l\n1,2.5\n", {std::nullopt, "l"}), InputError);
    EXPECT_THROW(parse_csv("a\nnan\n"), InputError);
    EXPECT_THROW(load_csv("/nonexistent/file.csv"), InputError);
}

TEST(Csv, LineEndingsDoNotMatter) {
    const std::string lf = "a,b,t\n1,2,3\n4.5,-6,7\n";
    std::string crlf;
    for (char c : lf) crlf += c == '\n' ? std::string("\r\n") : std::string(1, c);
    const Dataset x = parse_csv(lf, {"t", std::nullopt}), y = parse_csv(crlf, {"t", std::nullopt});
    EXPECT_EQ(x.features, y.features);
    EXPECT_EQ(x.target, y.target);
    EXPECT_EQ(x.feature_names, y.feature_names);
}

TEST(Csv, SaveLoadRoundTripIsExact) {
    Dataset d = make_blobs(spec(40, 3, 2));
    d.target = std::vector<double>(40);
    for (std::size_t i = 0; i < 40; ++i) (*d.target)[i] = std::sqrt(static_cast<double>(i)) / 3.0;
    const auto path = std::filesystem::path(::testing::TempDir()) / "roundtrip.csv";
    save_csv(d, path, "y", "cls");
    const Dataset back = load_csv(path, {"y", "cls"});
    EXPECT_EQ(back.features, d.features);
    EXPECT_EQ(back.target, d.target);
    EXPECT_EQ(back.labels, d.labels);
    EXPECT_EQ(back.feature_names, d.feature_names);
}

TEST(Scaling, StandardizeMomentsAndInverse) {
    const Dataset d = make_blobs(spec(200, 4, 3));
    const auto [z, s] = standardize(d);
    for (std::size_t l = 0; l < 4; ++l) {
        double m = 0, v = 0;
        for (std::size_t i = 0; i < 200; ++i) m += z.features(i, l) / 200;
        for (std::size_t i = 0; i < 200; ++i) v += (z.features(i, l) - m) * (z.features(i, l) - m) / 200;
        EXPECT_NEAR(m, 0.0, 1e-9);
        EXPECT_NEAR(std::sqrt(v), 1.0, 1e-9);
    }
    const Dataset back = s.inverse_transform(z);
    for (std::size_t i = 0; i < d.features.data().size(); ++i) {
        EXPECT_NEAR(back.features.data()[i], d.features.data()[i], 1e-10);
    }
}

TEST(Scaling, ConstantColumnMapsToZero) {
    Dataset d;
    d.features = Matrix(3, 2, std::vector<double>{1, 5, 2, 5, 3, 5});
    const auto [z, s] = standardize(d);
    EXPECT_EQ(s.constant, (std::vector<bool>{false, true}));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(z.features(i, 1), 0.0);
    EXPECT_EQ(s.inverse_transform(z).features(1, 1), 5.0);
}

TEST(Scaling, SaveLoadRoundTrip) {
    const auto [z, s] = standardize(make_blobs(spec(30, 3, 1)));
    const auto path = std::filesystem::path(::testing::TempDir()) / "scaler.csv";
    s.save(path);
    const Scaler back = Scaler::load(path);
    EXPECT_EQ(back.mean, s.mean);
    EXPECT_EQ(back.stddev, s.stddev);
    EXPECT_EQ(back.constant, s.constant);
    Dataset wrong;
    wrong.features = Matrix(2, 2);
    EXPECT_THROW(s.transform(wrong), ShapeError);
}

TEST(Split, SizesCoverAndDeterminism) {
    const Dataset d = make_blobs(spec(240, 2, 0));
    const Split a = split(d, 0.2, 9), b = split(d, 0.2, 9), c = split(d, 0.2, 10);
    EXPECT_EQ(a.train.size(), 192u);
    EXPECT_EQ(a.test.size(), 48u);
    std::set<std::size_t> all(a.train_indices.begin(), a.train_indices.end());
    for (std::size_t i : a.test_indices) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), 240u);
    EXPECT_EQ(a.test_indices, b.test_indices);
    EXPECT_NE(a.test_indices, c.test_indices);
    for (std::size_t r = 0; r < a.test.size(); ++r) EXPECT_EQ(a.test.features(r, 0), d.features(a.test_indices[r], 0));
    EXPECT_EQ(split(make_blobs(spec(10, 2, 0)), 0.25, 0).test.size(), 3u);
}

TEST(Split, RejectsBadFractions) {
    const Dataset d = make_blobs(spec(10, 2, 0));
    EXPECT_THROW(split(d, 0.0, 0), ParameterError);
    EXPECT_THROW(split(d, 1.0, 0), ParameterError);
    EXPECT_THROW(split(make_blobs(spec(1, 2, 0)), 0.5, 0), InputError);
}

TEST(DatasetTest, ValidateAndSubset) {
    Dataset d = make_blobs(spec(5, 2, 0));
    d.target = std::vector<double>{1, 2, 3};
    EXPECT_THROW(d.validate(), ShapeError);
    d.target.reset();
    d.features(2, 1) = INFINITY;
    EXPECT_THROW(d.validate(), InputError);
    EXPECT_THROW(d.subset({7}), BoundsError);
}

TEST(DemoData, ShippedCsvsLoad) {
    const Dataset wine = load_csv(std::filesystem::path(SOMKIT_DATA_DIR) / "wine.csv", {std::nullopt, "class"});
    EXPECT_EQ(wine.size(), 178u);
    EXPECT_EQ(wine.dim(), 13u);
    const Dataset diabetes =
        load_csv(std::filesystem::path(SOMKIT_DATA_DIR) / "diabetes.csv", {"progression", std::nullopt});
    EXPECT_EQ(diabetes.size(), 442u);
    EXPECT_EQ(diabetes.dim(), 10u);
}
