#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bugloc/fusion.hpp"
#include "bugloc/util.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace bugloc;
using namespace bugloc::fusion;
using testsupport::java_file;
using testsupport::make_project;

namespace {

constexpr Timestamp kDay = 86400;
constexpr Timestamp kT0 = 1577836800;

TrainingRow row_with(FeatureVector fv, double label) {
    TrainingRow r;
    r.features = fv;
    r.label = label;
    return r;
}

// labels = 1 iff stacktrace > 0.5; other features are noise
TrainingSet threshold_task(std::size_t n, std::uint64_t seed) {
    TrainingSet ts;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        FeatureVector fv;
        for (std::size_t f = 0; f < FeatureVector::kCount; ++f)
            fv[f] = static_cast<double>(rng.next_u64() % 1000) / 1000.0;
        ts.rows.push_back(row_with(fv, fv.stacktrace > 0.5 ? 1.0 : 0.0));
    }
    return ts;
}

// label = XOR of two binarized features, everything else zero; linearly
// inseparable by construction
TrainingSet xor_task(std::size_t n, std::uint64_t seed) {
    TrainingSet ts;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        FeatureVector fv;
        fv.sim_cos = static_cast<double>(rng.next_u64() % 1000) / 1000.0;
        fv.se_content = static_cast<double>(rng.next_u64() % 1000) / 1000.0;
        bool a = fv.sim_cos > 0.5, b = fv.se_content > 0.5;
        ts.rows.push_back(row_with(fv, (a != b) ? 1.0 : 0.0));
    }
    return ts;
}

corpus::ProjectData training_fixture(std::size_t n_files) {
    Snapshot snap;
    snap.label = "v1";
    snap.timestamp = kT0;
    for (std::size_t i = 0; i < n_files; ++i) {
        std::string name = "File" + std::to_string(i);
        snap.files.push_back(java_file("pkg/" + name + ".java",
                                       "package pkg;\npublic class " + name +
                                           " {\n  void run" + std::to_string(i) + "() {}\n}\n"));
    }
    std::vector<BugReport> reports;
    BugReport r;
    r.id = "T-1";
    r.project = "train";
    r.summary = "crash in File0.java and File1";
    r.description = "at pkg.File0.run0(File0.java:2)";
    r.created_at = kT0 + 10 * kDay;
    r.resolved_at = kT0 + 20 * kDay;
    r.fixed_files = {"pkg/File0.java", "pkg/File1.java"};
    reports.push_back(r);
    return make_project("train", std::move(reports), {}, {std::move(snap)});
}

}  // namespace

TEST_SUITE("fusion") {

TEST_CASE("predict averages the trees") {
    ForestModel model;
    for (double v : {0.7, 0.7, 0.7}) {
        Tree t;
        t.nodes.push_back({-1, 0.0, v, -1, -1});
        model.trees.push_back(t);
    }
    CHECK(model.predict(FeatureVector{}) == doctest::Approx(0.7));
    // deterministic across calls
    FeatureVector fv;
    fv.size = 123;
    CHECK(model.predict(fv) == model.predict(fv));
}

TEST_CASE("train rejects degenerate label sets") {
    TrainingSet all_ones;
    for (int i = 0; i < 20; ++i) {
        FeatureVector fv;
        fv.size = i;
        all_ones.rows.push_back(row_with(fv, 1.0));
    }
    TrainConfig config;
    config.tree_count = 5;
    CHECK_THROWS_AS(train_forest(all_ones, config), std::invalid_argument);
    CHECK_THROWS_AS(train_forest(TrainingSet{}, config), std::invalid_argument);
}

TEST_CASE("constant features give all-equal predictions near the label mean") {
    TrainingSet ts;
    for (int i = 0; i < 40; ++i) {
        FeatureVector fv;
        fv.size = 5.0;  // every feature constant
        ts.rows.push_back(row_with(fv, i < 10 ? 1.0 : 0.0));
    }
    TrainConfig config;
    config.tree_count = 50;
    config.seed = 3;
    auto model = train_forest(ts, config);
    FeatureVector probe;
    probe.size = 5.0;
    double p = model.predict(probe);
    // bootstrap means hover around the 0.25 label mean
    CHECK(p == doctest::Approx(0.25).epsilon(0.3));
    FeatureVector other;
    other.size = 99.0;
    CHECK(model.predict(other) == doctest::Approx(p));  // no split possible anywhere
}

TEST_CASE("threshold task: held-out accuracy at least 0.95") {
    auto train = threshold_task(200, 21);
    auto test = threshold_task(400, 22);
    TrainConfig config;
    config.tree_count = 200;
    config.seed = 7;
    auto model = train_forest(train, config);
    std::size_t correct = 0;
    for (const auto& r : test.rows) {
        double pred = model.predict(r.features) > 0.5 ? 1.0 : 0.0;
        if (pred == r.label) ++correct;
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(test.rows.size()) >= 0.95);
}

TEST_CASE("xor task: forest beats any linear model") {
    auto train = xor_task(400, 31);
    auto test = xor_task(400, 32);
    TrainConfig config;
    config.tree_count = 300;
    config.seed = 11;
    auto model = train_forest(train, config);

    std::vector<double> truth, forest_pred;
    std::vector<FeatureVector> train_x, test_x;
    std::vector<double> train_y;
    for (const auto& r : train.rows) {
        train_x.push_back(r.features);
        train_y.push_back(r.label);
    }
    for (const auto& r : test.rows) {
        test_x.push_back(r.features);
        truth.push_back(r.label);
        forest_pred.push_back(model.predict(r.features));
    }
    double forest_r2 = oracles::r_squared(truth, forest_pred);
    double linear_r2 = oracles::r_squared(truth, oracles::linear_fit_predict(train_x, train_y, test_x));
    CHECK(forest_r2 >= 0.8);
    CHECK(linear_r2 <= 0.1);
}

TEST_CASE("determinism: identical seed, identical serialized model") {
    auto ts = threshold_task(100, 5);
    TrainConfig config;
    config.tree_count = 30;
    config.seed = 99;
    std::ostringstream a, b;
    train_forest(ts, config).save(a);
    train_forest(ts, config).save(b);
    CHECK(a.str() == b.str());

    config.seed = 100;
    std::ostringstream c;
    train_forest(ts, config).save(c);
    CHECK(a.str() != c.str());
}

TEST_CASE("predictions stay within the training label range") {
    auto ts = threshold_task(150, 41);
    TrainConfig config;
    config.tree_count = 60;
    config.seed = 13;
    auto model = train_forest(ts, config);
    Rng rng(55);
    for (int i = 0; i < 300; ++i) {
        FeatureVector fv;
        for (std::size_t f = 0; f < FeatureVector::kCount; ++f)
            fv[f] = static_cast<double>(rng.next_u64() % 2000) / 500.0;
        double p = model.predict(fv);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("serialization round-trip preserves predictions byte-exactly") {
    auto ts = threshold_task(120, 61);
    TrainConfig config;
    config.tree_count = 25;
    config.seed = 17;
    auto model = train_forest(ts, config);
    std::ostringstream dump;
    model.save(dump);
    std::istringstream in(dump.str());
    auto loaded = ForestModel::load(in);
    CHECK(loaded.seed == model.seed);
    CHECK(loaded.feature_names == model.feature_names);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        FeatureVector fv;
        for (std::size_t f = 0; f < FeatureVector::kCount; ++f)
            fv[f] = static_cast<double>(rng.next_u64() % 1000) / 1000.0;
        CHECK(model.predict(fv) == loaded.predict(fv));
    }
    std::ostringstream dump2;
    loaded.save(dump2);
    CHECK(dump.str() == dump2.str());
}

TEST_CASE("build_training_set: sampling arithmetic, clamping, determinism") {
    auto project = training_fixture(40);
    scoring::ScoringConfig sc;
    auto ctx = scoring::ProjectContext::build(project, sc);
    std::vector<scoring::ProjectContext> contexts;
    contexts.push_back(std::move(ctx));

    TrainConfig config;
    config.negatives_per_positive = 5;
    config.seed = 77;
    corpus::Diagnostics diags;
    auto ts = build_training_set(contexts, sc, config, diags);
    // 2 positives (both fixed files present) + 2*5 negatives
    std::size_t pos = 0, neg = 0;
    for (const auto& r : ts.rows) (r.label > 0.5 ? pos : neg)++;
    CHECK(pos == 2);
    CHECK(neg == 10);
    // provenance
    for (const auto& r : ts.rows) {
        CHECK(r.report_id == "T-1");
        CHECK(r.project == "train");
        CHECK(!r.path.empty());
    }
    // negatives never overlap the fix set
    for (const auto& r : ts.rows)
        if (r.label < 0.5) CHECK((r.path != "pkg/File0.java" && r.path != "pkg/File1.java"));

    // clamping: tiny snapshot offers fewer negatives than requested
    auto tiny = training_fixture(3);  // 2 fixed + 1 other file
    auto tiny_ctx = scoring::ProjectContext::build(tiny, sc);
    std::vector<scoring::ProjectContext> tiny_contexts;
    tiny_contexts.push_back(std::move(tiny_ctx));
    corpus::Diagnostics d2;
    auto tiny_ts = build_training_set(tiny_contexts, sc, config, d2);
    std::size_t tiny_neg = 0;
    for (const auto& r : tiny_ts.rows)
        if (r.label < 0.5) ++tiny_neg;
    CHECK(tiny_neg == 1);  // all non-fixed files used

    // determinism: same seed, identical rows
    corpus::Diagnostics d3;
    auto again = build_training_set(contexts, sc, config, d3);
    REQUIRE(again.rows.size() == ts.rows.size());
    for (std::size_t i = 0; i < ts.rows.size(); ++i) {
        CHECK(again.rows[i].path == ts.rows[i].path);
        CHECK(again.rows[i].label == ts.rows[i].label);
    }
}

TEST_CASE("rank_files: full coverage, tie-break by path, component scores attached") {
    auto project = training_fixture(6);
    scoring::ScoringConfig sc;
    auto ctx = scoring::ProjectContext::build(project, sc);
    const auto& sidx = ctx.snapshot_index(project.snapshots[0], sc);
    const BugReport& report = project.reports[0];
    auto fctx = scoring::build_feature_context(report, sidx, ctx, sc);

    // constant model: every file ties, order must be lexicographic
    ForestModel constant;
    Tree stump;
    stump.nodes.push_back({-1, 0.0, 0.5, -1, -1});
    constant.trees.push_back(stump);
    auto ranked = rank_files(constant, fctx);
    REQUIRE(ranked.entries.size() == 6);
    for (std::size_t i = 1; i < ranked.entries.size(); ++i)
        CHECK(ranked.entries[i - 1].path < ranked.entries[i].path);
    for (const auto& e : ranked.entries) CHECK(e.score == 0.5);

    // single-file snapshot: that file ranks first
    auto single = training_fixture(1);
    auto single_ctx = scoring::ProjectContext::build(single, sc);
    const auto& single_sidx = single_ctx.snapshot_index(single.snapshots[0], sc);
    auto single_fctx = scoring::build_feature_context(single.reports[0], single_sidx, single_ctx, sc);
    auto single_ranked = rank_files(constant, single_fctx);
    REQUIRE(single_ranked.entries.size() == 1);
    CHECK(single_ranked.entries[0].path == "pkg/File0.java");
}

TEST_CASE("ranking is invariant under strictly increasing score transforms") {
    auto ts = threshold_task(150, 91);
    TrainConfig config;
    config.tree_count = 40;
    config.seed = 19;
    auto model = train_forest(ts, config);

    auto project = training_fixture(12);
    scoring::ScoringConfig sc;
    auto ctx = scoring::ProjectContext::build(project, sc);
    const auto& sidx = ctx.snapshot_index(project.snapshots[0], sc);
    auto fctx = scoring::build_feature_context(project.reports[0], sidx, ctx, sc);

    auto ranked = rank_files(model, fctx);
    // argsort under exp(score): identical order (ties transform to ties)
    auto features = scoring::compute_all_features(fctx);
    std::vector<std::pair<std::string, double>> transformed;
    for (std::size_t i = 0; i < features.size(); ++i)
        transformed.emplace_back(sidx.snapshot->files[i].path, std::exp(model.predict(features[i])));
    std::sort(transformed.begin(), transformed.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    REQUIRE(transformed.size() == ranked.entries.size());
    for (std::size_t i = 0; i < transformed.size(); ++i)
        CHECK(transformed[i].first == ranked.entries[i].path);
}

TEST_CASE("permutation importance: noise near zero, signal dominates") {
    auto ts = threshold_task(300, 101);
    TrainConfig config;
    config.tree_count = 150;
    config.seed = 23;
    auto model = train_forest(ts, config);
    auto validation = threshold_task(300, 102);
    auto importance = permutation_importance(model, validation.rows, 424242);

    double signal = importance.at("stacktrace");
    for (const auto& [name, value] : importance) {
        if (name == std::string("stacktrace")) continue;
        CHECK(std::fabs(value) <= 0.01);  // pure noise features
        CHECK(value < signal);
    }
    CHECK(signal > 0.05);
}

TEST_CASE("split frequency sums to one and concentrates on the signal") {
    auto ts = threshold_task(300, 111);
    TrainConfig config;
    config.tree_count = 100;
    config.seed = 29;
    auto model = train_forest(ts, config);
    auto freq = split_frequency(model);
    double total = 0;
    for (const auto& [name, value] : freq) total += value;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    for (const auto& [name, value] : freq)
        if (name != std::string("stacktrace")) CHECK(freq.at("stacktrace") >= value);
}

}  // TEST_SUITE
