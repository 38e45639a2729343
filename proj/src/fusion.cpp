#include "bugloc/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bugloc/util.hpp"

namespace bugloc::fusion {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct TreeBuilder {
    const std::vector<TrainingRow>& rows;
    const TrainConfig& config;
    Rng rng;
    std::vector<TreeNode> nodes;

    TreeBuilder(const std::vector<TrainingRow>& rows_, const TrainConfig& config_, std::uint64_t seed)
        : rows(rows_), config(config_), rng(seed) {}

    // indices: bootstrap sample indices owned by this node
    std::int32_t build(std::vector<std::size_t>& indices) {
        double sum = 0, sum_sq = 0;
        for (std::size_t i : indices) {
            double y = rows[i].label;
            sum += y;
            sum_sq += y * y;
        }
        const double n = static_cast<double>(indices.size());
        const double mean = sum / n;
        const double sse = sum_sq - sum * sum / n;

        auto make_leaf = [&]() {
            nodes.push_back({-1, 0.0, mean, -1, -1});
            return static_cast<std::int32_t>(nodes.size() - 1);
        };
        if (indices.size() < 2 * config.min_samples_leaf || sse <= 1e-12) return make_leaf();

        // random feature order; the first `m` are the candidate subset, and
        // the search keeps drawing past it only while no valid split exists
        // (all-constant candidates would otherwise end the branch early)
        std::size_t p = FeatureVector::kCount;
        std::size_t m = std::min(config.features_per_split, p);
        std::vector<std::size_t> features(p);
        std::iota(features.begin(), features.end(), 0);
        for (std::size_t i = 0; i + 1 < p; ++i)
            std::swap(features[i], features[i + rng.next_below(p - i)]);

        int best_feature = -1;
        double best_threshold = 0;
        double best_child_sse = sse;
        std::vector<std::size_t> sorted;
        for (std::size_t fi = 0; fi < features.size(); ++fi) {
            if (fi >= m && best_feature >= 0) break;
            std::size_t f = features[fi];
            sorted = indices;
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                double va = rows[a].features[f], vb = rows[b].features[f];
                if (va != vb) return va < vb;
                return a < b;
            });
            // prefix scan: consider a cut after position i (left = [0..i])
            double left_sum = 0, left_sq = 0;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                double y = rows[sorted[i]].label;
                left_sum += y;
                left_sq += y * y;
                double v = rows[sorted[i]].features[f];
                double v_next = rows[sorted[i + 1]].features[f];
                if (v == v_next) continue;  // no cut between equal values
                std::size_t left_n = i + 1;
                std::size_t right_n = sorted.size() - left_n;
                if (left_n < config.min_samples_leaf || right_n < config.min_samples_leaf) continue;
                double right_sum = sum - left_sum;
                double right_sq = sum_sq - left_sq;
                double child_sse = (left_sq - left_sum * left_sum / static_cast<double>(left_n)) +
                                   (right_sq - right_sum * right_sum / static_cast<double>(right_n));
                if (child_sse < best_child_sse - 1e-15) {
                    best_child_sse = child_sse;
                    best_feature = static_cast<int>(f);
                    best_threshold = v + (v_next - v) / 2.0;
                }
            }
        }
        if (best_feature < 0) return make_leaf();

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : indices) {
            if (rows[i].features[static_cast<std::size_t>(best_feature)] <= best_threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        if (left_idx.size() < config.min_samples_leaf || right_idx.size() < config.min_samples_leaf)
            return make_leaf();

        std::int32_t self = static_cast<std::int32_t>(nodes.size());
        nodes.push_back({static_cast<std::int32_t>(best_feature), best_threshold, 0.0, -1, -1});
        indices.clear();
        indices.shrink_to_fit();
        std::int32_t left = build(left_idx);
        std::int32_t right = build(right_idx);
        nodes[self].left = left;
        nodes[self].right = right;
        return self;
    }
};

}  // namespace

double Tree::predict(const FeatureVector& fv) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const TreeNode& node = nodes[i];
        i = static_cast<std::size_t>(fv[static_cast<std::size_t>(node.feature)] <= node.threshold
                                         ? node.left
                                         : node.right);
    }
    return nodes[i].value;
}

double ForestModel::predict(const FeatureVector& fv) const {
    double sum = 0;
    for (const auto& t : trees) sum += t.predict(fv);
    return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
}

TrainingSet build_training_set_for(const scoring::ProjectContext& project,
                                   const scoring::ScoringConfig& scoring_config,
                                   const TrainConfig& config, corpus::Diagnostics& diags) {
    TrainingSet ts;
    {
        const corpus::ProjectData& data = *project.project;
        if (data.snapshots.empty()) {
            diags.add("project " + data.name + ": no snapshots, skipped for training");
            return ts;
        }
        for (const auto& report : data.reports) {
            if (report.fixed_files.empty()) continue;
            const Snapshot& snap = corpus::resolve_release_snapshot(report, data.snapshots);
            const scoring::SnapshotIndex& sidx = project.snapshot_index(snap, scoring_config);

            std::vector<std::string> positives;
            std::unordered_set<std::string> fixed(report.fixed_files.begin(),
                                                  report.fixed_files.end());
            for (const auto& f : report.fixed_files)
                if (sidx.by_path.count(f)) positives.push_back(f);
            if (positives.empty()) {
                diags.add("report " + report.id + ": no fixed file present in snapshot " +
                          snap.label + ", contributes no rows");
                continue;
            }

            // negative pool: non-fixed files, in deterministic (sorted) order
            std::vector<std::string> pool;
            pool.reserve(snap.files.size());
            for (const auto& f : snap.files)
                if (!fixed.count(f.path)) pool.push_back(f.path);
            std::sort(pool.begin(), pool.end());
            std::size_t want = positives.size() * config.negatives_per_positive;
            Rng rng(derive_seed(config.seed, "negatives", fnv1a(data.name + "/" + report.id)));
            std::size_t take = std::min(want, pool.size());
            for (std::size_t i = 0; i < take; ++i)
                std::swap(pool[i], pool[i + rng.next_below(pool.size() - i)]);
            pool.resize(take);

            auto ctx = scoring::build_feature_context(report, sidx, project, scoring_config);
            auto add_row = [&](const std::string& path, double label) {
                TrainingRow row;
                row.features = scoring::compute_features(ctx, sidx.by_path.at(path));
                row.label = label;
                row.report_id = report.id;
                row.project = data.name;
                row.path = path;
                ts.rows.push_back(std::move(row));
            };
            for (const auto& p : positives) add_row(p, 1.0);
            for (const auto& p : pool) add_row(p, 0.0);
        }
    }
    return ts;
}

TrainingSet build_training_set(const std::vector<scoring::ProjectContext>& projects,
                               const scoring::ScoringConfig& scoring_config,
                               const TrainConfig& config, corpus::Diagnostics& diags) {
    TrainingSet ts;
    for (const auto& project : projects) {
        auto part = build_training_set_for(project, scoring_config, config, diags);
        ts.rows.insert(ts.rows.end(), std::make_move_iterator(part.rows.begin()),
                       std::make_move_iterator(part.rows.end()));
    }
    return ts;
}

ForestModel train_forest(const TrainingSet& ts, const TrainConfig& config) {
    if (ts.rows.empty()) throw std::invalid_argument("empty training set");
    bool has_pos = false, has_neg = false;
    for (const auto& r : ts.rows) {
        if (r.label > 0.5) has_pos = true;
        else has_neg = true;
    }
    if (!has_pos || !has_neg) throw std::invalid_argument("degenerate labels: training set needs both classes");

    ForestModel model;
    model.seed = config.seed;
    model.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
    model.trees.resize(config.tree_count);

    const std::size_t n = ts.rows.size();
    parallel_for(config.tree_count, [&](std::size_t t) {
        Rng rng(derive_seed(config.seed, "tree", t));
        std::vector<std::size_t> bootstrap(n);
        for (std::size_t i = 0; i < n; ++i) bootstrap[i] = rng.next_below(n);
        TreeBuilder builder(ts.rows, config, rng.next_u64());
        builder.build(bootstrap);
        model.trees[t].nodes = std::move(builder.nodes);
    });
    return model;
}

RankedList rank_files(const ForestModel& model, const scoring::FeatureContext& ctx) {
    RankedList out;
    out.report_id = ctx.report->id;
    auto features = scoring::compute_all_features(ctx);
    out.entries.resize(features.size());
    parallel_for(features.size(), [&](std::size_t i) {
        out.entries[i].path = ctx.snap->snapshot->files[i].path;
        out.entries[i].components = features[i];
        out.entries[i].score = model.predict(features[i]);
    });
    std::sort(out.entries.begin(), out.entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.path < b.path;
    });
    return out;
}

std::map<std::string, double> permutation_importance(const ForestModel& model,
                                                     const std::vector<TrainingRow>& validation,
                                                     std::uint64_t seed, std::size_t repetitions) {
    if (validation.empty()) throw std::invalid_argument("empty validation set");
    const std::size_t n = validation.size();
    auto mse_with_column = [&](std::size_t feature, const std::vector<double>* column) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            FeatureVector fv = validation[i].features;
            if (column) fv[feature] = (*column)[i];
            double err = model.predict(fv) - validation[i].label;
            total += err * err;
        }
        return total / static_cast<double>(n);
    };
    const double baseline = mse_with_column(0, nullptr);

    std::map<std::string, double> importance;
    for (std::size_t f = 0; f < FeatureVector::kCount; ++f) {
        std::vector<double> column(n);
        for (std::size_t i = 0; i < n; ++i) column[i] = validation[i].features[f];
        double delta_sum = 0;
        for (std::size_t rep = 0; rep < repetitions; ++rep) {
            Rng rng(derive_seed(seed, "permutation", f * repetitions + rep));
            std::vector<double> shuffled = column;
            rng.shuffle(shuffled);
            delta_sum += mse_with_column(f, &shuffled) - baseline;
        }
        importance[kFeatureNames[f]] = delta_sum / static_cast<double>(repetitions);
    }
    return importance;
}

std::map<std::string, double> split_frequency(const ForestModel& model) {
    std::vector<std::size_t> counts(FeatureVector::kCount, 0);
    std::size_t total = 0;
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes) {
            if (node.feature >= 0) {
                ++counts[static_cast<std::size_t>(node.feature)];
                ++total;
            }
        }
    }
    std::map<std::string, double> freq;
    for (std::size_t f = 0; f < FeatureVector::kCount; ++f)
        freq[kFeatureNames[f]] =
            total == 0 ? 0.0 : static_cast<double>(counts[f]) / static_cast<double>(total);
    return freq;
}

// ---- serialization ----------------------------------------------------------

namespace {

void write_node(std::ostream& out, const Tree& tree, std::int32_t idx) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
    if (node.feature < 0) {
        out << "l " << format_double(node.value) << '\n';
        return;
    }
    out << "n " << node.feature << ' ' << format_double(node.threshold) << '\n';
    write_node(out, tree, node.left);
    write_node(out, tree, node.right);
}

std::int32_t read_node(std::istream& in, Tree& tree) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("bad model file: truncated tree");
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "l") {
        TreeNode node;
        node.feature = -1;
        ls >> node.value;
        tree.nodes.push_back(node);
        return static_cast<std::int32_t>(tree.nodes.size() - 1);
    }
    if (tag != "n") throw std::runtime_error("bad model file: unexpected node tag " + tag);
    TreeNode node;
    std::int32_t feature;
    ls >> feature >> node.threshold;
    node.feature = feature;
    std::int32_t self = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(node);
    std::int32_t left = read_node(in, tree);
    std::int32_t right = read_node(in, tree);
    tree.nodes[static_cast<std::size_t>(self)].left = left;
    tree.nodes[static_cast<std::size_t>(self)].right = right;
    return self;
}

}  // namespace

void ForestModel::save(std::ostream& out) const {
    out << "buglocforest 1\n";
    out << "seed " << seed << '\n';
    out << "features";
    for (const auto& f : feature_names) out << ' ' << f;
    out << '\n';
    out << "trees " << trees.size() << '\n';
    for (std::size_t t = 0; t < trees.size(); ++t) {
        out << "tree " << t << '\n';
        write_node(out, trees[t], 0);
    }
    out << "end\n";
}

void ForestModel::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    save(out);
}

ForestModel ForestModel::load(std::istream& in) {
    ForestModel model;
    std::string line, tag;
    if (!std::getline(in, line) || line != "buglocforest 1")
        throw std::runtime_error("bad model file: missing or unsupported header");
    if (!std::getline(in, line)) throw std::runtime_error("bad model file: missing seed");
    {
        std::istringstream ls(line);
        ls >> tag >> model.seed;
        if (tag != "seed") throw std::runtime_error("bad model file: seed line");
    }
    if (!std::getline(in, line)) throw std::runtime_error("bad model file: missing features");
    {
        std::istringstream ls(line);
        ls >> tag;
        if (tag != "features") throw std::runtime_error("bad model file: features line");
        std::string f;
        while (ls >> f) model.feature_names.push_back(f);
    }
    std::size_t n_trees = 0;
    if (!std::getline(in, line)) throw std::runtime_error("bad model file: missing tree count");
    {
        std::istringstream ls(line);
        ls >> tag >> n_trees;
        if (tag != "trees") throw std::runtime_error("bad model file: trees line");
    }
    model.trees.resize(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        if (!std::getline(in, line)) throw std::runtime_error("bad model file: truncated");
        read_node(in, model.trees[t]);
    }
    return model;
}

ForestModel ForestModel::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return ForestModel::load(in);
}

}  // namespace bugloc::fusion
