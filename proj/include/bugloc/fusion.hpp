#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bugloc/scoring.hpp"
#include "bugloc/types.hpp"

namespace bugloc::fusion {

/// Portable deterministic generator (splitmix64 stream); keeps bootstraps,
/// sampling and shuffles identical across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [0, n); n must be > 0.
    std::size_t next_below(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[next_below(i)]);
    }

private:
    std::uint64_t state_;
};

struct TrainingRow {
    FeatureVector features;
    double label = 0;  // 1 iff the file is in the report's fix set
    std::string report_id;
    std::string project;
    std::string path;
};

struct TrainingSet {
    std::vector<TrainingRow> rows;
};

struct TrainConfig {
    std::size_t tree_count = 1000;
    std::uint64_t seed = 42;
    std::size_t negatives_per_positive = 50;
    std::size_t min_samples_leaf = 5;
    std::size_t features_per_split = 5;  // ceil(13 / 3)
};

/// One regression tree stored as a flat preorder node array.
struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0;       // go left when x[feature] <= threshold
    double value = 0;           // leaf prediction (mean label)
    std::int32_t left = -1;
    std::int32_t right = -1;
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict(const FeatureVector& fv) const;
};

struct ForestModel {
    std::vector<Tree> trees;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_names;

    double predict(const FeatureVector& fv) const;

    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static ForestModel load(std::istream& in);
    static ForestModel load_file(const std::string& path);
};

/// One positive row per (report, fixed file present in the release snapshot),
/// plus negatives_per_positive uniform negatives per positive, sampled without
/// replacement from the snapshot's non-fixed files. Reports without a
/// detectable fixed file contribute no rows (diagnosed).
TrainingSet build_training_set(const std::vector<scoring::ProjectContext>& projects,
                               const scoring::ScoringConfig& scoring_config,
                               const TrainConfig& config, corpus::Diagnostics& diags);

/// Rows of a single project; sampling seeds depend only on (seed, project,
/// report id), so pooled sets are identical however projects are grouped.
TrainingSet build_training_set_for(const scoring::ProjectContext& project,
                                   const scoring::ScoringConfig& scoring_config,
                                   const TrainConfig& config, corpus::Diagnostics& diags);

/// Random-forest regression: per-tree bootstrap, per-node random feature
/// subset, best split by variance reduction, leaves at min_samples_leaf or
/// zero variance. Deterministic given the seed. Throws on a single-label set.
ForestModel train_forest(const TrainingSet& ts, const TrainConfig& config);

/// Scores every snapshot file and sorts by descending prediction, ties broken
/// by ascending path; entries carry the raw component scores.
RankedList rank_files(const ForestModel& model, const scoring::FeatureContext& ctx);

/// Mean MSE increase over `repetitions` seeded shuffles of one feature column.
std::map<std::string, double> permutation_importance(const ForestModel& model,
                                                     const std::vector<TrainingRow>& validation,
                                                     std::uint64_t seed,
                                                     std::size_t repetitions = 5);

/// Fraction of internal nodes splitting on each feature; sums to 1 unless the
/// forest is all leaves.
std::map<std::string, double> split_frequency(const ForestModel& model);

}  // namespace bugloc::fusion
