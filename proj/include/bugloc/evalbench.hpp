#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "bugloc/corpus.hpp"
#include "bugloc/fusion.hpp"
#include "bugloc/scoring.hpp"

namespace bugloc::evalbench {

/// AP with the denominator |relevant ∩ ranked|: files absent from the ranking
/// can only lower it through the whole-query zero rule. Throws on an empty
/// relevant set (such queries are excluded upstream with a diagnostic).
double average_precision(const std::vector<std::string>& ranked,
                         const std::unordered_set<std::string>& relevant);

/// 1/rank of the first relevant entry; 0 when none is ranked.
double reciprocal_rank(const std::vector<std::string>& ranked,
                       const std::unordered_set<std::string>& relevant);

double mean_average_precision(const std::vector<double>& per_query_ap);
double mean_reciprocal_rank(const std::vector<double>& per_query_rr);

/// Cohen's d with the pooled sample standard deviation; returns (d, s).
/// Requires both samples of size >= 2; throws on zero pooled deviation.
std::pair<double, double> effect_size(const std::vector<double>& a, const std::vector<double>& b);

struct QueryResult {
    std::string report_id;
    std::string project;
    MatchStrategy strategy = MatchStrategy::kRelease;
    double ap = 0;
    double rr = 0;
    std::size_t n_snapshots = 0;  // matched snapshots (time-aware: averaged over)
    bool detectable = true;
    bool release_fallback = false;  // no release preceded the report
};

struct ProjectMetrics {
    double map = 0;
    double mrr = 0;
    std::size_t n_queries = 0;
};

/// Which projects supplied how many training rows for one trained model;
/// phase 1 has one fold per held-out project.
struct FoldInfo {
    std::string held_out;  // empty for the single-model phases
    std::map<std::string, std::size_t> training_rows_by_project;
};

struct EvalResult {
    MatchStrategy strategy = MatchStrategy::kRelease;
    std::map<std::string, ProjectMetrics> per_project;
    double mean_map = 0;  // macro average over projects
    double mean_mrr = 0;
    corpus::DetectabilityStats detectability;
    std::vector<QueryResult> queries;
    std::vector<FoldInfo> folds;
    std::vector<std::string> diagnostics;
};

struct BenchConfig {
    scoring::ScoringConfig scoring;
    fusion::TrainConfig train;
    /// Drop undetectable queries instead of scoring them 0 (sensitivity mode).
    bool exclude_undetectable = false;
};

/// Ranks every report of the project that has ground truth, using the given
/// model, and aggregates AP/RR per the strategy (time-aware queries average
/// the per-version scores). Exposed for fixtures and the CLI.
void evaluate_project(const fusion::ForestModel& model, const scoring::ProjectContext& project,
                      const BenchConfig& config, MatchStrategy strategy, EvalResult& out);

/// Leave-one-project-out over the dataset (release matching).
EvalResult run_phase1(const std::vector<scoring::ProjectContext>& projects,
                      const BenchConfig& config);

/// Trains one model on the training projects and evaluates every evaluation
/// project not sharing a name with a training project (release matching).
EvalResult run_phase2(const std::vector<scoring::ProjectContext>& train_projects,
                      const std::vector<scoring::ProjectContext>& eval_projects,
                      const BenchConfig& config);

struct Phase3Result {
    EvalResult release;
    EvalResult timeaware;
    double cohens_d_map = 0;  // timeaware vs release, per-project MAP
    double pooled_s_map = 0;
    bool effect_size_valid = false;
};

/// Paired release / time-aware evaluation with one model trained on the
/// training projects; reports detectability under both strategies and the
/// effect size between the per-project MAP populations.
Phase3Result run_phase3(const std::vector<scoring::ProjectContext>& train_projects,
                        const std::vector<scoring::ProjectContext>& eval_projects,
                        const BenchConfig& config);

// ---- result serialization ----------------------------------------------------

struct RunStamp {
    std::uint64_t seed = 0;
    std::string config_hash;
};

void write_human_table(std::ostream& out, const EvalResult& result, const RunStamp& stamp);
void write_project_records(std::ostream& out, const EvalResult& result, const RunStamp& stamp);
void write_query_records(std::ostream& out, const EvalResult& result, const RunStamp& stamp);

}  // namespace bugloc::evalbench
