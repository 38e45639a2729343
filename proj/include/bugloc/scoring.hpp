#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bugloc/corpus.hpp"
#include "bugloc/searchengine.hpp"
#include "bugloc/textprep.hpp"
#include "bugloc/types.hpp"

namespace bugloc::scoring {

struct ScoringConfig {
    search::Bm25Params bm25;
    const textprep::TermFilter* term_filter = &textprep::TermFilter::defaults();
};

/// Records every historical record admitted into a feature computation, so
/// tests can assert that nothing resolved or committed at/after the query
/// report's creation ever contributes.
class TemporalAudit {
public:
    struct Access {
        std::string kind;  // "report" or "commit"
        std::string id;
        Timestamp event = 0;          // resolution / commit time
        Timestamp query_created = 0;  // creation time of the query report
    };

    void record(std::string kind, std::string id, Timestamp event, Timestamp query_created) {
        std::lock_guard<std::mutex> lock(mu_);
        accesses_.push_back({std::move(kind), std::move(id), event, query_created});
    }
    std::vector<Access> accesses() const {
        std::lock_guard<std::mutex> lock(mu_);
        return accesses_;
    }
    bool clean() const {
        std::lock_guard<std::mutex> lock(mu_);
        for (const auto& a : accesses_)
            if (a.event >= a.query_created) return false;
        return true;
    }

private:
    mutable std::mutex mu_;
    std::vector<Access> accesses_;
};

// ---- component scorers -----------------------------------------------------

/// LOC of the file (non-empty lines).
double score_size(const SnapshotFile& file);

struct StructureScores {
    double file_match = 0;
    double class_match = 0;
    double method_match = 0;
};

/// Case-sensitive whole-identifier occurrence count of `ident` in `text`;
/// a hit needs non-identifier characters (or string ends) on both sides.
std::size_t count_identifier(std::string_view text, std::string_view ident);

/// Occurrence counts of the file name (with or without ".java"), class names
/// and method names in summary + description.
StructureScores score_structure(const BugReport& report, const FileStructure& fs);
StructureScores score_structure_text(std::string_view report_text, const FileStructure& fs);

struct StackTraceSets {
    std::vector<std::pair<std::string, std::size_t>> directly_named;  // D: (path, 1-based rank)
    std::unordered_set<std::string> reachable;                        // C: via imports / package

    std::size_t rank_of(const std::string& path) const {
        for (const auto& [p, r] : directly_named)
            if (p == path) return r;
        return 0;
    }
};

/// Frame-like ".java" phrases mapped onto known files (unknown names are
/// dropped), ranked by first appearance; C built from imports and package
/// co-location of D's members.
StackTraceSets extract_stacktrace(const BugReport& report,
                                  const std::vector<FileStructure>& structures);

/// 1/rank for the first 10 directly named frames, 0.1 for deeper frames and
/// for files reachable via imports/package, 0 otherwise.
double score_stacktrace(const std::string& path, const StackTraceSets& sets);

/// Adaptive commit window: starts at 15 days, grows by one day while fewer
/// than 15 prior commits fall inside it and older commits remain.
double version_history_window_days(const BugReport& report,
                                   const std::vector<CommitRecord>& commits_sorted);

/// Sigmoid-decayed sum over relevant commits (fix/bug/fail/error messages or
/// commits inside the adaptive window) touching each file. Keys are only the
/// touched paths; everything else scores 0.
std::unordered_map<std::string, double> score_version_history(
    const BugReport& report, const std::vector<CommitRecord>& commits_sorted,
    TemporalAudit* audit = nullptr);

/// Cosine over term-frequency vectors; 0 if either stream is empty.
double cosine_similarity(const textprep::TokenStream& a, const textprep::TokenStream& b);

/// Spreads sim(report, prior)/|fix(prior)| over each prior's fix set. Priors
/// resolved at/after the report's creation or with empty fix sets contribute
/// nothing.
std::unordered_map<std::string, double> score_similar_reports(
    const BugReport& report, const std::vector<const BugReport*>& history,
    const std::function<double(const BugReport&, const BugReport&)>& sim,
    TemporalAudit* audit = nullptr);

struct SearchEngineScores {
    std::unordered_map<std::string, double> content;  // per path, max-normalized
    std::unordered_map<std::string, double> method;
    std::unordered_map<std::string, double> path;
};

struct SnapshotIndex;

/// The content/methods/path queries against the file index, each max-
/// normalized. The path query runs only when the raw summary or description
/// contains ".java" or "/"; otherwise every path score is 0.
SearchEngineScores score_search_engine(const BugReport& report, const SnapshotIndex& snap,
                                       const ScoringConfig& config);

// ---- orchestration ---------------------------------------------------------

/// Prebuilt per-snapshot state: structures and the three-field search index
/// (content, path, methods).
struct SnapshotIndex {
    const Snapshot* snapshot = nullptr;
    std::vector<FileStructure> structures;               // parallel to snapshot->files
    std::unordered_map<std::string, std::size_t> by_path;
    search::InvertedIndex files;

    static SnapshotIndex build(const Snapshot& snap, const ScoringConfig& config);
};

/// Per-project state shared across queries: the report index (summary,
/// content fields; closing_date attribute) and tokenized report corpora.
/// Movable; the snapshot-index cache lives behind a pointer.
struct ProjectContext {
    const corpus::ProjectData* project = nullptr;
    search::InvertedIndex reports;
    std::unordered_map<std::string, const BugReport*> reports_by_id;
    // prior-report text for sim_cos: summary + description + comments
    std::unordered_map<std::string, textprep::TokenStream> report_corpus_tokens;

    static ProjectContext build(const corpus::ProjectData& project, const ScoringConfig& config);

    /// Lazily built, cached snapshot indices keyed by label.
    const SnapshotIndex& snapshot_index(const Snapshot& snap, const ScoringConfig& config) const;

private:
    struct SnapshotCache {
        std::mutex mu;
        std::unordered_map<std::string, std::unique_ptr<SnapshotIndex>> by_label;
    };
    std::unique_ptr<SnapshotCache> cache_ = std::make_unique<SnapshotCache>();
};

/// Everything needed to assemble the 13-component FeatureVector of any file
/// in one (report, snapshot) pair.
struct FeatureContext {
    const BugReport* report = nullptr;
    const SnapshotIndex* snap = nullptr;
    std::string report_text;  // summary + "\n" + description
    StackTraceSets stacktrace;
    std::unordered_map<std::string, double> version_history;
    std::unordered_map<std::string, double> sim_cos;
    std::unordered_map<std::string, double> sim_reporter;
    std::unordered_map<std::string, double> br_summary;
    std::unordered_map<std::string, double> br_description;
    std::unordered_map<std::string, double> se_content;
    std::unordered_map<std::string, double> se_method;
    std::unordered_map<std::string, double> se_path;
};

FeatureContext build_feature_context(const BugReport& report, const SnapshotIndex& snap,
                                     const ProjectContext& project, const ScoringConfig& config,
                                     TemporalAudit* audit = nullptr);

/// FeatureVector of the file at `ordinal` in the snapshot.
FeatureVector compute_features(const FeatureContext& ctx, std::size_t ordinal);

/// All files of the snapshot, computed in parallel.
std::vector<FeatureVector> compute_all_features(const FeatureContext& ctx);

}  // namespace bugloc::scoring
