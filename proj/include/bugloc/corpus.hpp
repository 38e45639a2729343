#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "bugloc/types.hpp"

namespace bugloc::corpus {

/// Per-record problems found while loading; loading continues past them.
struct Diagnostics {
    std::vector<std::string> messages;
    void add(std::string msg) { messages.push_back(std::move(msg)); }
    bool empty() const { return messages.empty(); }
};

/// Normalizes a repository-relative path: forward slashes, no leading '/'.
std::string normalize_path(std::string path);

std::size_t count_nonempty_lines(std::string_view text);

/// One report per line (JSON records). Records failing schema validation are
/// rejected with a diagnostic naming the line; an unreadable file throws.
std::vector<BugReport> load_bug_reports(const std::string& path, const std::string& default_project,
                                        Diagnostics& diags);

/// One commit per line (JSON records), same error contract as reports.
std::vector<CommitRecord> load_commit_log(const std::string& path, Diagnostics& diags);

struct SnapshotManifestEntry {
    std::string label;
    Timestamp timestamp = 0;
    std::string root;  // directory, relative to the manifest's directory
};

std::vector<SnapshotManifestEntry> load_snapshot_manifest(const std::string& path, Diagnostics& diags);

/// Materializes a snapshot from a directory tree: keeps ".java" files only
/// (source and test files alike), paths made relative to the root.
Snapshot load_snapshot(const SnapshotManifestEntry& entry, const std::string& base_dir);

/// A loaded project: reports, commits and snapshots, each sorted by time.
struct ProjectData {
    std::string name;
    std::vector<BugReport> reports;    // ascending created_at
    std::vector<CommitRecord> commits; // ascending timestamp
    std::vector<Snapshot> snapshots;   // ascending timestamp
    std::unordered_map<std::string, const Snapshot*> version_index;  // label -> snapshot

    const BugReport* find_report(const std::string& id) const;
};

/// Loads `dir` as one project (reports.jsonl, commits.jsonl, snapshots.jsonl
/// plus snapshot roots).
ProjectData load_project(const std::string& dir, const std::string& name, Diagnostics& diags);

/// Loads a dataset directory: either a single project or one subdirectory per
/// project (detected by the presence of reports.jsonl).
std::vector<ProjectData> load_dataset(const std::string& dir, Diagnostics& diags);

struct ReleaseResolution {
    const Snapshot* snapshot = nullptr;
    bool fallback = false;  // no release preceded the report; earliest used
};

/// Latest release strictly before the report; falls back to the earliest
/// release when none precedes it. Throws on an empty release list.
ReleaseResolution resolve_release(const BugReport& report, const std::vector<Snapshot>& releases);

inline const Snapshot& resolve_release_snapshot(const BugReport& report,
                                                const std::vector<Snapshot>& releases) {
    return *resolve_release(report, releases).snapshot;
}

struct TimeAwareResolution {
    std::vector<const Snapshot*> snapshots;  // ascending timestamp
    std::vector<std::string> unresolved_versions;  // fixed_versions without a snapshot
    bool used_fixed_versions = false;  // rule 1a vs rule 1b
};

/// Rule 1a: snapshots of the report's fixed versions (exact label match; may
/// postdate the report). Rule 1b: all prior snapshots containing at least one
/// fixed file. An empty result marks the report undetectable.
TimeAwareResolution resolve_timeaware_snapshots(
    const BugReport& report, const std::vector<Snapshot>& snapshots,
    const std::unordered_map<std::string, const Snapshot*>& version_index);

struct DetectabilityStats {
    std::size_t total_fixed_files = 0;
    std::size_t undetectable_files = 0;
    std::size_t total_reports = 0;       // reports with ground truth
    std::size_t undetectable_reports = 0;  // no fixed file in any matched snapshot

    double undetectable_file_pct() const {
        return total_fixed_files == 0 ? 0.0
                                      : 100.0 * static_cast<double>(undetectable_files) /
                                            static_cast<double>(total_fixed_files);
    }
    double undetectable_report_pct() const {
        return total_reports == 0 ? 0.0
                                  : 100.0 * static_cast<double>(undetectable_reports) /
                                        static_cast<double>(total_reports);
    }
    DetectabilityStats& operator+=(const DetectabilityStats& o) {
        total_fixed_files += o.total_fixed_files;
        undetectable_files += o.undetectable_files;
        total_reports += o.total_reports;
        undetectable_reports += o.undetectable_reports;
        return *this;
    }
};

/// Counts fixed files (and whole reports) that cannot be found in the
/// snapshot(s) the strategy matches the report against.
DetectabilityStats detectability_report(const ProjectData& project, MatchStrategy strategy);

}  // namespace bugloc::corpus
