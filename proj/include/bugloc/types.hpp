#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bugloc/timeutil.hpp"

namespace bugloc {

struct BugReport {
    std::string id;
    std::string project;
    std::string summary;
    std::string description;
    std::string reporter;
    Timestamp created_at = 0;
    std::optional<Timestamp> resolved_at;
    std::vector<std::string> comments;
    std::vector<std::string> fixed_files;     // ground truth, normalized paths
    std::vector<std::string> fixed_versions;  // version labels, possibly empty
};

struct CommitRecord {
    std::string hash;
    Timestamp timestamp = 0;
    std::string message;
    std::vector<std::string> files;  // non-empty
};

struct SnapshotFile {
    std::string path;     // repository-relative, forward slashes
    std::string content;  // raw text
    std::size_t loc = 0;  // lines with at least one non-whitespace character
};

struct Snapshot {
    std::string label;  // version label or commit hash
    Timestamp timestamp = 0;
    std::vector<SnapshotFile> files;  // unique paths, .java only
};

/// Names declared in one Java source file, extracted by the tolerant parser.
struct FileStructure {
    std::string path;
    std::string file_name;       // last path segment, with extension
    std::string file_name_stem;  // last path segment, without ".java"
    std::string package_name;    // dotted, or empty
    std::vector<std::string> classes;  // classes, interfaces, enums; first-appearance order
    std::vector<std::string> methods;  // incl. constructors; first-appearance order
    std::vector<std::string> imports;  // fully-qualified names as written
};

/// The 13 per-(report, file) component scores fed to the forest.
struct FeatureVector {
    double size = 0;
    double file_match = 0;
    double class_match = 0;
    double method_match = 0;
    double stacktrace = 0;
    double version_history = 0;
    double sim_cos = 0;
    double sim_reporter = 0;
    double se_content = 0;
    double se_method = 0;
    double se_path = 0;
    double br_summary = 0;
    double br_description = 0;

    static constexpr std::size_t kCount = 13;

    double& operator[](std::size_t i) {
        double* fields[kCount] = {&size,       &file_match,      &class_match, &method_match,
                                  &stacktrace, &version_history, &sim_cos,     &sim_reporter,
                                  &se_content, &se_method,       &se_path,     &br_summary,
                                  &br_description};
        return *fields[i];
    }
    double operator[](std::size_t i) const { return const_cast<FeatureVector&>(*this)[i]; }

    std::array<double, kCount> to_array() const {
        std::array<double, kCount> a;
        for (std::size_t i = 0; i < kCount; ++i) a[i] = (*this)[i];
        return a;
    }
};

inline constexpr std::array<const char*, FeatureVector::kCount> kFeatureNames = {
    "size",        "file_match",      "class_match", "method_match", "stacktrace",
    "version_history", "sim_cos",     "sim_reporter", "se_content",  "se_method",
    "se_path",     "br_summary",      "br_description",
};

enum class MatchStrategy { kRelease, kTimeAware };

inline const char* to_string(MatchStrategy s) {
    return s == MatchStrategy::kRelease ? "release" : "timeaware";
}

/// One ranked candidate file with its final and component scores.
struct RankedEntry {
    std::string path;
    double score = 0;
    FeatureVector components;
};

struct RankedList {
    std::string report_id;
    MatchStrategy strategy = MatchStrategy::kRelease;
    std::vector<RankedEntry> entries;  // non-increasing score, unique paths
};

}  // namespace bugloc
