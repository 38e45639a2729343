#pragma once

// Shared test scaffolding: temp directories and small corpus builders.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "bugloc/corpus.hpp"

namespace testsupport {

namespace fs = std::filesystem;

/// In-memory project: sorts the pieces and wires the version index. The
/// returned object owns its snapshots; keep it alive while contexts use it.
inline bugloc::corpus::ProjectData make_project(std::string name,
                                                std::vector<bugloc::BugReport> reports,
                                                std::vector<bugloc::CommitRecord> commits,
                                                std::vector<bugloc::Snapshot> snapshots) {
    bugloc::corpus::ProjectData p;
    p.name = std::move(name);
    p.reports = std::move(reports);
    p.commits = std::move(commits);
    p.snapshots = std::move(snapshots);
    std::sort(p.reports.begin(), p.reports.end(),
              [](const auto& a, const auto& b) { return a.created_at < b.created_at; });
    std::sort(p.commits.begin(), p.commits.end(),
              [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    std::sort(p.snapshots.begin(), p.snapshots.end(),
              [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    for (const auto& s : p.snapshots) p.version_index[s.label] = &s;
    return p;
}

inline bugloc::SnapshotFile java_file(std::string path, std::string content) {
    bugloc::SnapshotFile f;
    f.path = std::move(path);
    f.content = std::move(content);
    f.loc = bugloc::corpus::count_nonempty_lines(f.content);
    return f;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = fs::temp_directory_path() / ("bugloc_test_" + tag + "_" + std::to_string(counter_++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

    void write(const std::string& relative, const std::string& content) const {
        fs::path p = path_ / relative;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        out << content;
    }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

}  // namespace testsupport
