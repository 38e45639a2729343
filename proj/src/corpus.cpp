#include "bugloc/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace bugloc::corpus {

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::optional<Timestamp> get_timestamp(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) return std::nullopt;
    return parse_rfc3339(it->get<std::string>());
}

std::vector<std::string> get_string_list(const json& j, const char* key) {
    std::vector<std::string> out;
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) return out;
    for (const auto& v : *it)
        if (v.is_string()) out.push_back(v.get<std::string>());
    return out;
}

}  // namespace

std::string normalize_path(std::string path) {
    std::replace(path.begin(), path.end(), '\\', '/');
    std::size_t start = 0;
    while (start < path.size() && path[start] == '/') ++start;
    return path.substr(start);
}

std::size_t count_nonempty_lines(std::string_view text) {
    std::size_t count = 0;
    bool line_has_content = false;
    for (char c : text) {
        if (c == '\n') {
            if (line_has_content) ++count;
            line_has_content = false;
        } else if (c != ' ' && c != '\t' && c != '\r' && c != '\f' && c != '\v') {
            line_has_content = true;
        }
    }
    if (line_has_content) ++count;  // last line without trailing newline
    return count;
}

std::vector<BugReport> load_bug_reports(const std::string& path, const std::string& default_project,
                                        Diagnostics& diags) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report corpus: " + path);
    std::vector<BugReport> reports;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto reject = [&](const std::string& why) {
            diags.add(path + ":" + std::to_string(line_no) + ": " + why);
        };
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            reject("not a JSON object");
            continue;
        }
        BugReport r;
        if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
            reject("missing required field \"id\"");
            continue;
        }
        r.id = j["id"].get<std::string>();
        if (!j.contains("summary") || !j["summary"].is_string()) {
            reject("record " + r.id + ": missing required field \"summary\"");
            continue;
        }
        r.summary = j["summary"].get<std::string>();
        auto created = get_timestamp(j, "created_at");
        if (!created) {
            reject("record " + r.id + ": missing or malformed required field \"created_at\"");
            continue;
        }
        r.created_at = *created;
        if (j.contains("resolved_at") && !j["resolved_at"].is_null()) {
            auto resolved = get_timestamp(j, "resolved_at");
            if (!resolved) {
                reject("record " + r.id + ": malformed \"resolved_at\"");
                continue;
            }
            if (*resolved < r.created_at) {
                reject("record " + r.id + ": invariant violation: resolved_at < created_at");
                continue;
            }
            r.resolved_at = resolved;
        }
        r.project = j.value("project", default_project);
        r.description = j.value("description", std::string());
        r.reporter = j.value("reporter", std::string());
        r.comments = get_string_list(j, "comments");
        for (auto& f : get_string_list(j, "fixed_files")) r.fixed_files.push_back(normalize_path(f));
        r.fixed_versions = get_string_list(j, "fixed_versions");
        if (!seen_ids.insert(r.id).second) {
            reject("record " + r.id + ": duplicate report id");
            continue;
        }
        reports.push_back(std::move(r));
    }
    std::stable_sort(reports.begin(), reports.end(), [](const BugReport& a, const BugReport& b) {
        if (a.created_at != b.created_at) return a.created_at < b.created_at;
        return a.id < b.id;
    });
    return reports;
}

std::vector<CommitRecord> load_commit_log(const std::string& path, Diagnostics& diags) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open commit log: " + path);
    std::vector<CommitRecord> commits;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto reject = [&](const std::string& why) {
            diags.add(path + ":" + std::to_string(line_no) + ": " + why);
        };
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            reject("not a JSON object");
            continue;
        }
        CommitRecord c;
        if (!j.contains("hash") || !j["hash"].is_string() || j["hash"].get<std::string>().empty()) {
            reject("missing required field \"hash\"");
            continue;
        }
        c.hash = j["hash"].get<std::string>();
        auto ts = get_timestamp(j, "timestamp");
        if (!ts) {
            reject("commit " + c.hash + ": missing or malformed \"timestamp\"");
            continue;
        }
        c.timestamp = *ts;
        c.message = j.value("message", std::string());
        for (auto& f : get_string_list(j, "files")) c.files.push_back(normalize_path(f));
        if (c.files.empty()) {
            reject("commit " + c.hash + ": invariant violation: files empty");
            continue;
        }
        if (!seen.insert(c.hash).second) {
            reject("commit " + c.hash + ": duplicate hash");
            continue;
        }
        commits.push_back(std::move(c));
    }
    std::stable_sort(commits.begin(), commits.end(),
                     [](const CommitRecord& a, const CommitRecord& b) {
                         if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                         return a.hash < b.hash;
                     });
    return commits;
}

std::vector<SnapshotManifestEntry> load_snapshot_manifest(const std::string& path,
                                                          Diagnostics& diags) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open snapshot manifest: " + path);
    std::vector<SnapshotManifestEntry> entries;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto reject = [&](const std::string& why) {
            diags.add(path + ":" + std::to_string(line_no) + ": " + why);
        };
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            reject("not a JSON object");
            continue;
        }
        SnapshotManifestEntry e;
        if (!j.contains("label") || !j["label"].is_string()) {
            reject("missing required field \"label\"");
            continue;
        }
        e.label = j["label"].get<std::string>();
        auto ts = get_timestamp(j, "timestamp");
        if (!ts) {
            reject("snapshot " + e.label + ": missing or malformed \"timestamp\"");
            continue;
        }
        e.timestamp = *ts;
        if (!j.contains("root") || !j["root"].is_string()) {
            reject("snapshot " + e.label + ": missing required field \"root\"");
            continue;
        }
        e.root = j["root"].get<std::string>();
        if (!seen.insert(e.label).second) {
            reject("snapshot " + e.label + ": duplicate label");
            continue;
        }
        entries.push_back(std::move(e));
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const SnapshotManifestEntry& a, const SnapshotManifestEntry& b) {
                         if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                         return a.label < b.label;
                     });
    return entries;
}

Snapshot load_snapshot(const SnapshotManifestEntry& entry, const std::string& base_dir) {
    Snapshot snap;
    snap.label = entry.label;
    snap.timestamp = entry.timestamp;
    fs::path root = fs::path(entry.root).is_absolute() ? fs::path(entry.root)
                                                       : fs::path(base_dir) / entry.root;
    if (!fs::exists(root))
        throw std::runtime_error("snapshot root does not exist: " + root.string());
    std::vector<fs::path> paths;
    for (const auto& de : fs::recursive_directory_iterator(root)) {
        if (de.is_regular_file() && de.path().extension() == ".java") paths.push_back(de.path());
    }
    std::sort(paths.begin(), paths.end());
    snap.files.reserve(paths.size());
    for (const auto& p : paths) {
        SnapshotFile f;
        f.path = normalize_path(fs::relative(p, root).generic_string());
        f.content = read_file(p);
        f.loc = count_nonempty_lines(f.content);
        snap.files.push_back(std::move(f));
    }
    return snap;
}

const BugReport* ProjectData::find_report(const std::string& id) const {
    for (const auto& r : reports)
        if (r.id == id) return &r;
    return nullptr;
}

ProjectData load_project(const std::string& dir, const std::string& name, Diagnostics& diags) {
    ProjectData p;
    p.name = name;
    fs::path base(dir);
    p.reports = load_bug_reports((base / "reports.jsonl").string(), name, diags);
    fs::path commits_file = base / "commits.jsonl";
    if (fs::exists(commits_file)) p.commits = load_commit_log(commits_file.string(), diags);
    fs::path manifest = base / "snapshots.jsonl";
    if (fs::exists(manifest)) {
        auto entries = load_snapshot_manifest(manifest.string(), diags);
        p.snapshots.reserve(entries.size());
        for (const auto& e : entries) p.snapshots.push_back(load_snapshot(e, dir));
    }
    for (const auto& s : p.snapshots) p.version_index[s.label] = &s;
    return p;
}

std::vector<ProjectData> load_dataset(const std::string& dir, Diagnostics& diags) {
    fs::path base(dir);
    if (!fs::exists(base)) throw std::runtime_error("corpus directory does not exist: " + dir);
    std::vector<ProjectData> projects;
    if (fs::exists(base / "reports.jsonl")) {
        projects.push_back(load_project(dir, base.filename().string(), diags));
        return projects;
    }
    std::vector<fs::path> subdirs;
    for (const auto& de : fs::directory_iterator(base)) {
        if (de.is_directory() && fs::exists(de.path() / "reports.jsonl")) subdirs.push_back(de.path());
    }
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& sub : subdirs)
        projects.push_back(load_project(sub.string(), sub.filename().string(), diags));
    if (projects.empty())
        throw std::runtime_error("no project with reports.jsonl found under: " + dir);
    return projects;
}

ReleaseResolution resolve_release(const BugReport& report, const std::vector<Snapshot>& releases) {
    if (releases.empty()) throw std::invalid_argument("empty release list");
    ReleaseResolution res;
    // latest release strictly before the report; ties go to the earlier one,
    // which strict '<' already guarantees
    for (const auto& snap : releases) {
        if (snap.timestamp < report.created_at) res.snapshot = &snap;
    }
    if (!res.snapshot) {
        res.snapshot = &releases.front();
        res.fallback = true;
    }
    return res;
}

TimeAwareResolution resolve_timeaware_snapshots(
    const BugReport& report, const std::vector<Snapshot>& snapshots,
    const std::unordered_map<std::string, const Snapshot*>& version_index) {
    TimeAwareResolution res;
    if (!report.fixed_versions.empty()) {
        std::set<const Snapshot*> resolved;
        for (const auto& label : report.fixed_versions) {
            auto it = version_index.find(label);
            if (it != version_index.end())
                resolved.insert(it->second);
            else
                res.unresolved_versions.push_back(label);
        }
        if (!resolved.empty()) {
            // rule 1a; fixed-version snapshots may postdate the report
            res.used_fixed_versions = true;
            res.snapshots.assign(resolved.begin(), resolved.end());
            std::sort(res.snapshots.begin(), res.snapshots.end(),
                      [](const Snapshot* a, const Snapshot* b) {
                          if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
                          return a->label < b->label;
                      });
            return res;
        }
        // no label resolved: fall through to rule 1b
    }
    for (const auto& snap : snapshots) {
        if (snap.timestamp >= report.created_at) continue;
        bool contains_fix = false;
        for (const auto& f : snap.files) {
            for (const auto& fixed : report.fixed_files) {
                if (f.path == fixed) {
                    contains_fix = true;
                    break;
                }
            }
            if (contains_fix) break;
        }
        if (contains_fix) res.snapshots.push_back(&snap);
    }
    return res;
}

DetectabilityStats detectability_report(const ProjectData& project, MatchStrategy strategy) {
    DetectabilityStats stats;
    for (const auto& report : project.reports) {
        if (report.fixed_files.empty()) continue;
        ++stats.total_reports;
        std::vector<const Snapshot*> matched;
        if (strategy == MatchStrategy::kRelease) {
            if (!project.snapshots.empty())
                matched.push_back(resolve_release(report, project.snapshots).snapshot);
        } else {
            matched = resolve_timeaware_snapshots(report, project.snapshots, project.version_index)
                          .snapshots;
        }
        std::unordered_set<std::string> present;
        for (const Snapshot* s : matched)
            for (const auto& f : s->files) present.insert(f.path);
        std::size_t found = 0;
        for (const auto& fixed : report.fixed_files) {
            ++stats.total_fixed_files;
            if (present.count(fixed))
                ++found;
            else
                ++stats.undetectable_files;
        }
        if (found == 0) ++stats.undetectable_reports;
    }
    return stats;
}

}  // namespace bugloc::corpus
