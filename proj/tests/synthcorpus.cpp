#include "synthcorpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "bugloc/timeutil.hpp"
#include "support.hpp"

namespace synthcorpus {

using namespace bugloc;
using nlohmann::json;

namespace {

constexpr Timestamp kDay = 86400;
constexpr Timestamp kT0 = 1577836800;  // 2020-01-01

struct Topic {
    const char* prefix;  // class name prefix
    const char* domain;  // class name suffix / package theme
    const char* verb;    // method stem
};

const Topic kTopics[] = {
    {"Alpha", "Codec", "encode"},     {"Beta", "Router", "route"},
    {"Gamma", "Cache", "evict"},      {"Delta", "Parser", "consume"},
    {"Epsilon", "Mailer", "deliver"}, {"Zeta", "Ledger", "settle"},
    {"Eta", "Planner", "arrange"},    {"Theta", "Scanner", "sweep"},
    {"Iota", "Broker", "dispatch"},   {"Kappa", "Splitter", "divide"},
    {"Lambda", "Merger", "combine"},  {"Mu", "Sampler", "draw"},
    {"Nu", "Throttle", "limit"},      {"Xi", "Balancer", "spread"},
    {"Omicron", "Archiver", "store"}, {"Pi", "Renderer", "paint"},
    {"Rho", "Notifier", "signal"},    {"Sigma", "Uploader", "push"},
    {"Tau", "Resolver", "lookup"},    {"Upsilon", "Indexer", "catalog"},
};
constexpr std::size_t kFileCount = std::size(kTopics);

std::string lower(std::string s) {
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
}

struct FilePlan {
    std::string path;
    std::string class_name;
    std::string method_name;
    std::string package_name;
    std::string word_a;  // unique topic words, lowercase
    std::string word_b;
};

FilePlan plan_file(std::size_t i, const std::string& salt) {
    const Topic& t = kTopics[i];
    FilePlan p;
    p.class_name = std::string(t.prefix) + t.domain;
    p.method_name = std::string(t.verb) + t.prefix;
    p.package_name = "com.synth.pkg" + std::to_string(i % 4);
    p.path = "com/synth/pkg" + std::to_string(i % 4) + "/" + p.class_name + ".java";
    p.word_a = salt + lower(t.prefix) + "surge";
    p.word_b = salt + lower(t.prefix) + "weave";
    return p;
}

std::string file_content(const FilePlan& p) {
    std::string s;
    s += "package " + p.package_name + ";\n\n";
    s += "import java.util.List;\n\n";
    s += "// tracks " + p.word_a + " and " + p.word_b + " conditions\n";
    s += "public class " + p.class_name + " {\n";
    s += "    private int budget;\n\n";
    s += "    public void " + p.method_name + "(List<String> items) {\n";
    s += "        // " + p.word_a + ": adjust the " + p.word_b + " window\n";
    s += "        budget += items.size();\n";
    s += "    }\n\n";
    s += "    void reset" + std::string(kTopics[0].prefix) + "Budget() {\n";
    s += "        budget = 0;\n";
    s += "    }\n";
    s += "}\n";
    return s;
}

SnapshotFile snapshot_file(const FilePlan& p) {
    SnapshotFile f;
    f.path = p.path;
    f.content = file_content(p);
    f.loc = corpus::count_nonempty_lines(f.content);
    return f;
}

BugReport base_report(const std::string& project, const std::string& id, Timestamp created,
                      Timestamp resolved) {
    BugReport r;
    r.id = id;
    r.project = project;
    r.created_at = created;
    r.resolved_at = resolved;
    return r;
}

}  // namespace

SynthProject make_synth_project(const std::string& name, const std::string& word_salt) {
    SynthProject out;
    std::vector<FilePlan> plans;
    for (std::size_t i = 0; i < kFileCount; ++i) plans.push_back(plan_file(i, word_salt));

    Snapshot snap;
    snap.label = "v1";
    snap.timestamp = kT0;
    for (const auto& p : plans) snap.files.push_back(snapshot_file(p));

    std::vector<CommitRecord> commits;
    std::vector<BugReport> reports;

    // ten resolved history reports, one per topic file, textual style
    for (std::size_t i = 0; i < 10; ++i) {
        const FilePlan& p = plans[i];
        auto r = base_report(name, "H-" + std::to_string(i), kT0 + (20 + (Timestamp)i) * kDay,
                             kT0 + (30 + (Timestamp)i) * kDay);
        r.reporter = (i % 2 == 0) ? "alice" : "bob";
        r.summary = p.word_a + " misbehaves in the " + lower(p.class_name);
        r.description = "we keep seeing " + p.word_a + " spikes whenever " + p.word_b +
                        " adjustments run; the " + lower(kTopics[i].domain) + " stalls";
        r.comments = {"confirmed on the nightly run", "the " + p.word_a + " counter overflows"};
        r.fixed_files = {p.path};
        reports.push_back(r);

        CommitRecord fix;
        fix.hash = "fix-" + std::to_string(i);
        fix.timestamp = *r.resolved_at;
        fix.message = "fix " + p.word_a + " bug in " + p.class_name;
        fix.files = {p.path};
        commits.push_back(fix);
    }
    // routine commits spread over the history
    for (std::size_t i = 0; i < kFileCount; ++i) {
        CommitRecord c;
        c.hash = "chore-" + std::to_string(i);
        c.timestamp = kT0 + (5 + (Timestamp)i) * kDay;
        c.message = "routine maintenance pass";
        c.files = {plans[i].path, plans[(i + 1) % kFileCount].path};
        commits.push_back(c);
    }

    // ten query reports: 4 stack traces, 3 file/class quotes, 3 textual
    Timestamp q_base = kT0 + 60 * kDay;
    for (std::size_t q = 0; q < 10; ++q) {
        const FilePlan& p = plans[q];
        auto r = base_report(name, "Q-" + std::to_string(q), q_base + (Timestamp)q * kDay,
                             q_base + (40 + (Timestamp)q) * kDay);
        r.reporter = (q % 2 == 0) ? "alice" : "carol";
        r.fixed_files = {p.path};
        if (q < 4) {
            const FilePlan& other = plans[(q + 7) % kFileCount];
            r.summary = "crash with " + p.word_a + " overflow";
            r.description = "Exception in thread \"main\" java.lang.IllegalStateException: " +
                            p.word_a + " overflow\n    at " + p.package_name + "." + p.class_name +
                            "." + p.method_name + "(" + p.class_name + ".java:9)\n    at " +
                            other.package_name + "." + other.class_name + "." + other.method_name +
                            "(" + other.class_name + ".java:12)\n";
            out.stacktrace_reports.push_back(r.id);
        } else if (q < 7) {
            r.summary = "problem in " + p.class_name + ".java";
            r.description = "the class " + p.class_name + " mishandles " + p.word_a +
                            " payloads; " + p.method_name + " drops them";
            out.quoting_reports.push_back(r.id);
        } else {
            r.summary = p.word_a + " regression";
            r.description = p.word_a + " spikes and " + p.word_b +
                            " drift slow everything down lately";
            out.textual_reports.push_back(r.id);
        }
        reports.push_back(r);

        // a fix-flavored commit touching the eventual fix location shortly
        // before the report (history signal without leakage)
        CommitRecord near;
        near.hash = "near-" + std::to_string(q);
        near.timestamp = r.created_at - 3 * kDay;
        near.message = "guard against " + p.word_a + " error";
        near.files = {p.path};
        commits.push_back(near);
    }

    out.data = testsupport::make_project(name, std::move(reports), std::move(commits),
                                             {std::move(snap)});
    return out;
}

RenameProject make_rename_project(const std::string& name, const std::string& word_salt) {
    RenameProject out;
    auto synth = make_synth_project(name, word_salt);

    // v2 snapshot: file 15 ("Omicron...") moves to a new name; everything else
    // stays
    std::size_t renamed_index = 15;
    FilePlan old_plan = plan_file(renamed_index, word_salt);
    FilePlan new_plan = old_plan;
    new_plan.class_name = "Renamed" + old_plan.class_name;
    new_plan.path = "com/synth/pkg" + std::to_string(renamed_index % 4) + "/" +
                    new_plan.class_name + ".java";
    new_plan.method_name = old_plan.method_name;

    Snapshot v2;
    v2.label = "v2";
    v2.timestamp = kT0 + 300 * kDay;  // released after every report
    for (std::size_t i = 0; i < kFileCount; ++i) {
        FilePlan p = plan_file(i, word_salt);
        if (i == renamed_index) p = new_plan;
        v2.files.push_back(snapshot_file(p));
    }

    // the planted report: created between v1 and v2, fixed in v2 under the
    // new path
    BugReport r = base_report(name, "Q-RENAME", kT0 + 80 * kDay, kT0 + 310 * kDay);
    r.reporter = "alice";
    r.summary = old_plan.word_a + " breakdown in the archive path";
    r.description = "the " + old_plan.word_a + " step fails after " + old_plan.word_b +
                    " changes; archives go missing";
    r.fixed_files = {new_plan.path};
    r.fixed_versions = {"v2"};

    auto reports = synth.data.reports;
    auto commits = synth.data.commits;
    reports.push_back(r);
    std::vector<Snapshot> snapshots = std::move(synth.data.snapshots);
    snapshots.push_back(std::move(v2));

    out.data = testsupport::make_project(name, std::move(reports), std::move(commits),
                                             std::move(snapshots));
    out.renamed_report_id = "Q-RENAME";
    out.old_path = old_plan.path;
    out.new_path = new_plan.path;
    return out;
}

void write_project(const std::string& dir, const corpus::ProjectData& project) {
    namespace fs = std::filesystem;
    fs::path base = fs::path(dir) / project.name;
    fs::create_directories(base);

    std::ofstream reports(base / "reports.jsonl");
    for (const auto& r : project.reports) {
        json j;
        j["id"] = r.id;
        j["project"] = r.project;
        j["summary"] = r.summary;
        j["description"] = r.description;
        j["reporter"] = r.reporter;
        j["created_at"] = format_rfc3339(r.created_at);
        if (r.resolved_at) j["resolved_at"] = format_rfc3339(*r.resolved_at);
        j["comments"] = r.comments;
        j["fixed_files"] = r.fixed_files;
        j["fixed_versions"] = r.fixed_versions;
        reports << j.dump() << "\n";
    }
    std::ofstream commits(base / "commits.jsonl");
    for (const auto& c : project.commits) {
        json j;
        j["hash"] = c.hash;
        j["timestamp"] = format_rfc3339(c.timestamp);
        j["message"] = c.message;
        j["files"] = c.files;
        commits << j.dump() << "\n";
    }
    std::ofstream manifest(base / "snapshots.jsonl");
    for (const auto& s : project.snapshots) {
        json j;
        j["label"] = s.label;
        j["timestamp"] = format_rfc3339(s.timestamp);
        j["root"] = "snapshots/" + s.label;
        manifest << j.dump() << "\n";
        for (const auto& f : s.files) {
            fs::path fp = base / "snapshots" / s.label / f.path;
            fs::create_directories(fp.parent_path());
            std::ofstream out(fp, std::ios::binary);
            out << f.content;
        }
    }
}

}  // namespace synthcorpus
