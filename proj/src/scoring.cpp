#include "bugloc/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "bugloc/codestruct.hpp"
#include "bugloc/util.hpp"

namespace bugloc::scoring {

namespace {

bool is_ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '$';
}

bool contains_ci(std::string_view haystack, std::string_view lowercase_needle) {
    if (lowercase_needle.empty()) return true;
    for (std::size_t i = 0; i + lowercase_needle.size() <= haystack.size(); ++i) {
        std::size_t j = 0;
        while (j < lowercase_needle.size()) {
            char c = haystack[i + j];
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            if (c != lowercase_needle[j]) break;
            ++j;
        }
        if (j == lowercase_needle.size()) return true;
    }
    return false;
}

}  // namespace

double score_size(const SnapshotFile& file) { return static_cast<double>(file.loc); }

std::size_t count_identifier(std::string_view text, std::string_view ident) {
    if (ident.empty()) return 0;
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = text.find(ident, pos)) != std::string_view::npos) {
        bool left_ok = pos == 0 || !is_ident_char(text[pos - 1]);
        std::size_t end = pos + ident.size();
        bool right_ok = end == text.size() || !is_ident_char(text[end]);
        if (left_ok && right_ok) ++count;
        ++pos;
    }
    return count;
}

StructureScores score_structure_text(std::string_view text, const FileStructure& fs) {
    StructureScores s;
    // with-extension occurrences
    s.file_match += static_cast<double>(count_identifier(text, fs.file_name));
    // bare-name occurrences, excluding those that are the prefix of a
    // with-extension hit (already counted above)
    if (!fs.file_name_stem.empty()) {
        std::size_t pos = 0;
        std::string_view stem = fs.file_name_stem;
        while ((pos = text.find(stem, pos)) != std::string_view::npos) {
            bool left_ok = pos == 0 || !is_ident_char(text[pos - 1]);
            std::size_t end = pos + stem.size();
            bool right_ok = end == text.size() || !is_ident_char(text[end]);
            if (left_ok && right_ok) {
                bool is_ext_form = text.compare(end, 5, ".java") == 0 &&
                                   (end + 5 == text.size() || !is_ident_char(text[end + 5]));
                if (!is_ext_form) s.file_match += 1;
            }
            ++pos;
        }
    }
    for (const auto& c : fs.classes)
        s.class_match += static_cast<double>(count_identifier(text, c));
    for (const auto& m : fs.methods)
        s.method_match += static_cast<double>(count_identifier(text, m));
    return s;
}

StructureScores score_structure(const BugReport& report, const FileStructure& fs) {
    return score_structure_text(report.summary + "\n" + report.description, fs);
}

// ---- stack trace ------------------------------------------------------------

namespace {

bool is_frame_char(char c) { return is_ident_char(c) || c == '.' || c == '/' || c == '\\'; }

// maximal runs of frame characters ending in ".java", in order of appearance
std::vector<std::string> java_phrases(std::string_view text) {
    std::vector<std::string> phrases;
    std::size_t pos = 0;
    while ((pos = text.find(".java", pos)) != std::string_view::npos) {
        std::size_t end = pos + 5;
        if (end < text.size() && is_ident_char(text[end])) {  // ".javax" and friends
            pos = end;
            continue;
        }
        std::size_t start = pos;
        while (start > 0 && is_frame_char(text[start - 1])) --start;
        std::string phrase(text.substr(start, end - start));
        std::replace(phrase.begin(), phrase.end(), '\\', '/');
        while (!phrase.empty() && (phrase.front() == '.' || phrase.front() == '/'))
            phrase.erase(phrase.begin());
        if (phrase.size() > 5) phrases.push_back(std::move(phrase));
        pos = end;
    }
    return phrases;
}

// suffix match of `candidate` against known paths; deterministic choice on
// ambiguity (lexicographically smallest)
const std::string* match_known_file(const std::string& candidate,
                                    const std::vector<FileStructure>& structures) {
    const std::string* best = nullptr;
    auto consider = [&](const std::string& needle) {
        for (const auto& fs : structures) {
            const std::string& p = fs.path;
            bool hit = p == needle || (p.size() > needle.size() &&
                                       p.compare(p.size() - needle.size(), needle.size(), needle) == 0 &&
                                       p[p.size() - needle.size() - 1] == '/');
            if (hit && (!best || p < *best)) best = &p;
        }
    };
    if (candidate.find('/') != std::string::npos) {
        consider(candidate);
        return best;
    }
    // dotted form: a.b.Foo.java -> a/b/Foo.java, then plain base name
    std::string slashed = candidate;
    for (std::size_t i = 0; i + 5 < slashed.size(); ++i)
        if (slashed[i] == '.') slashed[i] = '/';
    consider(slashed);
    if (best) return best;
    auto last = slashed.find_last_of('/');
    if (last != std::string::npos) consider(slashed.substr(last + 1));
    return best;
}

// import "a.b.C" (or "a.b.*", or a static member "a.b.C.max") to known paths
void resolve_import(const std::string& import_name, const std::vector<FileStructure>& structures,
                    std::unordered_set<std::string>& out) {
    if (import_name.size() > 2 && import_name.compare(import_name.size() - 2, 2, ".*") == 0) {
        std::string pkg = import_name.substr(0, import_name.size() - 2);
        for (const auto& fs : structures)
            if (fs.package_name == pkg) out.insert(fs.path);
        return;
    }
    std::string path = import_name;
    std::replace(path.begin(), path.end(), '.', '/');
    path += ".java";
    for (const auto& fs : structures) {
        if (fs.path == path || (fs.path.size() > path.size() &&
                                fs.path.compare(fs.path.size() - path.size(), path.size(), path) == 0 &&
                                fs.path[fs.path.size() - path.size() - 1] == '/')) {
            out.insert(fs.path);
            return;
        }
    }
    // static or nested-class import: retry without the last segment
    auto last_dot = import_name.find_last_of('.');
    if (last_dot != std::string::npos) {
        std::string outer = import_name.substr(0, last_dot);
        if (outer.find('.') != std::string::npos)
            resolve_import(outer, structures, out);
    }
}

std::string parent_dir(const std::string& path) {
    auto slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string() : path.substr(0, slash);
}

}  // namespace

StackTraceSets extract_stacktrace(const BugReport& report,
                                  const std::vector<FileStructure>& structures) {
    StackTraceSets sets;
    std::string text = report.summary + "\n" + report.description;
    std::unordered_set<std::string> in_d;
    for (const auto& phrase : java_phrases(text)) {
        const std::string* path = match_known_file(phrase, structures);
        if (!path) continue;  // names not in the code base are dropped
        if (in_d.insert(*path).second)
            sets.directly_named.emplace_back(*path, sets.directly_named.size() + 1);
    }

    std::unordered_map<std::string, const FileStructure*> by_path;
    for (const auto& fs : structures) by_path[fs.path] = &fs;

    for (const auto& [path, rank] : sets.directly_named) {
        (void)rank;
        auto it = by_path.find(path);
        if (it == by_path.end()) continue;
        const FileStructure& fs = *it->second;
        for (const auto& imp : fs.imports) resolve_import(imp, structures, sets.reachable);
        // package co-location; directory co-location when no package is declared
        if (!fs.package_name.empty()) {
            for (const auto& other : structures)
                if (other.package_name == fs.package_name) sets.reachable.insert(other.path);
        } else {
            std::string dir = parent_dir(fs.path);
            for (const auto& other : structures)
                if (parent_dir(other.path) == dir) sets.reachable.insert(other.path);
        }
    }
    return sets;
}

double score_stacktrace(const std::string& path, const StackTraceSets& sets) {
    std::size_t rank = sets.rank_of(path);
    if (rank >= 1 && rank <= 10) return 1.0 / static_cast<double>(rank);
    if (rank > 10) return 0.1;
    if (sets.reachable.count(path)) return 0.1;
    return 0.0;
}

// ---- version history ---------------------------------------------------------

double version_history_window_days(const BugReport& report,
                                   const std::vector<CommitRecord>& commits_sorted) {
    double k = 15.0;
    Timestamp earliest = 0;
    bool any_prior = false;
    std::vector<Timestamp> prior;
    for (const auto& c : commits_sorted) {
        if (c.timestamp >= report.created_at) break;
        prior.push_back(c.timestamp);
        if (!any_prior || c.timestamp < earliest) earliest = c.timestamp;
        any_prior = true;
    }
    if (!any_prior) return k;
    auto in_window = [&](double days) {
        Timestamp start = report.created_at - static_cast<Timestamp>(days * kSecondsPerDay);
        std::size_t n = 0;
        for (Timestamp t : prior)
            if (t >= start) ++n;
        return n;
    };
    while (in_window(k) < 15 &&
           earliest < report.created_at - static_cast<Timestamp>(k * kSecondsPerDay)) {
        k += 1.0;
    }
    return k;
}

std::unordered_map<std::string, double> score_version_history(
    const BugReport& report, const std::vector<CommitRecord>& commits_sorted,
    TemporalAudit* audit) {
    std::unordered_map<std::string, double> scores;
    const double k = version_history_window_days(report, commits_sorted);
    const Timestamp window_start =
        report.created_at - static_cast<Timestamp>(k * kSecondsPerDay);
    for (const auto& c : commits_sorted) {
        if (c.timestamp >= report.created_at) break;
        bool fix_message = contains_ci(c.message, "fix") || contains_ci(c.message, "bug") ||
                           contains_ci(c.message, "fail") || contains_ci(c.message, "error");
        bool in_window = c.timestamp >= window_start;
        if (!fix_message && !in_window) continue;
        if (audit) audit->record("commit", c.hash, c.timestamp, report.created_at);
        double t_c = days_between(c.timestamp, report.created_at);
        double contribution = 1.0 / (1.0 + std::exp(12.0 * (1.0 - (k - t_c) / k)));
        for (const auto& f : c.files) scores[f] += contribution;
    }
    return scores;
}

// ---- similarity -------------------------------------------------------------

double cosine_similarity(const textprep::TokenStream& a, const textprep::TokenStream& b) {
    if (a.tokens.empty() || b.tokens.empty()) return 0.0;
    auto tf_a = textprep::term_frequencies(a);
    auto tf_b = textprep::term_frequencies(b);
    double dot = 0, norm_a = 0, norm_b = 0;
    for (const auto& [term, f] : tf_a) {
        norm_a += f * f;
        auto it = tf_b.find(term);
        if (it != tf_b.end()) dot += f * it->second;
    }
    for (const auto& [term, f] : tf_b) norm_b += f * f;
    if (norm_a == 0 || norm_b == 0) return 0.0;
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

std::unordered_map<std::string, double> score_similar_reports(
    const BugReport& report, const std::vector<const BugReport*>& history,
    const std::function<double(const BugReport&, const BugReport&)>& sim, TemporalAudit* audit) {
    std::unordered_map<std::string, double> scores;
    for (const BugReport* prior : history) {
        if (!prior->resolved_at || *prior->resolved_at >= report.created_at) continue;
        if (prior->fixed_files.empty()) continue;
        if (audit) audit->record("report", prior->id, *prior->resolved_at, report.created_at);
        double s = sim(report, *prior);
        if (s == 0) continue;
        double share = s / static_cast<double>(prior->fixed_files.size());
        for (const auto& f : prior->fixed_files) scores[f] += share;
    }
    return scores;
}

// ---- orchestration ----------------------------------------------------------

namespace {

std::vector<std::string> tokenize_terms(std::string_view text, textprep::SourceKind kind,
                                        const ScoringConfig& config) {
    return textprep::tokenize(text, kind, *config.term_filter).tokens;
}

std::string join_comments(const BugReport& r) {
    std::string out = r.description;
    for (const auto& c : r.comments) {
        out += '\n';
        out += c;
    }
    return out;
}

}  // namespace

SnapshotIndex SnapshotIndex::build(const Snapshot& snap, const ScoringConfig& config) {
    SnapshotIndex idx;
    idx.snapshot = &snap;
    idx.structures.resize(snap.files.size());
    parallel_for(snap.files.size(), [&](std::size_t i) {
        idx.structures[i] = codestruct::parse_structure(snap.files[i]);
    });
    for (std::size_t i = 0; i < snap.files.size(); ++i) idx.by_path[snap.files[i].path] = i;

    std::vector<search::FieldedDocument> docs(snap.files.size());
    parallel_for(snap.files.size(), [&](std::size_t i) {
        const auto& file = snap.files[i];
        search::FieldedDocument doc;
        doc.doc_id = file.path;
        doc.fields["content"] =
            tokenize_terms(file.content, textprep::SourceKind::kSourceCode, config);
        doc.fields["path"] = tokenize_terms(file.path, textprep::SourceKind::kSourceCode, config);
        std::string methods;
        for (const auto& m : idx.structures[i].methods) {
            methods += m;
            methods += ' ';
        }
        doc.fields["methods"] = tokenize_terms(methods, textprep::SourceKind::kSourceCode, config);
        docs[i] = std::move(doc);
    });
    idx.files = search::InvertedIndex::build(docs, {"content", "path", "methods"}, config.bm25);
    return idx;
}

ProjectContext ProjectContext::build(const corpus::ProjectData& project,
                                     const ScoringConfig& config) {
    ProjectContext ctx;
    ctx.project = &project;
    std::vector<search::FieldedDocument> docs(project.reports.size());
    std::vector<textprep::TokenStream> corpus_tokens(project.reports.size());
    parallel_for(project.reports.size(), [&](std::size_t i) {
        const BugReport& r = project.reports[i];
        search::FieldedDocument doc;
        doc.doc_id = r.id;
        doc.fields["summary"] =
            tokenize_terms(r.summary, textprep::SourceKind::kReportText, config);
        doc.fields["content"] =
            tokenize_terms(join_comments(r), textprep::SourceKind::kReportText, config);
        if (r.resolved_at) doc.attributes["closing_date"] = *r.resolved_at;
        docs[i] = std::move(doc);
        // prior-report corpus for sim_cos includes the comments
        corpus_tokens[i] = textprep::tokenize(r.summary + "\n" + join_comments(r),
                                              textprep::SourceKind::kReportText, *config.term_filter);
    });
    ctx.reports = search::InvertedIndex::build(docs, {"summary", "content"}, config.bm25);
    for (std::size_t i = 0; i < project.reports.size(); ++i) {
        ctx.reports_by_id[project.reports[i].id] = &project.reports[i];
        ctx.report_corpus_tokens[project.reports[i].id] = std::move(corpus_tokens[i]);
    }
    return ctx;
}

const SnapshotIndex& ProjectContext::snapshot_index(const Snapshot& snap,
                                                    const ScoringConfig& config) const {
    {
        std::lock_guard<std::mutex> lock(cache_->mu);
        auto it = cache_->by_label.find(snap.label);
        if (it != cache_->by_label.end()) return *it->second;
    }
    auto built = std::make_unique<SnapshotIndex>(SnapshotIndex::build(snap, config));
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto [it, inserted] = cache_->by_label.emplace(snap.label, std::move(built));
    return *it->second;
}

SearchEngineScores score_search_engine(const BugReport& report, const SnapshotIndex& snap,
                                       const ScoringConfig& config) {
    SearchEngineScores scores;
    const std::string text = report.summary + "\n" + report.description;
    const auto query_tokens =
        textprep::tokenize(text, textprep::SourceKind::kReportText, *config.term_filter);
    auto to_map = [](std::vector<search::SearchHit> hits) {
        search::max_normalize(hits);
        std::unordered_map<std::string, double> m;
        for (const auto& h : hits) m[h.doc_id] = h.score;
        return m;
    };
    scores.content = to_map(snap.files.query("content", query_tokens.tokens));
    scores.method = to_map(snap.files.query("methods", query_tokens.tokens));
    bool path_hint =
        text.find(".java") != std::string::npos || text.find('/') != std::string::npos;
    if (path_hint) scores.path = to_map(snap.files.query("path", query_tokens.tokens));
    return scores;
}

FeatureContext build_feature_context(const BugReport& report, const SnapshotIndex& snap,
                                     const ProjectContext& project, const ScoringConfig& config,
                                     TemporalAudit* audit) {
    FeatureContext ctx;
    ctx.report = &report;
    ctx.snap = &snap;
    ctx.report_text = report.summary + "\n" + report.description;

    ctx.stacktrace = extract_stacktrace(report, snap.structures);
    ctx.version_history = score_version_history(report, project.project->commits, audit);

    // prior resolved reports of the same project
    std::vector<const BugReport*> history;
    for (const auto& r : project.project->reports) {
        if (r.resolved_at && *r.resolved_at < report.created_at) history.push_back(&r);
    }
    // sim_cos: TF cosine over summary+description+comments of the prior,
    // summary+description of the query (its own comments may postdate triage)
    const auto query_tokens = textprep::tokenize(ctx.report_text, textprep::SourceKind::kReportText,
                                                 *config.term_filter);
    ctx.sim_cos = score_similar_reports(
        report, history,
        [&](const BugReport&, const BugReport& prior) {
            auto it = project.report_corpus_tokens.find(prior.id);
            if (it == project.report_corpus_tokens.end()) return 0.0;
            return cosine_similarity(query_tokens, it->second);
        },
        audit);
    ctx.sim_reporter = score_similar_reports(
        report, history,
        [](const BugReport& a, const BugReport& b) {
            return a.reporter == b.reporter ? 1.0 : 0.0;
        },
        audit);

    // search-based similarity: the closing-date condition excludes unresolved
    // reports and reports resolved at/after the query's creation
    search::AttributeFilter closed_before = [&](const search::AttributeMap& attrs) {
        auto it = attrs.find("closing_date");
        return it != attrs.end() && it->second < report.created_at;
    };
    auto eq4_from_hits = [&](std::vector<search::SearchHit> hits) {
        search::max_normalize(hits);
        std::unordered_map<std::string, double> scores;
        for (const auto& hit : hits) {
            auto it = project.reports_by_id.find(hit.doc_id);
            if (it == project.reports_by_id.end()) continue;
            const BugReport& prior = *it->second;
            if (prior.fixed_files.empty()) continue;
            if (audit)
                audit->record("report", prior.id, prior.resolved_at ? *prior.resolved_at : 0,
                              report.created_at);
            double share = hit.score / static_cast<double>(prior.fixed_files.size());
            for (const auto& f : prior.fixed_files) scores[f] += share;
        }
        return scores;
    };
    const std::map<std::string, double> equal_weights = {{"summary", 1.0}, {"content", 1.0}};
    ctx.br_summary = eq4_from_hits(project.reports.multi_field_query(
        equal_weights, tokenize_terms(report.summary, textprep::SourceKind::kReportText, config),
        closed_before));
    ctx.br_description = eq4_from_hits(project.reports.multi_field_query(
        equal_weights,
        tokenize_terms(report.description, textprep::SourceKind::kReportText, config),
        closed_before));

    // search engine over the snapshot files
    auto se = score_search_engine(report, snap, config);
    ctx.se_content = std::move(se.content);
    ctx.se_method = std::move(se.method);
    ctx.se_path = std::move(se.path);
    return ctx;
}

namespace {

double lookup(const std::unordered_map<std::string, double>& m, const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? 0.0 : it->second;
}

}  // namespace

FeatureVector compute_features(const FeatureContext& ctx, std::size_t ordinal) {
    const SnapshotFile& file = ctx.snap->snapshot->files[ordinal];
    const FileStructure& fs = ctx.snap->structures[ordinal];
    FeatureVector fv;
    fv.size = score_size(file);
    StructureScores st = score_structure_text(ctx.report_text, fs);
    fv.file_match = st.file_match;
    fv.class_match = st.class_match;
    fv.method_match = st.method_match;
    fv.stacktrace = score_stacktrace(file.path, ctx.stacktrace);
    fv.version_history = lookup(ctx.version_history, file.path);
    fv.sim_cos = lookup(ctx.sim_cos, file.path);
    fv.sim_reporter = lookup(ctx.sim_reporter, file.path);
    fv.se_content = lookup(ctx.se_content, file.path);
    fv.se_method = lookup(ctx.se_method, file.path);
    fv.se_path = lookup(ctx.se_path, file.path);
    fv.br_summary = lookup(ctx.br_summary, file.path);
    fv.br_description = lookup(ctx.br_description, file.path);
    return fv;
}

std::vector<FeatureVector> compute_all_features(const FeatureContext& ctx) {
    std::vector<FeatureVector> out(ctx.snap->snapshot->files.size());
    parallel_for(out.size(), [&](std::size_t i) { out[i] = compute_features(ctx, i); });
    return out;
}

}  // namespace bugloc::scoring
