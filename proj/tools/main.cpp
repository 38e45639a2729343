#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bugloc/corpus.hpp"
#include "bugloc/evalbench.hpp"
#include "bugloc/fusion.hpp"
#include "bugloc/scoring.hpp"
#include "bugloc/textprep.hpp"
#include "bugloc/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bugloc;

namespace {

struct RunConfig {
    std::string corpus_dir;
    std::string train_dir;
    std::string output_dir = "bugloc-out";
    std::string model_file;
    std::string report_id;
    std::string report_file;
    std::string stopwords_file;
    std::string keywords_file;
    std::string strategy = "release";
    int phase = 1;
    std::uint64_t seed = 42;
    std::size_t trees = 1000;
    std::size_t neg_ratio = 50;
    std::size_t top = 10;
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
    bool exclude_undetectable = false;

    MatchStrategy match_strategy() const {
        if (strategy == "release") return MatchStrategy::kRelease;
        if (strategy == "timeaware") return MatchStrategy::kTimeAware;
        throw std::runtime_error("unknown strategy: " + strategy + " (release|timeaware)");
    }

    // canonical form hashed into every output artifact
    std::string canonical() const {
        std::ostringstream s;
        s << "strategy=" << strategy << ";trees=" << trees << ";neg_ratio=" << neg_ratio
          << ";top=" << top << ";bm25_k1=" << bm25_k1 << ";bm25_b=" << bm25_b
          << ";exclude_undetectable=" << exclude_undetectable << ";stopwords=" << stopwords_file
          << ";keywords=" << keywords_file;
        return s.str();
    }
    std::string config_hash() const {
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a(canonical())));
        return buf;
    }
};

// flat key=value file; values from flags take precedence
void apply_config_file(const std::string& path, const CLI::App& app, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto take = [&](const char* key, const char* flag, auto& target) {
        auto it = kv.find(key);
        if (it == kv.end()) return;
        if (app.count(flag) > 0) return;  // flag wins
        std::istringstream vs(it->second);
        vs >> target;
        if (vs.fail()) throw std::runtime_error(std::string("bad config value for ") + key);
    };
    take("seed", "--seed", cfg.seed);
    take("trees", "--trees", cfg.trees);
    take("neg_ratio", "--neg-ratio", cfg.neg_ratio);
    take("top", "--top", cfg.top);
    take("bm25_k1", "--bm25-k1", cfg.bm25_k1);
    take("bm25_b", "--bm25-b", cfg.bm25_b);
    take("strategy", "--strategy", cfg.strategy);
    take("output", "--output", cfg.output_dir);
    take("stopwords", "--stopwords", cfg.stopwords_file);
    take("java_keywords", "--java-keywords", cfg.keywords_file);
    take("exclude_undetectable", "--exclude-undetectable", cfg.exclude_undetectable);
}

/// Guards the output directory against concurrent runs.
class OutputLock {
public:
    explicit OutputLock(const std::string& dir) : path_(fs::path(dir) / ".lock") {
        fs::create_directories(dir);
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (!f)
            throw std::runtime_error("output directory is locked (remove " + path_.string() +
                                     " if no other run is active)");
        std::fclose(f);
    }
    ~OutputLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }

private:
    fs::path path_;
};

const textprep::TermFilter* make_term_filter(const RunConfig& cfg,
                                             std::unique_ptr<textprep::TermFilter>& holder) {
    if (cfg.stopwords_file.empty() && cfg.keywords_file.empty())
        return &textprep::TermFilter::defaults();
    auto stop = cfg.stopwords_file.empty() ? textprep::TermFilter::defaults().stop_words()
                                           : textprep::load_term_list(cfg.stopwords_file);
    auto kw = cfg.keywords_file.empty() ? textprep::TermFilter::defaults().java_keywords()
                                        : textprep::load_term_list(cfg.keywords_file);
    holder = std::make_unique<textprep::TermFilter>(std::move(stop), std::move(kw));
    return holder.get();
}

void print_diagnostics(const corpus::Diagnostics& diags) {
    for (const auto& m : diags.messages) std::cerr << "warning: " << m << "\n";
}

std::vector<scoring::ProjectContext> build_contexts(const std::vector<corpus::ProjectData>& data,
                                                    const scoring::ScoringConfig& sc) {
    std::vector<scoring::ProjectContext> contexts;
    contexts.reserve(data.size());
    for (const auto& p : data) contexts.push_back(scoring::ProjectContext::build(p, sc));
    return contexts;
}

int cmd_index(const RunConfig& cfg, const scoring::ScoringConfig& sc) {
    corpus::Diagnostics diags;
    auto dataset = corpus::load_dataset(cfg.corpus_dir, diags);
    print_diagnostics(diags);
    OutputLock lock(cfg.output_dir);

    std::size_t total_reports = 0, total_snapshots = 0, total_files = 0, total_commits = 0;
    for (const auto& project : dataset) {
        fs::path proj_dir = fs::path(cfg.output_dir) / "index" / project.name;
        fs::create_directories(proj_dir);
        auto ctx = scoring::ProjectContext::build(project, sc);
        ctx.reports.save_file((proj_dir / "reports.idx").string());
        for (const auto& snap : project.snapshots) {
            const auto& sidx = ctx.snapshot_index(snap, sc);
            sidx.files.save_file((proj_dir / (snap.label + ".files.idx")).string());
            total_files += snap.files.size();
        }
        total_reports += project.reports.size();
        total_snapshots += project.snapshots.size();
        total_commits += project.commits.size();
    }
    std::cout << "projects: " << dataset.size() << "\nreports: " << total_reports
              << "\ncommits: " << total_commits << "\nsnapshots: " << total_snapshots
              << "\nfiles: " << total_files << "\n";
    return 0;
}

int cmd_train(const RunConfig& cfg, const scoring::ScoringConfig& sc) {
    corpus::Diagnostics diags;
    auto dataset = corpus::load_dataset(cfg.corpus_dir, diags);
    print_diagnostics(diags);
    OutputLock lock(cfg.output_dir);

    auto contexts = build_contexts(dataset, sc);
    fusion::TrainConfig tc;
    tc.tree_count = cfg.trees;
    tc.seed = cfg.seed;
    tc.negatives_per_positive = cfg.neg_ratio;
    corpus::Diagnostics train_diags;
    auto ts = fusion::build_training_set(contexts, sc, tc, train_diags);
    print_diagnostics(train_diags);
    if (ts.rows.empty()) throw std::runtime_error("no training rows (empty ground truth?)");

    auto model = fusion::train_forest(ts, tc);
    fs::path out(cfg.output_dir);
    model.save_file((out / "model.frst").string());

    auto importance = fusion::permutation_importance(model, ts.rows, derive_seed(cfg.seed, "importance"));
    {
        std::ofstream imp(out / "feature_importance.txt");
        for (const auto& [name, value] : importance) imp << name << "\t" << value << "\n";
    }
    {
        std::ofstream freq(out / "split_frequency.txt");
        for (const auto& [name, value] : fusion::split_frequency(model))
            freq << name << "\t" << value << "\n";
    }
    std::cout << "training rows: " << ts.rows.size() << "\nmodel: " << (out / "model.frst").string()
              << "\nseed: " << cfg.seed << "\nconfig: " << cfg.config_hash() << "\n";
    return 0;
}

int cmd_localize(const RunConfig& cfg, const scoring::ScoringConfig& sc) {
    if (cfg.model_file.empty()) throw std::runtime_error("localize requires --model");
    corpus::Diagnostics diags;
    auto dataset = corpus::load_dataset(cfg.corpus_dir, diags);
    print_diagnostics(diags);
    auto model = fusion::ForestModel::load_file(cfg.model_file);

    BugReport ad_hoc;
    const BugReport* report = nullptr;
    const corpus::ProjectData* project = nullptr;
    if (!cfg.report_file.empty()) {
        corpus::Diagnostics rd;
        auto reports = corpus::load_bug_reports(cfg.report_file, dataset.front().name, rd);
        print_diagnostics(rd);
        if (reports.empty()) throw std::runtime_error("no valid report in " + cfg.report_file);
        ad_hoc = reports.front();
        report = &ad_hoc;
        for (const auto& p : dataset)
            if (p.name == report->project) project = &p;
        if (!project) throw std::runtime_error("unknown project in ad-hoc report: " + report->project);
    } else if (!cfg.report_id.empty()) {
        for (const auto& p : dataset) {
            if (const BugReport* r = p.find_report(cfg.report_id)) {
                report = r;
                project = &p;
            }
        }
        if (!report) throw std::runtime_error("unknown report id: " + cfg.report_id);
    } else {
        throw std::runtime_error("localize requires --report or --report-file");
    }
    if (project->snapshots.empty())
        throw std::runtime_error("project " + project->name + " has no snapshots");

    // release matching ranks one snapshot; time-aware matching (ground truth
    // required) ranks each matched snapshot separately
    std::vector<const Snapshot*> snaps;
    if (cfg.match_strategy() == MatchStrategy::kRelease) {
        snaps.push_back(corpus::resolve_release(*report, project->snapshots).snapshot);
    } else {
        auto res = corpus::resolve_timeaware_snapshots(*report, project->snapshots,
                                                       project->version_index);
        for (const auto& label : res.unresolved_versions)
            std::cerr << "warning: fixed version \"" << label << "\" has no snapshot\n";
        if (res.snapshots.empty())
            throw std::runtime_error("report " + report->id +
                                     " is undetectable under time-aware matching");
        snaps = res.snapshots;
    }

    auto ctx = scoring::ProjectContext::build(*project, sc);
    for (const Snapshot* snap : snaps) {
        const auto& sidx = ctx.snapshot_index(*snap, sc);
        auto fctx = scoring::build_feature_context(*report, sidx, ctx, sc);
        auto ranking = fusion::rank_files(model, fctx);
        std::size_t n = std::min<std::size_t>(cfg.top, ranking.entries.size());
        for (std::size_t i = 0; i < n; ++i) {
            const auto& e = ranking.entries[i];
            json j;
            j["rank"] = i + 1;
            j["path"] = e.path;
            j["score"] = e.score;
            json comp;
            for (std::size_t f = 0; f < FeatureVector::kCount; ++f)
                comp[kFeatureNames[f]] = e.components[f];
            j["components"] = comp;
            j["report_id"] = report->id;
            j["snapshot"] = snap->label;
            std::cout << j.dump() << "\n";
        }
        std::cerr << "ranked " << ranking.entries.size() << " files of snapshot " << snap->label
                  << " for report " << report->id << "\n";
    }
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, const scoring::ScoringConfig& sc) {
    corpus::Diagnostics diags;
    auto dataset = corpus::load_dataset(cfg.corpus_dir, diags);
    print_diagnostics(diags);
    OutputLock lock(cfg.output_dir);

    evalbench::BenchConfig bc;
    bc.scoring = sc;
    bc.train.tree_count = cfg.trees;
    bc.train.seed = cfg.seed;
    bc.train.negatives_per_positive = cfg.neg_ratio;
    bc.exclude_undetectable = cfg.exclude_undetectable;
    evalbench::RunStamp stamp{cfg.seed, cfg.config_hash()};

    auto contexts = build_contexts(dataset, sc);
    fs::path out(cfg.output_dir);

    auto dump = [&](const evalbench::EvalResult& result, const std::string& prefix) {
        for (const auto& d : result.diagnostics) std::cerr << "note: " << d << "\n";
        std::ofstream table(out / (prefix + "_results.txt"));
        evalbench::write_human_table(table, result, stamp);
        std::ofstream proj(out / (prefix + "_per_project.jsonl"));
        evalbench::write_project_records(proj, result, stamp);
        std::ofstream query(out / (prefix + "_per_query.jsonl"));
        evalbench::write_query_records(query, result, stamp);
        evalbench::write_human_table(std::cout, result, stamp);
    };

    if (cfg.phase == 1) {
        auto result = evalbench::run_phase1(contexts, bc);
        dump(result, "phase1");
    } else if (cfg.phase == 2 || cfg.phase == 3) {
        if (cfg.train_dir.empty())
            throw std::runtime_error("phase " + std::to_string(cfg.phase) + " requires --train");
        corpus::Diagnostics train_diags;
        auto train_data = corpus::load_dataset(cfg.train_dir, train_diags);
        print_diagnostics(train_diags);
        auto train_contexts = build_contexts(train_data, sc);
        if (cfg.phase == 2) {
            auto result = evalbench::run_phase2(train_contexts, contexts, bc);
            dump(result, "phase2");
        } else {
            auto result = evalbench::run_phase3(train_contexts, contexts, bc);
            dump(result.release, "phase3_release");
            dump(result.timeaware, "phase3_timeaware");
            std::ofstream eff(out / "phase3_effect_size.txt");
            if (result.effect_size_valid) {
                eff << "cohens_d_map\t" << result.cohens_d_map << "\n";
                eff << "pooled_s_map\t" << result.pooled_s_map << "\n";
                std::cout << "effect size (timeaware vs release, MAP): d = " << result.cohens_d_map
                          << ", pooled s = " << result.pooled_s_map << "\n";
            } else {
                eff << "unavailable\n";
            }
        }
    } else {
        throw std::runtime_error("unknown phase: " + std::to_string(cfg.phase) + " (1|2|3)");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bugloc: rank source files by their likelihood of containing a reported bug"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string config_file;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--corpus", cfg.corpus_dir, "corpus directory")->required();
        sub->add_option("--config", config_file, "flat key=value config file");
        sub->add_option("--seed", cfg.seed, "root seed for all randomized steps");
        sub->add_option("--output", cfg.output_dir, "output directory");
        sub->add_option("--strategy", cfg.strategy, "release|timeaware");
        sub->add_option("--trees", cfg.trees, "forest size")->check(CLI::PositiveNumber);
        sub->add_option("--neg-ratio", cfg.neg_ratio, "negatives per positive")
            ->check(CLI::PositiveNumber);
        sub->add_option("--top", cfg.top, "entries printed by localize")->check(CLI::PositiveNumber);
        sub->add_option("--bm25-k1", cfg.bm25_k1, "BM25 k1")->check(CLI::PositiveNumber);
        sub->add_option("--bm25-b", cfg.bm25_b, "BM25 b");
        sub->add_option("--stopwords", cfg.stopwords_file, "stop-word list override");
        sub->add_option("--java-keywords", cfg.keywords_file, "Java keyword list override");
        sub->add_flag("--exclude-undetectable", cfg.exclude_undetectable,
                      "exclude undetectable queries instead of scoring them 0");
        return sub;
    };
    CLI::App* index = add_common(app.add_subcommand("index", "build and persist search indices"));
    CLI::App* train = add_common(app.add_subcommand("train", "train the fusion model"));
    CLI::App* localize = add_common(app.add_subcommand("localize", "rank files for one report"));
    localize->add_option("--model", cfg.model_file, "model file from `train`");
    localize->add_option("--report", cfg.report_id, "report id from the corpus");
    localize->add_option("--report-file", cfg.report_file, "ad-hoc report (one JSON record)");
    CLI::App* evaluate = add_common(app.add_subcommand("evaluate", "run a benchmark protocol"));
    evaluate->add_option("--phase", cfg.phase, "1: leave-one-project-out, 2: transfer, 3: paired "
                                               "release/time-aware")->check(CLI::Range(1, 3));
    evaluate->add_option("--train", cfg.train_dir, "training corpus (phases 2 and 3)");

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!config_file.empty()) apply_config_file(config_file, *sub, cfg);

        std::unique_ptr<textprep::TermFilter> filter_holder;
        scoring::ScoringConfig sc;
        sc.bm25.k1 = cfg.bm25_k1;
        sc.bm25.b = cfg.bm25_b;
        sc.term_filter = make_term_filter(cfg, filter_holder);

        if (sub == index) return cmd_index(cfg, sc);
        if (sub == train) return cmd_train(cfg, sc);
        if (sub == localize) return cmd_localize(cfg, sc);
        if (sub == evaluate) return cmd_evaluate(cfg, sc);
        throw std::runtime_error("unreachable subcommand");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
