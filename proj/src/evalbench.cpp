#include "bugloc/evalbench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "bugloc/util.hpp"

using nlohmann::json;

namespace bugloc::evalbench {

double average_precision(const std::vector<std::string>& ranked,
                         const std::unordered_set<std::string>& relevant) {
    if (relevant.empty()) throw std::invalid_argument("average_precision: empty relevant set");
    std::size_t hits = 0;
    double sum = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        if (relevant.count(ranked[k])) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(k + 1);
        }
    }
    if (hits == 0) return 0.0;  // nothing detectable in this ranking
    return sum / static_cast<double>(hits);
}

double reciprocal_rank(const std::vector<std::string>& ranked,
                       const std::unordered_set<std::string>& relevant) {
    for (std::size_t k = 0; k < ranked.size(); ++k)
        if (relevant.count(ranked[k])) return 1.0 / static_cast<double>(k + 1);
    return 0.0;
}

namespace {

double mean_of(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double sum = 0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
    double m = mean_of(values);
    double sq = 0;
    for (double v : values) sq += (v - m) * (v - m);
    return std::sqrt(sq / static_cast<double>(values.size() - 1));
}

}  // namespace

double mean_average_precision(const std::vector<double>& per_query_ap) {
    return mean_of(per_query_ap);
}

double mean_reciprocal_rank(const std::vector<double>& per_query_rr) {
    return mean_of(per_query_rr);
}

std::pair<double, double> effect_size(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("effect_size: both samples need length >= 2");
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double sa = sample_std(a), sb = sample_std(b);
    double pooled = std::sqrt(((na - 1) * sa * sa + (nb - 1) * sb * sb) / (na + nb - 2));
    if (pooled == 0) throw std::invalid_argument("effect_size: degenerate variance");
    return {(mean_of(a) - mean_of(b)) / pooled, pooled};
}

// ---- evaluation --------------------------------------------------------------

namespace {

std::vector<std::string> ranked_paths(const RankedList& list) {
    std::vector<std::string> paths;
    paths.reserve(list.entries.size());
    for (const auto& e : list.entries) paths.push_back(e.path);
    return paths;
}

}  // namespace

void evaluate_project(const fusion::ForestModel& model, const scoring::ProjectContext& project,
                      const BenchConfig& config, MatchStrategy strategy, EvalResult& out) {
    const corpus::ProjectData& data = *project.project;
    std::vector<double> aps, rrs;
    for (const auto& report : data.reports) {
        if (report.fixed_files.empty()) {
            out.diagnostics.push_back("report " + report.id + ": no ground truth, excluded");
            continue;
        }
        std::unordered_set<std::string> relevant(report.fixed_files.begin(),
                                                 report.fixed_files.end());
        QueryResult q;
        q.report_id = report.id;
        q.project = data.name;
        q.strategy = strategy;

        if (strategy == MatchStrategy::kRelease) {
            if (data.snapshots.empty()) {
                out.diagnostics.push_back("report " + report.id + ": no snapshots, skipped");
                continue;
            }
            auto res = corpus::resolve_release(report, data.snapshots);
            q.release_fallback = res.fallback;
            q.n_snapshots = 1;
            const auto& sidx = project.snapshot_index(*res.snapshot, config.scoring);
            auto ctx = scoring::build_feature_context(report, sidx, project, config.scoring);
            auto ranking = ranked_paths(fusion::rank_files(model, ctx));
            q.ap = average_precision(ranking, relevant);
            q.rr = reciprocal_rank(ranking, relevant);
            bool any_present = false;
            for (const auto& f : report.fixed_files)
                if (sidx.by_path.count(f)) any_present = true;
            q.detectable = any_present;
        } else {
            auto res = corpus::resolve_timeaware_snapshots(report, data.snapshots,
                                                           data.version_index);
            for (const auto& label : res.unresolved_versions)
                out.diagnostics.push_back("report " + report.id + ": fixed version \"" + label +
                                          "\" has no snapshot");
            q.n_snapshots = res.snapshots.size();
            q.detectable = !res.snapshots.empty();
            if (q.detectable) {
                // rule 2: unconditional average over all matched versions
                double ap_sum = 0, rr_sum = 0;
                for (const Snapshot* snap : res.snapshots) {
                    const auto& sidx = project.snapshot_index(*snap, config.scoring);
                    auto ctx = scoring::build_feature_context(report, sidx, project, config.scoring);
                    auto ranking = ranked_paths(fusion::rank_files(model, ctx));
                    ap_sum += average_precision(ranking, relevant);
                    rr_sum += reciprocal_rank(ranking, relevant);
                }
                q.ap = ap_sum / static_cast<double>(res.snapshots.size());
                q.rr = rr_sum / static_cast<double>(res.snapshots.size());
            }
        }
        if (!q.detectable) {
            out.diagnostics.push_back("report " + report.id + ": undetectable under " +
                                      std::string(to_string(strategy)) + " matching");
            if (config.exclude_undetectable) continue;
            q.ap = 0;
            q.rr = 0;
        }
        aps.push_back(q.ap);
        rrs.push_back(q.rr);
        out.queries.push_back(std::move(q));
    }
    if (aps.empty()) {
        out.diagnostics.push_back("project " + data.name + ": zero evaluable reports, skipped");
        return;
    }
    ProjectMetrics pm;
    pm.map = mean_average_precision(aps);
    pm.mrr = mean_reciprocal_rank(rrs);
    pm.n_queries = aps.size();
    out.per_project[data.name] = pm;
    out.detectability += corpus::detectability_report(data, strategy);
}

namespace {

void finalize(EvalResult& result) {
    std::vector<double> maps, mrrs;
    for (const auto& [name, pm] : result.per_project) {
        maps.push_back(pm.map);
        mrrs.push_back(pm.mrr);
    }
    result.mean_map = mean_of(maps);
    result.mean_mrr = mean_of(mrrs);
}

}  // namespace

EvalResult run_phase1(const std::vector<scoring::ProjectContext>& projects,
                      const BenchConfig& config) {
    if (projects.size() < 2)
        throw std::invalid_argument("phase 1 needs at least 2 projects for leave-one-project-out");
    EvalResult result;
    result.strategy = MatchStrategy::kRelease;
    for (std::size_t held_out = 0; held_out < projects.size(); ++held_out) {
        corpus::Diagnostics diags;
        fusion::TrainingSet ts;
        FoldInfo fold;
        fold.held_out = projects[held_out].project->name;
        for (std::size_t i = 0; i < projects.size(); ++i) {
            if (i == held_out) continue;
            auto part = fusion::build_training_set_for(projects[i], config.scoring, config.train, diags);
            fold.training_rows_by_project[projects[i].project->name] = part.rows.size();
            ts.rows.insert(ts.rows.end(), std::make_move_iterator(part.rows.begin()),
                           std::make_move_iterator(part.rows.end()));
        }
        result.folds.push_back(fold);
        for (auto& m : diags.messages) result.diagnostics.push_back(m);
        fusion::TrainConfig fold_config = config.train;
        fold_config.seed = derive_seed(config.train.seed, "phase1-fold",
                                       fnv1a(projects[held_out].project->name));
        auto model = fusion::train_forest(ts, fold_config);
        evaluate_project(model, projects[held_out], config, MatchStrategy::kRelease, result);
    }
    finalize(result);
    return result;
}

EvalResult run_phase2(const std::vector<scoring::ProjectContext>& train_projects,
                      const std::vector<scoring::ProjectContext>& eval_projects,
                      const BenchConfig& config) {
    EvalResult result;
    result.strategy = MatchStrategy::kRelease;
    corpus::Diagnostics diags;
    fusion::TrainingSet ts;
    FoldInfo fold;
    for (const auto& p : train_projects) {
        auto part = fusion::build_training_set_for(p, config.scoring, config.train, diags);
        fold.training_rows_by_project[p.project->name] = part.rows.size();
        ts.rows.insert(ts.rows.end(), std::make_move_iterator(part.rows.begin()),
                       std::make_move_iterator(part.rows.end()));
    }
    result.folds.push_back(fold);
    for (auto& m : diags.messages) result.diagnostics.push_back(m);
    auto model = fusion::train_forest(ts, config.train);

    std::unordered_set<std::string> train_names;
    for (const auto& p : train_projects) train_names.insert(p.project->name);
    for (const auto& p : eval_projects) {
        if (train_names.count(p.project->name)) {
            result.diagnostics.push_back("project " + p.project->name +
                                         ": present in training data, excluded from evaluation");
            continue;
        }
        evaluate_project(model, p, config, MatchStrategy::kRelease, result);
    }
    finalize(result);
    return result;
}

Phase3Result run_phase3(const std::vector<scoring::ProjectContext>& train_projects,
                        const std::vector<scoring::ProjectContext>& eval_projects,
                        const BenchConfig& config) {
    Phase3Result out;
    out.release.strategy = MatchStrategy::kRelease;
    out.timeaware.strategy = MatchStrategy::kTimeAware;
    corpus::Diagnostics diags;
    fusion::TrainingSet ts;
    FoldInfo fold;
    for (const auto& p : train_projects) {
        auto part = fusion::build_training_set_for(p, config.scoring, config.train, diags);
        fold.training_rows_by_project[p.project->name] = part.rows.size();
        ts.rows.insert(ts.rows.end(), std::make_move_iterator(part.rows.begin()),
                       std::make_move_iterator(part.rows.end()));
    }
    out.release.folds.push_back(fold);
    out.timeaware.folds.push_back(fold);
    auto model = fusion::train_forest(ts, config.train);
    for (auto& m : diags.messages) out.release.diagnostics.push_back(m);

    std::unordered_set<std::string> train_names;
    for (const auto& p : train_projects) train_names.insert(p.project->name);
    for (const auto& p : eval_projects) {
        if (train_names.count(p.project->name)) {
            out.release.diagnostics.push_back("project " + p.project->name +
                                              ": present in training data, excluded");
            continue;
        }
        evaluate_project(model, p, config, MatchStrategy::kRelease, out.release);
        evaluate_project(model, p, config, MatchStrategy::kTimeAware, out.timeaware);
    }
    finalize(out.release);
    finalize(out.timeaware);

    std::vector<double> release_maps, timeaware_maps;
    for (const auto& [name, pm] : out.release.per_project) {
        auto it = out.timeaware.per_project.find(name);
        if (it == out.timeaware.per_project.end()) continue;
        release_maps.push_back(pm.map);
        timeaware_maps.push_back(it->second.map);
    }
    try {
        auto [d, s] = effect_size(timeaware_maps, release_maps);
        out.cohens_d_map = d;
        out.pooled_s_map = s;
        out.effect_size_valid = true;
    } catch (const std::invalid_argument& e) {
        out.release.diagnostics.push_back(std::string("effect size unavailable: ") + e.what());
    }
    return out;
}

// ---- result serialization ------------------------------------------------------

void write_human_table(std::ostream& out, const EvalResult& result, const RunStamp& stamp) {
    out << "strategy: " << to_string(result.strategy) << "  seed: " << stamp.seed
        << "  config: " << stamp.config_hash << "\n";
    out << std::left << std::setw(28) << "project" << std::right << std::setw(10) << "MAP"
        << std::setw(10) << "MRR" << std::setw(10) << "queries" << "\n";
    for (const auto& [name, pm] : result.per_project) {
        out << std::left << std::setw(28) << name << std::right << std::fixed
            << std::setprecision(4) << std::setw(10) << pm.map << std::setw(10) << pm.mrr
            << std::setw(10) << pm.n_queries << "\n";
    }
    out << std::left << std::setw(28) << "mean" << std::right << std::fixed
        << std::setprecision(4) << std::setw(10) << result.mean_map << std::setw(10)
        << result.mean_mrr << std::setw(10) << result.queries.size() << "\n";
    out.unsetf(std::ios::fixed);
    const auto& d = result.detectability;
    out << "undetectable files: " << d.undetectable_files << "/" << d.total_fixed_files << " ("
        << std::setprecision(3) << d.undetectable_file_pct() << "%)  undetectable bugs: "
        << d.undetectable_reports << "/" << d.total_reports << " (" << d.undetectable_report_pct()
        << "%)\n";
}

void write_project_records(std::ostream& out, const EvalResult& result, const RunStamp& stamp) {
    for (const auto& [name, pm] : result.per_project) {
        json j;
        j["project"] = name;
        j["strategy"] = to_string(result.strategy);
        j["map"] = pm.map;
        j["mrr"] = pm.mrr;
        j["n_queries"] = pm.n_queries;
        j["seed"] = stamp.seed;
        j["config_hash"] = stamp.config_hash;
        out << j.dump() << "\n";
    }
}

void write_query_records(std::ostream& out, const EvalResult& result, const RunStamp& stamp) {
    for (const auto& q : result.queries) {
        json j;
        j["report_id"] = q.report_id;
        j["project"] = q.project;
        j["strategy"] = to_string(q.strategy);
        j["ap"] = q.ap;
        j["rr"] = q.rr;
        j["n_snapshots"] = q.n_snapshots;
        j["detectable"] = q.detectable;
        j["release_fallback"] = q.release_fallback;
        j["seed"] = stamp.seed;
        j["config_hash"] = stamp.config_hash;
        out << j.dump() << "\n";
    }
}

}  // namespace bugloc::evalbench
