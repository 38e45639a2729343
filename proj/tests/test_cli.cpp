#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "support.hpp"
#include "synthcorpus.hpp"

using testsupport::TempDir;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::string& args) {
    TempDir io("cli_io");
    std::string out_path = (io.path() / "out.txt").string();
    std::string err_path = (io.path() / "err.txt").string();
    std::string cmd = std::string(BUGLOC_CLI_PATH) + " " + args + " > " + out_path + " 2> " + err_path;
    int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    auto slurp = [](const std::string& p) {
        std::ifstream in(p);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

std::string file_contents(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("end-to-end: index, train, localize, evaluate") {
    TempDir corpus_dir("cli_corpus");
    TempDir train_dir("cli_train");
    auto eval_project = synthcorpus::make_synth_project("appeval", "ev");
    auto train_project = synthcorpus::make_synth_project("libtrain", "tr");
    synthcorpus::write_project(corpus_dir.str(), eval_project.data);
    synthcorpus::write_project(train_dir.str(), train_project.data);

    TempDir out1("cli_out_index");
    SUBCASE("index builds deterministic artifacts and prints statistics") {
        auto r = run_cli("index --corpus " + corpus_dir.str() + " --output " + out1.str());
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("projects: 1") != std::string::npos);
        CHECK(r.out.find("snapshots: 1") != std::string::npos);
        std::string idx_path = out1.str() + "/index/appeval/v1.files.idx";
        std::string first = file_contents(idx_path);
        CHECK(first.find("buglocidx 1") == 0);

        TempDir out2("cli_out_index2");
        auto r2 = run_cli("index --corpus " + corpus_dir.str() + " --output " + out2.str());
        CHECK(r2.exit_code == 0);
        CHECK(file_contents(out2.str() + "/index/appeval/v1.files.idx") == first);
    }

    SUBCASE("missing corpus fails with a diagnostic naming the path") {
        auto r = run_cli("index --corpus /nonexistent/corpus --output " + out1.str());
        CHECK(r.exit_code != 0);
        CHECK(r.err.find("/nonexistent/corpus") != std::string::npos);
    }

    SUBCASE("train, localize and evaluate wire together") {
        TempDir model_out("cli_model");
        auto t = run_cli("train --corpus " + train_dir.str() + " --output " + model_out.str() +
                         " --trees 60 --neg-ratio 10 --seed 7");
        CHECK(t.exit_code == 0);
        std::string model_file = model_out.str() + "/model.frst";
        std::string model_bytes = file_contents(model_file);
        CHECK(model_bytes.find("buglocforest 1") == 0);
        // importance table has 13 rows
        std::istringstream imp(file_contents(model_out.str() + "/feature_importance.txt"));
        std::string line;
        std::size_t rows = 0;
        while (std::getline(imp, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 13);

        // same seed: identical model bytes
        TempDir model_out2("cli_model2");
        auto t2 = run_cli("train --corpus " + train_dir.str() + " --output " + model_out2.str() +
                          " --trees 60 --neg-ratio 10 --seed 7");
        CHECK(t2.exit_code == 0);
        CHECK(file_contents(model_out2.str() + "/model.frst") == model_bytes);

        // localize a planted stack-trace report: fixed file at rank 1
        const std::string& report_id = eval_project.stacktrace_reports[0];
        auto l = run_cli("localize --corpus " + corpus_dir.str() + " --model " + model_file +
                         " --report " + report_id + " --top 5");
        CHECK(l.exit_code == 0);
        std::istringstream lines(l.out);
        std::string first_line;
        REQUIRE(std::getline(lines, first_line));
        auto j = nlohmann::json::parse(first_line, nullptr, false);
        REQUIRE(!j.is_discarded());
        CHECK(j["rank"] == 1);
        const bugloc::BugReport* planted = eval_project.data.find_report(report_id);
        REQUIRE(planted != nullptr);
        CHECK(j["path"] == planted->fixed_files[0]);
        CHECK(j["components"].size() == 13);

        // unknown report id fails
        auto bad = run_cli("localize --corpus " + corpus_dir.str() + " --model " + model_file +
                           " --report NOPE-1");
        CHECK(bad.exit_code != 0);
        CHECK(bad.err.find("NOPE-1") != std::string::npos);

        // ad-hoc report from a file, --top larger than the snapshot clamps
        TempDir adhoc("cli_adhoc");
        std::ofstream rf(adhoc.path() / "report.jsonl");
        rf << R"({"id":"ADHOC-1","project":"appeval","summary":"evalalphasurge regression",)"
           << R"("description":"evalalphasurge spikes again","created_at":"2021-01-01T00:00:00Z"})"
           << "\n";
        rf.close();
        auto ah = run_cli("localize --corpus " + corpus_dir.str() + " --model " + model_file +
                          " --report-file " + (adhoc.path() / "report.jsonl").string() +
                          " --top 999");
        CHECK(ah.exit_code == 0);
        std::istringstream ah_lines(ah.out);
        std::size_t emitted = 0;
        std::string ah_line;
        while (std::getline(ah_lines, ah_line))
            if (!ah_line.empty()) ++emitted;
        CHECK(emitted == 20);  // full snapshot ranked, clamped to its size

        // time-aware localize ranks each matched snapshot
        auto ta = run_cli("localize --corpus " + corpus_dir.str() + " --model " + model_file +
                          " --report " + report_id + " --strategy timeaware --top 1");
        CHECK(ta.exit_code == 0);
        auto tj = nlohmann::json::parse(ta.out.substr(0, ta.out.find('\n')), nullptr, false);
        REQUIRE(!tj.is_discarded());
        CHECK(tj["snapshot"] == "v1");

        // evaluate phase 2 writes result artifacts with seed and config hash
        TempDir eval_out("cli_eval");
        auto e = run_cli("evaluate --phase 2 --corpus " + corpus_dir.str() + " --train " +
                         train_dir.str() + " --output " + eval_out.str() +
                         " --trees 60 --neg-ratio 10 --seed 7");
        CHECK(e.exit_code == 0);
        std::string table = file_contents(eval_out.str() + "/phase2_results.txt");
        CHECK(table.find("appeval") != std::string::npos);
        CHECK(table.find("seed: 7") != std::string::npos);
        std::string per_query = file_contents(eval_out.str() + "/phase2_per_query.jsonl");
        CHECK(per_query.find("config_hash") != std::string::npos);

        // phase 2 without --train is an error
        auto e2 = run_cli("evaluate --phase 2 --corpus " + corpus_dir.str() + " --output " +
                          eval_out.str() + "2");
        CHECK(e2.exit_code != 0);
        CHECK(e2.err.find("--train") != std::string::npos);
    }

    SUBCASE("config file values apply under flag precedence") {
        TempDir cfg_dir("cli_cfg");
        std::ofstream cfg(cfg_dir.path() / "run.conf");
        cfg << "trees = 40\nseed = 99\nneg_ratio = 10\n";
        cfg.close();
        TempDir model_out("cli_model_cfg");
        // --seed on the command line beats the file; trees comes from the file
        auto t = run_cli("train --corpus " + train_dir.str() + " --output " + model_out.str() +
                         " --config " + (cfg_dir.path() / "run.conf").string() + " --seed 7");
        CHECK(t.exit_code == 0);
        CHECK(t.out.find("seed: 7") != std::string::npos);
        std::string model = file_contents(model_out.str() + "/model.frst");
        CHECK(model.find("trees 40") != std::string::npos);
    }

    SUBCASE("output lock blocks concurrent use of the same directory") {
        TempDir locked("cli_locked");
        std::ofstream(locked.path() / ".lock") << "";
        auto r = run_cli("index --corpus " + corpus_dir.str() + " --output " + locked.str());
        CHECK(r.exit_code != 0);
        CHECK(r.err.find("lock") != std::string::npos);
    }
}

}  // TEST_SUITE
