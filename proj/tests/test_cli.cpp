#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "e2e_fixture.hpp"
#include "helpers.hpp"
#include "sec/runner.hpp"
#include "sec/subprocess.hpp"
#include "sec/util.hpp"

using namespace sec;
using namespace sec::testing;

namespace {

const std::string kBin = SEC_HARNESS_BIN;

SubprocessResult invoke(const std::string& args) {
    return run_subprocess(kBin + " " + args + " 2>&1", "", 120.0);
}

}  // namespace

TEST_CASE("run over the bundled fixture writes report and summary") {
    TempDir dir("cli_run");
    std::string fixture = build_e2e_fixture(dir.str());
    std::string out = dir.file("out");
    SubprocessResult res = invoke("run --task gsm8k --strategy cot-sec --dataset " + e2e_dir() +
                                  "/dataset.jsonl --backend replay --fixture " + fixture +
                                  " --out " + out);
    CAPTURE(res.stdout_text);
    CHECK(res.exit_code == 0);
    CHECK(std::filesystem::exists(out + "/report.json"));
    CHECK(std::filesystem::exists(out + "/summary.csv"));
    json report = json::parse(read_file(out + "/report.json"));
    CHECK(report["accuracy"] == 0.75);
    CHECK(report["n_fallback"] == 1);
    std::string csv = read_file(out + "/summary.csv");
    CHECK(csv.find("gsm8k,cot-sec,5,20,0.750000,1,0") != std::string::npos);
    CHECK(res.stdout_text.find("accuracy=0.75") != std::string::npos);
}

TEST_CASE("missing required flags name the flag and exit 1") {
    SubprocessResult res = invoke("run --task gsm8k --strategy cot-sec");
    CHECK(res.exit_code != 0);
    CHECK(res.stdout_text.find("--dataset") != std::string::npos);
}

TEST_CASE("bad strategy value exits 1 with a diagnostic, not a stack trace") {
    TempDir dir("cli_bad");
    write_file(dir.file("d.jsonl"), R"({"id": "x", "question": "q", "answer": "1"})" "\n");
    SubprocessResult res =
        invoke("run --task gsm8k --strategy cot --dataset " + dir.file("d.jsonl") +
               " --backend replay --fixture none --out " + dir.file("out"));
    CHECK(res.exit_code == 1);
    CHECK(res.stdout_text.find("error:") != std::string::npos);
    CHECK(res.stdout_text.find("cot") != std::string::npos);
}

TEST_CASE("gen-base5 writes n lines of valid dataset") {
    TempDir dir("cli_b5");
    std::string out = dir.file("b5.jsonl");
    SubprocessResult res = invoke("gen-base5 --n 200 --seed 7 --out " + out);
    CHECK(res.exit_code == 0);
    std::string text = read_file(out);
    int lines = 0;
    for (const auto& line : split(text, "\n"))
        if (!trim(line).empty()) ++lines;
    CHECK(lines == 200);
    // determinism: the same seed reproduces the same file
    std::string out2 = dir.file("b5_again.jsonl");
    invoke("gen-base5 --n 200 --seed 7 --out " + out2);
    CHECK(read_file(out) == read_file(out2));
}

TEST_CASE("compare of a run against itself has empty off-diagonals") {
    TempDir dir("cli_cmp");
    std::string fixture = build_e2e_fixture(dir.str());
    std::string out = dir.file("out");
    invoke("run --task gsm8k --strategy cot-sec --dataset " + e2e_dir() +
           "/dataset.jsonl --backend replay --fixture " + fixture + " --out " + out);
    SubprocessResult res = invoke("compare --a " + out + "/report.json --b " + out +
                                  "/report.json --out " + dir.file("transition.json"));
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.find("a_only=0") != std::string::npos);
    CHECK(res.stdout_text.find("b_only=0") != std::string::npos);
    json t = json::parse(read_file(dir.file("transition.json")));
    CHECK(t["n_total"] == 20);
    CHECK(t["both_correct"].get<int>() + t["both_wrong"].get<int>() == 20);
}

TEST_CASE("similarity subcommand reports per-shot means") {
    TempDir dir("cli_sim");
    std::string fixture = build_e2e_fixture(dir.str());
    std::string out = dir.file("out");
    invoke("run --task gsm8k --strategy cot-sec --dataset " + e2e_dir() +
           "/dataset.jsonl --backend replay --fixture " + fixture + " --out " + out);
    SubprocessResult res = invoke("similarity --report " + out + "/report.json --out " +
                                  dir.file("similarity.json"));
    CHECK(res.exit_code == 0);
    json sim = json::parse(read_file(dir.file("similarity.json")));
    CHECK(sim["provider"] == "tf_cosine_builtin");
    CHECK(sim["mean_per_shot"].size() == 5);
    CHECK(sim["per_item"].size() == 20);
    double mean = sim["mean_overall"].get<double>();
    CHECK(mean > 0.0);
    CHECK(mean <= 1.0);
}

TEST_CASE("report subcommand reprints a saved summary") {
    TempDir dir("cli_rep");
    std::string fixture = build_e2e_fixture(dir.str());
    std::string out = dir.file("out");
    invoke("run --task gsm8k --strategy cot-sec --dataset " + e2e_dir() +
           "/dataset.jsonl --backend replay --fixture " + fixture + " --out " + out);
    SubprocessResult res = invoke("report --report " + out + "/report.json");
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.find("n=20") != std::string::npos);
    CHECK(res.stdout_text.find("accuracy=0.75") != std::string::npos);
}

TEST_CASE("config file values apply under flag precedence") {
    TempDir dir("cli_cfg");
    std::string fixture = build_e2e_fixture(dir.str());
    write_file(dir.file("run.ini"),
               "[run]\n"
               "task=gsm8k\n"
               "strategy=cot-sec\n"
               "dataset=" + e2e_dir() + "/dataset.jsonl\n"
               "backend=replay\n"
               "fixture=" + fixture + "\n"
               "limit=5\n");
    std::string out = dir.file("out");
    // --limit on the command line overrides the config file's 5
    SubprocessResult res =
        invoke("--config " + dir.file("run.ini") + " run --limit 3 --out " + out);
    CAPTURE(res.stdout_text);
    CHECK(res.exit_code == 0);
    json report = json::parse(read_file(out + "/report.json"));
    CHECK(report["n_total"] == 3);
    CHECK(report["config"]["limit"] == 3);
}

TEST_CASE("record then replay closes the loop") {
    // a stub endpoint that answers every chat completion identically
    httplib::Server server;
    server.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        json payload;
        payload["choices"] = json::array(
            {{{"message", {{"content", "The answer is 2."}}}, {"finish_reason", "stop"}}});
        res.set_content(payload.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    TempDir dir("cli_record");
    write_file(dir.file("d.jsonl"),
               R"({"id": "r1", "question": "1+1?", "answer": "2"})" "\n"
               R"({"id": "r2", "question": "5-3?", "answer": "2"})" "\n");
    setenv("SEC_CLI_KEY", "sk-cli", 1);

    std::string rec_out = dir.file("rec_out");
    SubprocessResult rec = run_subprocess(
        kBin + " record-fixture --task gsm8k --strategy zero-shot --dataset " +
            dir.file("d.jsonl") + " --base-url http://127.0.0.1:" + std::to_string(port) +
            " --api-key-env SEC_CLI_KEY --record-to " + dir.file("rec.jsonl") + " --out " +
            rec_out + " 2>&1",
        "", 120.0);
    CAPTURE(rec.stdout_text);
    CHECK(rec.exit_code == 0);

    server.stop();
    th.join();

    // fixture line count equals the number of backend calls (one per item)
    int lines = 0;
    for (const auto& line : split(read_file(dir.file("rec.jsonl")), "\n"))
        if (!trim(line).empty()) ++lines;
    CHECK(lines == 2);

    std::string replay_out = dir.file("replay_out");
    SubprocessResult rep =
        invoke("run --task gsm8k --strategy zero-shot --dataset " + dir.file("d.jsonl") +
               " --backend replay --fixture " + dir.file("rec.jsonl") + " --out " + replay_out);
    CAPTURE(rep.stdout_text);
    CHECK(rep.exit_code == 0);

    json recorded = json::parse(read_file(rec_out + "/report.json"));
    json replayed = json::parse(read_file(replay_out + "/report.json"));
    CHECK(recorded["accuracy"] == replayed["accuracy"]);
    CHECK(recorded["n_total"] == replayed["n_total"]);
    CHECK(recorded["records"][0]["result"]["final_raw"] ==
          replayed["records"][0]["result"]["final_raw"]);
}

TEST_CASE("strict mode exits 2 on partial failure") {
    TempDir dir("cli_strict");
    write_file(dir.file("d.jsonl"),
               R"({"id": "s1", "question": "1+1?", "answer": "2"})" "\n"
               R"({"id": "s2", "question": "2+2?", "answer": "4"})" "\n");
    // fixture with a single response: the second item fails
    ChatRequest any = simple_request("placeholder");
    write_file(dir.file("f.jsonl"), fixture_line(any, "The answer is 2.") + "\n");
    SubprocessResult res =
        invoke("run --task gsm8k --strategy zero-shot --dataset " + dir.file("d.jsonl") +
               " --backend replay --fixture " + dir.file("f.jsonl") + " --strict --out " +
               dir.file("out"));
    CHECK(res.exit_code == 2);
    CHECK(res.stdout_text.find("failed=1") != std::string::npos);
}

TEST_CASE("help enumerates every registered flag") {
    SubprocessResult top = invoke("--help");
    CHECK(top.exit_code == 0);
    for (const char* sub : {"run", "sweep", "compare", "similarity", "gen-base5",
                            "record-fixture", "report"})
        CHECK(top.stdout_text.find(sub) != std::string::npos);

    SubprocessResult run_help = invoke("run --help");
    for (const char* flag :
         {"--task", "--strategy", "--dataset", "--out", "--backend", "--fixture", "--base-url",
          "--api-key-env", "--model", "--shots", "--max-attempts", "--retry-temperature",
          "--base-temperature", "--perturbation", "--concurrency", "--cache-dir", "--icl-demos",
          "--checker-cmd", "--checker-timeout", "--limit", "--seed", "--max-tokens", "--timeout",
          "--transport-retries", "--strict"}) {
        CAPTURE(flag);
        CHECK(run_help.stdout_text.find(flag) != std::string::npos);
    }
    SubprocessResult sweep_help = invoke("sweep --help");
    CHECK(sweep_help.stdout_text.find("--k-values") != std::string::npos);
    SubprocessResult rec_help = invoke("record-fixture --help");
    CHECK(rec_help.stdout_text.find("--record-to") != std::string::npos);
    SubprocessResult sim_help = invoke("similarity --help");
    CHECK(sim_help.stdout_text.find("--provider-cmd") != std::string::npos);
    SubprocessResult b5_help = invoke("gen-base5 --help");
    CHECK(b5_help.stdout_text.find("--seed") != std::string::npos);
}

TEST_CASE("sweep writes one report per k plus a combined csv") {
    TempDir dir("cli_sweep");
    // zero-shot ignores k, so a fixture with FIFO fallback drives all runs
    std::string fixture_text;
    ChatRequest any = simple_request("placeholder");
    for (int i = 0; i < 6; ++i) fixture_text += fixture_line(any, "The answer is 2.") + "\n";
    write_file(dir.file("f.jsonl"), fixture_text);
    write_file(dir.file("d.jsonl"),
               R"({"id": "s1", "question": "1+1?", "answer": "2"})" "\n"
               R"({"id": "s2", "question": "4/2?", "answer": "2"})" "\n");
    std::string out = dir.file("out");
    SubprocessResult res =
        invoke("sweep --task gsm8k --strategy zero-shot --dataset " + dir.file("d.jsonl") +
               " --backend replay --fixture " + dir.file("f.jsonl") +
               " --k-values 1,2,1 --out " + out);
    CAPTURE(res.stdout_text);
    CHECK(res.exit_code == 0);
    CHECK(std::filesystem::exists(out + "/k1/report.json"));
    CHECK(std::filesystem::exists(out + "/k2/report.json"));
    std::string csv = read_file(out + "/sweep.csv");
    CHECK(csv.find("gsm8k,zero-shot,1,2,") != std::string::npos);
    CHECK(csv.find("gsm8k,zero-shot,2,2,") != std::string::npos);
}
