// Drives the installed CLI binary end to end: subcommand wiring, config file
// precedence, exit codes, and artifact layout.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "moodassoc/io.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    fs::path log = fs::temp_directory_path() / "moodassoc_cli_log.txt";
    std::string cmd = std::string(MOODASSOC_CLI_PATH) + " " + args + " >" + log.string() +
                      " 2>&1";
    int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.output = moodassoc::read_file(log);
    return result;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "moodassoc_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("help exits cleanly and documents the subcommands") {
    RunResult help = run_cli("--help");
    CHECK(help.exit_code == 0);
    for (const char* sub : {"ingest", "score", "train", "predict", "evaluate", "sweep",
                            "agree", "simulate", "pipeline"}) {
        CHECK_THAT(help.output, Catch::Matchers::ContainsSubstring(sub));
    }
    RunResult score_help = run_cli("score --help");
    CHECK(score_help.exit_code == 0);
    CHECK_THAT(score_help.output, Catch::Matchers::ContainsSubstring("--tau"));
    CHECK_THAT(score_help.output, Catch::Matchers::ContainsSubstring("--threads"));
}

TEST_CASE("usage and config errors exit 1, data errors exit 2") {
    CHECK(run_cli("").exit_code == 1);                   // missing subcommand
    CHECK(run_cli("transmogrify").exit_code == 1);       // unknown subcommand

    fs::path dir = fresh_dir("codes");
    RunResult sim = run_cli("simulate --sim-songs 30 --sim-moods 4 --sim-playlists 300"
                            " --seed 3 --out " + (dir / "corpus").string());
    REQUIRE(sim.exit_code == 0);

    std::string inputs = " --playlists " + (dir / "corpus" / "playlists.jsonl").string() +
                         " --songs " + (dir / "corpus" / "songs.jsonl").string() +
                         " --lexicon " + (dir / "corpus" / "lexicon.csv").string();
    RunResult bad_tau =
        run_cli("score --tau 1.5" + inputs + " --out " + (dir / "bad").string());
    CHECK(bad_tau.exit_code == 1);
    CHECK_THAT(bad_tau.output, Catch::Matchers::ContainsSubstring("tau"));

    RunResult missing = run_cli("score --playlists /no/such/file.jsonl --songs " +
                                (dir / "corpus" / "songs.jsonl").string() + " --lexicon " +
                                (dir / "corpus" / "lexicon.csv").string() + " --out " +
                                (dir / "bad2").string());
    CHECK(missing.exit_code == 2);
    CHECK_THAT(missing.output, Catch::Matchers::ContainsSubstring("file.jsonl"));
}

TEST_CASE("config file values apply, flags take precedence, manifest records both") {
    fs::path dir = fresh_dir("config");
    fs::path conf = dir / "run.conf";
    {
        std::ofstream out(conf);
        out << "# pipeline settings\n";
        out << "seed = 77\n";
        out << "sim.n_songs = 40\n";
        out << "sim.n_moods = 4\n";
        out << "sim.n_playlists = 400\n";
        out << "output_dir = " << (dir / "from_file").string() << "\n";
    }
    // flag overrides the file's output_dir
    fs::path out_dir = dir / "from_flag";
    RunResult sim = run_cli("simulate --config " + conf.string() + " --out " +
                            out_dir.string());
    REQUIRE(sim.exit_code == 0);
    CHECK(fs::exists(out_dir / "playlists.jsonl"));
    CHECK_FALSE(fs::exists(dir / "from_file"));

    nlohmann::json manifest =
        nlohmann::json::parse(moodassoc::read_file(out_dir / "manifest_simulate.json"));
    CHECK(manifest["seed"] == 77);
    CHECK(manifest["config"]["sim.n_songs"] == "40");
    CHECK(manifest["config"]["output_dir"] == out_dir.string());
    CHECK(manifest.contains("config_hash"));
    CHECK(manifest.contains("artifact_version"));
}

TEST_CASE("the full pipeline runs through the CLI") {
    fs::path dir = fresh_dir("pipeline");
    RunResult run = run_cli(
        "pipeline --sim-songs 60 --sim-moods 4 --sim-playlists 1500 --seed 9"
        " --kinds bow,acoustic --max-iters 120 --out " + dir.string());
    REQUIRE(run.exit_code == 0);
    CHECK(fs::exists(dir / "corpus" / "playlists.jsonl"));
    CHECK(fs::exists(dir / "scores" / "scores.csv"));
    CHECK(fs::exists(dir / "models" / "bow"));
    CHECK(fs::exists(dir / "predictions" / "predictions_acoustic.csv"));
    CHECK(fs::exists(dir / "reports" / "metrics_bow.csv"));
    CHECK(fs::exists(dir / "reports" / "sweep.csv"));
    CHECK(fs::exists(dir / "manifest_pipeline.json"));

    // agree against the same scores, annotating pairs that are surely scored
    fs::path ann = dir / "annotations.csv";
    {
        std::ifstream scores_in(dir / "scores" / "scores.csv");
        std::string header, first, second;
        std::getline(scores_in, header);
        std::getline(scores_in, first);
        std::getline(scores_in, second);
        auto pair1 = moodassoc::csv_split(first);
        auto pair2 = moodassoc::csv_split(second);
        std::ofstream out(ann);
        out << "song_id,mood,source,judge1,judge2,judge3,judge4\n";
        out << pair1[0] << ',' << pair1[1] << ",lyrics,Y,Y,N,\n";
        out << pair1[0] << ',' << pair1[1] << ",acoustics,N,N,U,\n";
        out << pair2[0] << ',' << pair2[1] << ",lyrics,N,N,N,\n";
        out << pair2[0] << ',' << pair2[1] << ",acoustics,U,U,U,\n";
    }
    RunResult agree = run_cli("agree --annotations " + ann.string() + " --scores " +
                              (dir / "scores" / "scores.csv").string() + " --out " +
                              (dir / "agree_out").string());
    INFO(agree.output);
    REQUIRE(agree.exit_code == 0);
    CHECK(fs::exists(dir / "agree_out" / "agreement.csv"));
    CHECK(fs::exists(dir / "agree_out" / "verdicts.csv"));
    CHECK(fs::exists(dir / "agree_out" / "bnpmi_vs_annotation.csv"));
}
