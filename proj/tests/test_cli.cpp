#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_work;

int run(const std::string& args) {
    std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

int count_lines(const fs::path& p) {
    std::ifstream f(p);
    std::string line;
    int n = 0;
    while (std::getline(f, line))
        if (!line.empty()) ++n;
    return n;
}

}  // namespace

TEST_CASE("gen-data writes consistent files and refuses silent overwrite") {
    fs::path out = g_work / "data";
    CHECK(run("gen-data --seed 5 --out " + out.string()) == 0);
    CHECK(fs::exists(out / "edges.txt"));
    CHECK(count_lines(out / "features.csv") == 100);
    CHECK(count_lines(out / "labels.csv") == 100);
    CHECK(fs::exists(out / "run_info.txt"));

    CHECK(run("gen-data --seed 5 --out " + out.string()) == 2);  // no --overwrite
    CHECK(run("gen-data --seed 5 --out " + out.string() + " --overwrite") == 0);
}

TEST_CASE("gen-data is byte-identical under a fixed seed") {
    fs::path a = g_work / "data_a", b = g_work / "data_b";
    CHECK(run("gen-data --seed 9 --out " + a.string()) == 0);
    CHECK(run("gen-data --seed 9 --out " + b.string()) == 0);
    for (const char* f : {"edges.txt", "features.csv", "labels.csv"})
        CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("invalid config value exits with the config error code") {
    fs::path cfg = g_work / "bad.cfg";
    std::ofstream(cfg) << "p_intra=1.5\n";
    CHECK(run("gen-data --config " + cfg.string() + " --out " + (g_work / "bad_out").string()) ==
          2);
    fs::path unk = g_work / "unk.cfg";
    std::ofstream(unk) << "no_such_key=1\n";
    CHECK(run("gen-data --config " + unk.string() + " --out " + (g_work / "bad_out2").string()) ==
          2);
}

TEST_CASE("train produces a checkpoint and a full history") {
    fs::path data = g_work / "data";
    fs::path out = g_work / "run";
    CHECK(run("train --data " + data.string() + " --out " + out.string() +
              " --epochs 3 --seed 5") == 0);
    CHECK(fs::exists(out / "checkpoint.txt"));
    CHECK(fs::exists(out / "model.txt"));
    CHECK(count_lines(out / "history.csv") == 4);  // header + 3 epochs
}

TEST_CASE("train on a missing data directory fails nonzero") {
    CHECK(run("train --data " + (g_work / "nope").string() + " --out " +
              (g_work / "x").string()) != 0);
}

TEST_CASE("eval emits diagnostics and embeddings; reruns are identical") {
    fs::path data = g_work / "data";
    fs::path run_dir = g_work / "run";
    fs::path e1 = g_work / "eval1", e2 = g_work / "eval2";
    std::string ckpt = (run_dir / "model.txt").string();
    CHECK(run("eval --checkpoint " + ckpt + " --data " + data.string() + " --out " +
              e1.string() + " --seed 5") == 0);
    CHECK(run("eval --checkpoint " + ckpt + " --data " + data.string() + " --out " +
              e2.string() + " --seed 5") == 0);
    CHECK(count_lines(e1 / "embeddings.csv") == 100);
    CHECK(slurp(e1 / "diagnostics.json") == slurp(e2 / "diagnostics.json"));
    CHECK(slurp(e1 / "embeddings.csv") == slurp(e2 / "embeddings.csv"));
    CHECK(!slurp(e1 / "diagnostics.json").empty());
}

TEST_CASE("verify-bounds passes clean and detects the injected fault") {
    fs::path cfg = g_work / "vb.cfg";
    std::ofstream(cfg) << "vb_instances=300\nvb_restarts=5\n";
    fs::path ok = g_work / "vb_ok", bad = g_work / "vb_bad";
    CHECK(run("verify-bounds --config " + cfg.string() + " --out " + ok.string()) == 0);
    std::string report = slurp(ok / "bound_report.json");
    CHECK(report.find("\"violations\": 0") != std::string::npos);
    CHECK(report.find("min_slack") != std::string::npos);
    CHECK(run("verify-bounds --config " + cfg.string() + " --poison-ac --out " + bad.string()) ==
          1);
}

int main(int argc, char** argv) {
    doctest::Context ctx;
    // last non-flag argument is the CLI binary path
    for (int i = 1; i < argc; ++i)
        if (argv[i][0] != '-') g_cli = argv[i];
    if (g_cli.empty()) {
        std::fprintf(stderr, "usage: test_cli <path-to-augmae-binary>\n");
        return 1;
    }
    g_work = fs::temp_directory_path() / "augmae_cli_test";
    fs::remove_all(g_work);
    fs::create_directories(g_work);
    ctx.applyCommandLine(1, argv);
    return ctx.run();
}
