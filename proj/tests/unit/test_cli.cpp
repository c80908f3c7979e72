#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    std::string cmd = std::string(MDDPG_PLANNER_BIN) + " " + args +
                      " >/dev/null 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string scene1() {
    return std::string(MDDPG_SCENE_DIR) + "/scene1.txt";
}

} // namespace

TEST_CASE("cli exit codes: success, usage error, runtime error") {
    fs::path dir = fs::temp_directory_path() / "mddpg_cli";
    fs::remove_all(dir);

    // Usage errors -> 1.
    CHECK(run("train") == 1);                       // missing --scene
    CHECK(run("train --scene " + scene1() + " --bogus-flag 3") == 1);
    CHECK(run("nonsense-subcommand") == 1);
    CHECK(run("train --scene " + scene1() + " --algo sarsa") == 1);

    // Runtime error (unreadable scene) -> 2.
    CHECK(run("train --scene /nonexistent/scene.txt --episodes 1") == 2);

    // Smoke contract: a tiny train run succeeds and writes its outputs.
    std::string out = (dir / "run").string();
    CHECK(run("train --scene " + scene1() +
              " --algo mddpg --episodes 2 --seed 1 --out " + out) == 0);
    CHECK(fs::exists(dir / "run" / "metrics.csv"));
    CHECK(fs::exists(dir / "run" / "manifest.txt"));

    // Eval over the trained model writes one row per episode.
    std::string eval_out = (dir / "eval").string();
    CHECK(run("eval --scene " + scene1() + " --model " + out +
              " --episodes 5 --out " + eval_out) == 0);
    std::ifstream metrics(dir / "eval" / "metrics.csv");
    std::string line;
    long rows = -1; // header
    while (std::getline(metrics, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);

    // replay-export emits the trajectory CSV.
    std::string rp_out = (dir / "replay").string();
    CHECK(run("replay-export --scene " + scene1() + " --model " + out +
              " --episodes 1 --out " + rp_out) == 0);
    std::ifstream traj(dir / "replay" / "trajectories.csv");
    std::getline(traj, line);
    CHECK(line == "episode,step,entity,x,y");

    fs::remove_all(dir);
}
