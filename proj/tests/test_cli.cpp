#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aquaperc/cli.hpp"
#include "aquaperc/config.hpp"
#include "aquaperc/image_io.hpp"
#include "doctest.h"

using namespace aquaperc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / "aquaperc_cli_test";
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_small_scene(const TempDir& dir) {
    std::string path = dir.file("scene.cfg");
    std::ofstream out(path);
    out << "[water]\ntype = JII\nbackscatter = 0.0183\n"
        << "[scene]\ndepth = 2.0\ndistance = 1.0\nlight = 0.5\n"
        << "[camera]\nwidth = 64\nheight = 36\n"
        << "[phase]\ntable_size = 512\n";
    return path;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing: sections, comments, canonical form") {
    auto cfg = config::Config::parse_string(
        "# comment\n[sec]\nkey = 3.5\nflag = yes\nlist = 1, 2, 3.5\n");
    CHECK(cfg.get_double("sec", "key", 0.0) == doctest::Approx(3.5));
    CHECK(cfg.get_bool("sec", "flag", false));
    CHECK(cfg.get_list("sec", "list", {}).size() == 3);
    CHECK(cfg.get("missing", "key", "fallback") == "fallback");
    CHECK(cfg.canonical() == config::Config::parse_string(cfg.canonical()).canonical());
    CHECK_THROWS(config::Config::parse_string("[sec]\nkey_without_value\n"));
}

TEST_CASE("default configs parse into valid objects") {
    auto scene_cfg = config::Config::parse_string(config::default_scene_text());
    config::SceneConfig sc = config::scene_from_config(scene_cfg);
    CHECK(sc.scene.camera.width == 320);
    CHECK(sc.scene.water.absorption.r > sc.scene.water.absorption.b);
}

TEST_CASE("phase --plot writes the comparison CSV") {
    TempDir dir;
    std::string out = dir.file("pf.csv");
    int code = cli::dispatch({"phase", "--plot", "--table-size", "512", "--out", out});
    CHECK(code == 0);
    std::string text = read_file(out);
    CHECK(text.rfind("psi_deg,ff,hg,petzold", 0) == 0);
    int lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    CHECK(lines == 56);  // header + 55 tabulated angles
    CHECK(fs::exists(out + ".manifest.json"));
}

TEST_CASE("train on a missing dataset exits 2 and names the path") {
    int code = cli::dispatch({"train", "--data", "missing.csv"});
    CHECK(code == 2);
}

TEST_CASE("unknown flags are usage errors") {
    CHECK(cli::dispatch({"render", "--no-such-flag"}) == 1);
    CHECK(cli::dispatch({"no-such-command"}) == 1);
}

TEST_CASE("render writes PFM and PNG with a manifest") {
    TempDir dir;
    std::string scene = write_small_scene(dir);
    std::string out = dir.file("img.pfm");
    std::string png = dir.file("img.png");
    int code = cli::dispatch({"render", "--scene", scene, "--out", out, "--png", png, "--spp",
                              "8", "--seed", "5"});
    REQUIRE(code == 0);
    ImageF img = io::read_pfm(out);
    CHECK(img.width == 64);
    CHECK(img.height == 36);
    CHECK(fs::exists(png));
    CHECK(fs::exists(out + ".manifest.json"));

    SUBCASE("stats reads the image back") {
        CHECK(cli::dispatch({"stats", "--image", out, "--patches", "8x6"}) == 0);
        CHECK(cli::dispatch({"stats", "--image", dir.file("nope.pfm")}) == 2);
    }

    SUBCASE("seeded renders are byte identical") {
        std::string out2 = dir.file("img2.pfm");
        CHECK(cli::dispatch({"render", "--scene", scene, "--out", out2, "--spp", "8", "--seed",
                             "5"}) == 0);
        CHECK(read_file(out) == read_file(out2));
        std::string out3 = dir.file("img3.pfm");
        CHECK(cli::dispatch({"render", "--scene", scene, "--out", out3, "--spp", "8", "--seed",
                             "6"}) == 0);
        CHECK(read_file(out) != read_file(out3));
    }
}

TEST_CASE("calibrate then suggest runs end to end") {
    TempDir dir;
    std::string scene = write_small_scene(dir);
    std::string profiles = dir.file("profiles.json");
    REQUIRE(cli::dispatch({"calibrate", "--scene", scene, "--out", profiles, "--depths",
                           "0.5:2.5:1.0", "--distances", "0.5:2.0:0.5", "--spp", "8", "--seed",
                           "3"}) == 0);
    CHECK(fs::exists(profiles));

    // Tiny synthetic dataset -> model -> suggestion.
    std::string data = dir.file("data.csv");
    {
        std::ofstream out(data);
        out << "kz_decay_r,kz_decay_g,kz_decay_b,kc_on_decay_r,kc_on_decay_g,kc_on_decay_b,"
               "kc_off_decay_r,kc_off_decay_g,kc_off_decay_b,dist,light,depth,"
               "img_mean_r,img_mean_g,img_mean_b,img_std_r,img_std_g,img_std_b,"
               "delta_dist,delta_light,target_r,target_g,target_b\n";
        for (int i = 0; i < 150; ++i) {
            double d = 0.5 + 0.017 * i;
            out << "0.3,0.2,0.1,0.5,0.4,0.3,0.6,0.5,0.4," << d << ",0.5,2.0,"
                << "0.2,0.25,0.3,0.05,0.06,0.07,0.1,0.05," << 0.05 + 0.001 * (i % 7) << ",0.06,0.07\n";
        }
    }
    std::string model = dir.file("model.json");
    REQUIRE(cli::dispatch({"train", "--data", data, "--out", model, "--epochs", "3", "--seed",
                           "2"}) == 0);

    std::string state = dir.file("state.json");
    {
        std::ofstream out(state);
        out << "{\"dist\": 1.0, \"light\": 0.5, \"depth\": 1.5,"
            << " \"img_mean\": [0.2, 0.25, 0.3], \"img_std\": [0.05, 0.06, 0.07]}\n";
    }
    CHECK(cli::dispatch({"suggest", "--model", model, "--profiles", profiles, "--state",
                         state}) == 0);
}

TEST_CASE("simulate is reproducible byte for byte") {
    TempDir dir;
    std::string scenario = dir.file("scenario.cfg");
    {
        std::ofstream out(scenario);
        out << "[scenario]\nname = cli_mini\nleg_depths = 2.0\nsteps_per_leg = 3\n"
            << "distances = 0.5, 1.0, 1.5, 2.0, 2.5, 3.0\nlights = 0.0, 0.5, 1.0\nspp = 6\n"
            << "[water]\ntype = JI\nbackscatter = 0.0183\n"
            << "[camera]\nwidth = 96\nheight = 54\n";
    }
    std::string out1 = dir.file("report1");
    std::string out2 = dir.file("report2");
    REQUIRE(cli::dispatch({"simulate", "--scenario", scenario, "--policies",
                           "fixed:1:0.5,fixed:2:0.25", "--out", out1, "--seed", "9"}) == 0);
    REQUIRE(cli::dispatch({"simulate", "--scenario", scenario, "--policies",
                           "fixed:1:0.5,fixed:2:0.25", "--out", out2, "--seed", "9"}) == 0);
    CHECK(read_file(out1 + "/summary.csv") == read_file(out2 + "/summary.csv"));
    auto csvs = {"fixed_1m_50%_trace.csv", "fixed_2m_25%_trace.csv"};
    for (const char* name : csvs)
        CHECK(read_file(out1 + "/" + name) == read_file(out2 + "/" + name));
}

TEST_CASE("dump-defaults prints both templates") {
    CHECK(cli::dispatch({"--dump-defaults"}) == 0);
}
