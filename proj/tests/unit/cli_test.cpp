#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tilescope/cli.hpp"
#include "tilescope/error.hpp"

using namespace tilescope;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "tilescope");
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
    auto p = fs::temp_directory_path() / ("tilescope_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
    fs::create_directories(p);
    return p;
}

std::string write_config(const std::string& name, const std::string& text) {
    auto p = scratch_dir() / name;
    std::ofstream(p) << text;
    return p.string();
}

const char* kSquareWith = R"({
  "schema_version": 1, "name": "broken", "dimension": 2,
  "expansion": {"matrix": [["2", "0"], ["0", "2"]]},
  "prototiles": [{"label": "Q", "anchor": ["0", "0"], "volume": "1"}],
  "digits": [{"child": 1, "parent": 1, "vectors": [%s]}]
})";

std::string square_with(const std::string& digits) {
    std::string t = kSquareWith;
    t.replace(t.find("%s"), 2, digits);
    return t;
}

}  // namespace

TEST(Cli, DuplicateDigitIsMathError) {
    auto path = write_config("dup.json", square_with(R"(["0","0"],["1","0"],["0","1"],["0","0"])"));
    auto r = run({"validate", path, "--out", scratch_dir().string()});
    EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, UndeclaredSymbolIsSchemaError) {
    auto path = write_config("sym.json", square_with(R"(["0","0"],["1","0"],["0","1"],["1","c"])"));
    auto r = run({"validate", path, "--out", scratch_dir().string()});
    EXPECT_EQ(r.code, 2) << r.err;
}

TEST(Cli, UnknownSystemAndBadArgs) {
    EXPECT_EQ(run({"validate", "no_such_system"}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST(Cli, GenerateLevelZeroEchoesSeed) {
    auto r = run({"generate", "kenyon", "--level", "0", "--out", scratch_dir().string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["tiles"], 1);
    EXPECT_EQ(j["seed"]["type"], 1);
    EXPECT_EQ(j["patch"][0]["shift"], j["seed"]["shift"]);
    EXPECT_EQ(j["schema_version"], kSchemaVersion);
}

TEST(Cli, EigentestModifiedKenyon) {
    auto r = run({"eigentest", "kenyon_modified", "--alpha", "tau-1,0", "--nmax", "12", "--out",
                  scratch_dir().string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("ExactPass"), std::string::npos);
    EXPECT_TRUE(fs::exists(scratch_dir() / artifact_name("kenyon_modified", "residues", "tau-1,0_N12", "csv")));
}

TEST(Cli, ReportNeedsAll) {
    EXPECT_EQ(run({"report", "kenyon", "--out", scratch_dir().string()}).code, 2);
}

TEST(Cli, DeterministicOutput) {
    auto a = run({"rigidity", "kenyon", "--out", scratch_dir().string()});
    auto b = run({"rigidity", "kenyon", "--out", scratch_dir().string()});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, ArtifactNames) {
    EXPECT_EQ(artifact_name("kenyon", "patch", "level2", "txt"), "kenyon_patch_level2.txt");
    EXPECT_EQ(artifact_name("kenyon", "validate", "", "json"), "kenyon_validate.json");
    EXPECT_EQ(artifact_name("k", "r", "a/b c", "csv").find('/'), std::string::npos);
}

TEST(Cli, PatchSpec) {
    auto cfg = resolve_config("kenyon");
    auto p = parse_patch_spec(cfg.system, "1:0,0;1:0,1");
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[1].type, 0);
    EXPECT_THROW(parse_patch_spec(cfg.system, "3:0,0"), Error);
}
