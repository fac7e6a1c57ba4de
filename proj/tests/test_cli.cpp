#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>

#include "borglev/report_io.hpp"

using namespace borglev;

namespace {

class CliDir {
public:
    CliDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / ("borglev-cli-" + std::to_string(::getpid()) + "-" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~CliDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

int borglev_cli(const std::string& args, const fs::path& cache_dir) {
    const std::string cmd = "BORGLEV_CACHE_DIR='" + cache_dir.string() + "' '" BORGLEV_CLI "' " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json small_eig(const fs::path& out) {
    return json{{"kind", "eig"}, {"grid", {{"nx", 10}, {"ny", 9}}}, {"potential", {{"type", "bump"}, {"radius", 0.3}, {"amp", 2}}},
                {"K", 20}, {"out", out.string()}};
}

} // namespace

TEST(Cli, SuccessfulRunUsesTheCache) {
    CliDir d;
    write_text(d / "eig.json", small_eig(d / "a").dump());
    ASSERT_EQ(borglev_cli("eig --config '" + (d / "eig.json").string() + "'", d / "cache"), 0);
    EXPECT_EQ(json::parse(read_text(d / "a" / "manifest.json"))["cache"]["datasets"][0]["status"], "miss");
    ASSERT_EQ(borglev_cli("eig --config '" + (d / "eig.json").string() + "' --out '" + (d / "b").string() + "'", d / "cache"), 0);
    EXPECT_EQ(json::parse(read_text(d / "b" / "manifest.json"))["cache"]["datasets"][0]["status"], "hit");
    EXPECT_EQ(read_text(d / "a" / "eigenvalues.csv"), read_text(d / "b" / "eigenvalues.csv"));
    EXPECT_EQ(read_text(d / "a" / "summary.json"), read_text(d / "b" / "summary.json"));
}

TEST(Cli, ValidationErrorsExitWithTwo) {
    CliDir d;
    json bad = small_eig(d / "never");
    bad["grid"]["nx"] = 3;
    write_text(d / "bad.json", bad.dump());
    write_text(d / "broken.json", "{\"kind\": ");
    EXPECT_EQ(borglev_cli("eig --config '" + (d / "bad.json").string() + "'", d / "cache"), 2);
    EXPECT_EQ(borglev_cli("eig --config '" + (d / "broken.json").string() + "'", d / "cache"), 2);
    EXPECT_EQ(borglev_cli("weyl --config '" + (d / "bad.json").string() + "'", d / "cache"), 2);
    EXPECT_EQ(borglev_cli("teleport --config x.json", d / "cache"), 2);
    EXPECT_EQ(borglev_cli("eig", d / "cache"), 2);
    EXPECT_EQ(borglev_cli("eig --config '" + (d / "bad.json").string() + "' --threads 0", d / "cache"), 2);
    EXPECT_FALSE(fs::exists(d / "never"));
}

TEST(Cli, NumericalFailureExitsWithThree) {
    CliDir d;
    json j{{"kind", "stability"},
           {"grid", {{"nx", 10}, {"ny", 10}}},
           {"family", {{"base", {{"type", "bump"}, {"radius", 0.3}}}, {"t", {0.05, 0.1, 0.2, 0.4, 0.8}}}},
           {"K", 40},
           {"out", (d / "o").string()}};
    write_text(d / "s.json", j.dump());
    EXPECT_EQ(borglev_cli("stability --config '" + (d / "s.json").string() + "'", d / "cache"), 3);
    EXPECT_TRUE(fs::exists(d / "o" / "manifest.json"));
}
