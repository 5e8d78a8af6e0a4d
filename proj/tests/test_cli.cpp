#include "dirac1d/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <string>
#include <sys/wait.h>

#ifndef DIRAC1D_CLI_PATH
#error "DIRAC1D_CLI_PATH must name the CLI binary"
#endif

namespace fs = std::filesystem;

namespace {
int run_cli(const std::string& args)
{
    const std::string cmd = std::string(DIRAC1D_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
protected:
    fs::path dir;

    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / (std::string("dirac1d_cli_") + info->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string out() const { return "--output-dir " + dir.string(); }

    std::string write_config(const std::string& name, const std::string& body) const
    {
        const auto p = (dir / name).string();
        std::ofstream(p) << body;
        return p;
    }

    std::map<std::string, std::string> snapshot(const std::string& prefix) const
    {
        std::map<std::string, std::string> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().filename().string().rfind(prefix, 0) == 0)
                files[e.path().filename().string()] = dirac1d::read_text(e.path().string());
        return files;
    }

    std::string manifest_of(const std::string& command) const
    {
        for (const auto& e : fs::directory_iterator(dir)) {
            const auto name = e.path().filename().string();
            if (name.rfind(command + "-", 0) == 0 && name.ends_with(".manifest.json"))
                return e.path().string();
        }
        return {};
    }

    /// Deletes every output of the command and regenerates it from its manifest.
    void expect_replay_identical(const std::string& command)
    {
        const auto before = snapshot(command + "-");
        ASSERT_FALSE(before.empty());
        const std::string manifest = (dir / "saved.manifest.json").string();
        fs::copy_file(manifest_of(command), manifest);
        for (const auto& [name, _] : before)
            fs::remove(dir / name);
        run_cli("replay " + manifest);
        EXPECT_EQ(snapshot(command + "-"), before);
    }
};

const std::string small_grid = " --L 8 --n 81";
} // namespace

TEST_F(CliTest, ClassifyExitCodes)
{
    EXPECT_EQ(run_cli("classify --potential zero" + small_grid + " " + out()), 0);
    EXPECT_EQ(run_cli("classify --potential example-res-plus --delta -4" + small_grid + " " + out()), 2);
    EXPECT_EQ(run_cli("classify --potential example-res-plus --delta -4 --threshold both" + small_grid + " " + out()), 2);
}

TEST_F(CliTest, ConfigErrorsExitWithOne)
{
    EXPECT_EQ(run_cli("classify --L 8 --n 15 " + out()), 1);
    EXPECT_EQ(run_cli("classify --config " + write_config("bad.json", R"({"grid":{"L":8,"n":81},"bogus":1})") + " " + out()),
              1);
    EXPECT_EQ(run_cli("classify --config " +
                      write_config("bad2.json", R"({"grid":{"L":8,"n":81,"h":0.1}})") + " " + out()),
              1);
    EXPECT_EQ(run_cli("classify --potential no-such-family" + small_grid + " " + out()), 1);
    EXPECT_EQ(run_cli("no-such-command"), 1);
    EXPECT_EQ(run_cli("classify --config " + (dir / "missing.json").string()), 1);
}

TEST_F(CliTest, OutputsAreNamedByConfigHash)
{
    ASSERT_EQ(run_cli("classify --potential zero" + small_grid + " " + out()), 0);
    const std::regex pattern(R"(classify-[0-9a-f]{16}\.(json|manifest\.json))");
    const auto files = snapshot("classify-");
    EXPECT_EQ(files.size(), 2u);
    for (const auto& [name, _] : files)
        EXPECT_TRUE(std::regex_match(name, pattern)) << name;
    // the seed is part of the config, the output directory is not
    ASSERT_EQ(run_cli("classify --potential zero --seed 3" + small_grid + " " + out()), 0);
    EXPECT_EQ(snapshot("classify-").size(), 4u);
    const fs::path other = dir / "other";
    ASSERT_EQ(run_cli("classify --potential zero" + small_grid + " --output-dir " + other.string()), 0);
    for (const auto& e : fs::directory_iterator(other))
        EXPECT_TRUE(fs::exists(dir / e.path().filename()));
}

TEST_F(CliTest, ManifestIsARunnableConfig)
{
    ASSERT_EQ(run_cli("classify --potential example-res-plus --delta -4" + small_grid + " " + out()), 2);
    const auto m = dirac1d::Json::parse(dirac1d::read_text(manifest_of("classify")));
    EXPECT_EQ(m["command"], "classify");
    EXPECT_EQ(m["grid"]["n"], 81);
    EXPECT_EQ(m["potential"]["family"], "example-res-plus");
    EXPECT_EQ(m["version"], "dirac1d 1.0.0");
}

TEST_F(CliTest, ClassifyReplaysByteIdentically)
{
    ASSERT_EQ(run_cli("classify --potential example-res-plus --delta -4 --threshold both" + small_grid + " " + out()), 2);
    expect_replay_identical("classify");
}

TEST_F(CliTest, LapScanWritesCsvAndReplays)
{
    const auto cfg = write_config("lap.json", R"({"potential":{"family":"gaussian","amplitude":[[1,0.5],[0.5,-0.5]]},
        "grid":{"L":8,"n":81},"lap":{"count":5}})");
    ASSERT_EQ(run_cli("lap-scan --config " + cfg + " " + out()), 0);
    bool found = false;
    for (const auto& [name, text] : snapshot("lap-scan-"))
        if (name.ends_with(".csv")) {
            found = true;
            EXPECT_EQ(text.substr(0, text.find('\n')), "re_lambda,im_lambda,sigma,weighted_norm,condition_estimate");
            EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
        }
    EXPECT_TRUE(found);
    expect_replay_identical("lap-scan");
}

TEST_F(CliTest, MinvCheckReportsResonanceAndReplays)
{
    const auto cfg = write_config("minv.json", R"({"potential":{"family":"example-res-plus","delta":-4},
        "grid":{"L":8,"n":81},"minv":{"zCount":4}})");
    ASSERT_EQ(run_cli("minv-check --config " + cfg + " " + out()), 2);
    bool plus = false;
    for (const auto& [name, text] : snapshot("minv-check-"))
        if (name.ends_with("-plus.csv")) {
            plus = true;
            EXPECT_EQ(text.substr(0, text.find('\n')), "z,normMinv,residual_after_leading,fitted_order");
        }
    EXPECT_TRUE(plus);
    expect_replay_identical("minv-check");
}

TEST_F(CliTest, DecayScanWritesTableAndReplays)
{
    const auto cfg = write_config("decay.json", R"({"potential":{"family":"zero"},"grid":{"L":8,"n":81},
        "decay":{"times":[16,32,64,128,256],"probeStride":8}})");
    const int code = run_cli("decay-scan --config " + cfg + " " + out());
    EXPECT_TRUE(code == 0 || code == 3);
    bool found = false;
    for (const auto& [name, text] : snapshot("decay-scan-"))
        if (name.ends_with(".csv")) {
            found = true;
            EXPECT_EQ(text.substr(0, text.find('\n')), "t,sup_norm,weighted_sup_norm,sup_after_subtraction");
        }
    EXPECT_TRUE(found);
    expect_replay_identical("decay-scan");
    EXPECT_EQ(run_cli("decay-scan --config " + cfg + " --times 16,32 " + out()), 1);
}

TEST_F(CliTest, FreeCheckReplays)
{
    const auto cfg = write_config("free.json", R"({"grid":{"L":8,"n":81},"free":{"j":[1,2],"t":[4,16]}})");
    EXPECT_EQ(run_cli("free-check --config " + cfg + " " + out()), 0);
    expect_replay_identical("free-check");
}
