#include "support.hpp"

#include <rtriage/cli.hpp>

#include <gtest/gtest.h>

#include <sstream>

namespace rtriage {
namespace {

using testing::TempDir;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args, cli::Environment env = {}) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err, env);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    fixtures::FixtureSpec spec;
    spec.volume_name = "TestVol";
    spec.entries = {fixtures::FixtureEntry::folder(
                        "Docs", {fixtures::FixtureEntry::file("letter", "Dear reader", "RSRC")}),
                    fixtures::FixtureEntry::file("plain", "plain text")};
    testing::write_file(image, testing::as_string(fixtures::build_hfs_image(spec)));
  }

  TempDir tmp;
  std::filesystem::path image = tmp / "disk.img";
};

TEST_F(CliTest, HfsCatAndMissingPath) {
  auto r = run({"hfs", "cat", image.string(), "/Docs/letter"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_EQ(r.out, "Dear reader");
  r = run({"hfs", "cat", image.string(), "/docs/LETTER", "--fork", "rsrc"});
  EXPECT_EQ(r.out, "RSRC");
  r = run({"hfs", "ls", image.string(), "/nope"});
  EXPECT_EQ(r.code, cli::kExitFailure);
  EXPECT_NE(r.err.find("not found"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, HfsLsAndTree) {
  auto r = run({"hfs", "ls", image.string(), "/"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("Docs\tfolder"), std::string::npos);
  EXPECT_NE(r.out.find("plain\tfile\t10\t0"), std::string::npos);
  r = run({"hfs", "tree", image.string()});
  EXPECT_NE(r.out.find("TestVol/"), std::string::npos);
  EXPECT_NE(r.out.find("    letter"), std::string::npos);
}

TEST_F(CliTest, HfsExtractWithResourceForks) {
  const std::string before = testing::read_file(image);
  const auto out = tmp / "out";
  EXPECT_EQ(run({"hfs", "extract", image.string(), out.string(), "--rsrc"}).code, cli::kExitOk);
  EXPECT_EQ(testing::read_file(out / "Docs/letter"), "Dear reader");
  EXPECT_EQ(testing::read_file(out / "Docs/.rsrc/letter"), "RSRC");
  EXPECT_FALSE(std::filesystem::exists(out / ".rsrc/plain"));
  EXPECT_EQ(testing::read_file(image), before);
}

TEST_F(CliTest, NotHfs) {
  testing::write_file(tmp / "junk.img", std::string(4096, 'x'));
  EXPECT_EQ(run({"hfs", "ls", (tmp / "junk.img").string()}).code, cli::kExitFailure);
}

TEST_F(CliTest, DbLifecycle) {
  const auto db = (tmp / "s.db").string();
  auto r = run({"db", "init", "--name", "hashdb_mac", "--version-label", "2025.04.25 - lab-mac_os_6_to_10", db});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  r = run({"db", "info", db});
  EXPECT_NE(r.out.find("name: hashdb_mac"), std::string::npos);
  EXPECT_NE(r.out.find("version_label: 2025.04.25 - lab-mac_os_6_to_10"), std::string::npos);

  EXPECT_EQ(run({"db", "add-os", db, "--name", "Mac OS 9", "--version", "9.2"}).out, "os_id: 1\n");
  EXPECT_EQ(run({"db", "add-package", db, "--name", "SimpleText", "--version", "1.4", "--os", "1"}).out,
            "package_id: 1\n");
  r = run({"db", "ingest", db, "--package", "1", image.string()});
  EXPECT_NE(r.out.find("fingerprints_inserted: 2"), std::string::npos) << r.out << r.err;
  r = run({"db", "ingest", db, "--package", "1", image.string()});
  EXPECT_NE(r.out.find("fingerprints_inserted: 0"), std::string::npos);
  EXPECT_EQ(run({"db", "ingest", db, "--package", "9", image.string()}).code, cli::kExitFailure);
}

TEST_F(CliTest, ImportRdsBadHeader) {
  const auto db = (tmp / "s.db").string();
  run({"db", "init", "--name", "n", db});
  testing::write_file(tmp / "bad.csv", "a,b,c\n");
  const auto r = run({"db", "import-rds", db, (tmp / "bad.csv").string()});
  EXPECT_EQ(r.code, cli::kExitFailure);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
}

TEST_F(CliTest, AnalyzeWritesReports) {
  const auto db = (tmp / "s.db").string();
  run({"db", "init", "--name", "hashdb_mac", "--version-label", "v1", db});
  run({"db", "add-os", db, "--name", "Mac OS 9", "--version", "9.2"});
  run({"db", "add-package", db, "--name", "SimpleText", "--version", "1.4", "--os", "1"});
  run({"db", "ingest", db, "--package", "1", image.string()});
  const auto out = tmp / "report";
  const std::vector<std::string> args{"analyze",  image.string(), "--db",          db,           "--source-name",
                                      "disk",     "--examiner",   "E",             "--out",      out.string(),
                                      "--timestamp", "2025-04-25T00:00:00Z"};
  auto r = run(args);
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("unmatched: 0"), std::string::npos);
  const auto html = testing::read_file(out / "report.html");
  EXPECT_NE(html.find("OS détectés par des correspondances"), std::string::npos);
  EXPECT_NE(html.find("Page 1 / 1"), std::string::npos);
  const auto json = testing::read_file(out / "report.json");
  EXPECT_EQ(run(args).code, cli::kExitOk);
  EXPECT_EQ(testing::read_file(out / "report.json"), json);
  EXPECT_EQ(testing::read_file(out / "report.html"), html);

  r = run({"analyze", image.string(), "--source-name", "d", "--examiner", "e", "--out", out.string()});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_FALSE(r.err.empty());
  cli::Environment env;
  env.default_store = db;
  EXPECT_EQ(run({"analyze", image.string(), "--source-name", "d", "--examiner", "e", "--out", out.string()}, env).code,
            cli::kExitOk);
  EXPECT_EQ(run({"analyze", image.string(), "--db", (tmp / "missing.db").string(), "--source-name", "d", "--examiner",
                 "e", "--out", out.string()})
                .code,
            cli::kExitFailure);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"hfs", "cat"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

} // namespace
} // namespace rtriage
