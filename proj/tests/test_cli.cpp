#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "json.hpp"
#include "sea/cli.hpp"

namespace fs = std::filesystem;
using sea::cli::run_main;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("sea_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "sea-alloc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const nlohmann::json& doc) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

const nlohmann::json kSmall = {
    {"seed", 3},
    {"cycles", 20},
    {"schema",
     {{"backbone", {{"layers", 1}, {"hidden_dims", {64}}, {"param_count", 100000}}},
      {"templates",
       {{{"family", "LoRA"}, {"topology", "PA"}, {"size", 2}, {"slot", "Attention"}},
        {{"family", "LoRA"}, {"topology", "PA"}, {"size", 4}, {"slot", "Attention"}},
        {{"family", "AdaptFormer"}, {"topology", "SA"}, {"size", 4}, {"slot", "FeedForward"}},
        {{"family", "AffineLN"}, {"topology", "None"}, {"size", 0}, {"slot", "Norm"}}}}}},
    {"sampler", {{"audit_batch", 2}}},
    {"allocator", {{"p_max", 0.01}}}};

}  // namespace

TEST_CASE("run writes the three outputs and is reproducible") {
  TempDir dir("run");
  const fs::path config = write_config(dir.path, kSmall);
  const Result a = call({"run", "--config", config.string(), "--out", (dir.path / "a").string()});
  CHECK_MESSAGE(a.code == 0, a.err);
  for (const char* f : {"report.json", "events.jsonl", "diagnostics.csv"}) CHECK(fs::exists(dir.path / "a" / f));
  const Result b = call({"run", "--config", config.string(), "--out", (dir.path / "b").string(), "--quiet"});
  CHECK(b.code == 0);
  CHECK(b.out.empty());
  CHECK(slurp(dir.path / "a" / "report.json") == slurp(dir.path / "b" / "report.json"));
  CHECK(slurp(dir.path / "a" / "events.jsonl") == slurp(dir.path / "b" / "events.jsonl"));
  const Result c = call({"run", "--config", config.string(), "--out", (dir.path / "c").string(), "--seed", "4"});
  CHECK(c.code == 0);
  CHECK(slurp(dir.path / "a" / "events.jsonl") != slurp(dir.path / "c" / "events.jsonl"));
  const std::string csv = slurp(dir.path / "a" / "diagnostics.csv");
  CHECK(csv.rfind("cycle,value,regret,T_c,coverage_min\n", 0) == 0);
}

TEST_CASE("config and usage errors exit with 2") {
  TempDir dir("usage");
  CHECK(call({"run", "--config", (dir.path / "missing.json").string()}).code == 2);
  CHECK(call({"run"}).code == 2);
  CHECK(call({}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({"bench-alloc", "--n-max", "25"}).code == 2);
  CHECK(call({"bench-alloc", "--instances", "abc"}).code == 2);
  std::ofstream(dir.path / "broken.json") << "{ not json";
  CHECK(call({"run", "--config", (dir.path / "broken.json").string()}).code == 2);
  nlohmann::json bad = kSmall;
  bad["fsm"] = {{"tau_act", 0}};
  CHECK(call({"run", "--config", write_config(dir.path, bad).string()}).code == 2);
  bad = kSmall;
  bad["schema"]["templates"][0]["slot"] = "Norm";
  const Result r = call({"run", "--config", write_config(dir.path, bad).string()});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("verify-bounds prints the bound columns and passes") {
  const Result r = call({"verify-bounds"});
  CHECK(r.code == 0);
  CHECK(r.out.find("0.0526") != std::string::npos);
  CHECK(r.out.find("0.0300") != std::string::npos);
  CHECK(r.out.find("30.0000") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("bench-alloc") {
  const Result r = call({"bench-alloc", "--instances", "500", "--n-max", "15"});
  CHECK(r.code == 0);
  CHECK(r.out.find("min ratio") != std::string::npos);
  const Result one = call({"bench-alloc", "--instances", "50", "--n-max", "1"});
  CHECK(one.code == 0);
  CHECK(one.out.find("min ratio    1.0000") != std::string::npos);
}

TEST_CASE("baseline, replay and report") {
  TempDir dir("flow");
  const fs::path config = write_config(dir.path, kSmall);
  const Result rec = call({"run", "--config", config.string(), "--out", (dir.path / "rec").string(),
                           "--record-trace", "--quiet"});
  REQUIRE(rec.code == 0);
  REQUIRE(fs::exists(dir.path / "rec" / "trace.jsonl"));

  const Result rep = call({"replay", "--config", config.string(), "--trace",
                           (dir.path / "rec" / "trace.jsonl").string(), "--out", (dir.path / "rep").string()});
  CHECK_MESSAGE(rep.code == 0, rep.err);
  CHECK(slurp(dir.path / "rec" / "events.jsonl") == slurp(dir.path / "rep" / "events.jsonl"));

  const Result missing_trace = call({"replay", "--config", config.string(), "--trace",
                                     (dir.path / "none.jsonl").string()});
  CHECK(missing_trace.code == 2);

  const Result base = call({"baseline", "--config", config.string(), "--out", (dir.path / "base").string(),
                            "--samples", "5"});
  CHECK(base.code == 0);
  const auto doc = nlohmann::json::parse(slurp(dir.path / "base" / "baseline.json"));
  CHECK(doc["values"].size() == 5);

  const Result report = call({"report", "--events", (dir.path / "rec" / "events.jsonl").string(), "--config",
                              config.string(), "--out", (dir.path / "report").string()});
  CHECK(report.code == 0);
  CHECK(slurp(dir.path / "report" / "diagnostics.csv") == slurp(dir.path / "rec" / "diagnostics.csv"));

  std::ofstream(dir.path / "bad.jsonl") << "{\"type\":\"cycle\"}\n";
  CHECK(call({"report", "--events", (dir.path / "bad.jsonl").string(), "--out", (dir.path / "x").string()}).code == 1);
}

TEST_CASE("SEA_ALLOC_THREADS must be a plain non-negative integer") {
  TempDir dir("threads");
  const fs::path config = write_config(dir.path, kSmall);
  const std::vector<std::string> args{"run", "--config", config.string(), "--out", dir.path.string(), "--quiet"};
  ::setenv("SEA_ALLOC_THREADS", "4abc", 1);
  CHECK(call(args).code == 2);
  ::setenv("SEA_ALLOC_THREADS", "-1", 1);
  CHECK(call(args).code == 2);
  ::setenv("SEA_ALLOC_THREADS", "3", 1);
  CHECK(call(args).code == 0);
  ::unsetenv("SEA_ALLOC_THREADS");
}
