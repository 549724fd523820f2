#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "argsim/event_log.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

fs::path workdir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("argsim_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result run(const std::string& args) {
  const fs::path o = workdir() / "stdout.txt";
  const fs::path e = workdir() / "stderr.txt";
  std::string cmd = std::string(ARGSIM_BINARY) + " " + args + " >" + o.string() + " 2>" + e.string();
  int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

}  // namespace

TEST_CASE("simulate writes a log and manifest") {
  auto r = run("simulate --engine backintime --samples 2 --rho 0 --seed 7 --reps 1 --out " + path("n2.jsonl"));
  REQUIRE(r.code == 0);
  auto records = argsim::parse_log_text(slurp(path("n2.jsonl")));
  REQUIRE(records.size() == 1);
  REQUIRE(records[0].events.size() == 1);
  CHECK(std::holds_alternative<argsim::Coalesce>(records[0].events[0].event));
  CHECK(records[0].header.seed == 7);

  auto m = nlohmann::json::parse(slurp(path("n2.jsonl.manifest.json")));
  CHECK(m["engine"] == "backintime");
  CHECK(m["reps"] == 1);
  CHECK(m["layout"] == "stream");
  CHECK(m["child_seeds"].size() == 1);
}

TEST_CASE("reruns are byte identical") {
  for (const char* engine : {"backintime", "spatial"}) {
    std::string base = std::string("simulate --engine ") + engine + " --samples 4 --rho 1.5 --density beta:2,2 --seed 11 --reps 20";
    REQUIRE(run(base + " --threads 1 --out " + path("a.jsonl")).code == 0);
    REQUIRE(run(base + " --threads 3 --out " + path("b.jsonl")).code == 0);
    CHECK(slurp(path("a.jsonl")) == slurp(path("b.jsonl")));
    REQUIRE(run("simulate --from-manifest " + path("a.jsonl.manifest.json") + " --out " + path("c.jsonl")).code == 0);
    CHECK(slurp(path("a.jsonl")) == slurp(path("c.jsonl")));
  }
}

TEST_CASE("bad arguments are usage errors") {
  CHECK(run("simulate --engine spatial --density beta:0,1 --out " + path("x.jsonl")).code == 2);
  CHECK(run("simulate --engine forward --out " + path("x.jsonl")).code == 2);
  CHECK(run("simulate --engine spatial --samples 1 --out " + path("x.jsonl")).code == 2);
  CHECK(run("simulate --engine spatial --rho -1 --out " + path("x.jsonl")).code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("--version").code == 0);
}

TEST_CASE("validate accepts engine output") {
  REQUIRE(run("simulate --engine spatial --samples 5 --rho 2 --seed 3 --reps 10 --out " + path("v.jsonl")).code == 0);
  auto r = run("validate " + path("v.jsonl"));
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
}

TEST_CASE("validate rejects a reused locus") {
  spit(path("dup.jsonl"),
       "{\"format_version\":1,\"engine\":\"backintime\",\"N\":2,\"rho\":1,\"density\":\"uniform\",\"seed\":3,"
       "\"replicate\":0,\"events\":2,\"checksum\":\"0000000000000000\"}\n"
       "{\"n\":0,\"t\":0.1,\"ev\":{\"type\":\"rec\",\"i\":1,\"u\":0.5}}\n"
       "{\"n\":1,\"t\":0.2,\"ev\":{\"type\":\"rec\",\"i\":2,\"u\":0.5}}\n");
  auto r = run("validate " + path("dup.jsonl"));
  CHECK(r.code == 1);
  CHECK(r.out.find("clause (c)") != std::string::npos);
  CHECK(r.out.find("FAIL") != std::string::npos);
}

TEST_CASE("validate reports the line of a truncated log") {
  REQUIRE(run("simulate --engine backintime --samples 4 --rho 0 --seed 9 --reps 1 --out " + path("t.jsonl")).code == 0);
  std::string text = slurp(path("t.jsonl"));
  // Keep the header, the first event and half of the second.
  std::size_t second = text.find('\n', text.find('\n') + 1);
  spit(path("trunc.jsonl"), text.substr(0, second + 10));
  auto r = run("validate " + path("trunc.jsonl"));
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("tree output") {
  spit(path("two.jsonl"),
       "{\"format_version\":1,\"engine\":\"backintime\",\"N\":2,\"rho\":0,\"density\":\"uniform\",\"seed\":1,"
       "\"replicate\":0,\"events\":1,\"checksum\":\"0000000000000000\"}\n"
       "{\"n\":0,\"t\":1.3,\"ev\":{\"type\":\"coal\",\"i\":1,\"j\":2}}\n");
  auto nw = run("tree " + path("two.jsonl") + " --site 0.4 --format newick");
  CHECK(nw.code == 0);
  CHECK(nw.out == "(1:1.3,2:1.3);\n");
  auto lv = run("tree " + path("two.jsonl") + " --site 0.4 --format levels");
  CHECK(lv.code == 0);
  CHECK(lv.out == "time,partition\n0,\"{1} {2}\"\n1.3,\"{1,2}\"\n");
  CHECK(run("tree " + path("two.jsonl") + " --site 1.5").code == 2);
  CHECK(run("tree " + path("two.jsonl") + " --replicate 4").code == 2);
}

TEST_CASE("compare") {
  auto ok = run("compare --samples 3 --rho 0.5 --seed 4 --reps 400 --sites 0,0.5 --out " + path("cmp.csv"));
  CHECK(ok.code == 0);
  CHECK(ok.out.find("PASS") != std::string::npos);
  CHECK(slurp(path("cmp.csv")).rfind("statistic,engineA_n,engineB_n,stat,p,pass\n", 0) == 0);
  auto strict = run("compare --samples 3 --rho 0.5 --seed 4 --reps 100 --alpha 1.0");
  CHECK(strict.code == 1);
  CHECK(strict.out.find("FAIL") != std::string::npos);
}

TEST_CASE("split layout") {
  std::string base = "simulate --engine spatial --samples 4 --rho 1 --seed 21 --reps 5";
  REQUIRE(run(base + " --out " + path("whole.jsonl")).code == 0);
  REQUIRE(run(base + " --split-bytes 100 --out " + path("parts.jsonl")).code == 0);
  auto m = nlohmann::json::parse(slurp(path("parts.jsonl.manifest.json")));
  CHECK(m["layout"] == "per_replicate");
  REQUIRE(m["files"].size() == 5);
  std::string joined;
  for (int r = 0; r < 5; ++r) joined += slurp(path("parts.jsonl.r" + std::to_string(r) + ".jsonl"));
  CHECK(joined == slurp(path("whole.jsonl")));
  REQUIRE(run("simulate --from-manifest " + path("parts.jsonl.manifest.json") + " --out " + path("again.jsonl")).code == 0);
  for (int r = 0; r < 5; ++r) {
    auto name = ".r" + std::to_string(r) + ".jsonl";
    CHECK(slurp(path("again.jsonl" + name)) == slurp(path("parts.jsonl" + name)));
  }
  CHECK(run("validate " + path("parts.jsonl.r3.jsonl")).code == 0);
}

TEST_CASE("spatial trace log") {
  REQUIRE(run("simulate --engine spatial --samples 3 --rho 2 --seed 2 --reps 2 --trace-log " + path("trace.jsonl") +
              " --out " + path("tr.jsonl")).code == 0);
  std::istringstream in(slurp(path("trace.jsonl")));
  std::string line;
  int replicates = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    if (j.contains("replicate")) ++replicates;
    else CHECK(j.contains("kind"));
  }
  CHECK(replicates == 2);
}
