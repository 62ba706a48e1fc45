#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;
};

// Runs the installed command-line binary and captures stdout plus exit code.
CmdResult run_tool(const std::string& args) {
  const std::string cmd = std::string(TOOL_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult result;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) result.output.append(buf, got);
  const int status = ::pclose(pipe);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

int count_occurrences(const std::string& text, const std::string& needle) {
  int count = 0;
  std::size_t at = 0;
  while ((at = text.find(needle, at)) != std::string::npos) {
    ++count;
    at += needle.size();
  }
  return count;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("roots command reports orders in both formats", "[cli]") {
  const CmdResult json = run_tool("roots --cartan A2 --format json");
  CHECK(json.exit_code == 0);
  CHECK(json.output == "{\n  \"order\": 6,\n  \"positive_roots\": 3\n}\n");

  const CmdResult text = run_tool("roots --cartan A2 --format text");
  CHECK(text.exit_code == 0);
  CHECK(contains(text.output, "|W|: 6"));
  CHECK(contains(text.output, "positive roots: 3"));
  CHECK(contains(text.output, "longest element length: 3"));
  CHECK(!text.output.empty());
  CHECK(text.output.back() == '\n');
}

TEST_CASE("cosets command lists single and double coset data", "[cli]") {
  const CmdResult single = run_tool("cosets --cartan A2 --J 0 --format text");
  CHECK(single.exit_code == 0);
  CHECK(contains(single.output, "minimal coset representatives for J {0}: 3"));
  CHECK(contains(single.output, "  e (0)"));
  CHECK(contains(single.output, "  s2 (1)"));
  CHECK(contains(single.output, "  s2s1 (2)"));

  const CmdResult dbl = run_tool("cosets --cartan A2 --J 0 --K 1 --format json");
  CHECK(dbl.exit_code == 0);
  const auto doc = nlohmann::json::parse(dbl.output);
  CHECK(doc.at("count").get<int>() == 2);
  CHECK(doc.at("reps").size() == 2);
  CHECK(doc.at("reps")[0].at("word").get<std::string>() == "e");
  CHECK(doc.at("reps")[0].at("fiber_size").get<int>() == 2);
  CHECK(doc.at("reps")[0].at("max_fiber_length").get<int>() == 1);
  CHECK(doc.at("reps")[1].at("word").get<std::string>() == "s2s1");
  CHECK(doc.at("reps")[1].at("length").get<int>() == 2);
  CHECK(doc.at("reps")[1].at("fiber_size").get<int>() == 1);
  CHECK(doc.at("reps")[1].at("max_fiber_length").get<int>() == 2);
}

TEST_CASE("zip-poset text output shows the four-step chain", "[cli]") {
  const CmdResult res = run_tool("zip-poset --cartan C2 --J 0 --sigma id --format text");
  CHECK(res.exit_code == 0);
  CHECK(contains(res.output, "datum: cartan C2, J {0}, K {0}, sigma id"));
  CHECK(contains(res.output, "strata: 4"));
  CHECK(contains(res.output, "  0: e (len 0, dim 0)"));
  CHECK(contains(res.output, "(len 3, dim 3)"));
  CHECK(count_occurrences(res.output, " < ") == 3);
  CHECK(contains(res.output, "checks: purity PASS, monotone PASS"));
}

TEST_CASE("zip-poset json output matches the documented schema", "[cli]") {
  const CmdResult res = run_tool("zip-poset --cartan C2 --J 0 --format json");
  CHECK(res.exit_code == 0);
  const auto doc = nlohmann::json::parse(res.output);

  CHECK(doc.at("datum").at("cartan").get<std::string>() == "C2");
  CHECK(doc.at("datum").at("J") == nlohmann::json::array({0}));
  CHECK(doc.at("datum").at("K") == nlohmann::json::array({0}));
  CHECK(doc.at("datum").at("sigma").get<std::string>() == "id");

  REQUIRE(doc.at("strata").size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(doc.at("strata")[i].at("length").get<int>() == i);
    CHECK(doc.at("strata")[i].at("dim").get<int>() == i);
  }
  CHECK(doc.at("strata")[0].at("word").get<std::string>() == "e");

  const auto expected_covers = nlohmann::json::parse("[[0,1],[1,2],[2,3]]");
  CHECK(doc.at("covers") == expected_covers);
  CHECK(doc.at("checks").at("purity").get<std::string>() == "PASS");
  CHECK(doc.at("checks").at("monotone").get<std::string>() == "PASS");
}

TEST_CASE("zip-poset dot output is a labelled upward Hasse diagram", "[cli]") {
  const CmdResult res = run_tool("zip-poset --cartan C2 --J 0 --format dot");
  CHECK(res.exit_code == 0);
  CHECK(contains(res.output, "edges point from smaller to larger stratum"));
  CHECK(contains(res.output, "rankdir=BT"));
  CHECK(contains(res.output, "n0 [label=\"e (0)\"];"));
  CHECK(contains(res.output, "n0 -> n1;"));
  CHECK(contains(res.output, "n2 -> n3;"));
}

TEST_CASE("bruhat-strata reports the coarse chain", "[cli]") {
  const CmdResult res = run_tool("bruhat-strata --cartan C2 --J 0 --format json");
  CHECK(res.exit_code == 0);
  const auto doc = nlohmann::json::parse(res.output);
  REQUIRE(doc.at("strata").size() == 3);
  CHECK(doc.at("strata")[0].at("length").get<int>() == 0);
  CHECK(doc.at("strata")[1].at("length").get<int>() == 1);
  CHECK(doc.at("strata")[2].at("length").get<int>() == 3);
  CHECK(doc.at("strata")[0].at("dim").get<int>() == 0);
  CHECK(doc.at("strata")[1].at("dim").get<int>() == 2);
  CHECK(doc.at("strata")[2].at("dim").get<int>() == 3);
  CHECK(doc.at("classes").size() == 3);
  CHECK(doc.at("covers") == nlohmann::json::parse("[[0,1],[1,2]]"));
  CHECK(doc.at("checks").at("monotone").get<std::string>() == "PASS");
}

TEST_CASE("purity-report lists unit dimension drops", "[cli]") {
  const CmdResult res = run_tool("purity-report --cartan C2 --J 0 --format json");
  CHECK(res.exit_code == 0);
  const auto doc = nlohmann::json::parse(res.output);
  REQUIRE(doc.at("covers").size() == 3);
  for (const auto& cover : doc.at("covers")) CHECK(cover.at("drop").get<int>() == 1);
  CHECK(doc.at("checks").at("purity").get<std::string>() == "PASS");
}

TEST_CASE("oracle matches the coset count on the smallest instance", "[cli]") {
  const CmdResult res = run_tool("oracle --n 2 --d 1 --p 2 --mmax 4");
  CHECK(res.exit_code == 0);
  CHECK(contains(res.output, "orbit counts by level: 2 2 2 2"));
  CHECK(contains(res.output, "stabilized: yes"));
  CHECK(contains(res.output, "geometric orbits: 2 (matches |^J W| = 2)"));
  CHECK(contains(res.output, "checks: oracle PASS"));
}

TEST_CASE("oracle reports an unsettled tower as a check failure", "[cli]") {
  const CmdResult res = run_tool("oracle --n 2 --d 1 --p 3 --mmax 2");
  CHECK(res.exit_code == 2);
  CHECK(contains(res.output, "stabilized: no"));
  CHECK(contains(res.output, "checks: oracle FAIL"));
}

TEST_CASE("usage and input errors exit with code 1", "[cli]") {
  CHECK(run_tool("no-such-command").exit_code == 1);
  CHECK(run_tool("roots").exit_code == 1);                            // missing --cartan
  CHECK(run_tool("roots --cartan A2 --format dot").exit_code == 1);   // format not allowed
  CHECK(run_tool("roots --cartan Z9").exit_code == 1);                // unknown series
  CHECK(run_tool("roots --cartan /no/such/file").exit_code == 1);     // unreadable file
  CHECK(run_tool("zip-poset --cartan C2 --J 7").exit_code == 1);      // node out of range
  CHECK(run_tool("zip-poset --cartan C2 --J 0 --sigma 1,0").exit_code == 1);  // not a symmetry
  CHECK(run_tool("zip-poset --cartan A2 --J 0,x").exit_code == 1);            // bad node list
}

TEST_CASE("a Cartan matrix file reproduces the series result", "[cli]") {
  const std::string path = "/tmp/zipstrata_cli_c2.cartan";
  {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << "2 -2\n-1 2\n";
  }
  const CmdResult from_file = run_tool("roots --cartan " + path + " --format json");
  const CmdResult from_tag = run_tool("roots --cartan C2 --format json");
  CHECK(from_file.exit_code == 0);
  CHECK(from_tag.exit_code == 0);
  CHECK(from_file.output == from_tag.output);
  std::remove(path.c_str());
}

TEST_CASE("repeated runs and --out copies are byte-identical", "[cli]") {
  const CmdResult first = run_tool("zip-poset --cartan C2 --J 0 --format json");
  const CmdResult second = run_tool("zip-poset --cartan C2 --J 0 --format json");
  CHECK(first.exit_code == 0);
  CHECK(first.output == second.output);

  const std::string path = "/tmp/zipstrata_cli_out.json";
  const CmdResult with_out =
      run_tool("zip-poset --cartan C2 --J 0 --format json --out " + path);
  CHECK(with_out.exit_code == 0);
  CHECK(read_file(path) == with_out.output);
  CHECK(with_out.output == first.output);
  std::remove(path.c_str());
}
