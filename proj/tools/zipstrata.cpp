// Command-line driver.  Parses arguments into a JobSpec, runs it, writes the
// document to stdout (and to --out when given), and exits 0 when all checks
// pass, 2 when a check fails, 1 on usage or computation errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "zipstrata/cli.hpp"

namespace {

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw zipstrata::Error("empty entry in integer list: " + text);
    std::size_t used = 0;
    out.push_back(std::stoi(item, &used));
    if (used != item.size()) throw zipstrata::Error("bad integer in list: " + item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"combinatorial engine for zip strata and their closure orders"};
  app.require_subcommand(1);

  zipstrata::JobSpec job;
  std::string j_text, k_text, sigma_text = "id", out_path;

  auto add_format = [&](CLI::App* cmd, std::vector<std::string> allowed) {
    cmd->add_option("--format", job.format, "output format")
        ->default_val("text")
        ->check(CLI::IsMember(allowed));
    cmd->add_option("--out", out_path, "also write the document to this file");
  };
  auto add_cartan = [&](CLI::App* cmd) {
    cmd->add_option("--cartan", job.cartan, "series tag (e.g. C2) or Cartan matrix file")
        ->required();
  };
  auto add_sigma = [&](CLI::App* cmd) {
    cmd->add_option("--sigma", sigma_text, "diagram automorphism: 'id' or a node permutation");
  };

  CLI::App* roots = app.add_subcommand("roots", "root system and group orders");
  add_cartan(roots);
  add_format(roots, {"text", "json"});

  CLI::App* cosets = app.add_subcommand("cosets", "minimal (double) coset representatives");
  add_cartan(cosets);
  cosets->add_option("--J", j_text, "left node set, comma separated");
  cosets->add_option("--K", k_text, "right node set for double cosets");
  add_format(cosets, {"text", "json"});

  CLI::App* poset = app.add_subcommand("zip-poset", "closure order on zip strata");
  add_cartan(poset);
  poset->add_option("--J", j_text, "type of the datum, comma separated");
  add_sigma(poset);
  poset->add_option("--q", job.q, "marker for the coefficient field size");
  add_format(poset, {"text", "json", "dot"});

  CLI::App* bruhat = app.add_subcommand("bruhat-strata", "coarse double coset strata");
  add_cartan(bruhat);
  bruhat->add_option("--J", j_text, "type of the datum, comma separated");
  add_sigma(bruhat);
  bruhat->add_option("--q", job.q, "marker for the coefficient field size");
  add_format(bruhat, {"text", "json", "dot"});

  CLI::App* purity = app.add_subcommand("purity-report", "dimension drops across covers");
  add_cartan(purity);
  purity->add_option("--J", j_text, "type of the datum, comma separated");
  add_sigma(purity);
  purity->add_option("--q", job.q, "marker for the coefficient field size");
  add_format(purity, {"text", "json"});

  CLI::App* oracle = app.add_subcommand("oracle", "brute-force finite-group orbit check");
  oracle->add_option("--n", job.n, "matrix size")->required();
  oracle->add_option("--d", job.d, "lower block size")->required();
  oracle->add_option("--p", job.p, "base prime")->required();
  oracle->add_option("--mmax", job.m_max, "tower height")->default_val(4);
  add_format(oracle, {"text", "json"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    job.command = app.get_subcommands().front()->get_name();
    if (!j_text.empty()) job.J = parse_int_list(j_text);
    if (!k_text.empty()) {
      job.K = parse_int_list(k_text);
      job.has_K = true;
    }
    if (sigma_text != "id") job.sigma = parse_int_list(sigma_text);

    const zipstrata::RunResult result = zipstrata::run(job);
    std::fwrite(result.document.data(), 1, result.document.size(), stdout);
    if (!out_path.empty()) {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw zipstrata::Error("cannot open output file: " + out_path);
      out.write(result.document.data(),
                static_cast<std::streamsize>(result.document.size()));
    }
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
