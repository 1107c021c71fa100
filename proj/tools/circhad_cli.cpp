// circhad: command-line front end for the circulant Hadamard toolkit.
//
//   circhad verify "-+++"
//   circhad decompose "-+++"
//   circhad eqn1 "++,+-,--,+-,--,+-" --lag 2
//   circhad match "++,+-,--,+-,--,+-"
//   circhad chase "++,+-,--,+-,--,+-" --matchings samples/counterexample.match --start 0,2
//   circhad counterexample
//   circhad search --order 16 --workers 4 --format json

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "circhad/commands.hpp"

namespace {

using circhad::cmd::Outcome;

int emit(const Outcome& o, const std::string& format) {
  if (format == "json") {
    std::cout << o.doc.dump(2) << '\n';
    if (o.exit_code == circhad::cmd::exit_usage && o.doc.contains("error"))
      std::cerr << o.text;
  } else {
    (o.exit_code == circhad::cmd::exit_usage ? std::cerr : std::cout) << o.text;
  }
  return o.exit_code;
}

Outcome usage(const std::string& command, const std::string& message) {
  Outcome o;
  o.doc = {{"command", command}, {"inputs", nlohmann::json::object()}, {"result", nullptr}, {"ok", false},
           {"error", message}};
  o.text = "error: " + message + "\n";
  o.exit_code = circhad::cmd::exit_usage;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification and search toolkit for circulant Hadamard matrices and 2-block matchings"};
  app.require_subcommand(1);

  std::string format = "text";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::string input;
  std::string file;
  std::optional<std::int64_t> lag;
  std::string matchings;
  std::string start;

  auto add_input = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("input", input, what);
    sub->add_option("--file", file, "Read one instance per line from a file");
  };

  auto* verify = app.add_subcommand("verify", "Check whether a sequence is the first row of a circulant Hadamard matrix");
  add_input(verify, "Sign sequence over {+,-}");
  auto* paf = app.add_subcommand("paf", "Periodic autocorrelation of a sequence");
  add_input(paf, "Sign sequence over {+,-}");
  paf->add_option("--lag", lag, "Single lag instead of the whole spectrum");
  auto* decompose = app.add_subcommand("decompose", "Split a length-4n sequence into 2n 2-blocks");
  add_input(decompose, "Sign sequence over {+,-}");
  auto* eqn1 = app.add_subcommand("eqn1", "Even-block cancellation residuals of a block sequence");
  add_input(eqn1, "Blocks, e.g. ++,+-,--,+-");
  eqn1->add_option("--lag", lag, "Single nonzero lag");
  auto* match = app.add_subcommand("match", "Greedy matchings, or validate a matching file");
  add_input(match, "Blocks, e.g. ++,+-,--,+-");
  match->add_option("--lag", lag, "Single nonzero lag");
  match->add_option("--matchings", matchings, "Matching file to validate");
  auto* chase = app.add_subcommand("chase", "Run the chase procedure from a start pair");
  chase->add_option("input", input, "Blocks, e.g. ++,+-,--,+-")->required();
  chase->add_option("--matchings", matchings, "Matching file, lines 'u=<lag>: (i,j)~(l,m)'")->required();
  chase->add_option("--start", start, "Start pair 'i,j'")->required();
  auto* counterexample = app.add_subcommand("counterexample", "Check the built-in n = 3 counterexample");

  circhad::SearchConfig cfg;
  std::vector<std::string> prunes{"all"};
  double budget = -1;
  std::string ledger;
  auto* search = app.add_subcommand("search", "Exhaustive search for circulant Hadamard matrices of one order");
  search->add_option("--order", cfg.order, "Matrix order (multiple of 4)")->required();
  search->add_option("--workers", cfg.workers, "Worker threads");
  search->add_option("--prune", prunes, "Prunes: all, none, row-sum, prefix-paf")
      ->delimiter(',')
      ->check(CLI::IsMember({"all", "none", "row-sum", "prefix-paf"}));
  search->add_flag("--canonical", cfg.canonicalize, "Also list rotation/negation class representatives");
  search->add_option("--budget-seconds", budget, "Stop after this many seconds and report incomplete");
  search->add_option("--ledger", ledger, "Shard ledger for resumable runs");
  search->add_option("--shard-depth", cfg.shard_depth, "Prefix length used to split the search");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return circhad::cmd::exit_usage;
  }

  auto single_or_file = [&](const std::string& name, auto run) -> Outcome {
    if (!file.empty() && !input.empty()) return usage(name, "give either an input or --file, not both");
    if (!file.empty()) return circhad::cmd::over_file(name, file, run);
    if (input.empty()) return usage(name, "missing input");
    return run(input);
  };
  std::optional<std::string> matchings_opt;
  if (!matchings.empty()) matchings_opt = matchings;

  Outcome out;
  if (*verify) {
    out = single_or_file("verify", [](std::string_view s) { return circhad::cmd::verify(s); });
  } else if (*paf) {
    out = single_or_file("paf", [&](std::string_view s) { return circhad::cmd::paf(s, lag); });
  } else if (*decompose) {
    out = single_or_file("decompose", [](std::string_view s) { return circhad::cmd::decompose(s); });
  } else if (*eqn1) {
    out = single_or_file("eqn1", [&](std::string_view s) { return circhad::cmd::eqn1(s, lag); });
  } else if (*match) {
    out = single_or_file("match", [&](std::string_view s) { return circhad::cmd::match(s, lag, matchings_opt); });
  } else if (*chase) {
    out = circhad::cmd::chase(input, matchings, start);
  } else if (*counterexample) {
    out = circhad::cmd::counterexample();
  } else if (*search) {
    bool row_sum = false, prefix_paf = false, none = false;
    for (const std::string& p : prunes) {
      if (p == "all") row_sum = prefix_paf = true;
      if (p == "row-sum") row_sum = true;
      if (p == "prefix-paf") prefix_paf = true;
      if (p == "none") none = true;
    }
    if (none && (row_sum || prefix_paf)) return emit(usage("search", "--prune none cannot be combined"), format);
    cfg.prune_row_sum = row_sum;
    cfg.prune_prefix_paf = prefix_paf;
    if (budget >= 0) cfg.budget_seconds = budget;
    if (!ledger.empty()) cfg.ledger = ledger;
    out = circhad::cmd::search(cfg);
  }
  return emit(out, format);
}
