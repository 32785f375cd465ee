#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "polydomain/cli.hpp"

namespace {

constexpr std::pair<const char*, const char*> kCommands[] = {
    {"check", "membership certificate for a tuple, optionally on a radius grid"},
    {"model", "emit the weighted shift tuple of a domain at a degree cutoff"},
    {"kernel", "assemble the generalized Poisson kernel and its diagnostics"},
    {"berezin", "compression transform of a symbol through the kernel"},
    {"vn", "polynomial norm inequality against the model side"},
    {"hnorm", "operator norms of a series over a radius grid"},
    {"beurling", "factor a positive operator through a multi-analytic one"},
    {"subspace", "invariant / reducing tests for a model-space projection"},
    {"charfn", "characteristic operator, purity and innerness"},
    {"model-space", "functional model realization of a tuple"},
    {"dilate", "isometric model dilation of a pure tuple"},
    {"wold", "split a tuple into its unitary and pure blocks"},
};

void attach_options(CLI::App* sub, polydomain::RunConfig* cfg) {
  sub->add_option("--spec", cfg->spec_path, "domain spec JSON");
  sub->add_option("--tuple", cfg->tuple_path, "operator tuple JSON");
  sub->add_option("--series", cfg->series_path, "free series JSON");
  sub->add_option("--y", cfg->y_path, "operator to factor (linop JSON)");
  sub->add_option("--p", cfg->p_path, "projection to test (linop JSON)");
  sub->add_option("--degree", cfg->degree,
                  "truncation degree, scalar or comma list per factor")
      ->delimiter(',');
  sub->add_option("--tol", cfg->tol, "certification tolerance");
  sub->add_option("--comm-tol", cfg->comm_tol, "commutation tolerance override");
  sub->add_option("--eps-rank", cfg->eps_rank, "relative rank cutoff override");
  sub->add_option("--radius-grid", cfg->radius_grid, "comma list of radii")
      ->delimiter(',');
  sub->add_option("--seed", cfg->seed, "seed for the seeded constructions");
  sub->add_option("--dil-deg", cfg->dil_deg, "word degree for dilation checks");
  sub->add_option("--out", cfg->out_path, "write the report here instead of stdout");
  sub->add_flag("--exact", cfg->exact, "cross-check weight tables in exact arithmetic");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certification pipelines for weighted polydomain tuples"};
  app.require_subcommand(1);
  polydomain::RunConfig cfg;
  for (const auto& [name, desc] : kCommands)
    attach_options(app.add_subcommand(name, desc), &cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    polydomain::CliReport rep = polydomain::run(command, cfg);
    const std::string text = rep.to_json().dump(2);
    if (cfg.out_path.empty())
      std::cout << text << '\n';
    else
      polydomain::write_json_file(cfg.out_path, rep.to_json());
    return rep.hard_pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << polydomain::Json{{"error", e.what()}}.dump() << '\n';
    return 2;
  }
}
