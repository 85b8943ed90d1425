// Command-line front end. Subcommands: analyze, simulate, construct,
// baseline, export-mps, plus solve-mps so the tool can serve as its own
// bridge solver (ANALYZER_SOLVER_CMD="gapfinder solve-mps").
#include <iostream>

#include "CLI11.hpp"
#include "gapfinder/mps.hpp"

int main(int argc, char** argv) {
  CLI::App app{"adversarial gap analyzer"};
  app.require_subcommand(1);

  std::string mps_in, sol_out;
  auto* solve_mps = app.add_subcommand("solve-mps", "solve an MPS file, write 'name value' lines");
  solve_mps->add_option("mps", mps_in, "input MPS path")->required();
  solve_mps->add_option("sol", sol_out, "output solution path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_mps->parsed()) {
      gapfinder::Model m = gapfinder::import_mps(mps_in);
      auto [sol, rep] = gapfinder::solve_milp(m);
      if (sol.status != gapfinder::SolveStatus::Optimal &&
          sol.status != gapfinder::SolveStatus::Feasible) {
        std::cerr << "no solution: " << to_string(sol.status) << "\n";
        return 2;
      }
      gapfinder::write_solution(sol, m, sol_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
