#include <CLI11.hpp>

#include <cctype>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fv2d/convergence.hpp"
#include "fv2d/cos.hpp"
#include "fv2d/csv.hpp"
#include "fv2d/greeks.hpp"
#include "fv2d/integrator.hpp"
#include "fv2d/models.hpp"

namespace {

using Scalar = double;

std::pair<Eigen::Index, Eigen::Index> parse_mesh(const std::string& s) {
  const auto x = s.find_first_of("xX");
  if (x == std::string::npos) {
    const long n = std::stol(s);
    return {n, n};
  }
  return {std::stol(s.substr(0, x)), std::stol(s.substr(x + 1))};
}

std::vector<Eigen::Index> parse_mesh_list(const std::string& s) {
  std::vector<Eigen::Index> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stol(tok));
  if (out.empty()) throw CLI::ValidationError("--meshes", "expected a comma-separated list");
  return out;
}

fv2d::Mode parse_mode(const std::string& s) {
  if (s == "imex") return fv2d::Mode::imex;
  if (s == "explicit") return fv2d::Mode::explicit_heun;
  throw CLI::ValidationError("--mode", "expected 'imex' or 'explicit'");
}

std::vector<fv2d::Mode> parse_mode_list(const std::string& s) {
  std::vector<fv2d::Mode> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_mode(tok));
  if (out.empty()) throw CLI::ValidationError("--modes", "expected a comma-separated list");
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Flat `key = value` overrides applied on top of a named preset's model
// parameters. Unknown keys are an error so typos do not pass silently.
void apply_config(fv2d::Preset<Scalar>& preset, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, Scalar*> slots;
  if (preset.is_heston) {
    auto& p = preset.heston;
    slots["sigma"] = &p.sigma;
    slots["r"] = &p.r;
    slots["q"] = &p.q;
    slots["kappa"] = &p.kappa;
    slots["theta"] = &p.theta;
    slots["rho"] = &p.rho;
    slots["T"] = &p.T;
    slots["K"] = &p.K;
    slots["s_max"] = &p.s_bar;
    slots["v_max"] = &p.v_bar;
  } else {
    auto& p = preset.basket;
    slots["sigma1"] = &p.sigma1;
    slots["sigma2"] = &p.sigma2;
    slots["r"] = &p.r;
    slots["q1"] = &p.q1;
    slots["q2"] = &p.q2;
    slots["rho"] = &p.rho;
    slots["T"] = &p.T;
    slots["K"] = &p.K;
  }
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string val = trim(stripped.substr(eq + 1));
    const auto it = slots.find(key);
    if (it == slots.end())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key +
                               "' for preset " + preset.name);
    *it->second = std::stod(val);
  }
  (preset.is_heston ? static_cast<void>(preset.heston.validate())
                    : static_cast<void>(preset.basket.validate()));
}

struct CommonOpts {
  std::string preset_name = "test1";
  std::string config_path;
  std::string out_path;
  Scalar cfl = 0.5;
  std::string solver = "krylov";
  int quad = 2000;
  int heston_terms = 160;
  int reference_quad = 2000;

  void attach(CLI::App* cmd, bool with_out = true) {
    cmd->add_option("--preset", preset_name, "named parameter set: test1..test4")
        ->check(CLI::IsMember({"test1", "test2", "test3", "test4"}));
    cmd->add_option("--config", config_path, "flat key=value file overriding preset fields");
    if (with_out) cmd->add_option("--out", out_path, "output CSV path")->required();
    cmd->add_option("--cfl", cfl, "CFL number for time-step selection");
    cmd->add_option("--solver", solver, "stage linear solver")
        ->check(CLI::IsMember({"krylov", "direct"}));
    cmd->add_option("--quad", quad, "COS payoff quadrature points per axis (pointwise prices)");
    cmd->add_option("--heston-terms", heston_terms, "cosine series terms for 1D pricer");
    cmd->add_option("--reference-quad", reference_quad,
                    "quadrature points for whole-grid basket references");
  }

  fv2d::Preset<Scalar> preset() const {
    fv2d::Preset<Scalar> p = fv2d::preset<Scalar>(preset_name);
    if (!config_path.empty()) apply_config(p, config_path);
    return p;
  }

  fv2d::StudyConfig<Scalar> study() const {
    fv2d::StudyConfig<Scalar> s;
    s.cos.quad_points = quad;
    s.reference_quad = reference_quad;
    s.heston_terms = heston_terms;
    s.cfl = cfl;
    s.solver =
        solver == "direct" ? fv2d::LinearSolverKind::direct : fv2d::LinearSolverKind::krylov;
    return s;
  }
};

int run_price(const CommonOpts& o, const std::string& mesh, const std::string& mode_str) {
  const auto [nx, ny] = parse_mesh(mesh);
  const fv2d::Mode mode = parse_mode(mode_str);
  const auto preset = o.preset();
  const auto g = preset.grid(nx, ny);
  fv2d::RunStats<Scalar> stats;
  fv2d::Field<Scalar> sol = fv2d::integrate(preset.model(), g, preset.maturity(), mode, o.cfl,
                                            o.study().solver, &stats);
  fv2d::field_csv(sol, "price").save(o.out_path);
  std::cout << "preset=" << preset.name << " mesh=" << nx << "x" << ny
            << " mode=" << fv2d::mode_name(mode) << " dt=" << fv2d::csv_number(stats.dt)
            << " steps=" << stats.steps << " wall_seconds=" << stats.wall_seconds << "\n";
  return 0;
}

int run_converge(const CommonOpts& o, const std::string& meshes, const std::string& modes) {
  const auto preset = o.preset();
  const auto report =
      fv2d::run_convergence_study(preset, parse_mesh_list(meshes), parse_mode_list(modes),
                                  o.study());
  report.csv().save(o.out_path);
  std::cout << report.csv().str();
  return 0;
}

int run_cos_price(const CommonOpts& o, const std::string& lattice) {
  const auto preset = o.preset();
  if (lattice != "table")
    throw CLI::ValidationError("--lattice", "expected 'table'");
  const auto [xs, ys] = fv2d::table_lattice(preset);
  fv2d::CsvTable t({preset.is_heston ? "s" : "s1", preset.is_heston ? "v" : "s2", "price"});
  const auto cfg = o.study();
  for (Eigen::Index i = 0; i < xs.size(); ++i)
    for (Eigen::Index j = 0; j < ys.size(); ++j) {
      const Scalar price =
          preset.is_heston
              ? fv2d::cos_price_heston(preset.heston, xs(i), ys(j), cfg.heston_terms,
                                       cfg.heston_L)
              : fv2d::cos_price_2d(preset.basket, xs(i), ys(j), cfg.cos);
      t.add_row({fv2d::csv_number(xs(i)), fv2d::csv_number(ys(j)), fv2d::csv_number(price)});
    }
  t.save(o.out_path);
  std::cout << t.str();
  return 0;
}

int run_greeks(const CommonOpts& o, const std::string& mesh, const std::string& mode_str) {
  const auto [nx, ny] = parse_mesh(mesh);
  const fv2d::Mode mode = parse_mode(mode_str);
  const auto preset = o.preset();
  const auto g = preset.grid(nx, ny);
  fv2d::Field<Scalar> sol =
      fv2d::integrate(preset.model(), g, preset.maturity(), mode, o.cfl, o.study().solver);
  const fv2d::Greeks<Scalar> gk = fv2d::greeks(sol);
  fv2d::CsvTable t({"x", "y", "price", "delta_x", "delta_y", "gamma_x", "gamma_y"});
  for (Eigen::Index i = 0; i < g.nx; ++i)
    for (Eigen::Index j = 0; j < g.ny; ++j)
      t.add_row({fv2d::csv_number(g.xc(i)), fv2d::csv_number(g.yc(j)),
                 fv2d::csv_number(sol.at(i, j)), fv2d::csv_number(gk.delta_x(i, j)),
                 fv2d::csv_number(gk.delta_y(i, j)), fv2d::csv_number(gk.gamma_x(i, j)),
                 fv2d::csv_number(gk.gamma_y(i, j))});
  t.save(o.out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite volume IMEX pricer for 2D option models with a COS reference"};
  app.require_subcommand(1);

  CommonOpts price_opts, conv_opts, cos_opts, greeks_opts;
  std::string price_mesh = "200x200", price_mode = "imex";
  std::string conv_meshes = "25,50,100,200,400", conv_modes = "imex";
  std::string cos_lattice = "table";
  std::string greeks_mesh = "400x400", greeks_mode = "imex";

  auto* price = app.add_subcommand("price", "solve one mesh and emit the price surface");
  price_opts.attach(price);
  price->add_option("--mesh", price_mesh, "mesh as NxM or N");
  price->add_option("--mode", price_mode, "imex or explicit");

  auto* conv = app.add_subcommand("converge", "mesh-refinement study against the COS reference");
  conv_opts.attach(conv);
  conv->add_option("--meshes", conv_meshes, "comma-separated mesh sizes");
  conv->add_option("--modes", conv_modes, "comma-separated integrator modes");

  auto* cosp = app.add_subcommand("cos-price", "COS reference prices on an evaluation lattice");
  cos_opts.attach(cosp);
  cosp->add_option("--lattice", cos_lattice, "'table': the preset's benchmark-table abscissae");

  auto* grk = app.add_subcommand("greeks", "solve one mesh and emit delta/gamma surfaces");
  greeks_opts.attach(grk);
  grk->add_option("--mesh", greeks_mesh, "mesh as NxM or N");
  grk->add_option("--mode", greeks_mode, "imex or explicit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (price->parsed()) return run_price(price_opts, price_mesh, price_mode);
    if (conv->parsed()) return run_converge(conv_opts, conv_meshes, conv_modes);
    if (cosp->parsed()) return run_cos_price(cos_opts, cos_lattice);
    if (grk->parsed()) return run_greeks(greeks_opts, greeks_mesh, greeks_mode);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
