#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "chdisguise/channel_io.hpp"
#include "chdisguise/channels.hpp"
#include "chdisguise/disguise.hpp"
#include "chdisguise/errors.hpp"
#include "chdisguise/profile_io.hpp"
#include "chdisguise/relations.hpp"
#include "chdisguise/sdp_exact.hpp"

namespace chdisguise::cli {

namespace {

using nlohmann::json;

std::shared_ptr<spdlog::logger> log() {
  static const std::shared_ptr<spdlog::logger> logger = spdlog::stderr_logger_mt("chdisguise");
  return logger;
}

void configure_logging() {
  const char* env = std::getenv("CHDISGUISE_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    log()->set_level(spdlog::level::debug);
  } else if (level == "info") {
    log()->set_level(spdlog::level::info);
  } else {
    log()->set_level(spdlog::level::err);
  }
}

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Options {
  std::vector<std::string> files;
  std::string beta_grid = "log:0.01:100:400";
  std::string out_dir;
  bool exact = false;
  double sdp_tol = SolverOptions{}.tol;
  int sdp_max_iter = -1;
  std::string warm_start = "auto";
  unsigned jobs = default_jobs();
  std::uint64_t seed = 0;
  bool dense = false;
  double tp_tol = kDefaultLoadTpTol;
  double beta = 1.0;

  std::optional<double> p, q, p1, q1, p2, q2;
  std::optional<double> a, b, c;
  Eigen::Index dim = 2;
  Eigen::Index kraus = 0;
  std::string mode = "product";
  std::string fixture;
};

SolverOptions solver_options(const Options& o) {
  SolverOptions s;
  s.tol = o.sdp_tol;
  if (o.sdp_max_iter > 0) {
    s.max_iter = o.sdp_max_iter;
    s.max_newton = o.sdp_max_iter;
  }
  s.warm_start = o.warm_start == "none" ? WarmStart::None : WarmStart::Auto;
  return s;
}

std::vector<KrausChannel> load_all(const Options& o, std::size_t expected) {
  if (o.files.size() != expected) {
    throw ValidationError("expected " + std::to_string(expected) + " channel file(s), got " +
                          std::to_string(o.files.size()));
  }
  std::vector<KrausChannel> out;
  for (const auto& path : o.files) {
    out.push_back(load_channel(path, o.tp_tol));
    log()->info("loaded {} (dim {}, {} Kraus operators)", path, out.back().dim(), out.back().size());
  }
  return out;
}

double need(const std::optional<double>& v, const char* flag) {
  if (!v) throw ValidationError(std::string("missing required flag ") + flag);
  return *v;
}

void emit(std::ostream& out, const json& doc) { out << canonical_json(doc) << '\n'; }

std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + (dir / name).string());
  return f;
}

// Runs body(i) for i in [0, count) on up to `jobs` threads, rethrowing the
// first failure.
template <class Body>
void parallel_for(std::size_t count, unsigned jobs, Body body) {
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void run_profile(const Options& o, std::ostream& out) {
  const auto ch = load_all(o, 2);
  const std::vector<double> grid = parse_beta_grid(o.beta_grid);
  log()->info("profile over {} beta samples with {} job(s)", grid.size(), o.jobs);
  const ProfileCurve curve = trace_profile(ch[0], ch[1], grid, o.jobs);

  std::optional<std::vector<double>> exact;
  if (o.exact) {
    const ChoiRep c_e = choi_from_kraus(ch[0]);
    const ChoiRep c_f = choi_from_kraus(ch[1]);
    const SolverOptions opts = solver_options(o);
    std::vector<double> alphas(grid.size());
    parallel_for(grid.size(), o.jobs, [&](std::size_t i) {
      try {
        alphas[i] = solve_alpha(c_e, c_f, grid[i], opts).alpha_hat;
      } catch (const NumericalError& e) {
        std::ostringstream msg;
        msg << "beta sample " << i << " (beta = " << grid[i] << "): " << e.what();
        throw NumericalError(msg.str(), e.residual());
      }
    });
    exact = std::move(alphas);
  }

  if (o.out_dir.empty()) {
    write_profile_csv(out, curve, exact);
    return;
  }
  auto profile = open_out(o.out_dir, "profile.csv");
  write_profile_csv(profile, curve, exact);
  auto hull = open_out(o.out_dir, "hull.csv");
  write_points_csv(hull, curve.upper_hull_points);
  log()->info("wrote {}/profile.csv and {}/hull.csv", o.out_dir, o.out_dir);
}

json channel_json_from_choi(const ChoiRep& c) { return channel_to_json(kraus_from_choi(c)); }

void run_exact(const Options& o, std::ostream& out) {
  const auto ch = load_all(o, 2);
  const ExactSolution s =
      solve_alpha(choi_from_kraus(ch[0]), choi_from_kraus(ch[1]), o.beta, solver_options(o));
  log()->info("beta {}: alpha_hat {} after {} Newton steps", o.beta, s.alpha_hat, s.iterations);
  json doc = {{"beta", o.beta},         {"alpha_hat", s.alpha_hat}, {"alpha_lo", s.alpha_lower},
              {"alpha_hi", s.alpha_upper}, {"p", s.p},               {"q", s.q},
              {"residual", s.residual},  {"iterations", s.iterations}};
  if (s.choi_EDelta) doc["e_delta"] = channel_json_from_choi(*s.choi_EDelta);
  if (s.choi_FDelta) doc["f_delta"] = channel_json_from_choi(*s.choi_FDelta);
  emit(out, doc);
}

void run_containment(const Options& o, std::ostream& out) {
  const auto ch = load_all(o, 2);
  const ContainmentResult r = containment_min_q(ch[0], ch[1]);
  log()->info("containment via {}", r.closed_form ? "eigenvalue formula" : "bisection");
  emit(out, {{"q_min", r.q_min}});
}

void run_triangle(const Options& o, std::ostream& out) {
  if (o.files.empty()) {
    const TradeoffPoint r = triangle_combine({need(o.p1, "--p1"), need(o.q1, "--q1")},
                                             {need(o.p2, "--p2"), need(o.q2, "--q2")});
    emit(out, {{"p2", r.p}, {"q2", r.q}});
    return;
  }
  const auto ch = load_all(o, 3);
  const std::vector<double> grid = parse_beta_grid(o.beta_grid);
  const ProfileCurve ef = trace_profile(ch[0], ch[1], grid, o.jobs);
  const ProfileCurve fg = trace_profile(ch[1], ch[2], grid, o.jobs);
  const TriangleRegion region = triangle_region(ef, fg, o.dense ? 1 : 5);
  log()->info("triangle region: {} combined points, {} boundary vertices", region.points.size(),
              region.boundary.size());
  if (o.out_dir.empty()) {
    write_points_csv(out, region.boundary);
    return;
  }
  auto boundary = open_out(o.out_dir, "triangle_boundary.csv");
  write_points_csv(boundary, region.boundary);
  auto points = open_out(o.out_dir, "triangle_points.csv");
  write_points_csv(points, region.points);
}

void run_compose(const Options& o, std::ostream& out) {
  if (o.mode != "product" && o.mode != "sum") {
    throw ValidationError("--mode must be product or sum");
  }
  const TradeoffPoint r = compose_mixing({need(o.p1, "--p1"), need(o.q1, "--q1")},
                                         {need(o.p2, "--p2"), need(o.q2, "--q2")},
                                         o.mode == "sum" ? ComposeMode::Sum : ComposeMode::Product);
  emit(out, {{"p2", r.p}, {"q2", r.q}});
}

void run_diamond(const Options& o, std::ostream& out) {
  double p_eq = 0.0;
  Eigen::Index n = o.dim;
  if (o.files.empty()) {
    p_eq = need(o.p, "--p");
  } else {
    const auto ch = load_all(o, 2);
    const ExactSolution s =
        solve_alpha(choi_from_kraus(ch[0]), choi_from_kraus(ch[1]), 1.0, solver_options(o));
    p_eq = std::min(s.p, 0.5);  // p = q <= 1/2 at beta = 1; clip rounding
    n = ch[0].dim();
    log()->info("equal mixing probability {}", p_eq);
  }
  const DiamondBracket b = diamond_bracket(p_eq, n);
  emit(out, {{"diamond_lo", b.lower}, {"diamond_hi", b.upper}});
}

void run_qkd(const Options& o, std::ostream& out) {
  emit(out, {{"rate_bound_bits", qkd_rate_bound(need(o.p, "--p"), o.dim)}});
}

void run_gen_random(const Options& o, std::ostream& out) {
  const Eigen::Index k = o.kraus > 0 ? o.kraus : o.dim;
  emit(out, channel_to_json(random_channel(o.dim, k, o.seed)));
}

void run_fixture(const Options& o, std::ostream& out) {
  const std::string& name = o.fixture;
  if (name == "bitflip") {
    emit(out, channel_to_json(bit_flip(need(o.a, "--a"))));
  } else if (name == "phaseflip") {
    emit(out, channel_to_json(phase_flip(need(o.b, "--b"))));
  } else if (name == "xzflip") {
    emit(out, channel_to_json(xz_flip(need(o.c, "--c"))));
  } else if (name == "appendix-b-e") {
    emit(out, channel_to_json(reference_qubit_pair().first));
  } else if (name == "appendix-b-f") {
    emit(out, channel_to_json(reference_qubit_pair().second));
  } else {
    throw ValidationError("unknown fixture '" + name +
                          "' (bitflip, phaseflip, xzflip, appendix-b-e, appendix-b-f)");
  }
}

void add_files(CLI::App* cmd, Options& o, const char* what) {
  cmd->add_option("channels", o.files, what);
  cmd->add_option("--tp-tol", o.tp_tol, "Trace-preservation tolerance when loading channels");
}

void add_solver(CLI::App* cmd, Options& o) {
  cmd->add_option("--sdp-tol", o.sdp_tol, "Accuracy target on alpha for the exact solve");
  cmd->add_option("--sdp-max-iter", o.sdp_max_iter, "Iteration cap of the exact solve");
  cmd->add_option("--sdp-warm-start", o.warm_start, "Starting point: auto or none")
      ->check(CLI::IsMember({"auto", "none"}));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();
  Options o;
  CLI::App app{"Mixing-probability trade-off between two quantum channels", "chdisguise"};
  app.require_subcommand(1, 1);

  auto* profile = app.add_subcommand("profile", "Lower/upper trade-off curves of E and F");
  add_files(profile, o, "E.json F.json");
  profile->add_option("--beta-grid", o.beta_grid, "log:<lo>:<hi>:<count>");
  profile->add_option("--out", o.out_dir, "Directory for profile.csv and hull.csv");
  profile->add_flag("--exact", o.exact, "Add the exact alpha per sample");
  profile->add_option("--jobs", o.jobs, "Worker threads");
  add_solver(profile, o);

  auto* exact = app.add_subcommand("exact", "Exact optimum at one beta, with harmonizers");
  add_files(exact, o, "E.json F.json");
  exact->add_option("--beta", o.beta, "Ratio (1-q)/(1-p)");
  add_solver(exact, o);

  auto* containment = app.add_subcommand("containment", "Smallest q with E = (1-q) F + q F_Delta");
  add_files(containment, o, "E.json F.json");

  auto* triangle = app.add_subcommand("triangle", "Chain (E,F) and (F,G) into (E,G)");
  add_files(triangle, o, "E.json F.json G.json (omit for scalar mode)");
  triangle->add_option("--p1", o.p1);
  triangle->add_option("--q1", o.q1);
  triangle->add_option("--p2", o.p2, "G-side weight of the (F,G) pair");
  triangle->add_option("--q2", o.q2, "F-side weight of the (F,G) pair");
  triangle->add_option("--beta-grid", o.beta_grid, "log:<lo>:<hi>:<count>");
  triangle->add_option("--out", o.out_dir, "Directory for the region CSVs");
  triangle->add_option("--jobs", o.jobs, "Worker threads");
  triangle->add_flag("--dense", o.dense, "Combine every profile point, not every 5th");

  auto* compose_cmd = app.add_subcommand("compose", "Mixing probabilities of composed pairs");
  compose_cmd->add_option("--p1", o.p1);
  compose_cmd->add_option("--q1", o.q1);
  compose_cmd->add_option("--p2", o.p2);
  compose_cmd->add_option("--q2", o.q2);
  compose_cmd->add_option("--mode", o.mode, "product or sum");

  auto* diamond = app.add_subcommand("diamond", "Diamond-norm bracket from the equal mixing p");
  add_files(diamond, o, "E.json F.json (omit to pass --p)");
  diamond->add_option("--p", o.p, "Equal mixing probability");
  diamond->add_option("--dim", o.dim, "Channel dimension");
  add_solver(diamond, o);

  auto* qkd = app.add_subcommand("qkd", "Key-rate bound p log2(n)");
  qkd->add_option("--p", o.p, "Mixing probability");
  qkd->add_option("--dim", o.dim, "Channel dimension");

  auto* gen = app.add_subcommand("gen-random", "Seeded random channel");
  gen->add_option("--dim", o.dim, "Dimension");
  gen->add_option("--kraus", o.kraus, "Number of Kraus operators (default: dim)");
  gen->add_option("--seed", o.seed, "Seed");

  auto* fixture = app.add_subcommand("fixture", "Built-in channel as JSON");
  fixture->add_option("name", o.fixture, "bitflip, phaseflip, xzflip, appendix-b-e, appendix-b-f")
      ->required();
  fixture->add_option("--a", o.a, "Bit-flip probability");
  fixture->add_option("--b", o.b, "Phase-flip probability");
  fixture->add_option("--c", o.c, "XZ-flip probability");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*profile) run_profile(o, out);
    if (*exact) run_exact(o, out);
    if (*containment) run_containment(o, out);
    if (*triangle) run_triangle(o, out);
    if (*compose_cmd) run_compose(o, out);
    if (*diamond) run_diamond(o, out);
    if (*qkd) run_qkd(o, out);
    if (*gen) run_gen_random(o, out);
    if (*fixture) run_fixture(o, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << " (residual " << e.residual() << ")\n";
    return kExitNumerical;
  } catch (const ValidationError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const json::exception& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace chdisguise::cli
