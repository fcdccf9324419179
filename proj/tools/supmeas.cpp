// supmeas: command-line front end for the support-measure toolkit.
//
// Exit codes: 0 success, 1 operational error, 2 assertion failure
// (a checked inequality does not hold), 64 usage error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "supmeas/body_io.hpp"
#include "supmeas/bounded_lipschitz.hpp"
#include "supmeas/config.hpp"
#include "supmeas/harness.hpp"
#include "supmeas/hausdorff.hpp"
#include "supmeas/measures.hpp"
#include "supmeas/section4.hpp"

namespace {

using nlohmann::json;
using namespace supmeas;

constexpr int kExitOk = 0;
constexpr int kExitOperational = 1;
constexpr int kExitAssertion = 2;

/// --seed wins; otherwise SUPMEAS_SEED; otherwise the config value; otherwise 1.
std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t seed_flag,
                           const Config* cfg) {
  if (seed_opt->count() > 0) return seed_flag;
  if (const char* env = std::getenv("SUPMEAS_SEED")) {
    char* end = nullptr;
    std::uint64_t v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      fail(ErrorKind::InvalidInput, std::string("bad SUPMEAS_SEED: ") + env);
    return v;
  }
  if (cfg && cfg->seed) return *cfg->seed;
  return 1;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open output file: " + out_path);
  out << text;
}

const ConvexBody& config_body(const Config& cfg, std::size_t idx, const char* what) {
  if (cfg.body_order.size() <= idx)
    fail(ErrorKind::InvalidInput, std::string("config: ") + what + " needs " +
                                      std::to_string(idx + 1) + " body block(s)");
  return cfg.bodies.at(cfg.body_order[idx]);
}

int cmd_measure(const std::string& body_path, std::size_t samples,
                std::uint64_t seed, std::size_t workers, const std::string& out_stem) {
  ConvexBody K = load_body(body_path);
  MeasureFamily fam = extract_support_measures(K, samples, seed, 0, workers);
  for (std::size_t i = 0; i < K.dim(); ++i) {
    DiscreteMeasure lam = fam.lambda(i);
    std::string path = out_stem + ".lambda" + std::to_string(i) + ".msr";
    save_measure(path, lam);
    std::printf("lambda%zu: mass %.12g atoms %zu -> %s\n", i, lam.total_mass(),
                lam.size(), path.c_str());
  }
  return kExitOk;
}

int cmd_dbl(const std::string& a_path, const std::string& b_path, double grid,
            std::size_t atom_cap, const std::string& format,
            const std::string& out_path) {
  DiscreteMeasure mu = load_measure(a_path), nu = load_measure(b_path);
  DblOptions opts;
  opts.grid = grid;
  opts.atom_cap = atom_cap;
  DblResult res = bounded_lipschitz_distance(mu, nu, opts);
  std::ostringstream text;
  if (format == "json") {
    json j;
    j["value"] = res.value;
    j["coarsening_error"] = res.coarsening_error;
    j["duality_gap"] = res.duality_gap;
    j["support_size"] = res.support_size;
    j["lp_iterations"] = res.lp_iterations;
    text << j.dump(2) << '\n';
  } else {
    text << "value,coarsening_error,duality_gap,support_size\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%zu\n", res.value,
                  res.coarsening_error, res.duality_gap, res.support_size);
    text << buf;
  }
  emit(text.str(), out_path);
  return kExitOk;
}

int cmd_hausdorff(const std::string& a_path, const std::string& b_path,
                  double resolution, const std::string& format,
                  const std::string& out_path) {
  ConvexBody K = load_body(a_path), L = load_body(b_path);
  HausdorffBracket br = hausdorff_bracket(K, L, resolution);
  std::ostringstream text;
  if (format == "json") {
    json j;
    j["lo"] = br.lo;
    j["hi"] = br.hi;
    text << j.dump(2) << '\n';
  } else {
    char buf[96];
    std::snprintf(buf, sizeof buf, "lo,hi\n%.17g,%.17g\n", br.lo, br.hi);
    text << buf;
  }
  emit(text.str(), out_path);
  return kExitOk;
}

json lemma41_json(const Lemma41Report& r) {
  json j;
  j["lhs"] = r.lhs;
  j["term_proj"] = r.term_proj;
  j["term_normal"] = r.term_normal;
  j["term_sym"] = r.term_sym;
  j["rhs"] = r.rhs;
  j["sigma"] = r.sigma;
  j["coarsening_error"] = r.coarsening_error;
  j["holds"] = r.holds;
  return j;
}

int cmd_lemma41(const std::string& cfg_path, const CLI::Option* seed_opt,
                std::uint64_t seed_flag, const CLI::Option* samples_opt,
                std::size_t samples_flag, const std::string& format,
                const std::string& out_path) {
  Config cfg = load_config(cfg_path);
  std::uint64_t seed = resolve_seed(seed_opt, seed_flag, &cfg);
  Lemma41Options opts;
  if (samples_opt->count() > 0) opts.samples = samples_flag;
  else if (cfg.samples) opts.samples = *cfg.samples;
  if (cfg.grid) opts.grid = *cfg.grid;
  if (cfg.atom_cap) opts.atom_cap = *cfg.atom_cap;
  opts.groups = cfg.groups;

  std::ostringstream text;
  bool ok = true;
  if (cfg.lemma41_trials > 0) {
    Lemma41Trials tr = lemma41_trials(cfg.lemma41_trials, seed, opts);
    ok = tr.held == tr.total;
    if (format == "json") {
      json j;
      j["trials"] = tr.total;
      j["held"] = tr.held;
      j["reports"] = json::array();
      for (const auto& r : tr.reports) j["reports"].push_back(lemma41_json(r));
      text << j.dump(2) << '\n';
    } else {
      text << "trial,lhs,rhs,sigma,coarsening_error,holds\n";
      char buf[240];
      for (std::size_t t = 0; t < tr.reports.size(); ++t) {
        const auto& r = tr.reports[t];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%d\n", t,
                      r.lhs, r.rhs, r.sigma, r.coarsening_error, r.holds ? 1 : 0);
        text << buf;
      }
      text << "# held " << tr.held << " of " << tr.total << '\n';
    }
  } else {
    const ConvexBody& K = config_body(cfg, 0, "lemma41");
    const ConvexBody& L = config_body(cfg, 1, "lemma41");
    Lemma41Report r = verify_lemma41(K, L, cfg.lemma41_rho, seed, opts);
    ok = r.holds;
    if (format == "json") {
      text << lemma41_json(r).dump(2) << '\n';
    } else {
      text << "lhs,term_proj,term_normal,term_sym,rhs,sigma,coarsening_error,holds\n";
      char buf[320];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                    r.lhs, r.term_proj, r.term_normal, r.term_sym, r.rhs, r.sigma,
                    r.coarsening_error, r.holds ? 1 : 0);
      text << buf;
    }
  }
  emit(text.str(), out_path);
  return ok ? kExitOk : kExitAssertion;
}

int cmd_theorem1(const std::string& cfg_path, const CLI::Option* seed_opt,
                 std::uint64_t seed_flag, const CLI::Option* samples_opt,
                 std::size_t samples_flag, const std::string& format,
                 const std::string& out_path) {
  Config cfg = load_config(cfg_path);
  if (!cfg.family)
    fail(ErrorKind::InvalidInput, "config: theorem1 needs a family block");
  const ConvexBody& K = config_body(cfg, 0, "theorem1");
  Theorem1Options opts;
  opts.seed = resolve_seed(seed_opt, seed_flag, &cfg);
  if (samples_opt->count() > 0) opts.samples = samples_flag;
  else if (cfg.samples) opts.samples = *cfg.samples;
  opts.workers = cfg.workers;
  if (cfg.grid) opts.grid = *cfg.grid;
  if (cfg.atom_cap) opts.atom_cap = *cfg.atom_cap;
  opts.groups = cfg.groups;

  Theorem1Result res = run_theorem1(K, *cfg.family, opts);
  std::ostringstream text;
  if (format == "json") {
    json j;
    j["family"] = family_name(cfg.family->kind);
    j["records"] = json::array();
    for (const auto& r : res.records) {
      json rec;
      rec["body_a"] = r.body_a;
      rec["body_b"] = r.body_b;
      rec["eps"] = r.eps;
      rec["delta"] = r.delta;
      rec["R"] = r.R;
      rec["dbl"] = r.dbl;
      rec["mc_stderr"] = r.dbl_stderr;
      rec["ratio"] = r.ratio;
      rec["in_fit"] = r.in_fit;
      rec["samples"] = r.samples;
      rec["seed"] = r.seed;
      j["records"].push_back(std::move(rec));
    }
    j["slopes"] = res.slopes;
    j["max_ratio_step"] = res.max_ratio_step;
    text << j.dump(2) << '\n';
  } else {
    text << theorem1_csv(res, cfg.family->kind);
  }
  emit(text.str(), out_path);
  return kExitOk;
}

int cmd_tightness(std::size_t n, std::size_t i, std::vector<double> h_grid,
                  const CLI::Option* seed_opt, std::uint64_t seed_flag,
                  const CLI::Option* samples_opt, std::size_t samples_flag,
                  double grid, const std::string& format,
                  const std::string& out_path) {
  std::uint64_t seed = resolve_seed(seed_opt, seed_flag, nullptr);
  TightnessOptions opts;
  if (samples_opt->count() > 0) opts.samples = samples_flag;
  opts.grid = grid;
  TightnessReport rep = tightness_report(n, i, h_grid, seed, opts);
  std::ostringstream text;
  if (format == "json") {
    json j;
    j["rows"] = json::array();
    for (const auto& r : rep.rows) {
      json row;
      row["n"] = r.n;
      row["i"] = r.i;
      row["h"] = r.h;
      row["caps"] = r.caps;
      row["gap_analytic"] = r.gap_analytic;
      row["lip_measured"] = r.lip_measured;
      row["lower_bound"] = r.lower_bound;
      row["dH_bound"] = r.dH_bound;
      row["dbl_empirical"] = r.dbl_empirical;
      row["mc_stderr"] = r.mc_stderr;
      row["coarsening_error"] = r.coarsen_bound;
      j["rows"].push_back(std::move(row));
    }
    j["fitted_exponent"] = rep.fitted_exponent;
    text << j.dump(2) << '\n';
  } else {
    text << tightness_csv(rep);
    char buf[64];
    std::snprintf(buf, sizeof buf, "# fitted_exponent %.12g\n", rep.fitted_exponent);
    text << buf;
  }
  emit(text.str(), out_path);
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"support-measure toolkit"};
  app.require_subcommand(1);

  std::string body_path, a_path, b_path, cfg_path, out_path, out_stem;
  std::string format = "csv";
  std::size_t samples = 200000, workers = 1, atom_cap = 4000, nn = 3, ii = 1;
  std::uint64_t seed = 1;
  double grid = 0.0, resolution = 1e-4;
  std::vector<double> h_grid;

  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", out_path, "write output to this file");
  };

  auto* c_measure = app.add_subcommand("measure", "extract and serialize Lambda_0..Lambda_{n-1}");
  c_measure->add_option("--body", body_path, "body description file")->required();
  c_measure->add_option("--samples", samples, "Monte-Carlo samples");
  auto* m_seed = c_measure->add_option("--seed", seed, "RNG seed");
  c_measure->add_option("--workers", workers, "sampling workers");
  c_measure->add_option("--out", out_stem, "output stem")->required();

  auto* c_dbl = app.add_subcommand("dbl", "bounded-Lipschitz distance of two serialized measures");
  c_dbl->add_option("a", a_path, "first measure file")->required();
  c_dbl->add_option("b", b_path, "second measure file")->required();
  c_dbl->add_option("--grid", grid, "coarsening cell size (0 = exact)");
  c_dbl->add_option("--atom-cap", atom_cap, "merged support cap");
  add_format(c_dbl);

  auto* c_hd = app.add_subcommand("hausdorff", "Hausdorff distance bracket of two bodies");
  c_hd->add_option("a", a_path, "first body file")->required();
  c_hd->add_option("b", b_path, "second body file")->required();
  c_hd->add_option("--resolution", resolution, "bracket width target");
  add_format(c_hd);

  auto* c_l41 = app.add_subcommand("lemma41", "shell-coupling inequality check");
  c_l41->add_option("--config", cfg_path, "experiment config")->required();
  auto* l_seed = c_l41->add_option("--seed", seed, "RNG seed");
  auto* l_samples = c_l41->add_option("--samples", samples, "Monte-Carlo samples");
  add_format(c_l41);

  auto* c_t1 = app.add_subcommand("theorem1", "perturbation-ladder experiment");
  c_t1->add_option("--config", cfg_path, "experiment config")->required();
  auto* t_seed = c_t1->add_option("--seed", seed, "RNG seed");
  auto* t_samples = c_t1->add_option("--samples", samples, "Monte-Carlo samples");
  add_format(c_t1);

  auto* c_tg = app.add_subcommand("tightness", "cap-packing optimality experiment");
  c_tg->set_help_flag("--help", "print help"); // frees -h for the --h option below
  c_tg->add_option("--n", nn, "ambient dimension");
  c_tg->add_option("--i", ii, "measure index");
  c_tg->add_option("--h", h_grid, "cap half-widths")->required();
  auto* g_seed = c_tg->add_option("--seed", seed, "RNG seed");
  auto* g_samples = c_tg->add_option("--samples", samples, "Monte-Carlo samples");
  c_tg->add_option("--grid", grid, "coarsening cell size (0 = auto)");
  add_format(c_tg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 64;
  }

  try {
    if (c_measure->parsed())
      return cmd_measure(body_path, samples,
                         resolve_seed(m_seed, seed, nullptr), workers, out_stem);
    if (c_dbl->parsed())
      return cmd_dbl(a_path, b_path, grid, atom_cap, format, out_path);
    if (c_hd->parsed())
      return cmd_hausdorff(a_path, b_path, resolution, format, out_path);
    if (c_l41->parsed())
      return cmd_lemma41(cfg_path, l_seed, seed, l_samples, samples, format, out_path);
    if (c_t1->parsed())
      return cmd_theorem1(cfg_path, t_seed, seed, t_samples, samples, format, out_path);
    if (c_tg->parsed())
      return cmd_tightness(nn, ii, h_grid, g_seed, seed, g_samples, samples, grid,
                           format, out_path);
  } catch (const supmeas::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOperational;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOperational;
  }
  return 64;
}
