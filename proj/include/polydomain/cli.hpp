#pragma once
/** @file cli.hpp
 *  @brief Command implementations behind the batch front end: config
 *         resolution, dispatch, and JSON report assembly.
 *
 *  Every residual lands in the report ledger as {name, value, tol,
 *  projection}; hard entries also fold into the exit verdict. Soft
 *  certifications ("not certified at this degree") never fail the run, they
 *  only clear the certified flag. Identical config and seed give identical
 *  reports except for the timing block.
 */

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polydomain/charfn.hpp"
#include "polydomain/factorization.hpp"
#include "polydomain/io.hpp"
#include "polydomain/kernel.hpp"
#include "polydomain/random.hpp"
#include "polydomain/series.hpp"

namespace polydomain {

struct RunConfig {
  std::string spec_path;
  std::string tuple_path;
  std::string series_path;
  std::string y_path;      // serialized operator for `beurling`
  std::string p_path;      // serialized projection for `subspace`
  std::string out_path;    // empty = stdout
  std::vector<int> degree;  // empty = derive from the tuple's tail bound
  double tol = 1e-9;
  double comm_tol = -1.0;   // negative = scale-derived default
  double eps_rank = -1.0;   // negative = per-command default
  std::vector<double> radius_grid;
  std::uint64_t seed = 0;
  int dil_deg = 3;
  bool exact = false;
};

struct CliReport {
  std::string command;
  Json config = Json::object();
  Json verdicts = Json::object();
  Json ledger = Json::array();
  Json data = Json::object();
  bool hard_pass = true;
  bool certified = true;
  double seconds = 0.0;

  void hard(const std::string& name, bool ok) {
    verdicts[name] = ok;
    hard_pass &= ok;
  }

  void soft(const std::string& name, bool ok) {
    verdicts[name] = ok;
    certified &= ok;
  }

  /// Hard entries bound the run verdict; soft entries only document.
  void residual(const std::string& name, double value, double tol,
                const std::string& projection, bool is_hard = true) {
    ledger.push_back({{"name", name},
                      {"value", value},
                      {"tol", tol},
                      {"projection", projection}});
    if (is_hard) hard(name, value <= tol);
  }

  Json to_json() const {
    Json j;
    j["command"] = command;
    j["config"] = config;
    j["verdicts"] = verdicts;
    j["ledger"] = ledger;
    j["data"] = data;
    j["hard_pass"] = hard_pass;
    j["certified"] = certified;
    j["timings"] = Json{{"seconds", seconds}};
    return j;
  }
};

namespace detail {

inline std::string degree_label(const std::vector<int>& d) {
  std::string s = "degree [";
  for (std::size_t i = 0; i < d.size(); ++i)
    s += (i ? "," : "") + std::to_string(d[static_cast<std::size_t>(i)]);
  return s + "]";
}

inline std::string interior_label(const std::vector<int>& d, int reserve) {
  return "interior reserve " + std::to_string(reserve) + " of " + degree_label(d);
}

inline DomainSpec cli_load_spec(const RunConfig& cfg) {
  if (cfg.spec_path.empty()) throw std::runtime_error("--spec is required");
  DomainSpec spec = spec_from_json(read_json_file(cfg.spec_path));
  ValidationReport vr = validate(spec);
  if (!vr.ok) {
    std::string msg = cfg.spec_path + ": invalid spec";
    for (const auto& v : vr.violations) msg += "; " + v;
    throw std::runtime_error(msg);
  }
  return spec;
}

inline OperatorTuple cli_load_tuple(const RunConfig& cfg, const DomainSpec& spec) {
  if (cfg.tuple_path.empty()) throw std::runtime_error("--tuple is required");
  OperatorTuple t = tuple_from_json(read_json_file(cfg.tuple_path), spec);
  validate_tuple_shape(t);
  return t;
}

inline FreeSeries cli_load_series(const RunConfig& cfg, const DomainSpec& spec) {
  if (cfg.series_path.empty()) throw std::runtime_error("--series is required");
  FreeSeries s = series_from_json(read_json_file(cfg.series_path), spec.n);
  ValidationReport vr = validate_series(s);
  if (!vr.ok)
    throw std::runtime_error(cfg.series_path + ": " + vr.violations.front());
  return s;
}

/// Scalar configs broadcast across factors; absent degrees come from the
/// tuple's truncation-tail bound at a tenth of the tolerance, under a
/// per-command basis cap (dense factorizations cube in the basis dimension).
/// An explicit --degree answers only to the global dimension cap.
inline std::vector<int> resolve_degree(const RunConfig& cfg, const DomainSpec& spec,
                                       const OperatorTuple* t, int floor,
                                       std::int64_t dim_cap = kDefaultDimCap) {
  std::vector<int> d = cfg.degree;
  if (d.empty()) {
    if (!t) throw std::runtime_error("--degree is required for this command");
    d = choose_degree(*t, 0.1 * cfg.tol, 400, dim_cap);
  }
  if (d.size() == 1 && spec.k() > 1) d.assign(static_cast<std::size_t>(spec.k()), d[0]);
  if (static_cast<int>(d.size()) != spec.k())
    throw std::runtime_error("--degree needs one entry, or one per factor");
  for (int di : d)
    if (di < floor)
      throw std::runtime_error("degree " + std::to_string(di) +
                               " is below the required reserve " +
                               std::to_string(floor));
  return d;
}

inline double resolve_eps(const RunConfig& cfg, double command_default) {
  return cfg.eps_rank >= 0 ? cfg.eps_rank : command_default;
}

inline Json config_echo(const std::string& command, const RunConfig& cfg,
                        const std::vector<int>& degree, double eps) {
  Json j;
  j["command"] = command;
  if (!cfg.spec_path.empty()) j["spec"] = cfg.spec_path;
  if (!cfg.tuple_path.empty()) j["tuple"] = cfg.tuple_path;
  if (!cfg.series_path.empty()) j["series"] = cfg.series_path;
  if (!cfg.y_path.empty()) j["y"] = cfg.y_path;
  if (!cfg.p_path.empty()) j["p"] = cfg.p_path;
  if (!degree.empty()) j["degree"] = degree;
  j["tol"] = cfg.tol;
  if (cfg.comm_tol >= 0) j["comm_tol"] = cfg.comm_tol;
  j["eps_rank"] = eps;
  if (!cfg.radius_grid.empty()) j["radius_grid"] = cfg.radius_grid;
  if (cfg.seed != 0) j["seed"] = cfg.seed;
  j["exact"] = cfg.exact;
  return j;
}

inline void certificate_entries(CliReport& rep, const Certificate& cert,
                                const std::string& stem,
                                const std::string& projection) {
  for (const auto& w : cert.witnesses)
    rep.residual(stem + "." + w.label, -w.min_eig, w.tol * w.scale, projection);
}

/// Square operator on fock (x) H: H-dimension from an explicit "block" field
/// or from divisibility by the basis dimension.
inline std::int64_t infer_block(const Json& j, std::int64_t rows,
                                std::int64_t fock_dim, const std::string& what) {
  if (j.contains("block")) {
    const std::int64_t b = io_int(j["block"], what + ".block");
    if (b < 1 || b * fock_dim != rows)
      throw std::runtime_error(what + ": block does not match the basis");
    return b;
  }
  if (fock_dim == 0 || rows % fock_dim != 0)
    throw std::runtime_error(what + ": rows are not a multiple of the basis dimension");
  return rows / fock_dim;
}

inline CliReport run_check(const RunConfig& cfg) {
  CliReport rep;
  DomainSpec spec = cli_load_spec(cfg);
  OperatorTuple t = cli_load_tuple(cfg, spec);
  rep.config = config_echo("check", cfg, {}, resolve_eps(cfg, 1e-8));

  Certificate cert = membership(t, cfg.tol, cfg.comm_tol);
  rep.hard("input_ok", cert.input_ok);
  rep.hard("member", cert.verdict);
  rep.hard("definitions_agree", cert.definitions_agree);
  rep.residual("commutation", cert.commutation, cert.comm_tol, "ambient");
  certificate_entries(rep, cert, "defect", "ambient");
  rep.data["certificate"] = certificate_to_json(cert);

  if (!cfg.radius_grid.empty()) {
    Json scan = Json::array();
    for (double r : cfg.radius_grid) {
      Certificate c = membership(scale_tuple(t, r), cfg.tol, cfg.comm_tol);
      scan.push_back({{"r", r},
                      {"member", c.verdict},
                      {"worst_margin", c.worst_margin()}});
    }
    rep.data["radial_scan"] = scan;
  }

  if (cfg.exact) {
    // exact-arithmetic cross-check of the weight tables behind the defect
    double dev = 0.0;
    for (int i = 0; i < spec.k(); ++i) {
      const int deg = 2 * spec.m[static_cast<std::size_t>(i)] + 2;
      WeightTable<double> wd =
          weight_table(spec.q[static_cast<std::size_t>(i)],
                       spec.m[static_cast<std::size_t>(i)], deg);
      WeightTable<Rational> wx =
          weight_table(to_exact(spec.q[static_cast<std::size_t>(i)]),
                       spec.m[static_cast<std::size_t>(i)], deg);
      for (std::size_t p = 0; p < wd.b.size(); ++p)
        dev = std::max(dev, std::abs(wd.b[p] - wx.b[p].to_double()));
    }
    rep.residual("b_table_exact_deviation", dev, 1e-12, "ambient");
  }
  return rep;
}

inline CliReport run_model(const RunConfig& cfg) {
  CliReport rep;
  DomainSpec spec = cli_load_spec(cfg);
  std::vector<int> d = resolve_degree(cfg, spec, nullptr, 1);
  rep.config = config_echo("model", cfg, d, resolve_eps(cfg, 1e-8));

  TruncatedFockBasis b = build_basis(spec, d);
  rep.data["dim"] = b.dim;
  Json shifts = Json::array();
  for (int i = 1; i <= b.k(); ++i)
    for (int j = 1; j <= spec.n[static_cast<std::size_t>(i - 1)]; ++j) {
      Json w = linop_to_json(left_shift(b, i, j).apply_left(identity(b.dim)));
      w["factor"] = i;
      w["letter"] = j;
      w["degree"] = d;
      shifts.push_back(std::move(w));
    }
  rep.data["shifts"] = shifts;

  // truncated-model contract: the defect grid collapses to the vacuum on the
  // interior, so the emitted shifts certify themselves
  const int reserve = defect_reserve(spec);
  if (*std::min_element(d.begin(), d.end()) >= reserve) {
    DiagProj e = interior_projection(b, reserve);
    Mat delta = model_defect(b, identity(b.dim), spec.m);
    rep.residual("interior_defect_vs_vacuum",
                 op_norm(e.dense() * (delta - vacuum_projection(b).dense()) * e.dense()),
                 cfg.tol, interior_label(d, reserve));
  }

  if (cfg.exact) {
    double dev = 0.0;
    Json tables = Json::array();
    for (int i = 0; i < spec.k(); ++i) {
      WeightTable<Rational> wx =
          weight_table(to_exact(spec.q[static_cast<std::size_t>(i)]),
                       spec.m[static_cast<std::size_t>(i)],
                       d[static_cast<std::size_t>(i)]);
      Json entries = Json::array();
      for (std::size_t p = 0; p < wx.words.size(); ++p) {
        dev = std::max(dev, std::abs(b.wt[static_cast<std::size_t>(i)].b[p] -
                                     wx.b[p].to_double()));
        entries.push_back({{"word", wx.words[p]},
                           {"num", wx.b[p].num()},
                           {"den", wx.b[p].den()}});
      }
      tables.push_back(entries);
    }
    rep.data["b_exact"] = tables;
    rep.residual("b_table_exact_deviation", dev, 1e-12, "ambient");
  }
  return rep;
}

inline CliReport run_kernel(const RunConfig& cfg) {
  CliReport rep;
  DomainSpec spec = cli_load_spec(cfg);
  OperatorTuple t = cli_load_tuple(cfg, spec);
  std::vector<int> d = resolve_degree(cfg, spec, &t, defect_reserve(spec), 4000);
  rep.config = config_echo("kernel", cfg, d, resolve_eps(cfg, 1e-8));

  Certificate cert = membership(t, cfg.tol, cfg.comm_tol);
  rep.hard("member", cert.verdict && cert.input_ok);
  if (!rep.hard_pass) {
    rep.data["certificate"] = certificate_to_json(cert);
    return rep;
  }
  BerezinKernel ker = berezin_kernel(t, d, cfg.tol, false);
  rep.data["defect_rank"] = ker.defect.rank;
  rep.data["rows"] = ker.k.rows();
  rep.data["k"] = linop_to_json(ker.k);

  CncReport cnc = is_cnc(t, d, cfg.tol);
  rep.soft("cnc_certified", cnc.certified);
  rep.data["gram_min_eig"] = cnc.min_eig;
  rep.residual("intertwine", intertwine_residual(ker), cfg.tol,
               interior_label(d, 1));
  const double tail = kernel_tail_bound(t, d);
  rep.data["tail_bound"] = tail;
  Mat gram = ker.gram();
  const double top = gram.rows() > 0 ? eigh(gram).lambda.maxCoeff() : 0.0;
  rep.data["gram_max_eig"] = top;
  rep.residual("gram_contractivity", top - 1.0, cfg.tol, degree_label(d));
  return rep;
}

inline CliReport run_berezin(const RunConfig& cfg) {
  CliReport rep;
  DomainSpec spec = cli_load_spec(cfg);
  OperatorTuple t = cli_load_tuple(cfg, spec);
  std::vector<int> d = resolve_degree(cfg, spec, &t, defect_reserve(spec), 4000);
  rep.config = config_echo("berezin", cfg, d, resolve_eps(cfg, 1e-8));

  Certificate cert = membership(t, cfg.tol, cfg.comm_tol);
  rep.hard("member", cert.verdict && cert.input_ok);
  if (!rep.hard_pass) {
    rep.data["certificate"] = certificate_to_json(cert);
    return rep;
  }
  BerezinKernel ker = berezin_kernel(t, d, cfg.tol, false);
  Mat g = cfg.series_path.empty()
              ? identity(ker.basis.dim)
              : eval_series_model(cli_load_series(cfg, spec), ker.basis);
  Mat out = berezin_transform(ker, g);
  rep.data["transform"] = linop_to_json(out);
  rep.data["g_norm"] = op_norm(g);
  rep.data["transform_norm"] = op_norm(out);
  rep.data["tail_bound"] = kernel_tail_bound(t, d);
  // complete positivity leaves ||B[g]|| <= ||g|| ||K||^2
  rep.residual("transform_bound",
               op_norm(out) - op_norm(g) * op_norm(ker.gram()), cfg.tol,
               degree_label(d));
  return rep;
}

inline CliReport run_vn(const RunConfig& cfg) {
  CliReport rep;
  DomainSpec spec = cli_load_spec(cfg);
  OperatorTuple t = cli_load_tuple(cfg, spec);
  FreeSeries p = cli_load_series(cfg, spec);
  const int reserve = std::max(1, p.degree());
  std::vector<int> d = cfg.degree;
  if (d.empty())
    d.assign(static_cast<std::size_t>(spec.k()),
             p.degree() + defect_reserve(spec) + 1);
  RunConfig sub = cfg;
  sub.degree = d;
  d = resolve_degree(sub, spec, &t, reserve + 1);
  rep.config = config_echo("vn", cfg, d, resolve_eps(cfg, 1e-8));

  Certificate cert = membership(t, cfg.tol, cfg.comm_tol);
  rep.hard("member", cert.verdict && cert.input_ok);
  if (!rep.hard_pass) {
    rep.data["certificate"] = certificate_to_json(cert);
    return rep;
  }
  TruncatedFockBasis b = build_basis(spec, d);
  FreeSeries one;
  one.n = spec.n;
  one.terms.emplace_back(MultiWord(static_cast<std::size_t>(spec.k())), cplx(1, 0));
  VonNeumannReport vn = von_neumann_check(t, {{PolyPair{p, one}}}, b, cfg.tol);
  rep.data["tuple_side"] = vn.tuple_side;
  rep.data["model_side"] = vn.model_side;
  rep.residual("von_neumann_violation", vn.worst_violation, cfg.tol,
               interior_label(d, reserve));
  rep.hard("von_neumann", vn.ok);
  return rep;
}

inline CliReport run_hnorm(const RunConfig& cfg) {
  CliReport rep;
  DomainSpec spec = cli_load_spec(cfg);
  FreeSeries s = cli_load_series(cfg, spec);
  std::vector<int> d = cfg.degree;
  if (d.empty()) d.assign(static_cast<std::size_t>(spec.k()), s.degree() + 2);
  RunConfig sub = cfg;
  sub.degree = d;
  d = resolve_degree(sub, spec, nullptr, 1);
  rep.config = config_echo("hnorm", cfg, d, resolve_eps(cfg, 1e-8));

  TruncatedFockBasis b = build_basis(spec, d);
  std::vector<double> radii =
      cfg.radius_grid.empty() ? default_radius_grid() : cfg.radius_grid;
  std::vector<double> norms = hardy_norm_estimate(s, b, radii);
  Json grid = Json::array();
  for (std::size_t i = 0; i < radii.size(); ++i)
    grid.push_back({{"r", radii[i]}, {"norm", norms[i]}});
  rep.data["norms"] = grid;

  RadiusReport rc = radius_check(s, b, cfg.tol);
  rep.soft("hardy_criterion", rc.ok);
  rep.data["degree_roots"] = rc.roots;
  rep.data["support_saturated"] = rc.saturated;
  double mono = 0.0;
  for (std::size_t i = 1; i < norms.size(); ++i)
    if (radii[i] >= radii[i - 1]) mono = std::max(mono, norms[i - 1] - norms[i]);
  rep.residual("radial_monotonicity_defect", mono, 1e3 * cfg.tol,
               degree_label(d));
  return rep;
}

inline CliReport run_beurling(const RunConfig& cfg) {
  CliReport rep;
  DomainSpec spec = cli_load_spec(cfg);
  std::vector<int> d = resolve_degree(cfg, spec, nullptr, defect_reserve(spec));
  const double eps = resolve_eps(cfg, 1e-8);
  rep.config = config_echo("beurling", cfg, d, eps);

  if (cfg.y_path.empty()) throw std::runtime_error("--y is required");
  TruncatedFockBasis b = build_basis(spec, d);
  Json yj = read_json_file(cfg.y_path);
  Mat y = linop_from_json(yj, cfg.y_path);
  if (y.rows() != y.cols()) throw std::runtime_error(cfg.y_path + ": not square");
  const std::int64_t block = infer_block(yj, y.rows(), b.dim, cfg.y_path);
  rep.data["block"] = block;

  Certificate cond = beurling_condition(b, y, block, cfg.tol);
  rep.hard("condition", cond.verdict);
  certificate_entries(rep, cond, "condition",
                      interior_label(d, defect_reserve(spec)));
  rep.data["certificate"] = certificate_to_json(cond);
  if (!cond.verdict) return rep;

  Factorization f = beurling_factorize(b, y, block, cfg.tol, eps);
  rep.data["rank"] = f.rank;
  rep.data["defect_rank"] = f.defect_rank;
  Json mj = linop_to_json(f.m.op);
  mj["in_block"] = f.m.in_block;
  mj["out_block"] = f.m.out_block;
  rep.data["m"] = mj;
  rep.residual("welldefinedness", f.welldef_residual, 1e3 * cfg.tol,
               degree_label(d), false);
  rep.residual("factor", f.factor_residual, cfg.tol,
               interior_label(d, defect_reserve(spec)));
  rep.residual("multi_analytic", f.m.intertwine_residual, cfg.tol,
               interior_label(d, 1));
  rep.soft("inner", is_inner(b, f.m, cfg.tol));

  SupportReport sup = support(b, f.m, eps);
  rep.data["support_dim"] = sup.dim;
  rep.residual("support_containment", sup.containment_residual, 1e3 * cfg.tol,
               degree_label(d), false);
  return rep;
}

inline CliReport run_subspace(const RunConfig& cfg) {
  CliReport rep;
  DomainSpec spec = cli_load_spec(cfg);
  std::vector<int> d = resolve_degree(cfg, spec, nullptr, defect_reserve(spec));
  const double eps = resolve_eps(cfg, 1e-8);
  rep.config = config_echo("subspace", cfg, d, eps);

  if (cfg.p_path.empty()) throw std::runtime_error("--p is required");
  TruncatedFockBasis b = build_basis(spec, d);
  Json pj = read_json_file(cfg.p_path);
  Mat p = linop_from_json(pj, cfg.p_path);
  if (p.rows() != p.cols()) throw std::runtime_error(cfg.p_path + ": not square");
  const std::int64_t block = infer_block(pj, p.rows(), b.dim, cfg.p_path);
  rep.data["block"] = block;

  SubspaceReport sr = invariant_subspace_tests(b, p, block, cfg.tol);
  rep.residual("projection", sr.projection_residual, 1e3 * cfg.tol, "ambient");
  double inv = 0.0;
  for (double v : sr.invariance) inv = std::max(inv, v);
  const bool invariant = inv <= cfg.tol;
  rep.verdicts["invariant"] = invariant;
  rep.verdicts["positivity"] = sr.beurling.verdict;
  rep.hard("characterization_agrees", invariant == sr.beurling.verdict);
  rep.data["invariance"] = sr.invariance;
  rep.data["certificate"] = certificate_to_json(sr.beurling);
  if (sr.polyball_case) rep.data["doubly_commuting"] = sr.doubly_commuting;

  ReducingReport rr = reducing_characterize(b, p, block, cfg.tol, eps);
  rep.verdicts["reducing"] = rr.reducing;
  rep.data["reducing_obstruction"] = rr.obstruction;
  if (rr.reducing && rr.e_basis) {
    rep.data["e_basis"] = linop_to_json(*rr.e_basis);
    rep.residual("reducing_match", rr.match_residual, 1e3 * cfg.tol,
                 degree_label(d));
  }
  return rep;
}

inline CliReport run_charfn(const RunConfig& cfg) {
  CliReport rep;
  DomainSpec spec = cli_load_spec(cfg);
  OperatorTuple t = cli_load_tuple(cfg, spec);
  std::vector<int> d = resolve_degree(cfg, spec, &t, defect_reserve(spec), 800);
  const double eps = resolve_eps(cfg, 1e-14);
  rep.config = config_echo("charfn", cfg, d, eps);

  Certificate cert = membership(t, cfg.tol, cfg.comm_tol);
  rep.hard("member", cert.verdict && cert.input_ok);
  if (!rep.hard_pass) {
    rep.data["certificate"] = certificate_to_json(cert);
    return rep;
  }
  Certificate admits = admits_charfn(t, d, cfg.tol);
  rep.hard("admits", admits.verdict);
  if (!admits.verdict) {
    rep.data["certificate"] = certificate_to_json(admits);
    return rep;
  }

  PureInnerReport pi = pure_iff_inner(t, d, cfg.tol, eps);
  if (cfg.seed != 0)
    pi.cf = char_function(t, d, cfg.tol, eps, cfg.seed);
  rep.verdicts["pure"] = pi.purity.pure;
  rep.verdicts["inner"] = pi.inner;
  rep.soft("cnc_certified", pi.certified);
  rep.hard("pure_iff_inner", pi.consistent);
  rep.data["d_rank"] = pi.cf.d_rank;
  rep.data["dstar_rank"] = pi.cf.dstar_rank;
  rep.data["saturation_gap"] = pi.saturation_gap;
  Json tj = linop_to_json(pi.cf.theta.op);
  tj["in_block"] = pi.cf.theta.in_block;
  tj["out_block"] = pi.cf.theta.out_block;
  rep.data["theta"] = tj;
  rep.residual("identity", pi.cf.identity_residual, cfg.tol,
               interior_label(d, defect_reserve(spec)));
  rep.residual("multi_analytic", pi.cf.theta.intertwine_residual, cfg.tol,
               interior_label(d, 1));
  rep.residual("compression", pi.compression_residual,
               std::max(1e3 * cfg.tol, 10.0 * pi.saturation_gap),
               degree_label(d), false);
  rep.residual("range_identity", pi.range_residual, cfg.tol,
               interior_label(d, defect_reserve(spec)));
  return rep;
}

inline CliReport run_model_space(const RunConfig& cfg) {
  CliReport rep;
  DomainSpec spec = cli_load_spec(cfg);
  OperatorTuple t = cli_load_tuple(cfg, spec);
  std::vector<int> d = resolve_degree(cfg, spec, &t, defect_reserve(spec), 800);
  rep.config = config_echo("model-space", cfg, d, resolve_eps(cfg, 1e-8));

  Certificate cert = membership(t, cfg.tol, cfg.comm_tol);
  rep.hard("member", cert.verdict && cert.input_ok);
  if (!rep.hard_pass) {
    rep.data["certificate"] = certificate_to_json(cert);
    return rep;
  }
  CncReport cnc = is_cnc(t, d, cfg.tol);
  rep.soft("cnc_certified", cnc.certified);
  if (!cnc.certified) return rep;  // soft stop: the realization needs K injective
  Certificate admits = admits_charfn(t, d, cfg.tol);
  rep.hard("admits", admits.verdict);
  if (!admits.verdict) {
    rep.data["certificate"] = certificate_to_json(admits);
    return rep;
  }

  ModelSpace ms = model_space(t, d, cfg.tol, resolve_eps(cfg, 1e-8));
  rep.data["hdim"] = ms.hdim;
  rep.data["d_rank"] = ms.cf.d_rank;
  rep.data["dstar_rank"] = ms.cf.dstar_rank;
  rep.data["tt"] = tuple_to_json(ms.tt);
  const double widen = std::max(1e3 * cfg.tol, 1e3 * ms.cf.identity_residual);
  rep.residual("graph", ms.graph_residual, 1e3 * cfg.tol, degree_label(d));
  rep.residual("gamma_relation", ms.gamma_relation_residual, widen,
               degree_label(d), false);
  rep.residual("gamma_unitary", ms.unitary_residual, widen, degree_label(d),
               false);
  rep.residual("intertwine", ms.intertwine_residual, widen,
               interior_label(d, 1), false);
  return rep;
}

inline CliReport run_dilate(const RunConfig& cfg) {
  CliReport rep;
  DomainSpec spec = cli_load_spec(cfg);
  OperatorTuple t = cli_load_tuple(cfg, spec);
  std::vector<int> d = resolve_degree(cfg, spec, &t, defect_reserve(spec), 1200);
  rep.config = config_echo("dilate", cfg, d, resolve_eps(cfg, 1e-8));

  Certificate cert = membership(t, cfg.tol, cfg.comm_tol);
  rep.hard("member", cert.verdict && cert.input_ok);
  if (!rep.hard_pass) {
    rep.data["certificate"] = certificate_to_json(cert);
    return rep;
  }
  PurityReport purity = is_pure(t, cfg.tol);
  rep.hard("pure", purity.pure);
  if (!purity.pure) return rep;

  DilationReport dr = pure_dilation(t, d, cfg.tol, cfg.dil_deg,
                                    resolve_eps(cfg, 1e-8));
  rep.data["dilation_index"] = dr.dilation_index;
  rep.data["span_rank"] = dr.span_rank;
  rep.verdicts["minimal"] = dr.minimal;
  // The tail bound controls the omitted gram mass, so the isometry defect
  // directly. Co-invariance and reconstruction are linear in the omitted
  // kernel columns and scale as its square root.
  const double tail = kernel_tail_bound(t, d);
  const double tail_lin = std::sqrt(std::max(tail, 0.0));
  rep.residual("isometry", dr.isometry_residual, std::max(cfg.tol, tail),
               degree_label(d));
  double coinv = 0.0;
  for (double v : dr.coinvariance) coinv = std::max(coinv, v);
  rep.residual("coinvariance", coinv, std::max(cfg.tol, tail_lin),
               degree_label(d));
  rep.residual("reconstruction", dr.reconstruction_residual,
               std::max(cfg.tol, tail_lin), degree_label(d));
  return rep;
}

inline CliReport run_wold(const RunConfig& cfg) {
  CliReport rep;
  DomainSpec spec = cli_load_spec(cfg);
  OperatorTuple t = cli_load_tuple(cfg, spec);
  rep.config = config_echo("wold", cfg, {}, resolve_eps(cfg, 1e-8));

  Certificate cert = membership(t, cfg.tol, cfg.comm_tol);
  rep.hard("member", cert.verdict && cert.input_ok);
  if (!rep.hard_pass) {
    rep.data["certificate"] = certificate_to_json(cert);
    return rep;
  }
  WoldSplit ws = wold_split(t, cfg.tol);
  rep.data["rank0"] = ws.rank0;
  rep.data["rank1"] = t.dim - ws.rank0;
  rep.data["p0"] = linop_to_json(ws.p0);
  rep.data["p1"] = linop_to_json(ws.p1);
  rep.residual("invariance", ws.invariance_residual, cfg.tol, "ambient");
  rep.residual("reducing", ws.reducing_residual, cfg.tol, "ambient");
  return rep;
}

}  // namespace detail

/// Dispatch plus wall-clock accounting. Unknown commands and malformed inputs
/// surface as std::runtime_error for the front end to turn into a diagnostic.
inline CliReport run(const std::string& command, const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  CliReport rep;
  if (command == "check") rep = detail::run_check(cfg);
  else if (command == "model") rep = detail::run_model(cfg);
  else if (command == "kernel") rep = detail::run_kernel(cfg);
  else if (command == "berezin") rep = detail::run_berezin(cfg);
  else if (command == "vn") rep = detail::run_vn(cfg);
  else if (command == "hnorm") rep = detail::run_hnorm(cfg);
  else if (command == "beurling") rep = detail::run_beurling(cfg);
  else if (command == "subspace") rep = detail::run_subspace(cfg);
  else if (command == "charfn") rep = detail::run_charfn(cfg);
  else if (command == "model-space") rep = detail::run_model_space(cfg);
  else if (command == "dilate") rep = detail::run_dilate(cfg);
  else if (command == "wold") rep = detail::run_wold(cfg);
  else throw std::runtime_error("unknown command: " + command);
  rep.command = command;
  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace polydomain
