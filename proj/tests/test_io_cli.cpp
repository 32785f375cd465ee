#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "polydomain/cli.hpp"
#include "polydomain/random.hpp"

using namespace polydomain;
using Catch::Matchers::ContainsSubstring;

namespace {

FreePoly linear_poly(int arity) {
  FreePoly q;
  q.arity = arity;
  for (int j = 1; j <= arity; ++j) q.terms.push_back({{j}, 1.0});
  return q;
}

DomainSpec ball_spec(int n, int m) {
  DomainSpec s;
  s.n = {n};
  s.m = {m};
  s.q = {linear_poly(n)};
  return s;
}

DomainSpec polydisc_spec() {
  DomainSpec s;
  s.n = {1, 1};
  s.m = {1, 1};
  s.q = {linear_poly(1), linear_poly(1)};
  return s;
}

OperatorTuple scalar_tuple(const DomainSpec& spec,
                           const std::vector<std::vector<cplx>>& vals) {
  OperatorTuple t;
  t.spec = spec;
  t.dim = 1;
  t.T.resize(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (cplx v : vals[i]) {
      Mat m(1, 1);
      m(0, 0) = v;
      t.T[i].push_back(m);
    }
  return t;
}

// free pair on dim 2 with geometric decay, pure but not nilpotent
OperatorTuple free_pair() {
  OperatorTuple t;
  t.spec = ball_spec(2, 1);
  t.dim = 2;
  Mat a = Mat::Zero(2, 2);
  a(0, 1) = 0.4;
  Mat b = Mat::Zero(2, 2);
  b(1, 0) = 0.3;
  t.T = {{a, b}};
  return t;
}

// tmp inputs live under the ctest working directory
std::string write_tmp(const std::string& name, const Json& j) {
  std::filesystem::create_directories("io_cli_tmp");
  std::string path = "io_cli_tmp/" + name;
  write_json_file(path, j);
  return path;
}

double ledger_value(const CliReport& rep, const std::string& name) {
  for (const auto& e : rep.ledger)
    if (e["name"] == name) return e["value"].get<double>();
  FAIL("missing ledger entry " << name);
  return 0.0;
}

}  // namespace

TEST_CASE("spec and tuple serialization round-trips byte for byte") {
  DomainSpec spec = polydisc_spec();
  spec.q[0].terms[0].second = 1.0 / 3.0;
  spec.q[1].terms[0].second = std::sqrt(2.0);
  Json j = spec_to_json(spec);
  DomainSpec back = spec_from_json(j);
  CHECK(spec_to_json(back).dump() == j.dump());

  Rng rng(11);
  OperatorTuple t;
  t.spec = spec;
  t.dim = 3;
  t.T = {{random_matrix(3, 3, rng)}, {random_matrix(3, 3, rng)}};
  Json tj = tuple_to_json(t);
  OperatorTuple tback = tuple_from_json(tj, spec);
  CHECK(tuple_to_json(tback).dump() == tj.dump());
  CHECK(tback.dim == 3);
  CHECK(op_norm(tback.T[1][0] - t.T[1][0]) == 0.0);
}

TEST_CASE("series and operator serialization round-trips byte for byte") {
  FreeSeries s;
  s.n = {2};
  s.terms.emplace_back(MultiWord{{1}}, cplx(1.0 / 7.0, 0.3));
  s.terms.emplace_back(MultiWord{{2, 2, 1}}, cplx(-0.5, std::sqrt(3.0)));
  Json j = series_to_json(s);
  FreeSeries back = series_from_json(j, s.n);
  CHECK(series_to_json(back).dump() == j.dump());
  CHECK(back.degree() == 3);

  Rng rng(12);
  Mat a = random_matrix(4, 2, rng);
  Json aj = linop_to_json(a);
  Mat aback = linop_from_json(aj, "probe");
  CHECK(op_norm(aback - a) == 0.0);
  CHECK(linop_to_json(aback).dump() == aj.dump());
}

TEST_CASE("malformed inputs are rejected with the offending field named") {
  // factor count mismatch
  Json bad = {{"k", 2}, {"n", {1}}, {"m", {1, 1}}, {"q", Json::array()}};
  CHECK_THROWS_WITH(spec_from_json(bad), ContainsSubstring("k entries"));

  // letter outside the alphabet
  DomainSpec spec = ball_spec(2, 1);
  Json sj = spec_to_json(spec);
  sj["q"][0][0]["word"] = {3};
  CHECK_THROWS_WITH(spec_from_json(sj), ContainsSubstring("letter"));

  // matrix payload of the wrong length
  Json mj = {{"rows", 2}, {"cols", 2}, {"data", {{1.0, 0.0}}}};
  CHECK_THROWS_WITH(linop_from_json(mj, "y"), ContainsSubstring("y"));

  // series term with the wrong number of word slots
  Json term = Json::object();
  term["words"] = Json::array({Json::array({1}), Json::array({2})});
  term["coeff"] = {1.0, 0.0};
  Json tj = Json::array({term});
  CHECK_THROWS_AS(series_from_json(tj, std::vector<int>{2}),
                  std::runtime_error);

  // tuple with a matrix of the wrong shape
  OperatorTuple t = scalar_tuple(polydisc_spec(), {{0.1}, {0.2}});
  Json tt = tuple_to_json(t);
  tt["T"][0][0]["rows"] = 2;
  CHECK_THROWS_AS(tuple_from_json(tt, polydisc_spec()), std::runtime_error);

  CHECK_THROWS_WITH(read_json_file("io_cli_tmp/absent.json"),
                    ContainsSubstring("cannot open"));
  std::filesystem::create_directories("io_cli_tmp");
  {
    std::ofstream f("io_cli_tmp/garbled.json");
    f << "{ not json";
  }
  CHECK_THROWS_WITH(read_json_file("io_cli_tmp/garbled.json"),
                    ContainsSubstring("garbled.json"));
}

TEST_CASE("check certifies the polydisc sample and scans radii") {
  DomainSpec spec = polydisc_spec();
  OperatorTuple t = scalar_tuple(spec, {{cplx(0.5, 0.0)}, {cplx(0.0, -0.3)}});
  RunConfig cfg;
  cfg.spec_path = write_tmp("pd_spec.json", spec_to_json(spec));
  cfg.tuple_path = write_tmp("pd_point.json", tuple_to_json(t));
  cfg.radius_grid = {0.5, 1.0};
  cfg.exact = true;

  CliReport rep = run("check", cfg);
  CHECK(rep.hard_pass);
  CHECK(rep.verdicts["member"].get<bool>());
  CHECK(rep.verdicts["definitions_agree"].get<bool>());
  CHECK(ledger_value(rep, "commutation") <= 1e-12);
  CHECK(ledger_value(rep, "b_table_exact_deviation") == 0.0);
  REQUIRE(rep.data["radial_scan"].size() == 2);
  for (const auto& row : rep.data["radial_scan"])
    CHECK(row["member"].get<bool>());
  // scaling only widens margins below the boundary
  CHECK(rep.data["radial_scan"][0]["worst_margin"].get<double>() >=
        rep.data["radial_scan"][1]["worst_margin"].get<double>());
}

TEST_CASE("check flags a tuple outside the domain") {
  DomainSpec spec = polydisc_spec();
  OperatorTuple t = scalar_tuple(spec, {{cplx(1.2, 0.0)}, {cplx(0.0, 0.1)}});
  RunConfig cfg;
  cfg.spec_path = write_tmp("pd_spec.json", spec_to_json(spec));
  cfg.tuple_path = write_tmp("pd_outside.json", tuple_to_json(t));

  CliReport rep = run("check", cfg);
  CHECK_FALSE(rep.hard_pass);
  CHECK_FALSE(rep.verdicts["member"].get<bool>());
  CHECK_FALSE(rep.data["certificate"]["witnesses"].empty());
  double worst = 0.0;
  for (const auto& w : rep.data["certificate"]["witnesses"])
    worst = std::min(worst, w["min_eig"].get<double>());
  CHECK(worst < -0.1);
}

TEST_CASE("model emits the exact weighted shift for a multiplicity two disc") {
  DomainSpec spec = ball_spec(1, 2);
  RunConfig cfg;
  cfg.spec_path = write_tmp("disc_m2.json", spec_to_json(spec));
  cfg.degree = {6};
  cfg.exact = true;

  CliReport rep = run("model", cfg);
  CHECK(rep.hard_pass);
  CHECK(ledger_value(rep, "interior_defect_vs_vacuum") <= 1e-12);
  CHECK(ledger_value(rep, "b_table_exact_deviation") == 0.0);
  REQUIRE(rep.data["dim"].get<int>() == 7);
  const Json& sh = rep.data["shifts"][0];
  Mat w = linop_from_json(sh, "shift");
  for (int j = 0; j < 6; ++j)
    CHECK(std::abs(w(j + 1, j).real() - std::sqrt((j + 1.0) / (j + 2.0))) <=
          1e-14);
  // b-weights for the squared disc count multiplicities: b_j = j + 1
  const Json& table = rep.data["b_exact"][0];
  for (std::size_t p = 0; p < table.size(); ++p) {
    CHECK(table[p]["num"].get<std::int64_t>() == static_cast<std::int64_t>(p) + 1);
    CHECK(table[p]["den"].get<std::int64_t>() == 1);
  }
}

TEST_CASE("kernel certifies a free pure pair") {
  OperatorTuple t = free_pair();
  RunConfig cfg;
  cfg.spec_path = write_tmp("ball2.json", spec_to_json(t.spec));
  cfg.tuple_path = write_tmp("pair.json", tuple_to_json(t));

  CliReport rep = run("kernel", cfg);
  CHECK(rep.hard_pass);
  CHECK(rep.certified);
  CHECK(rep.verdicts["intertwine"].get<bool>());
  CHECK(rep.verdicts["gram_contractivity"].get<bool>());
  CHECK(rep.data["defect_rank"].get<int>() == 2);
  CHECK(rep.data["gram_max_eig"].get<double>() <= 1.0 + 1e-12);
}

TEST_CASE("berezin transform of the identity is a state at a polydisc point") {
  DomainSpec spec = polydisc_spec();
  OperatorTuple t = scalar_tuple(spec, {{cplx(0.4, 0.0)}, {cplx(0.2, 0.0)}});
  RunConfig cfg;
  cfg.spec_path = write_tmp("pd_spec.json", spec_to_json(spec));
  cfg.tuple_path = write_tmp("pd_inner_point.json", tuple_to_json(t));

  CliReport rep = run("berezin", cfg);
  CHECK(rep.hard_pass);
  Mat out = linop_from_json(rep.data["transform"], "transform");
  REQUIRE(out.rows() == 1);
  CHECK(std::abs(out(0, 0) - cplx(1.0, 0.0)) <= 1e-8);
}

TEST_CASE("vn bounds polynomial calculus on a domain point") {
  DomainSpec spec = polydisc_spec();
  OperatorTuple t = scalar_tuple(spec, {{cplx(0.5, 0.0)}, {cplx(0.0, -0.3)}});
  FreeSeries p;
  p.n = spec.n;
  p.terms.emplace_back(MultiWord{{1}, {}}, cplx(1.0, 0.0));
  p.terms.emplace_back(MultiWord{{1}, {1}}, cplx(0.25, 0.0));

  RunConfig cfg;
  cfg.spec_path = write_tmp("pd_spec.json", spec_to_json(spec));
  cfg.tuple_path = write_tmp("pd_point.json", tuple_to_json(t));
  cfg.series_path = write_tmp("pd_poly.json", series_to_json(p));

  CliReport rep = run("vn", cfg);
  CHECK(rep.hard_pass);
  CHECK(rep.verdicts["von_neumann"].get<bool>());
  CHECK(ledger_value(rep, "von_neumann_violation") <= 1e-9);
  REQUIRE(rep.data["tuple_side"].size() == rep.data["model_side"].size());
  for (std::size_t i = 0; i < rep.data["tuple_side"].size(); ++i)
    CHECK(rep.data["tuple_side"][i].get<double>() <=
          rep.data["model_side"][i].get<double>() + 1e-9);
}

TEST_CASE("hnorm reports monotone norms and a convergence radius verdict") {
  DomainSpec spec = ball_spec(2, 1);
  FreeSeries s;
  s.n = spec.n;
  s.terms.emplace_back(MultiWord{{1}}, cplx(1.0, 0.0));
  s.terms.emplace_back(MultiWord{{2, 2}}, cplx(0.5, 0.0));

  RunConfig cfg;
  cfg.spec_path = write_tmp("ball2.json", spec_to_json(spec));
  cfg.series_path = write_tmp("ball2_series.json", series_to_json(s));

  CliReport rep = run("hnorm", cfg);
  CHECK(rep.hard_pass);
  CHECK(rep.verdicts["hardy_criterion"].get<bool>());
  const Json& grid = rep.data["norms"];
  REQUIRE(grid.size() >= 2);
  double prev = -1.0;
  for (const auto& row : grid) {
    CHECK(row["norm"].get<double>() >= prev);
    prev = row["norm"].get<double>();
  }
}

TEST_CASE("beurling factorizes the identity and rejects the vacuum") {
  DomainSpec spec = ball_spec(2, 1);
  TruncatedFockBasis b = build_basis(spec, {4});
  RunConfig cfg;
  cfg.spec_path = write_tmp("ball2.json", spec_to_json(spec));
  cfg.degree = {4};

  cfg.y_path = write_tmp("y_eye.json", linop_to_json(identity(b.dim)));
  CliReport rep = run("beurling", cfg);
  CHECK(rep.hard_pass);
  CHECK(rep.verdicts["inner"].get<bool>());
  CHECK(rep.data["rank"].get<int>() == b.dim);
  CHECK(rep.data["defect_rank"].get<int>() == 1);
  CHECK(ledger_value(rep, "factor") <= 1e-9);
  CHECK(ledger_value(rep, "multi_analytic") <= 1e-9);

  cfg.y_path =
      write_tmp("y_vacuum.json", linop_to_json(vacuum_projection(b).dense()));
  CliReport bad = run("beurling", cfg);
  CHECK_FALSE(bad.hard_pass);
  CHECK_FALSE(bad.verdicts["condition"].get<bool>());
}

TEST_CASE("subspace agreement holds for invariant and non-invariant projections") {
  DomainSpec spec = ball_spec(2, 1);
  TruncatedFockBasis b = build_basis(spec, {4});
  RunConfig cfg;
  cfg.spec_path = write_tmp("ball2.json", spec_to_json(spec));
  cfg.degree = {4};

  cfg.p_path = write_tmp("p_eye.json", linop_to_json(identity(b.dim)));
  CliReport full = run("subspace", cfg);
  CHECK(full.hard_pass);
  CHECK(full.verdicts["invariant"].get<bool>());
  CHECK(full.verdicts["positivity"].get<bool>());
  CHECK(full.verdicts["reducing"].get<bool>());

  Mat covac = identity(b.dim) - vacuum_projection(b).dense();
  cfg.p_path = write_tmp("p_covac.json", linop_to_json(covac));
  CliReport inv = run("subspace", cfg);
  CHECK(inv.hard_pass);
  CHECK(inv.verdicts["invariant"].get<bool>());
  CHECK(inv.verdicts["positivity"].get<bool>());
  CHECK_FALSE(inv.verdicts["reducing"].get<bool>());

  cfg.p_path = write_tmp("p_vac.json", linop_to_json(vacuum_projection(b).dense()));
  CliReport vac = run("subspace", cfg);
  CHECK(vac.hard_pass);
  CHECK_FALSE(vac.verdicts["invariant"].get<bool>());
  CHECK_FALSE(vac.verdicts["positivity"].get<bool>());

  // anything that is not a projection is refused outright
  Mat half = 0.5 * identity(b.dim);
  cfg.p_path = write_tmp("p_half.json", linop_to_json(half));
  CHECK_THROWS_WITH(run("subspace", cfg), ContainsSubstring("projection"));
}

TEST_CASE("charfn certifies the free pair and withholds on the polydisc point") {
  OperatorTuple t = free_pair();
  RunConfig cfg;
  cfg.spec_path = write_tmp("ball2.json", spec_to_json(t.spec));
  cfg.tuple_path = write_tmp("pair.json", tuple_to_json(t));
  cfg.degree = {8};

  CliReport rep = run("charfn", cfg);
  CHECK(rep.hard_pass);
  CHECK(rep.verdicts["admits"].get<bool>());
  CHECK(rep.verdicts["pure"].get<bool>());
  CHECK(rep.verdicts["inner"].get<bool>());
  CHECK(rep.verdicts["pure_iff_inner"].get<bool>());
  CHECK(rep.data["d_rank"].get<int>() == 2);
  CHECK(ledger_value(rep, "identity") <= 1e-9);
  CHECK(ledger_value(rep, "multi_analytic") <= 1e-9);
  CHECK(ledger_value(rep, "range_identity") <= 1e-9);

  DomainSpec pd = polydisc_spec();
  OperatorTuple pt = scalar_tuple(pd, {{cplx(0.5, 0.0)}, {cplx(0.0, -0.3)}});
  cfg.spec_path = write_tmp("pd_spec.json", spec_to_json(pd));
  cfg.tuple_path = write_tmp("pd_point.json", tuple_to_json(pt));
  cfg.degree = {6, 6};
  CliReport pdrep = run("charfn", cfg);
  CHECK_FALSE(pdrep.hard_pass);
  CHECK(pdrep.verdicts["member"].get<bool>());
  CHECK_FALSE(pdrep.verdicts["admits"].get<bool>());
  CHECK(pdrep.data.contains("certificate"));
}

TEST_CASE("model-space realizes the compression on its graph space") {
  OperatorTuple t = free_pair();
  RunConfig cfg;
  cfg.spec_path = write_tmp("ball2.json", spec_to_json(t.spec));
  cfg.tuple_path = write_tmp("pair.json", tuple_to_json(t));
  cfg.degree = {8};

  CliReport rep = run("model-space", cfg);
  CHECK(rep.hard_pass);
  CHECK(rep.verdicts["graph"].get<bool>());
  const int hdim = rep.data["hdim"].get<int>();
  CHECK(hdim >= t.dim);
  OperatorTuple tt = tuple_from_json(rep.data["tt"], t.spec);
  CHECK(tt.dim == hdim);
  validate_tuple_shape(tt);
}

TEST_CASE("dilate certifies an isometric dilation with truncation-aware bounds") {
  OperatorTuple t = free_pair();
  RunConfig cfg;
  cfg.spec_path = write_tmp("ball2.json", spec_to_json(t.spec));
  cfg.tuple_path = write_tmp("pair.json", tuple_to_json(t));
  cfg.degree = {9};

  CliReport rep = run("dilate", cfg);
  CHECK(rep.hard_pass);
  CHECK(rep.verdicts["pure"].get<bool>());
  CHECK(rep.verdicts["minimal"].get<bool>());
  CHECK(rep.data["dilation_index"].get<int>() == 2);
  CHECK(ledger_value(rep, "isometry") <= 1e-8);
}

TEST_CASE("wold recovers block projections and the degenerate splits") {
  DomainSpec spec = ball_spec(1, 1);
  OperatorTuple t;
  t.spec = spec;
  t.dim = 2;
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = std::polar(1.0, 0.7);
  a(1, 1) = 0.5;
  t.T = {{a}};

  RunConfig cfg;
  cfg.spec_path = write_tmp("disc.json", spec_to_json(spec));
  cfg.tuple_path = write_tmp("block.json", tuple_to_json(t));
  CliReport rep = run("wold", cfg);
  CHECK(rep.hard_pass);
  CHECK(rep.data["rank0"].get<int>() == 1);
  Mat p0 = linop_from_json(rep.data["p0"], "p0");
  Mat want = Mat::Zero(2, 2);
  want(1, 1) = 1.0;
  CHECK(op_norm(p0 - want) <= 1e-9);

  // fully pure and fully unitary tuples collapse to the trivial splits
  cfg.tuple_path =
      write_tmp("pure.json", tuple_to_json(scalar_tuple(spec, {{0.5}})));
  CHECK(run("wold", cfg).data["rank0"].get<int>() == 1);
  cfg.tuple_path =
      write_tmp("unit.json", tuple_to_json(scalar_tuple(spec, {{1.0}})));
  CHECK(run("wold", cfg).data["rank0"].get<int>() == 0);
}

TEST_CASE("reports are deterministic for a fixed config") {
  DomainSpec spec = polydisc_spec();
  OperatorTuple t = scalar_tuple(spec, {{cplx(0.5, 0.0)}, {cplx(0.0, -0.3)}});
  RunConfig cfg;
  cfg.spec_path = write_tmp("pd_spec.json", spec_to_json(spec));
  cfg.tuple_path = write_tmp("pd_point.json", tuple_to_json(t));
  cfg.radius_grid = {0.9, 0.99, 1.0};
  cfg.seed = 7;

  Json a = run("check", cfg).to_json();
  Json b = run("check", cfg).to_json();
  a.erase("timings");
  b.erase("timings");
  CHECK(a.dump() == b.dump());
}

TEST_CASE("missing flags and invalid files surface as diagnostics") {
  RunConfig cfg;
  CHECK_THROWS_WITH(run("check", cfg), ContainsSubstring("--spec is required"));

  DomainSpec spec = ball_spec(1, 1);
  cfg.spec_path = write_tmp("disc.json", spec_to_json(spec));
  CHECK_THROWS_WITH(run("check", cfg), ContainsSubstring("--tuple is required"));
  CHECK_THROWS_WITH(run("beurling", cfg),
                    ContainsSubstring("--degree is required"));
  cfg.degree = {2};
  CHECK_THROWS_WITH(run("beurling", cfg), ContainsSubstring("--y is required"));
  CHECK_THROWS_WITH(run("subspace", cfg), ContainsSubstring("--p is required"));
  cfg.degree.clear();

  Json degenerate = spec_to_json(spec);
  degenerate["m"][0] = 0;
  cfg.spec_path = write_tmp("degenerate.json", degenerate);
  CHECK_THROWS_WITH(run("model", cfg), ContainsSubstring("invalid spec"));

  cfg.spec_path = write_tmp("disc.json", spec_to_json(spec));
  cfg.degree = {0};
  CHECK_THROWS_WITH(run("beurling", cfg),
                    ContainsSubstring("below the required reserve"));

  CHECK_THROWS_WITH(run("frobnicate", cfg), ContainsSubstring("frobnicate"));
}
