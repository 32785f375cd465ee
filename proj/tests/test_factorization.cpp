#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "polydomain/factorization.hpp"
#include "polydomain/random.hpp"

using namespace polydomain;

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

DomainSpec bidisc_spec() {
  DomainSpec s;
  s.n = {1, 1};
  s.m = {1, 1};
  s.q = {linear_poly(1), linear_poly(1)};
  return s;
}

Mat fock_vacuum_complement(const TruncatedFockBasis& b) {
  Mat y = identity(b.dim);
  y(0, 0) = 0.0;
  return y;
}

/// Right multiplication by the symbol sum_beta R_beta (x) theta_beta; commutes
/// with the blocked left shifts exactly, truncation included.
Mat right_symbol(const TruncatedFockBasis& b,
                 const std::vector<std::pair<MultiWord, Mat>>& terms) {
  const std::int64_t block = terms.front().second.rows();
  Mat m = Mat::Zero(b.dim * block, b.dim * block);
  for (const auto& [mw, theta] : terms)
    m += kron(word_colmap(b, mw, false).dense(), theta);
  return m;
}

DiagProj suffix_projection(const TruncatedFockBasis& b, int factor, int letter) {
  ColMap r = right_shift(b, factor, letter);
  DiagProj p;
  p.mask.assign(static_cast<std::size_t>(b.dim), 0.0);
  for (std::int64_t c = 0; c < r.dim; ++c)
    if (r.target[static_cast<std::size_t>(c)] >= 0)
      p.mask[static_cast<std::size_t>(r.target[static_cast<std::size_t>(c)])] = 1.0;
  return p;
}

}  // namespace

TEST_CASE("vacuum complement satisfies the positivity condition with exact defect") {
  auto b = build_basis(ball_spec(1, 1), {6});
  Mat y = fock_vacuum_complement(b);
  Certificate cert = beurling_condition(b, y, 1);
  REQUIRE(cert.verdict);
  REQUIRE(cert.witnesses.size() == 1);

  DiagProj e = interior_projection(b, defect_reserve(b.spec));
  Mat delta = e.sandwich(model_defect(b, y, {1}), 1);
  Mat expected = Mat::Zero(7, 7);
  expected(1, 1) = 1.0;  // rank one onto the first-level basis vector
  CHECK((delta - expected).norm() < 1e-14);
}

TEST_CASE("vacuum projection fails the positivity condition") {
  auto b = build_basis(ball_spec(2, 1), {4});
  Mat y = vacuum_projection(b).dense();
  Certificate cert = beurling_condition(b, y, 1);
  CHECK_FALSE(cert.verdict);
  CHECK(cert.worst_margin() < -0.5);  // eigenvalue -1 on the first level
}

TEST_CASE("condition rejects non-Hermitian input and tiny cutoffs") {
  auto b = build_basis(ball_spec(1, 1), {6});
  Mat y = Mat::Zero(7, 7);
  y(0, 1) = 1.0;
  Certificate cert = beurling_condition(b, y, 1);
  CHECK_FALSE(cert.input_ok);
  CHECK_FALSE(cert.verdict);

  DomainSpec deep = ball_spec(1, 2);
  deep.q = {linear_poly(1)};
  deep.q[0].terms.push_back({{1, 1}, 0.5});
  auto tiny = build_basis(deep, {3});
  CHECK_THROWS_AS(beurling_condition(tiny, identity(4), 1), std::invalid_argument);
}

TEST_CASE("factorization of the vacuum complement is the inner shift row") {
  auto b = build_basis(ball_spec(2, 1), {4});
  Mat y = fock_vacuum_complement(b);
  Factorization f = beurling_factorize(b, y, 1);

  REQUIRE(f.rank == b.dim - 1);
  REQUIRE(f.defect_rank == 2);
  CHECK(f.welldef_residual < 1e-12);
  CHECK(f.factor_residual < 1e-12);
  CHECK(f.m.intertwine_residual < 1e-12);

  // MM* equals the complement on the whole truncated space, not just inside.
  Mat gram = f.m.op * f.m.op.adjoint();
  CHECK((gram - y).norm() < 1e-12);
  CHECK(is_inner(b, f.m));
}

TEST_CASE("factorization of the identity is a unitary symbol") {
  auto b = build_basis(ball_spec(2, 1), {4});
  Factorization f = beurling_factorize(b, identity(b.dim), 1);
  REQUIRE(f.rank == b.dim);
  REQUIRE(f.defect_rank == 1);
  Mat gram = f.m.op * f.m.op.adjoint();
  CHECK((gram - identity(b.dim)).norm() < 1e-10);
  CHECK(f.welldef_residual < 1e-10);
  CHECK(is_inner(b, f.m, 1e-8));
}

TEST_CASE("zero operator factors through a trivial coefficient space") {
  auto b = build_basis(ball_spec(2, 1), {3});
  Factorization f = beurling_factorize(b, Mat::Zero(b.dim, b.dim), 1);
  CHECK(f.rank == 0);
  CHECK(f.m.in_block == 0);
  CHECK(f.m.op.cols() == 0);
  CHECK(f.m.op.rows() == b.dim);
}

TEST_CASE("factorize refuses operators outside the cone") {
  auto b = build_basis(ball_spec(2, 1), {4});
  Mat y = vacuum_projection(b).dense();
  CHECK_THROWS_AS(beurling_factorize(b, y, 1), std::invalid_argument);
}

TEST_CASE("round trip through a blocked right symbol") {
  auto b = build_basis(ball_spec(2, 1), {4});
  Rng rng(404);
  Mat t0 = identity(2) + 0.3 * random_matrix(2, 2, rng);
  Mat t1 = 0.4 * random_matrix(2, 2, rng);
  Mat t2 = 0.3 * random_matrix(2, 2, rng);
  Mat m0 = right_symbol(b, {{{{}}, t0}, {{{1}}, t1}, {{{2, 1}}, t2}});

  // the symbol operator commutes with the blocked shifts exactly
  CHECK(multi_analytic_residual(b, m0, 2, 2) < 1e-13);

  Mat y = m0 * m0.adjoint();
  Certificate cert = beurling_condition(b, y, 2);
  REQUIRE(cert.verdict);

  Factorization f = beurling_factorize(b, y, 2);
  REQUIRE(f.defect_rank == 2);
  CHECK(f.welldef_residual < 1e-8);
  CHECK(f.factor_residual < 1e-8);
  CHECK(f.m.intertwine_residual < 1e-8);

  // recovered and original factor differ by a coefficient-space isometry
  Mat v = coincidence_isometry(f.m, make_multi_analytic(b, m0, 2, 2));
  CHECK((v.adjoint() * v - identity(2)).norm() < 1e-7);
  CHECK(coincidence_residual(b, f.m, make_multi_analytic(b, m0, 2, 2), v) < 1e-7);
}

TEST_CASE("coincidence recovers a planted partial isometry") {
  auto b = build_basis(ball_spec(2, 1), {4});
  Rng rng(77);
  Mat t0 = identity(2) + 0.25 * random_matrix(2, 2, rng);
  Mat t1 = 0.5 * random_matrix(2, 2, rng);
  Mat m2 = right_symbol(b, {{{{}}, t0}, {{{2}}, t1}});
  MultiAnalyticOp op2 = make_multi_analytic(b, m2, 2, 2);

  SECTION("unitary, equal products") {
    Mat v0 = random_unitary(2, rng);
    Mat scaled = Mat::Zero(m2.rows(), m2.cols());
    for (std::int64_t f = 0; f < b.dim; ++f)
      scaled.middleCols(f * 2, 2) = m2.middleCols(f * 2, 2) * v0;
    MultiAnalyticOp op1 = make_multi_analytic(b, scaled, 2, 2);
    CHECK((op1.op * op1.op.adjoint() - op2.op * op2.op.adjoint()).norm() < 1e-10);
    Mat v = coincidence_isometry(op1, op2);
    CHECK((v - v0).norm() < 1e-8);
    CHECK(coincidence_residual(b, op1, op2, v) < 1e-10);
  }

  SECTION("rank one") {
    Mat v0 = Mat::Zero(2, 2);
    v0(0, 0) = 1.0;
    Mat scaled = Mat::Zero(m2.rows(), m2.cols());
    for (std::int64_t f = 0; f < b.dim; ++f)
      scaled.middleCols(f * 2, 2) = m2.middleCols(f * 2, 2) * v0;
    MultiAnalyticOp op1 = make_multi_analytic(b, scaled, 2, 2);
    Mat v = coincidence_isometry(op1, op2);
    CHECK((v - v0).norm() < 1e-8);
    CHECK(coincidence_residual(b, op1, op2, v) < 1e-10);
  }
}

TEST_CASE("random dense operators are not multi-analytic") {
  auto b = build_basis(ball_spec(2, 1), {3});
  Rng rng(5);
  Mat a = random_matrix(b.dim, b.dim, rng);
  CHECK(multi_analytic_residual(b, a, 1, 1) > 1e-3);
  CHECK_FALSE(is_multi_analytic(b, make_multi_analytic(b, a, 1, 1)));
}

TEST_CASE("support detects the coefficient slice actually used") {
  auto b = build_basis(ball_spec(2, 1), {3});

  SECTION("identity uses everything") {
    MultiAnalyticOp m = make_multi_analytic(b, identity(b.dim * 2), 2, 2);
    SupportReport rep = support(b, m);
    CHECK(rep.dim == 2);
    CHECK(rep.containment_residual < 1e-14);
  }

  SECTION("diagonal rank-one symbol uses one direction") {
    Mat theta = Mat::Zero(2, 2);
    theta(0, 0) = 1.0;
    Mat m0 = right_symbol(b, {{{{}}, theta}});
    SupportReport rep = support(b, make_multi_analytic(b, m0, 2, 2));
    CHECK(rep.dim == 1);
    CHECK(rep.containment_residual < 1e-14);
  }

  SECTION("zero has empty support") {
    MultiAnalyticOp m = make_multi_analytic(b, Mat::Zero(b.dim * 2, b.dim * 2), 2, 2);
    SupportReport rep = support(b, m);
    CHECK(rep.dim == 0);
    CHECK(rep.containment_residual < 1e-14);
  }
}

TEST_CASE("co-invariant range regenerates the full blocked space") {
  auto b = build_basis(ball_spec(2, 1), {3});
  Mat t0 = Mat::Zero(2, 2);
  t0(0, 0) = 1.0;
  Mat t1 = Mat::Zero(2, 2);
  t1(0, 1) = 0.6;
  Mat m0 = right_symbol(b, {{{{}}, t0}, {{{1}}, t1}});

  // the range is a proper co-invariant subspace, but its vacuum slice is full
  Mat s = range_basis(m0.adjoint(), 1e-10);
  REQUIRE(s.cols() < b.dim * 2);
  SupportReport sup = support(b, make_multi_analytic(b, m0, 2, 2));
  REQUIRE(sup.dim == 2);

  Mat span(b.dim * 2, b.dim * s.cols());
  for (std::int64_t g = 0; g < b.dim; ++g) {
    MultiWord mw{b.words[0][static_cast<std::size_t>(g)]};
    span.middleCols(g * s.cols(), s.cols()) = word_colmap(b, mw, true).apply_left(s, 2);
  }
  Mat basis = range_basis(span, 1e-8);
  CHECK(basis.cols() == b.dim * sup.dim);
}

TEST_CASE("suffix range is invariant and of Beurling type") {
  auto b = build_basis(ball_spec(2, 1), {4});
  Mat p = suffix_projection(b, 1, 1).dense();
  SubspaceReport rep = invariant_subspace_tests(b, p, 1);
  for (double r : rep.invariance) CHECK(r < 1e-13);
  CHECK(rep.beurling.verdict);
  CHECK(rep.polyball_case);             // one factor, but still ball shaped
  CHECK(rep.doubly_commuting.empty());  // no cross-factor pairs
}

TEST_CASE("vacuum line is not invariant") {
  auto b = build_basis(ball_spec(2, 1), {4});
  Mat p = vacuum_projection(b).dense();
  SubspaceReport rep = invariant_subspace_tests(b, p, 1);
  double worst = 0.0;
  for (double r : rep.invariance) worst = std::max(worst, r);
  CHECK(worst > 0.9);
  CHECK_FALSE(rep.beurling.verdict);
}

TEST_CASE("bidisc vacuum complement is invariant but not of Beurling type") {
  auto b = build_basis(bidisc_spec(), {4, 4});
  Mat p = fock_vacuum_complement(b);
  SubspaceReport rep = invariant_subspace_tests(b, p, 1);
  REQUIRE(rep.polyball_case);
  for (double r : rep.invariance) CHECK(r < 1e-13);
  CHECK_FALSE(rep.beurling.verdict);
  double worst = 0.0;
  for (double r : rep.doubly_commuting) worst = std::max(worst, r);
  CHECK(worst > 0.9);  // compressed shifts fail to doubly commute
}

TEST_CASE("bidisc suffix range is invariant, Beurling, and doubly commuting") {
  auto b = build_basis(bidisc_spec(), {4, 4});
  Mat p = suffix_projection(b, 1, 1).dense();
  SubspaceReport rep = invariant_subspace_tests(b, p, 1);
  REQUIRE(rep.polyball_case);
  for (double r : rep.invariance) CHECK(r < 1e-13);
  CHECK(rep.beurling.verdict);
  for (double r : rep.doubly_commuting) CHECK(r < 1e-13);
}

TEST_CASE("reducing subspaces are coefficient slices") {
  auto b = build_basis(ball_spec(2, 1), {3});
  Rng rng(29);
  Mat u = random_unitary(3, rng);
  Mat pe = Mat::Zero(3, 3);
  pe(0, 0) = 1.0;
  pe(1, 1) = 1.0;
  Mat q = u * pe * u.adjoint();
  Mat p = kron(identity(b.dim), q);

  ReducingReport rep = reducing_characterize(b, p, 3);
  REQUIRE(rep.reducing);
  CHECK(rep.obstruction < 1e-13);
  REQUIRE(rep.e_basis.has_value());
  CHECK(rep.e_basis->cols() == 2);
  CHECK(rep.match_residual < 1e-12);
}

TEST_CASE("one-sided invariant subspaces are not reducing") {
  auto b = build_basis(ball_spec(2, 1), {3});

  SECTION("vacuum slice") {
    Mat p = kron(vacuum_projection(b).dense(), identity(2));
    ReducingReport rep = reducing_characterize(b, p, 2);
    CHECK_FALSE(rep.reducing);
    CHECK(rep.obstruction > 0.9);
  }

  SECTION("suffix range") {
    Mat p = suffix_projection(b, 1, 1).dense();
    ReducingReport rep = reducing_characterize(b, p, 1);
    CHECK_FALSE(rep.reducing);
    CHECK(rep.obstruction > 0.5);
  }
}
