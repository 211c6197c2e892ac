#include "test_support.h"
#include "xling/refine.h"

#include <doctest.h>

#include <cstring>

using namespace xling;
using namespace xling::testing;

namespace {

Matrix mat(Index rows, Index cols, std::initializer_list<double> values) {
  Matrix m(rows, cols);
  auto it = values.begin();
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = *it++;
  return m;
}

bool bitwise_equal(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

RefinementConfig averaging_only() {
  RefinementConfig cfg;
  cfg.norm_iters = 0;
  return cfg;
}

}  // namespace

TEST_CASE("midpoint of orthogonal unit vectors") {
  const auto a = average_vectors(mat(1, 2, {1, 0}), mat(1, 2, {0, 1}), {{{0, 0}}}, ConflictPolicy::first_pair);
  CHECK(a.x == mat(1, 2, {0.5, 0.5}));
  CHECK(a.z == mat(1, 2, {0.5, 0.5}));
  CHECK(a.pairs_averaged == 1);
}

TEST_CASE("midpoint of equal vectors is unchanged") {
  const Matrix v = mat(1, 2, {0.6, 0.8});
  const auto a = average_vectors(v, v, {{{0, 0}}}, ConflictPolicy::first_pair);
  CHECK(a.x == v);
  CHECK(a.z == v);
}

TEST_CASE("rows outside the dictionary are untouched") {
  const Matrix x = mat(2, 2, {1, 0, 0.3, 0.7});
  const Matrix z = mat(2, 2, {0, 1, 0.1, 0.2});
  const auto a = average_vectors(x, z, {{{0, 0}}}, ConflictPolicy::first_pair);
  CHECK(bitwise_equal(a.x.row(1), x.row(1)));
  CHECK(bitwise_equal(a.z.row(1), z.row(1)));
}

TEST_CASE("refine_pipeline with averaging only") {
  const auto r = refine_pipeline(mat(1, 2, {1, 0}), mat(1, 2, {0, 1}), {{{0, 0}}}, averaging_only());
  CHECK(r.x_refined == mat(1, 2, {0.5, 0.5}));
  CHECK(r.z_refined == mat(1, 2, {0.5, 0.5}));
}

TEST_CASE("opposite vectors give a degenerate midpoint") {
  const Matrix x = mat(2, 2, {1, 0, 0, 1});
  const Matrix z = mat(2, 2, {-1, 0, 0, 1});
  try {
    refine_pipeline(x, z, {{{0, 0}}}, RefinementConfig{});
    FAIL("expected DegenerateInputError");
  } catch (const DegenerateInputError& e) {
    CHECK(std::string(e.what()).find("(0, 0)") != std::string::npos);
  }
  CHECK_NOTHROW(refine_pipeline(x, z, {{{0, 0}}}, averaging_only()));
}

TEST_CASE("refine_pipeline matches the literal script") {
  // Frozen from tests/oracles/refine_literal.py.
  const Matrix x = mat(6, 3, {1, .2, -.3, .1, 1.1, .4, -.5, .3, .9, .7, -.8, .2, .3, .3, .3, -.2, -.6, -.4});
  const Matrix z = mat(6, 3, {.9, .3, -.2, .2, 1.0, .5, -.4, .2, 1.0, -.6, .5, .1, .4, -.9, .3, .8, .1, -.7});
  const BilingualDictionary dict{{{0, 0}, {2, 1}, {5, 4}}};
  const Matrix x_expected = mat(6, 3,
                                {0.7075490541088955, -0.05370242409115314, -0.7233922617422824,   //
                                 -0.4324876353882059, 0.8721580579923287, 0.040079085451798,      //
                                 -0.6977489547071173, 0.4533492268916491, 0.5138484495054811,     //
                                 0.23084410847391115, -0.9923282114000519, -0.1280809399771672,   //
                                 0.38110095992674603, 0.6866965680098183, 0.5835185016130892,     //
                                 -0.18925753241422943, -0.9661732174025912, -0.2859728348509186});
  const Matrix z_expected = mat(6, 3,
                                {0.9031123605278478, 0.032497197076347364, -0.45786383168568134,  //
                                 -0.2699731902797091, 0.6317170021188194, 0.7083550702362831,     //
                                 -0.49027492872677525, -0.03191617786178074, 0.8559063481020557,  //
                                 -0.8719130723471524, 0.4584095552139671, -0.09183210404479046,   //
                                 0.08840916140758387, -0.976372581707013, -0.23656202948102328,   //
                                 0.640639669418205, -0.11433499484034014, -0.7780034531268436});
  RefinementConfig cfg;
  cfg.norm_iters = 5;
  cfg.norm_tol = 1e-6;
  const auto r = refine_pipeline(x, z, dict, cfg);
  CHECK((r.x_refined - x_expected).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((r.z_refined - z_expected).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(r.x_report.iterations_run == 5);
  CHECK(r.z_report.iterations_run == 5);
  CHECK(r.pairs_averaged == 3);
}

TEST_CASE("averaging invariants on random spaces") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x = gaussian(40, 6, rng);
    Matrix z = gaussian(50, 6, rng);
    unit_rows(x);
    unit_rows(z);
    BilingualDictionary dict;
    std::uniform_int_distribution<Index> sx(0, 39);
    std::uniform_int_distribution<Index> sz(0, 49);
    for (int p = 0; p < 30; ++p) dict.pairs.push_back({sx(rng), sz(rng)});

    const auto a = average_vectors(x, z, dict, ConflictPolicy::first_pair);
    CHECK(a.pairs_averaged + a.pairs_skipped == static_cast<Index>(dict.size()));
    std::set<Index> touched_x;
    std::set<Index> touched_z;
    for (const auto& p : a.retained.pairs) {
      CHECK(bitwise_equal(a.x.row(p.source), a.z.row(p.target)));
      const double half_gap = (x.row(p.source) - z.row(p.target)).norm() / 2;
      CHECK(std::abs((x.row(p.source) - a.x.row(p.source)).norm() - half_gap) <= 1e-9);
      CHECK(std::abs((z.row(p.target) - a.z.row(p.target)).norm() - half_gap) <= 1e-9);
      CHECK(touched_x.insert(p.source).second);
      CHECK(touched_z.insert(p.target).second);
    }
    for (Index i = 0; i < x.rows(); ++i)
      if (!touched_x.contains(i)) CHECK(bitwise_equal(a.x.row(i), x.row(i)));
    for (Index j = 0; j < z.rows(); ++j)
      if (!touched_z.contains(j)) CHECK(bitwise_equal(a.z.row(j), z.row(j)));

    RefinementConfig cfg;
    cfg.norm_iters = 3;
    const auto r = refine_pipeline(x, z, dict, cfg);
    CHECK(r.pairs_averaged + r.pairs_skipped == static_cast<Index>(dict.size()));
  }
}

TEST_CASE("first-pair policy keeps the earliest pair per word") {
  const Matrix x = mat(2, 2, {1, 0, 0, 1});
  const Matrix z = mat(2, 2, {0, 1, 1, 0});
  const BilingualDictionary dict{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
  const auto a = average_vectors(x, z, dict, ConflictPolicy::first_pair);
  CHECK(a.retained == BilingualDictionary{{{0, 0}, {1, 1}}});
  CHECK(a.pairs_skipped == 2);
}

TEST_CASE("mutual-only policy keeps mutual nearest neighbours") {
  const Matrix x = mat(3, 2, {1, 0, 0, 1, 0.9, 0.1});
  const Matrix z = mat(2, 2, {1, 0.05, 0.1, 1});
  // x0 <-> z0 and x1 <-> z1 are mutual; x2's nearest is z0, but z0 prefers x0.
  const BilingualDictionary dict{{{2, 0}, {0, 0}, {1, 1}, {0, 1}}};
  const auto a = average_vectors(x, z, dict, ConflictPolicy::mutual_only);
  CHECK(a.retained == BilingualDictionary{{{0, 0}, {1, 1}}});
  CHECK(a.pairs_skipped == 2);
}

TEST_CASE("policy names and validation") {
  CHECK(parse_conflict_policy("first-pair") == ConflictPolicy::first_pair);
  CHECK(parse_conflict_policy("mutual-only") == ConflictPolicy::mutual_only);
  CHECK(std::string(to_string(ConflictPolicy::mutual_only)) == "mutual-only");
  CHECK_THROWS_AS(parse_conflict_policy("all"), ContractError);
  RefinementConfig cfg;
  cfg.norm_iters = -1;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  CHECK_THROWS_AS(average_vectors(mat(1, 2, {1, 0}), mat(1, 2, {0, 1}), {{{0, 3}}}, ConflictPolicy::first_pair),
                  ContractError);
}
