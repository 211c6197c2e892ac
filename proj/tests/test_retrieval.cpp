#include "test_support.h"
#include "xling/retrieval.h"

#include <doctest.h>

#include <numbers>

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

Matrix hub_candidates() {
  Matrix c = mat(3, 2, {1, 0, 0.9, 0.1, 0, 1});
  c.row(1) /= c.row(1).norm();
  return c;
}

// Random instance with repeated candidate rows and queries that sit exactly
// on those repeats, so exact score ties occur.
std::pair<Matrix, Matrix> tied_instance(Index nx, Index nz, Index d, std::mt19937_64& rng) {
  Matrix x = gaussian(nx, d, rng);
  Matrix z = gaussian(nz, d, rng);
  std::uniform_int_distribution<Index> pick_z(0, nz - 1);
  std::uniform_int_distribution<Index> pick_x(0, nx - 1);
  for (int t = 0; t < std::max<Index>(1, nz / 10); ++t) {
    const Index from = pick_z(rng);
    const Index to = pick_z(rng);
    z.row(to) = z.row(from);
    x.row(pick_x(rng)) = z.row(from);
  }
  return {x, z};
}

}  // namespace

TEST_CASE("cosine_block examples") {
  CHECK(cosine_block(mat(1, 2, {1, 0}), mat(2, 2, {1, 0, 0, 1})).values == mat(1, 2, {1, 0}));
  CHECK(cosine_block(mat(1, 2, {1, 1}), mat(1, 2, {1, 0})).values(0, 0) ==
        doctest::Approx(std::numbers::sqrt2 / 2).epsilon(1e-6));
  CHECK(cosine_block(mat(1, 2, {0, 0}), mat(1, 2, {1, 0})).values(0, 0) == 0.0);
}

TEST_CASE("cosine_block range and unit diagonal") {
  std::mt19937_64 rng(3);
  Matrix m = gaussian(60, 8, rng);
  unit_rows(m);
  const Matrix s = cosine_block(m, m).values;
  CHECK(s.maxCoeff() <= 1 + 1e-9);
  CHECK(s.minCoeff() >= -1 - 1e-9);
  for (Index i = 0; i < m.rows(); ++i) CHECK(std::abs(s(i, i) - 1.0) <= 1e-9);
}

TEST_CASE("nn_retrieve examples") {
  CHECK(nn_retrieve({mat(1, 2, {0.2, 0.9})}) == std::vector<Index>{1});
  CHECK(nn_retrieve({mat(1, 2, {0.5, 0.5})}) == std::vector<Index>{0});
  CHECK(nn_retrieve({Matrix::Identity(3, 3)}) == std::vector<Index>{0, 1, 2});
}

TEST_CASE("nn_retrieve is permutation-equivariant") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix q = gaussian(30, 5, rng);
    const Matrix c = gaussian(40, 5, rng);
    const auto perm = random_permutation(40, rng);
    Matrix pc(40, 5);
    for (Index j = 0; j < 40; ++j) pc.row(perm[static_cast<std::size_t>(j)]) = c.row(j);
    const auto base = nn_retrieve(cosine_block(q, c));
    const auto permuted = nn_retrieve(cosine_block(q, pc));
    for (std::size_t i = 0; i < base.size(); ++i)
      CHECK(permuted[i] == perm[static_cast<std::size_t>(base[i])]);
    CHECK(nn_retrieve_blocked(q, c, std::nullopt, {7, 2}) == base);
  }
}

TEST_CASE("csls on the identity pair") {
  const Matrix x = Matrix::Identity(2, 2);
  CHECK(csls_retrieve(x, x, 1) == std::vector<Index>{0, 1});
  const Matrix u = normalized_rows(x);
  const Vector r = mean_topk_similarity(x, x, 1);
  const auto m = best_matches(u, u, RetrievalMethod::csls, r, r, std::nullopt, {});
  CHECK(m.score[0] == 0.0);
  const double off = 2 * 0.0 - r(0) - r(1);
  CHECK(off == -2.0);
}

TEST_CASE("csls hub scenario") {
  // Frozen from tests/oracles/csls_hub.py.
  const Matrix q = Matrix::Identity(2, 2);
  const Matrix c = hub_candidates();
  const Vector r_t = mean_topk_similarity(q, c, 1);
  const Vector r_s = mean_topk_similarity(c, q, 1);
  CHECK(r_t(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r_t(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r_s(1) == doctest::Approx(0.9938837346736189).epsilon(1e-12));

  const Matrix expected = mat(2, 3, {0.0, -0.006116265326381098, -2.0, -2.0, -1.7730206825239259, 0.0});
  const Matrix cos = cosine_block(q, c).values;
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 3; ++j) CHECK(std::abs(2 * cos(i, j) - r_t(i) - r_s(j) - expected(i, j)) <= 1e-12);
  CHECK(csls_retrieve(q, c, 1) == std::vector<Index>{0, 2});
}

TEST_CASE("csls equals nn when hub penalties are uniform") {
  // Two regular polygons, one slightly rotated: every penalty is the same.
  const int n = 7;
  Matrix x(n, 2);
  Matrix z(n, 2);
  for (int i = 0; i < n; ++i) {
    const double a = 2 * std::numbers::pi * i / n;
    x.row(i) << std::cos(a), std::sin(a);
    z.row(i) << std::cos(a + 0.2), std::sin(a + 0.2);
  }
  CHECK(csls_retrieve(x, z, n - 1) == nn_retrieve(cosine_block(x, z)));
}

TEST_CASE("csls_retrieve matches the brute-force oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<Index> size(2, 200);
  std::uniform_int_distribution<Index> dim(1, 40);
  for (int trial = 0; trial < 40; ++trial) {
    const Index nx = size(rng);
    const Index nz = size(rng);
    const Index d = dim(rng);
    auto [x, z] = tied_instance(nx, nz, d, rng);
    const int kmax = static_cast<int>(std::min(nz - 1, nx));
    const int k = std::uniform_int_distribution<int>(1, std::min(kmax, 20))(rng);
    CAPTURE(trial);
    CHECK(csls_retrieve(x, z, k, std::nullopt, {16, 1}) == csls_oracle(x, z, k));
  }
}

TEST_CASE("csls query subsets and contract") {
  std::mt19937_64 rng(4);
  const Matrix x = gaussian(20, 4, rng);
  const Matrix z = gaussian(25, 4, rng);
  const auto all = csls_retrieve(x, z, 5);
  const auto some = csls_retrieve(x, z, 5, std::vector<Index>{3, 17, 0});
  CHECK(some == std::vector<Index>{all[3], all[17], all[0]});
  CHECK_THROWS_AS(csls_retrieve(x, z, 0), ContractError);
  CHECK_THROWS_AS(csls_retrieve(x, z, 25), ContractError);
  CHECK_THROWS_AS(csls_retrieve(x, z, 21), ContractError);
  CHECK_THROWS_AS(csls_retrieve(x, gaussian(5, 3, rng), 1), ContractError);
}

TEST_CASE("csls is invariant under common positive rescaling") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = gaussian(50, 6, rng);
    const Matrix z = gaussian(60, 6, rng);
    const double s = std::pow(10.0, trial - 5);
    CHECK(csls_retrieve(x, z, 10) == csls_retrieve(x * s, z * s, 10));
    CHECK((cosine_block(x, z).values - cosine_block(x * s, z * s).values).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((mean_topk_similarity(z, x, 10) - mean_topk_similarity(z * s, x * s, 10)).cwiseAbs().maxCoeff() <=
          1e-9);
  }
}

TEST_CASE("results do not depend on block size or thread count") {
  std::mt19937_64 rng(77);
  const Matrix x = gaussian(150, 10, rng);
  const Matrix z = gaussian(130, 10, rng);
  const auto ref = csls_retrieve(x, z, 10);
  const Matrix xu = normalized_rows(x);
  const Matrix zu = normalized_rows(z);
  const Dropout drop{0.3, 99, 4};
  const auto ref_two = best_matches_two_way(xu, zu, RetrievalMethod::csls, 10, true, true, drop, {});
  for (Index block : {1, 7, 64, 4096}) {
    for (int threads : {1, 3}) {
      const RetrievalOptions opts{block, threads};
      CHECK(csls_retrieve(x, z, 10, std::nullopt, opts) == ref);
      const auto two = best_matches_two_way(xu, zu, RetrievalMethod::csls, 10, true, true, drop, opts);
      CHECK(two.forward == ref_two.forward);
      CHECK(two.backward == ref_two.backward);
    }
  }
}

TEST_CASE("two-way matches agree with one-way retrieval without dropout") {
  std::mt19937_64 rng(31);
  auto [x, z] = tied_instance(90, 110, 12, rng);
  const Matrix xu = normalized_rows(x);
  const Matrix zu = normalized_rows(z);
  const auto csls = best_matches_two_way(xu, zu, RetrievalMethod::csls, 10, true, true, {}, {});
  CHECK(csls.forward == csls_oracle(x, z, 10));
  CHECK(csls.backward == csls_oracle(z, x, 10));
  const auto nn = best_matches_two_way(xu, zu, RetrievalMethod::nn, 1, true, false, {}, {});
  CHECK(nn.forward == nn_retrieve(cosine_block(x, z)));
  CHECK(nn.backward.empty());
}

TEST_CASE("dropout masks are seeded") {
  std::mt19937_64 rng(5);
  const Matrix xu = normalized_rows(gaussian(200, 8, rng));
  const Matrix zu = normalized_rows(gaussian(200, 8, rng));
  auto run = [&](double p, std::uint64_t seed, std::uint64_t stream) {
    return best_matches_two_way(xu, zu, RetrievalMethod::csls, 10, true, false, {p, seed, stream}, {}).forward;
  };
  CHECK(run(1.0, 1, 0) == run(1.0, 2, 5));
  CHECK(run(0.1, 1, 0) == run(0.1, 1, 0));
  CHECK(run(0.1, 1, 0) != run(0.1, 2, 0));
  CHECK(run(0.1, 1, 0) != run(0.1, 1, 1));
  // With 10% of entries kept most rows lose their undropped argmax.
  const auto full = run(1.0, 1, 0);
  const auto dropped = run(0.1, 1, 0);
  int same = 0;
  for (std::size_t i = 0; i < full.size(); ++i) same += full[i] == dropped[i];
  CHECK(same < 60);
}

TEST_CASE("induce_dictionary examples") {
  const Matrix e = Matrix::Identity(3, 3);
  const BilingualDictionary diag{{{0, 0}, {1, 1}, {2, 2}}};
  CHECK(induce_dictionary(e, e, RetrievalMethod::nn, 1, Direction::forward) == diag);
  CHECK(induce_dictionary(e, e, RetrievalMethod::nn, 1, Direction::union_of_both) == diag);
  CHECK(induce_dictionary(e, e, RetrievalMethod::csls, 1, Direction::backward) == diag);

  std::mt19937_64 rng(6);
  const Matrix q = gaussian(2, 3, rng);
  const Matrix c = gaussian(9, 3, rng);
  const auto fwd = induce_dictionary(q, c, RetrievalMethod::nn, 1, Direction::forward);
  REQUIRE(fwd.pairs.size() == 2);
  CHECK(fwd.pairs[0].source == 0);
  CHECK(fwd.pairs[1].source == 1);
  const auto bwd = induce_dictionary(q, c, RetrievalMethod::nn, 1, Direction::backward);
  CHECK(bwd.pairs.size() <= 9);
  const auto uni = induce_dictionary(q, c, RetrievalMethod::nn, 1, Direction::union_of_both);
  CHECK(std::is_sorted(uni.pairs.begin(), uni.pairs.end()));
  CHECK(std::adjacent_find(uni.pairs.begin(), uni.pairs.end()) == uni.pairs.end());
}
