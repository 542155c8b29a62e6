#include <doctest.h>

#include <cmath>
#include <limits>

#include "comet/model.hpp"
#include "support.hpp"

using namespace comet;

namespace {

ClusteredDataset two_subjects() {
  ClusteredDataset ds;
  ds.p = {2, 2};
  ds.q = {2, 2};
  for (int i = 0; i < 2; ++i) {
    Subject s;
    for (int j = 0; j < 2; ++j) s.obs.push_back({1.0 + j, DenseTensor({2, 2}), DenseTensor({2, 2})});
    ds.subjects.push_back(s);
  }
  return ds;
}

}  // namespace

TEST_CASE("validate_dataset") {
  auto ds = two_subjects();
  CHECK_FALSE(validate_dataset(ds).has_value());

  auto bad = ds;
  bad.subjects[1].obs[0].x = DenseTensor({2, 3});
  auto issue = validate_dataset(bad);
  REQUIRE(issue.has_value());
  CHECK(issue->kind == IssueKind::DimensionMismatch);
  CHECK(issue->subject == 2);
  CHECK(issue->observation == 1);
  CHECK_THROWS_AS(require_valid(bad), ValidationError);

  bad = ds;
  bad.subjects[0].obs[0].y = std::numeric_limits<double>::quiet_NaN();
  issue = validate_dataset(bad);
  REQUIRE(issue.has_value());
  CHECK(issue->kind == IssueKind::NonFinite);

  bad = ds;
  bad.subjects[1].obs.clear();
  issue = validate_dataset(bad);
  REQUIRE(issue.has_value());
  CHECK(issue->kind == IssueKind::EmptySubject);

  CHECK(validate_dataset(ClusteredDataset{{2}, {2}, {}})->kind == IssueKind::Empty);
}

TEST_CASE("fingerprint tracks content") {
  auto a = two_subjects();
  auto b = a;
  CHECK(dataset_fingerprint(a) == dataset_fingerprint(b));
  b.subjects[0].obs[1].z.data()[1] = 1e-9;
  CHECK(dataset_fingerprint(a) != dataset_fingerprint(b));
}

TEST_CASE("hyperparameter checks") {
  Hyperparams hp;
  CHECK_NOTHROW(hp.check(2));
  hp.iters = 10;
  hp.burnin = 10;
  CHECK_THROWS_AS(hp.check(2), ValidationError);
  hp = {};
  hp.rank = 0;
  CHECK_THROWS_AS(hp.check(2), ValidationError);
  hp = {};
  hp.k = {2};
  CHECK_THROWS_AS(hp.check(2), ValidationError);
  hp = {};
  hp.a0 = 0;
  CHECK_THROWS_AS(hp.check(2), ValidationError);
  hp = {};
  hp.sigma2 = {1.0, -1.0};
  CHECK_THROWS_AS(hp.check(2), ValidationError);
}

TEST_CASE("init_state is valid and deterministic") {
  auto ds = two_subjects();
  Hyperparams hp;
  hp.rank = 3;
  hp.k = {1, 2};
  ds.q = {2, 2};
  for (auto& s : ds.subjects)
    for (auto& o : s.obs) o.z = DenseTensor({2, 2});
  const auto ps = draw_projections(ds.q, hp.k, 1);
  auto r1 = substream(5, Stream::Init);
  auto r2 = substream(5, Stream::Init);
  const auto a = init_state(ds, hp, ps, r1);
  const auto b = init_state(ds, hp, ps, r2);
  CHECK_FALSE(audit_state(a, ds.p, hp.k, 2).has_value());
  CHECK(a.factors.factors[0] == b.factors.factors[0]);
  CHECK(a.gamma.gamma[1] == b.gamma.gamma[1]);
  CHECK(a.tau2 == 1.0);
  CHECK(a.delta2.size() == 3);
  CHECK(a.dtilde[0].size() == 2);
  CHECK(a.dtilde[1].isZero());
}

TEST_CASE("single-mode rank-one state") {
  ClusteredDataset ds;
  ds.p = {3};
  ds.q = {2};
  ds.subjects.push_back({{{0.5, DenseTensor({3}), DenseTensor({2})}}});
  Hyperparams hp;
  hp.k = {1};
  const auto ps = draw_projections(ds.q, hp.k, 1);
  auto rng = substream(1, Stream::Init);
  const auto s = init_state(ds, hp, ps, rng);
  CHECK(s.factors.order() == 1);
  CHECK(s.factors.factors[0].cols() == 1);
  CHECK_FALSE(audit_state(s, ds.p, hp.k, 1).has_value());
}

TEST_CASE("audit catches bad values") {
  auto t = testing::make_tiny(3);
  auto s = t.state;
  CHECK_FALSE(audit_state(s, t.ds.p, t.hp.k, t.ds.num_subjects()).has_value());
  s.tau2 = 0.0;
  CHECK(audit_state(s, t.ds.p, t.hp.k, t.ds.num_subjects()).has_value());
  s = t.state;
  s.factors.factors[0](0, 0) = std::numeric_limits<double>::infinity();
  CHECK(audit_state(s, t.ds.p, t.hp.k, t.ds.num_subjects()).has_value());
  s = t.state;
  s.dtilde.pop_back();
  CHECK(audit_state(s, t.ds.p, t.hp.k, t.ds.num_subjects()).has_value());
}
