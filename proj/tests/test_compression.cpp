#include <doctest.h>

#include <cmath>

#include "comet/compression.hpp"
#include "comet/model.hpp"
#include "support.hpp"

using namespace comet;

TEST_CASE("projection entries have variance 1/k") {
  const auto ps = draw_projections({100}, {10}, 17);
  for (const auto* m : {&ps.R[0], &ps.S[0]}) {
    const double mean = m->mean();
    const double var = (m->array() - mean).square().sum() / static_cast<double>(m->size() - 1);
    const double se = std::sqrt(2.0 * 0.01 / static_cast<double>(m->size() - 1));
    CHECK(std::abs(var - 0.1) < 3 * se);
  }
}

TEST_CASE("projections: deterministic, R and S independent, k validated") {
  const auto a = draw_projections({4, 5}, {2, 3}, 9);
  const auto b = draw_projections({4, 5}, {2, 3}, 9);
  CHECK(a.R[1] == b.R[1]);
  CHECK(a.S[0] == b.S[0]);
  CHECK(a.R[0] != a.S[0]);
  CHECK(a.R[1].rows() == 3);
  CHECK(a.R[1].cols() == 5);
  CHECK(a.core_size() == 6);
  CHECK_THROWS(draw_projections({4}, {5}, 1));
  CHECK_THROWS(draw_projections({4}, {0}, 1));
  CHECK_THROWS(draw_projections({4, 4}, {1}, 1));
}

TEST_CASE("compressing a 2x2 covariate with rows of ones") {
  ProjectionSet ps;
  ps.q = {2, 2};
  ps.k = {1, 1};
  ps.S = {Eigen::MatrixXd::Ones(1, 2), Eigen::MatrixXd::Ones(1, 2)};
  ps.R = ps.S;
  const DenseTensor z({2, 2}, std::vector<double>{1, 3, 2, 4});  // [[1,2],[3,4]]
  const auto c = compress_covariate(z, ps);
  CHECK(c.dims() == Dims{1, 1});
  CHECK(c.data()[0] == 10.0);
  CHECK_THROWS_AS(compress_covariate(DenseTensor({3, 2}), ps), DimensionError);
}

TEST_CASE("compression equals S* vec(z)") {
  auto rng = substream(8, Stream::Benchmark);
  const auto ps = draw_projections({3, 4, 2}, {2, 2, 1}, 8);
  const auto z = testing::random_tensor(ps.q, rng);
  const ProjectionSet& cps = ps;
  CompressedFactors cf;
  for (auto k : ps.k) cf.gamma.push_back(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
  const auto kr = assemble_kron(cps, cf);
  CHECK(kr.s_star.rows() == 4);
  CHECK(kr.s_star.cols() == 24);
  const Eigen::VectorXd direct = kr.s_star * z.vec();
  CHECK((compress_covariate(z, ps).vec() - direct).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((compress_covariate(Eigen::VectorXd(z.vec()), ps) - direct).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((core_covariance(ps) - kr.r_star * kr.r_star.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Gamma* of scalar blocks") {
  CompressedFactors cf;
  cf.gamma = {Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Constant(1, 1, 3.0)};
  CHECK(gamma_star(cf)(0, 0) == 6.0);
}

TEST_CASE("default compression dims") {
  CHECK(default_compression_dims({32, 32}) == Dims{4, 4});
  CHECK(default_compression_dims({2, 16}) == Dims{2, 3});
  CHECK(default_compression_dims({1}) == Dims{1});
}

TEST_CASE("vec and set_vec are column-major inverses") {
  CompressedFactors cf;
  cf.gamma = {Eigen::MatrixXd::Zero(2, 2)};
  Eigen::VectorXd v(4);
  v << 1, 2, 3, 4;
  cf.set_vec(0, v);
  CHECK(cf.gamma[0](1, 0) == 2.0);
  CHECK(cf.gamma[0](0, 1) == 3.0);
  CHECK(cf.vec(0) == v);
}
