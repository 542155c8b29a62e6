// Per-subject data-parallel kernels of the sampler. Each subject writes only
// its own slice of the output and draws from its own substream, so the
// OpenMP and serial paths produce identical results.

#include <exception>

#include <omp.h>

#include "comet/sampler.hpp"

namespace comet {

namespace {

template <class Body>
void for_each_subject(std::size_t n, Exec exec, Body&& body) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Exec::Parallel && n > 1 && !omp_in_parallel()) {
    // exceptions must not escape the parallel region; keep the first one
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(comet_subject_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  }
}

}  // namespace

std::vector<SubjectGaussianBlocks> compute_blocks(const PreparedData& data,
                                                  const CompressedFactors& gamma, Exec exec) {
  const Eigen::MatrixXd gs = gamma_star(gamma);
  std::vector<SubjectGaussianBlocks> out(data.num_subjects());
  for_each_subject(data.num_subjects(), exec, [&](std::size_t i) {
    out[i] = joint_blocks(data.subjects[i].ztil, gs, data.core_cov);
  });
  return out;
}

void sample_all_cores(const PreparedData& data, const std::vector<SubjectGaussianBlocks>& blocks,
                      const Eigen::Ref<const Eigen::VectorXd>& beta, double tau2,
                      std::uint64_t seed, std::uint64_t sweep, std::vector<Eigen::VectorXd>& out,
                      Exec exec) {
  out.resize(data.num_subjects());
  for_each_subject(data.num_subjects(), exec, [&](std::size_t i) {
    auto rng = substream(seed, Stream::Cores, sweep, i);
    out[i] = sample_dtilde(data.subjects[i], blocks[i], beta, tau2, rng);
  });
}

RegressionDesign beta_design(std::size_t mode, const PreparedData& data, const Whitening& w,
                             const CpDecomposition& factors, Exec exec) {
  const auto& p = data.p;
  const auto extent = static_cast<Eigen::Index>(p[mode]);
  const auto cols = extent * static_cast<Eigen::Index>(factors.rank());
  const auto rest = static_cast<Eigen::Index>(product(p)) / extent;
  const Eigen::MatrixXd b_minus = khatri_rao_except(factors.factors, mode);

  RegressionDesign out{Eigen::VectorXd(static_cast<Eigen::Index>(data.total_obs)),
                       Eigen::MatrixXd(static_cast<Eigen::Index>(data.total_obs), cols)};
  for_each_subject(data.num_subjects(), exec, [&](std::size_t i) {
    const auto& s = data.subjects[i];
    const auto m = s.xcols.cols();
    Eigen::MatrixXd raw(m, cols);
    Eigen::MatrixXd prod(extent, b_minus.cols());
    for (Eigen::Index j = 0; j < m; ++j) {
      // mode 0 unfolding is the column itself, read in place
      if (mode == 0) {
        prod.noalias() = Eigen::Map<const Eigen::MatrixXd>(s.xcols.col(j).data(), extent, rest) * b_minus;
      } else {
        const std::span<const double> x(s.xcols.col(j).data(), static_cast<std::size_t>(s.xcols.rows()));
        prod.noalias() = unfold(x, p, mode) * b_minus;
      }
      raw.row(j) = Eigen::Map<const Eigen::RowVectorXd>(prod.data(), cols);
    }
    const auto off = static_cast<Eigen::Index>(data.offsets[i]);
    out.design.middleRows(off, m) = w.whiten(i, raw);
    out.response.segment(off, m) = w.whiten(i, s.y);
  });
  return out;
}

RegressionDesign beta_design_reference(std::size_t mode, const PreparedData& data,
                                       const Whitening& w, const CpDecomposition& factors) {
  const Eigen::MatrixXd b_minus = khatri_rao_except(factors.factors, mode);
  const auto cols = static_cast<Eigen::Index>(data.p[mode] * factors.rank());
  RegressionDesign out{Eigen::VectorXd(static_cast<Eigen::Index>(data.total_obs)),
                       Eigen::MatrixXd(static_cast<Eigen::Index>(data.total_obs), cols)};
  for (std::size_t i = 0; i < data.num_subjects(); ++i) {
    const auto& s = data.subjects[i];
    Eigen::MatrixXd raw(s.xcols.cols(), cols);
    for (Eigen::Index j = 0; j < s.xcols.cols(); ++j) {
      const DenseTensor x(data.p, s.xcols.col(j));
      const Eigen::MatrixXd prod = unfold(x, mode) * b_minus;
      raw.row(j) = Eigen::Map<const Eigen::RowVectorXd>(prod.data(), cols);
    }
    const auto off = static_cast<Eigen::Index>(data.offsets[i]);
    out.design.middleRows(off, raw.rows()) = w.whiten(i, raw);
    out.response.segment(off, raw.rows()) = w.whiten(i, s.y);
  }
  return out;
}

double whitened_rss(const PreparedData& data, const Whitening& w,
                    const Eigen::Ref<const Eigen::VectorXd>& beta, Exec exec) {
  std::vector<double> parts(data.num_subjects(), 0.0);
  for_each_subject(data.num_subjects(), exec, [&](std::size_t i) {
    const auto& s = data.subjects[i];
    const Eigen::VectorXd r = s.y - s.xcols.transpose() * beta;
    parts[i] = w.whiten(i, r).squaredNorm();
  });
  double total = 0.0;
  for (double v : parts) total += v;
  return total;
}

}  // namespace comet
