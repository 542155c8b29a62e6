#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace comet {

using Dims = std::vector<std::size_t>;

/// Raised when tensor/matrix shapes do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::size_t product(const Dims& dims);
std::string format_dims(const Dims& dims);

/// Order-D dense tensor stored first-mode-fastest (column-major generalised).
///
/// Entry (i_1, ..., i_D) lives at i_1 + d_1 * (i_2 + d_2 * (i_3 + ...)). All
/// indices in this API are zero-based, including mode numbers.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Dims dims);
  DenseTensor(Dims dims, std::vector<double> data);
  DenseTensor(Dims dims, const Eigen::Ref<const Eigen::VectorXd>& data);

  const Dims& dims() const noexcept { return dims_; }
  std::size_t order() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Eigen::Map<const Eigen::VectorXd> vec() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }
  Eigen::Map<Eigen::VectorXd> vec() {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  std::size_t linear_index(std::span<const std::size_t> index) const;
  double& operator()(std::initializer_list<std::size_t> index);
  double operator()(std::initializer_list<std::size_t> index) const;

  bool operator==(const DenseTensor&) const = default;

 private:
  Dims dims_;
  std::vector<double> data_;
};

/// Rank-K CP decomposition: factor d is p_d x K, column g is beta_d^(g).
struct CpDecomposition {
  std::vector<Eigen::MatrixXd> factors;

  std::size_t rank() const;
  std::size_t order() const noexcept { return factors.size(); }
  Dims dims() const;
  /// Throws DimensionError unless every factor shares the column count.
  void check() const;
};

Eigen::VectorXd vectorize(const DenseTensor& t);

/// Mode-`mode` matricization (Kolda-Bader): rows index the mode, columns cycle
/// the remaining modes with the lowest remaining mode fastest.
Eigen::MatrixXd unfold(const DenseTensor& t, std::size_t mode);
Eigen::MatrixXd unfold(std::span<const double> data, const Dims& dims, std::size_t mode);
DenseTensor fold(const Eigen::Ref<const Eigen::MatrixXd>& m, std::size_t mode, const Dims& dims);

/// t x_mode m, i.e. fold(m * unfold(t, mode)).
DenseTensor mode_multiply(const DenseTensor& t, const Eigen::Ref<const Eigen::MatrixXd>& m,
                          std::size_t mode);
/// t x_1 ms[0] x_2 ms[1] ... over every mode.
DenseTensor multiply_all_modes(const DenseTensor& t, std::span<const Eigen::MatrixXd> ms);

Eigen::MatrixXd kronecker(const Eigen::Ref<const Eigen::MatrixXd>& a,
                          const Eigen::Ref<const Eigen::MatrixXd>& b);
/// ms[D-1] (x) ... (x) ms[0], omitting index `skip` when given. Empty chain is [[1]].
Eigen::MatrixXd kronecker_descending(std::span<const Eigen::MatrixXd> ms,
                                     std::ptrdiff_t skip = -1);

Eigen::MatrixXd khatri_rao(const Eigen::Ref<const Eigen::MatrixXd>& a,
                           const Eigen::Ref<const Eigen::MatrixXd>& b);
/// B_{-d}: Khatri-Rao of all factors except `skip`, highest mode first.
Eigen::MatrixXd khatri_rao_except(std::span<const Eigen::MatrixXd> factors, std::size_t skip);

DenseTensor cp_compose(const CpDecomposition& cp);
Eigen::VectorXd cp_compose_vec(const CpDecomposition& cp);

double inner_product(const DenseTensor& a, const DenseTensor& b);

}  // namespace comet
