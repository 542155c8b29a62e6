#include "comet/tensor.hpp"

#include <numeric>
#include <sstream>

namespace comet {

namespace {

struct ModeSplit {
  std::size_t left = 1;   // product of dims below the mode
  std::size_t extent = 1;
  std::size_t right = 1;  // product of dims above the mode
};

ModeSplit split_at(const Dims& dims, std::size_t mode) {
  if (mode >= dims.size()) {
    throw DimensionError("mode " + std::to_string(mode) + " out of range for order-" +
                         std::to_string(dims.size()) + " tensor");
  }
  ModeSplit s;
  for (std::size_t j = 0; j < mode; ++j) s.left *= dims[j];
  s.extent = dims[mode];
  for (std::size_t j = mode + 1; j < dims.size(); ++j) s.right *= dims[j];
  return s;
}

void check_dims(const Dims& dims) {
  if (dims.empty()) throw DimensionError("tensor order must be at least 1");
  for (auto d : dims) {
    if (d == 0) throw DimensionError("tensor dims must be positive, got " + format_dims(dims));
  }
}

}  // namespace

std::size_t product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::string format_dims(const Dims& dims) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ')';
  return os.str();
}

DenseTensor::DenseTensor(Dims dims) : dims_(std::move(dims)) {
  check_dims(dims_);
  data_.assign(product(dims_), 0.0);
}

DenseTensor::DenseTensor(Dims dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  check_dims(dims_);
  if (data_.size() != product(dims_)) {
    throw DimensionError("data length " + std::to_string(data_.size()) +
                         " does not match dims " + format_dims(dims_));
  }
}

DenseTensor::DenseTensor(Dims dims, const Eigen::Ref<const Eigen::VectorXd>& data)
    : DenseTensor(std::move(dims), std::vector<double>(data.data(), data.data() + data.size())) {}

std::size_t DenseTensor::linear_index(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) throw DimensionError("index arity does not match order");
  std::size_t lin = 0;
  std::size_t stride = 1;
  for (std::size_t d = 0; d < dims_.size(); ++d) {
    if (index[d] >= dims_[d]) throw DimensionError("index out of range");
    lin += index[d] * stride;
    stride *= dims_[d];
  }
  return lin;
}

double& DenseTensor::operator()(std::initializer_list<std::size_t> index) {
  return data_[linear_index({index.begin(), index.size()})];
}

double DenseTensor::operator()(std::initializer_list<std::size_t> index) const {
  return data_[linear_index({index.begin(), index.size()})];
}

std::size_t CpDecomposition::rank() const {
  return factors.empty() ? 0 : static_cast<std::size_t>(factors.front().cols());
}

Dims CpDecomposition::dims() const {
  Dims out;
  out.reserve(factors.size());
  for (const auto& f : factors) out.push_back(static_cast<std::size_t>(f.rows()));
  return out;
}

void CpDecomposition::check() const {
  if (factors.empty()) throw DimensionError("CP decomposition needs at least one factor");
  const auto k = factors.front().cols();
  if (k < 1) throw DimensionError("CP rank must be positive");
  for (const auto& f : factors) {
    if (f.cols() != k) throw DimensionError("CP factors disagree on rank");
    if (f.rows() < 1) throw DimensionError("CP factor with zero rows");
  }
}

Eigen::VectorXd vectorize(const DenseTensor& t) { return t.vec(); }

Eigen::MatrixXd unfold(std::span<const double> data, const Dims& dims, std::size_t mode) {
  const auto s = split_at(dims, mode);
  if (data.size() != s.left * s.extent * s.right) throw DimensionError("unfold: data/dims mismatch");
  Eigen::MatrixXd out(s.extent, s.left * s.right);
  for (std::size_t c = 0; c < s.right; ++c) {
    for (std::size_t i = 0; i < s.extent; ++i) {
      const double* src = data.data() + s.left * (i + s.extent * c);
      for (std::size_t a = 0; a < s.left; ++a) out(i, a + s.left * c) = src[a];
    }
  }
  return out;
}

Eigen::MatrixXd unfold(const DenseTensor& t, std::size_t mode) {
  return unfold(t.data(), t.dims(), mode);
}

DenseTensor fold(const Eigen::Ref<const Eigen::MatrixXd>& m, std::size_t mode, const Dims& dims) {
  const auto s = split_at(dims, mode);
  if (static_cast<std::size_t>(m.rows()) != s.extent ||
      static_cast<std::size_t>(m.cols()) != s.left * s.right) {
    throw DimensionError("fold: matrix shape does not match dims " + format_dims(dims));
  }
  DenseTensor out(dims);
  auto data = out.data();
  for (std::size_t c = 0; c < s.right; ++c) {
    for (std::size_t i = 0; i < s.extent; ++i) {
      double* dst = data.data() + s.left * (i + s.extent * c);
      for (std::size_t a = 0; a < s.left; ++a) dst[a] = m(i, a + s.left * c);
    }
  }
  return out;
}

DenseTensor mode_multiply(const DenseTensor& t, const Eigen::Ref<const Eigen::MatrixXd>& m,
                          std::size_t mode) {
  const auto s = split_at(t.dims(), mode);
  if (static_cast<std::size_t>(m.cols()) != s.extent) {
    throw DimensionError("mode_multiply: matrix has " + std::to_string(m.cols()) +
                         " columns, mode " + std::to_string(mode) + " has extent " +
                         std::to_string(s.extent));
  }
  Dims out_dims = t.dims();
  out_dims[mode] = static_cast<std::size_t>(m.rows());
  DenseTensor out(out_dims);
  const auto rows = static_cast<Eigen::Index>(m.rows());
  const auto left = static_cast<Eigen::Index>(s.left);
  for (std::size_t c = 0; c < s.right; ++c) {
    Eigen::Map<const Eigen::MatrixXd> slab(t.data().data() + s.left * s.extent * c, left,
                                           static_cast<Eigen::Index>(s.extent));
    Eigen::Map<Eigen::MatrixXd> dst(out.data().data() + s.left * out_dims[mode] * c, left, rows);
    dst.noalias() = slab * m.transpose();
  }
  return out;
}

DenseTensor multiply_all_modes(const DenseTensor& t, std::span<const Eigen::MatrixXd> ms) {
  if (ms.size() != t.order()) throw DimensionError("multiply_all_modes: one matrix per mode");
  DenseTensor out = t;
  for (std::size_t d = 0; d < ms.size(); ++d) out = mode_multiply(out, ms[d], d);
  return out;
}

Eigen::MatrixXd kronecker(const Eigen::Ref<const Eigen::MatrixXd>& a,
                          const Eigen::Ref<const Eigen::MatrixXd>& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::MatrixXd kronecker_descending(std::span<const Eigen::MatrixXd> ms, std::ptrdiff_t skip) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, 1);
  for (std::ptrdiff_t d = static_cast<std::ptrdiff_t>(ms.size()) - 1; d >= 0; --d) {
    if (d == skip) continue;
    out = kronecker(out, ms[static_cast<std::size_t>(d)]);
  }
  return out;
}

Eigen::MatrixXd khatri_rao(const Eigen::Ref<const Eigen::MatrixXd>& a,
                           const Eigen::Ref<const Eigen::MatrixXd>& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("khatri_rao: column counts differ (" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.cols()) + ")");
  }
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols());
  for (Eigen::Index g = 0; g < a.cols(); ++g) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.col(g).segment(i * b.rows(), b.rows()) = a(i, g) * b.col(g);
    }
  }
  return out;
}

Eigen::MatrixXd khatri_rao_except(std::span<const Eigen::MatrixXd> factors, std::size_t skip) {
  if (factors.empty()) throw DimensionError("khatri_rao_except: no factors");
  const auto k = factors.front().cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, k);
  for (std::ptrdiff_t d = static_cast<std::ptrdiff_t>(factors.size()) - 1; d >= 0; --d) {
    if (static_cast<std::size_t>(d) == skip) continue;
    out = khatri_rao(out, factors[static_cast<std::size_t>(d)]);
  }
  return out;
}

Eigen::VectorXd cp_compose_vec(const CpDecomposition& cp) {
  cp.check();
  const auto all = khatri_rao_except(cp.factors, cp.factors.size());
  return all.rowwise().sum();
}

DenseTensor cp_compose(const CpDecomposition& cp) {
  return DenseTensor(cp.dims(), cp_compose_vec(cp));
}

double inner_product(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) {
    throw DimensionError("inner_product: dims " + format_dims(a.dims()) + " vs " +
                         format_dims(b.dims()));
  }
  return a.vec().dot(b.vec());
}

}  // namespace comet
