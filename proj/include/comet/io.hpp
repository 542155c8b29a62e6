#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comet/chain.hpp"
#include "comet/geweke.hpp"
#include "comet/model.hpp"
#include "comet/posterior.hpp"
#include "comet/simbench.hpp"

namespace comet {

/// File missing, unreadable, unwritable or not parseable.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Encoding { Json, F64le };

/// Dataset document: {"D", "p", "q", "n", "m", "encoding", "subjects": [{"y", "X", "Z"}]}.
/// With encoding "f64le" the subject arrays live in the file named by "sidecar"
/// (relative to the document), subject by subject as y, X, Z.
/// `require_response` false lets "y" be absent (filled with zeros).
ClusteredDataset read_dataset(const std::string& path, bool require_response = true);
void write_dataset(const std::string& path, const ClusteredDataset& ds,
                   Encoding encoding = Encoding::Json);

void write_truth(const std::string& path, const Truth& truth);
Truth read_truth(const std::string& path);

/// Per-cell z-scoring of the fixed- and random-effect covariates.
struct Standardization {
  Eigen::VectorXd x_mean, x_sd;
  Eigen::VectorXd z_mean, z_sd;

  /// Cells with zero spread keep sd 1 so they pass through centred.
  static Standardization fit(const ClusteredDataset& ds);
  void apply(ClusteredDataset& ds) const;
};

struct FitArtifact {
  Chain chain;
  std::optional<Standardization> standardization;
};

/// Line 1: JSON header. Lines 2..: one JSON object per retained draw.
void write_fit(const std::string& path, const FitArtifact& fit);
FitArtifact read_fit(const std::string& path);

void write_predictions_csv(std::ostream& out, const std::vector<std::vector<PredictionInterval>>& subjects);
void write_selection_csv(std::ostream& out, const Dims& p, const DenseTensor& median,
                         const CellIntervals& ci, const std::vector<bool>& s2m,
                         const std::vector<bool>& by_ci);
void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);
std::string benchmark_summary_json(const BenchmarkConfig& cfg, const BenchmarkReport& report);
std::string geweke_json(const GewekeConfig& cfg, const GewekeResult& result);

/// Shortest round-trip decimal form; "NaN" for NaN.
std::string format_double(double v);

}  // namespace comet
