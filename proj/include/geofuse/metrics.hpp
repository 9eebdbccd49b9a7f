#pragma once

// Segmentation scoring and the model-level constraint audits (minimum
// accuracy, bounded gradient norm, bounded test error).

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geofuse/fcn.hpp"
#include "geofuse/fusion.hpp"
#include "geofuse/raster.hpp"

namespace geofuse {

/// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes = 0)
      : num_classes_(num_classes), counts_(num_classes * num_classes, 0) {}

  std::size_t num_classes() const noexcept { return num_classes_; }
  std::uint64_t at(std::size_t truth, std::size_t pred) const {
    return counts_[truth * num_classes_ + pred];
  }

  /// Throws ValidationError on a dimension or class-count mismatch.
  void add(const LabelMap& pred, const LabelMap& truth);
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t truth_count(std::size_t c) const;
  std::uint64_t predicted_count(std::size_t c) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t num_classes_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion_matrix(const LabelMap& pred, const LabelMap& truth);

struct ClassScores {
  double iou = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool present = false;  // class occurs in ground truth
};

struct AuditFlags {
  bool accuracy_min = false;    // pixel_accuracy >= A_min
  bool grad_norm = false;       // grad_norm <= rho^2
  bool test_error = false;      // test_loss <= E_max
  bool regularization = false;  // ||theta||_2^2 + ||theta||_1 <= lambda
};

struct EvalReport {
  std::string dataset;
  ConfusionMatrix confusion;
  double pixel_accuracy = 0.0;
  std::vector<ClassScores> per_class;
  // Unweighted means over classes present in the ground truth.
  double mean_iou = 0.0;
  double macro_f1 = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;

  std::optional<double> test_loss;
  std::optional<double> grad_norm;
  std::optional<double> regularization;
  std::optional<AuditFlags> flags;
  /// Extra key=value pairs carried into the machine-readable report.
  std::map<std::string, std::string> extra;
};

/// Metrics from accumulated counts. 0/0 ratios are 0.
EvalReport evaluate(const ConfusionMatrix& confusion);
EvalReport evaluate(const LabelMap& pred, const LabelMap& truth);

/// Mean per-tile cross-entropy. Throws ValidationError on an empty set.
double test_loss(const FcnModel& model, std::span<const Sample> test_set);

/// l2 norm of the concatenated parameter gradient of the mean loss over
/// `batch`.
double gradient_norm(const FcnModel& model, std::span<const Sample> batch);

/// ||theta||_2^2 + ||theta||_1 over all trainable parameters.
double regularization_value(const FcnModel& model);

/// Sets report.flags from the measured values; a missing value fails its
/// flag.
void apply_audits(EvalReport& report, const ConstraintThresholds& thresholds);

/// key=value lines, lowercase keys, shortest round-trip float formatting.
std::string format_report_kv(const EvalReport& report);
std::string format_report_text(const EvalReport& report);

/// Parses key=value lines, skipping blanks and '#' comments.
std::map<std::string, std::string> parse_kv(const std::string& text);

}  // namespace geofuse
