#include "geofuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "geofuse/error.hpp"

namespace geofuse {
namespace {

// Summing in value order makes the mean independent of class numbering.
double sorted_mean(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ConfusionMatrix::add(const LabelMap& pred, const LabelMap& truth) {
  if (pred.width() != truth.width() || pred.height() != truth.height())
    throw ValidationError(fmt::format(
        "prediction {}x{} and truth {}x{} differ in extent", pred.height(),
        pred.width(), truth.height(), truth.width()));
  if (pred.num_classes() != num_classes_ || truth.num_classes() != num_classes_)
    throw ValidationError("label maps and confusion matrix differ in class count");
  for (std::size_t q = 0; q < pred.size(); ++q)
    ++counts_[truth[q] * num_classes_ + pred[q]];
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_)
    throw ValidationError("confusion matrices differ in class count");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t n = 0;
  for (std::size_t c = 0; c < num_classes_; ++c) n += at(c, c);
  return n;
}

std::uint64_t ConfusionMatrix::truth_count(std::size_t c) const {
  std::uint64_t n = 0;
  for (std::size_t p = 0; p < num_classes_; ++p) n += at(c, p);
  return n;
}

std::uint64_t ConfusionMatrix::predicted_count(std::size_t c) const {
  std::uint64_t n = 0;
  for (std::size_t t = 0; t < num_classes_; ++t) n += at(t, c);
  return n;
}

ConfusionMatrix confusion_matrix(const LabelMap& pred, const LabelMap& truth) {
  if (pred.num_classes() != truth.num_classes())
    throw ValidationError("prediction and truth differ in class count");
  ConfusionMatrix cm(truth.num_classes());
  cm.add(pred, truth);
  return cm;
}

EvalReport evaluate(const ConfusionMatrix& confusion) {
  EvalReport r;
  r.confusion = confusion;
  const std::size_t C = confusion.num_classes();
  r.pixel_accuracy = ratio(static_cast<double>(confusion.trace()),
                           static_cast<double>(confusion.total()));
  r.per_class.resize(C);
  std::vector<double> iou, f1, precision, recall;
  for (std::size_t c = 0; c < C; ++c) {
    const auto tp = static_cast<double>(confusion.at(c, c));
    const auto fn = static_cast<double>(confusion.truth_count(c)) - tp;
    const auto fp = static_cast<double>(confusion.predicted_count(c)) - tp;
    ClassScores& s = r.per_class[c];
    s.present = confusion.truth_count(c) > 0;
    s.iou = ratio(tp, tp + fp + fn);
    s.precision = ratio(tp, tp + fp);
    s.recall = ratio(tp, tp + fn);
    s.f1 = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
    if (!s.present) continue;
    iou.push_back(s.iou);
    f1.push_back(s.f1);
    precision.push_back(s.precision);
    recall.push_back(s.recall);
  }
  r.mean_iou = sorted_mean(iou);
  r.macro_f1 = sorted_mean(f1);
  r.macro_precision = sorted_mean(precision);
  r.macro_recall = sorted_mean(recall);
  return r;
}

EvalReport evaluate(const LabelMap& pred, const LabelMap& truth) {
  return evaluate(confusion_matrix(pred, truth));
}

double test_loss(const FcnModel& model, std::span<const Sample> test_set) {
  if (test_set.empty()) throw ValidationError("test set is empty");
  return mean_loss(model, test_set);
}

double gradient_norm(const FcnModel& model, std::span<const Sample> batch) {
  return std::sqrt(loss_and_gradient(model, batch).gradient.squared_norm());
}

double regularization_value(const FcnModel& model) {
  double sq = 0.0, abs = 0.0;
  for (const ConvParams* p : model.layers())
    for (const Tensor* t : {&p->weights, &p->bias})
      for (double v : t->values()) {
        sq += v * v;
        abs += std::abs(v);
      }
  return sq + abs;
}

void apply_audits(EvalReport& report, const ConstraintThresholds& thresholds) {
  thresholds.validate();
  AuditFlags f;
  f.accuracy_min = report.pixel_accuracy >= thresholds.accuracy_min;
  f.grad_norm = report.grad_norm.has_value() &&
                *report.grad_norm <= thresholds.grad_rho * thresholds.grad_rho;
  f.test_error = report.test_loss.has_value() &&
                 *report.test_loss <= thresholds.test_error_max;
  f.regularization = report.regularization.has_value() &&
                     *report.regularization <= thresholds.regularization;
  report.flags = f;
}

std::string format_report_kv(const EvalReport& r) {
  std::string out;
  auto line = [&](const std::string& key, const auto& value) {
    out += fmt::format("{}={}\n", key, value);
  };
  if (!r.dataset.empty()) line("dataset", r.dataset);
  line("num_classes", r.confusion.num_classes());
  line("pixel_count", r.confusion.total());
  line("pixel_accuracy", r.pixel_accuracy);
  line("mean_iou", r.mean_iou);
  line("macro_f1", r.macro_f1);
  line("macro_precision", r.macro_precision);
  line("macro_recall", r.macro_recall);
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const ClassScores& s = r.per_class[c];
    line(fmt::format("present_class_{}", c), s.present);
    line(fmt::format("iou_class_{}", c), s.iou);
    line(fmt::format("precision_class_{}", c), s.precision);
    line(fmt::format("recall_class_{}", c), s.recall);
    line(fmt::format("f1_class_{}", c), s.f1);
  }
  for (std::size_t t = 0; t < r.confusion.num_classes(); ++t)
    for (std::size_t p = 0; p < r.confusion.num_classes(); ++p)
      line(fmt::format("confusion_{}_{}", t, p), r.confusion.at(t, p));
  if (r.test_loss) line("test_loss", *r.test_loss);
  if (r.grad_norm) line("grad_norm", *r.grad_norm);
  if (r.regularization) line("regularization", *r.regularization);
  if (r.flags) {
    line("flag_accuracy_min", r.flags->accuracy_min);
    line("flag_grad_norm", r.flags->grad_norm);
    line("flag_test_error", r.flags->test_error);
    line("flag_regularization", r.flags->regularization);
  }
  for (const auto& [k, v] : r.extra) line(k, v);
  return out;
}

std::string format_report_text(const EvalReport& r) {
  std::string out;
  out += fmt::format("Segmentation report{}\n",
                     r.dataset.empty() ? "" : " (" + r.dataset + ")");
  out += fmt::format("  pixels          {}\n", r.confusion.total());
  out += fmt::format("  pixel accuracy  {:.4f}\n", r.pixel_accuracy);
  out += fmt::format("  mean IoU        {:.4f}\n", r.mean_iou);
  out += fmt::format("  macro F1        {:.4f}\n", r.macro_f1);
  out += fmt::format("  macro precision {:.4f}\n", r.macro_precision);
  out += fmt::format("  macro recall    {:.4f}\n", r.macro_recall);
  out += "\n  class  present     IoU  precision  recall      F1\n";
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const ClassScores& s = r.per_class[c];
    out += fmt::format("  {:>5}  {:>7}  {:.4f}     {:.4f}  {:.4f}  {:.4f}\n", c,
                       s.present ? "yes" : "no", s.iou, s.precision, s.recall,
                       s.f1);
  }
  if (r.test_loss) out += fmt::format("\n  test loss       {:.6f}\n", *r.test_loss);
  if (r.grad_norm) out += fmt::format("  gradient norm   {:.6g}\n", *r.grad_norm);
  if (r.regularization)
    out += fmt::format("  ||theta||2^2+||theta||1 {:.6g}\n", *r.regularization);
  if (r.flags) {
    out += fmt::format("\n  audit accuracy >= A_min        {}\n",
                       r.flags->accuracy_min ? "pass" : "FAIL");
    out += fmt::format("  audit grad norm <= rho^2       {}\n",
                       r.flags->grad_norm ? "pass" : "FAIL");
    out += fmt::format("  audit test loss <= E_max       {}\n",
                       r.flags->test_error ? "pass" : "FAIL");
    out += fmt::format("  audit regularization <= lambda {}\n",
                       r.flags->regularization ? "pass" : "FAIL");
  }
  return out;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError(fmt::format("line {}: expected key=value", lineno));
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw ValidationError(fmt::format("line {}: empty key", lineno));
    if (out.count(key))
      throw ValidationError(fmt::format("line {}: duplicate key '{}'", lineno, key));
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

}  // namespace geofuse
