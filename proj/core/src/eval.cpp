#include "midctl/eval.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "midctl/error.hpp"

namespace midctl::eval {

namespace {

double ratio(long num, long den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    std::ostringstream msg;
    msg << "score/label length mismatch: " << scores.size() << " vs " << labels.size();
    throw Error(ErrorCode::kDimension, msg.str());
  }
  for (int t : labels) {
    if (t != 0 && t != 1) throw Error(ErrorCode::kValidation, "labels must be 0 or 1");
  }
}

}  // namespace

double ConfusionMatrix::true_positive_rate() const { return ratio(tc, tc + fp); }
double ConfusionMatrix::true_negative_rate() const { return ratio(tp, tp + fc); }
double ConfusionMatrix::false_positive_rate() const { return ratio(fc, tp + fc); }
double ConfusionMatrix::accuracy() const { return ratio(tc + tp, total()); }

ConfusionMatrix confusion(std::span<const double> scores, std::span<const int> labels,
                          double threshold) {
  check(scores, labels);
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kConfig, "threshold must lie in [0, 1]");
  }
  ConfusionMatrix cm;
  for (std::size_t n = 0; n < scores.size(); ++n) {
    const bool predicted_conflict = scores[n] >= threshold;
    if (labels[n] == 1) {
      (predicted_conflict ? cm.tc : cm.fp) += 1;
    } else {
      (predicted_conflict ? cm.fc : cm.tp) += 1;
    }
  }
  return cm;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check(scores, labels);
  const long pos = std::count(labels.begin(), labels.end(), 1);
  const long neg = static_cast<long>(labels.size()) - pos;
  if (pos == 0 || neg == 0) {
    throw Error(ErrorCode::kInsufficientData, "ROC/AUC needs both classes present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  long tp = 0, fp = 0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double s = scores[order[k]];
    // Consume the whole block of tied scores at once.
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] == 1 ? tp : fp) += 1;
      ++k;
    }
    const RocPoint next{ratio(fp, neg), ratio(tp, pos), s};
    const RocPoint& prev = roc.points.back();
    roc.auc += 0.5 * (next.fpr - prev.fpr) * (next.tpr + prev.tpr);
    roc.points.push_back(next);
  }
  return roc;
}

}  // namespace midctl::eval
