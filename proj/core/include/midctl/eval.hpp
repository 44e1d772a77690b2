#pragma once

#include <span>
#include <utility>
#include <vector>

namespace midctl::eval {

// Cell names follow the conflict-as-positive convention:
//   tc true conflict (TP), fp false peace (FN),
//   tp true peace (TN),    fc false conflict (FP).
struct ConfusionMatrix {
  long tc = 0;
  long fp = 0;
  long tp = 0;
  long fc = 0;

  long actual_conflicts() const { return tc + fp; }
  long actual_peace() const { return tp + fc; }
  long total() const { return tc + fp + tp + fc; }

  double true_positive_rate() const;  // tc / (tc + fp)
  double true_negative_rate() const;  // tp / (tp + fc)
  double false_positive_rate() const;
  double accuracy() const;

  bool operator==(const ConfusionMatrix&) const = default;
};

// Conflict is predicted when score >= threshold.
ConfusionMatrix confusion(std::span<const double> scores, std::span<const int> labels,
                          double threshold = 0.5);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) ... (1,1)
  double auc = 0.0;
};

// Sweeps the threshold over every distinct score; AUC by the trapezoidal rule.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace midctl::eval
