#pragma once

#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kxdoc {

struct MetricsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Micro-F1 over positive relation decisions; 0 when precision+recall is 0.
// A non-empty prediction against an empty gold set contributes false
// positives.
double compute_f1(const std::vector<std::set<int>>& predictions,
                  const std::vector<std::set<int>>& gold);

// Area under the precision-recall curve by descending-score step integration
// with tied scores grouped. Requires at least one positive and one negative
// instance.
double compute_auc(const std::vector<std::pair<double, bool>>& instances);

// Fraction of bags whose predicted set equals the gold set exactly.
double exact_match_accuracy(const std::vector<std::set<int>>& predictions,
                            const std::vector<std::set<int>>& gold);

}  // namespace kxdoc
