#include "kxdoc/metrics.hpp"

#include <algorithm>

namespace kxdoc {

double compute_f1(const std::vector<std::set<int>>& predictions,
                  const std::vector<std::set<int>>& gold) {
    if (predictions.size() != gold.size())
        throw MetricsError("prediction/gold length mismatch: " +
                           std::to_string(predictions.size()) + " vs " +
                           std::to_string(gold.size()));
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        for (int r : predictions[i]) {
            if (gold[i].count(r))
                ++tp;
            else
                ++fp;
        }
        for (int r : gold[i])
            if (!predictions[i].count(r)) ++fn;
    }
    if (tp == 0) return 0.0;
    double p = static_cast<double>(tp) / (tp + fp);
    double r = static_cast<double>(tp) / (tp + fn);
    return 2.0 * p * r / (p + r);
}

double compute_auc(const std::vector<std::pair<double, bool>>& instances) {
    long total_pos = 0;
    for (const auto& [s, pos] : instances) total_pos += pos ? 1 : 0;
    long total_neg = static_cast<long>(instances.size()) - total_pos;
    if (total_pos == 0 || total_neg == 0)
        throw MetricsError("AUC undefined: need at least one positive and one negative instance");

    std::vector<std::pair<double, bool>> sorted = instances;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    double auc = 0.0;
    double prev_recall = 0.0;
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        // consume one tie group atomically
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].first == sorted[i].first) {
            if (sorted[j].second)
                ++tp;
            else
                ++fp;
            ++j;
        }
        double precision = static_cast<double>(tp) / (tp + fp);
        double recall = static_cast<double>(tp) / total_pos;
        auc += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return auc;
}

double exact_match_accuracy(const std::vector<std::set<int>>& predictions,
                            const std::vector<std::set<int>>& gold) {
    if (predictions.size() != gold.size())
        throw MetricsError("prediction/gold length mismatch");
    if (predictions.empty()) return 0.0;
    long correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == gold[i]) ++correct;
    return static_cast<double>(correct) / predictions.size();
}

}  // namespace kxdoc
