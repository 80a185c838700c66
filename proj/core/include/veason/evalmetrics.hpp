#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "veason/env.hpp"
#include "veason/geometry.hpp"

namespace veason {

// Mean per-frame mask IoU over the sequence; both-empty frames score 1.
double region_similarity(const MaskSequence& pred, const MaskSequence& gt);

// Mean per-frame boundary F-measure at the given pixel tolerance.
double contour_accuracy(const MaskSequence& pred, const MaskSequence& gt, int tol);

// Rejection score over negative-sample predictions: 1 per sample when every
// frame is empty, otherwise 1 minus the predicted foreground fraction;
// returned as a percentage, absent when there are no negative samples.
std::optional<double> robustness(const std::vector<MaskSequence>& negative_predictions);

struct SampleMetrics {
    std::string sample_id;
    std::string subset;
    double j = 0;   // percentages
    double f = 0;
    double jf = 0;
};

struct SubsetAggregate {
    double j = 0;
    double f = 0;
    double jf = 0;
    int count = 0;
};

struct EvalReport {
    std::vector<SampleMetrics> per_sample;
    std::map<std::string, SubsetAggregate> subsets;  // referring / reasoning / overall
    std::optional<double> robustness_r;
    int negative_count = 0;
    std::string note;
};

using Predictions = std::map<std::string, MaskSequence>;

// Per-sample J/F/J&F plus subset means over positive samples and the
// robustness score over negatives. Samples without a prediction score zero;
// predictions for unknown ids are an error.
EvalReport evaluate(const Dataset& ds, const Predictions& predictions);

// JSONL: {"sample_id": ..., "masks": [rle per sampled frame]}
void write_predictions(const std::vector<std::pair<std::string, MaskSequence>>& predictions,
                       const std::filesystem::path& path);
Predictions load_predictions(const std::filesystem::path& path);

std::string render_report(const EvalReport& report);
void write_report_json(const EvalReport& report, const std::filesystem::path& path);

}  // namespace veason
