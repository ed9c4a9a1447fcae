#pragma once

#include <optional>
#include <string>
#include <vector>

#include "paraqa/checkpoint.hpp"
#include "paraqa/heads.hpp"
#include "paraqa/model.hpp"
#include "paraqa/windowing.hpp"

namespace paraqa {

enum class DecodeStrategy { paragraph_first, span_first };

std::string_view to_string(DecodeStrategy s);
DecodeStrategy strategy_from_string(std::string_view name);

/// Window-level decode result. Character offsets are global (document
/// coordinates), so aggregation never needs the window again.
struct WindowPrediction {
    std::string example_id;
    int ordinal = 0;
    std::optional<int> la_paragraph;
    std::optional<CharSpan> sa_chars;
    double paragraph_logit = 0.0;
    double span_score = 0.0;
    long candidates_evaluated = 0;

    bool is_null() const { return !la_paragraph.has_value() && !sa_chars.has_value(); }
};

/// Picks the highest-logit paragraph slot; the CLS slot yields a NULL
/// prediction with zero span candidates scored. Otherwise scores every
/// (start <= end, length <= max_span_len) pair inside the winning paragraph.
WindowPrediction decode_paragraph_first(const Window& window, const ParagraphDistribution& para,
                                        const SpanLogits& span, int max_span_len);

/// Baseline order: scores every (start <= end, length <= max_span_len) pair
/// over the whole document slice, then takes the enclosing paragraph. The
/// CLS null anchor wins only by outscoring every span.
WindowPrediction decode_span_first(const Window& window, const ParagraphDistribution& para,
                                   const SpanLogits& span, int max_span_len);

/// Document-level answer after joining window predictions.
struct Prediction {
    std::string example_id;
    std::optional<int> la_paragraph;
    std::optional<CharSpan> sa_span;
    double paragraph_logit = 0.0;
    double span_score = 0.0;
    long candidates_evaluated = 0;
};

/// Max-score join: a non-NULL window prediction always beats a NULL one;
/// among non-NULL windows the paragraph logit (paragraph-first) or span score
/// (span-first) decides. Invariant to the order windows are passed in.
Prediction aggregate(std::vector<WindowPrediction> window_predictions, DecodeStrategy strategy);

/// Runs the model over every window and aggregates per example (examples keep
/// their first-seen file order).
std::vector<Prediction> decode_windows(const std::vector<Window>& windows,
                                       const Checkpoint& checkpoint, DecodeStrategy strategy,
                                       int max_span_len, int threads);

struct BenchReport {
    long paragraph_first_candidates = 0;
    long span_first_candidates = 0;
    double ratio = 0.0;  // span_first / paragraph_first
    double paragraph_first_seconds = 0.0;
    double span_first_seconds = 0.0;
    double forward_seconds = 0.0;
    long windows = 0;
};

/// Decodes every window in both modes (one shared encoder pass) and compares
/// the number of span candidates each strategy scores.
BenchReport bench_decode(const std::vector<Window>& windows, const Checkpoint& checkpoint,
                         int max_span_len, int threads);

void write_predictions_jsonl(const std::vector<Prediction>& predictions, const std::string& path);
std::vector<Prediction> read_predictions_jsonl(const std::string& path);

}  // namespace paraqa
