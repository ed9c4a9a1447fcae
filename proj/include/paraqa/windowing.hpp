#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "paraqa/corpus.hpp"
#include "paraqa/tokenizer.hpp"

namespace paraqa {

/// la_slot value meaning "no paragraph answer in this window": slot 0 of the
/// paragraph distribution, backed by the [CLS] representation. Candidate j
/// occupies slot 1 + j.
inline constexpr int kClsSlot = 0;

struct WindowConfig {
    int seq_len = 4096;
    int doc_stride = 2048;
    double has_answer_keep_rate = 0.02;
    double no_answer_keep_rate = 0.08;
    std::uint64_t seed = 0;

    /// Throws InputError on violated invariants.
    void validate() const;
};

struct WindowLabels {
    std::optional<int> y_start;  // window-local token positions
    std::optional<int> y_end;
    int la_slot = kClsSlot;

    bool is_positive() const { return la_slot != kClsSlot; }
};

/// Window-local content token range [begin, end) of one paragraph.
struct ParagraphTokenRange {
    int paragraph_id = 0;
    int begin = 0;
    int end = 0;
};

/// One fixed-length model input: [CLS] question [SEP] document-slice [PAD]*.
struct Window {
    std::string example_id;
    int ordinal = 0;
    std::vector<int> token_ids;  // length == seq_len
    int question_len = 0;
    int doc_begin = 0;  // global token offsets of the slice in the marked sequence
    int doc_end = 0;
    std::vector<std::pair<int, int>> candidates;  // (local markup position, paragraph id)
    std::vector<ParagraphTokenRange> paragraph_ranges;
    std::vector<CharSpan> doc_char_spans;  // one per slice position; markup spans are empty
    WindowLabels labels;
    bool example_has_answer = false;

    int seq_len() const { return static_cast<int>(token_ids.size()); }
    int doc_offset() const { return question_len + 2; }  // CLS + question + SEP
    int doc_len() const { return doc_end - doc_begin; }
    int pad_begin() const { return doc_offset() + doc_len(); }

    bool is_pad(int pos) const { return pos >= pad_begin(); }
    /// Positions a span may start or end at: CLS (the null anchor) plus
    /// document content tokens. Question, SEP, markup and PAD are excluded.
    bool span_allowed(int pos) const {
        if (pos == 0) {
            return true;
        }
        const int off = doc_offset();
        return pos >= off && pos < pad_begin() &&
               doc_char_spans[static_cast<std::size_t>(pos - off)].length() > 0;
    }
    std::vector<std::uint8_t> span_mask() const;

    /// Slot index (1 + candidate position) of a paragraph id, or kClsSlot when
    /// the paragraph is not a live candidate in this window.
    int slot_of_paragraph(int paragraph_id) const;
};

/// Slices a marked document into overlapping windows at stride offsets
/// 0, S, 2S, ... until one window reaches the final document token. A markup
/// token is a candidate only when at least one content token of its paragraph
/// is in the slice. Labels are left at their defaults; use map_gold.
std::vector<Window> make_windows(const MarkedSequence& marked,
                                 const std::vector<Paragraph>& paragraphs,
                                 const std::vector<int>& question_ids, const WindowConfig& cfg,
                                 const std::string& example_id, bool example_has_answer);

/// Window-local labels for one gold annotation: the smallest token range
/// covering the gold character span, mapped into the slice. Partially visible
/// spans and spans whose paragraph is not a live candidate leave the window a
/// negative (NULL span, CLS slot).
WindowLabels map_gold(const Window& window, const GoldAnnotation& gold,
                      const MarkedSequence& marked);

/// Keeps every positive window; negative windows survive with the
/// has-answer/no-answer keep rate of their parent example. The decision for
/// each window depends only on (seed, example_id, ordinal).
std::vector<Window> subsample_negatives(const std::vector<Window>& windows,
                                        const WindowConfig& cfg);

/// Full per-example preprocessing: markup insertion (or the content-only
/// sequence when papr is disabled), windowing, gold mapping and optional
/// negative subsampling.
std::vector<Window> preprocess_example(const QAExample& example, const Vocab& vocab,
                                       const WindowConfig& cfg, bool papr_enabled,
                                       bool subsample);

void write_windows_jsonl(const std::vector<Window>& windows, const std::string& path);
std::vector<Window> read_windows_jsonl(const std::string& path);

}  // namespace paraqa
