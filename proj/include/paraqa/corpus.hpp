#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace paraqa {

enum class ParagraphKind { paragraph, list, table };

std::string_view to_string(ParagraphKind kind);
ParagraphKind paragraph_kind_from_string(std::string_view name);

/// Half-open character interval [start, end) into a document text.
struct CharSpan {
    int start = 0;
    int end = 0;

    int length() const { return end - start; }
    bool operator==(const CharSpan&) const = default;
};

struct Paragraph {
    int id = 0;
    int char_start = 0;
    int char_end = 0;  // exclusive
    ParagraphKind kind = ParagraphKind::paragraph;
};

/// Gold labels for one example. Both fields absent means the document has no
/// answer. A present short answer always lives inside the long-answer
/// paragraph; a long answer may exist without any short answer.
struct GoldAnnotation {
    std::optional<int> la_paragraph;
    std::optional<CharSpan> sa_span;

    bool has_answer() const { return la_paragraph.has_value() || sa_span.has_value(); }
};

struct QAExample {
    std::string id;
    std::string question;
    std::string document_text;
    std::vector<Paragraph> paragraphs;
    std::optional<GoldAnnotation> gold;
};

enum class Violation {
    question_empty,
    paragraph_bounds,
    paragraph_order,
    paragraph_overlap,
    paragraph_ids,
    la_out_of_range,
    sa_without_la,
    sa_span_invalid,
    sa_outside_la,
};

std::string_view to_string(Violation v);

/// Splits plaintext into paragraphs at blank-line runs: maximal whitespace
/// runs containing at least two newline characters (spaces/tabs may be
/// interleaved). Separator characters belong to no paragraph; whitespace-only
/// segments are dropped. Returns consecutive ids from 0.
std::vector<Paragraph> impute_paragraphs(std::string_view text);

/// Checks every type invariant; returns the violated codes (empty == ok).
std::vector<Violation> validate_example(const QAExample& example);

/// Loads line-delimited JSON examples. Examples without an explicit
/// "paragraphs" array get imputed paragraph structure. Throws InputError with
/// the line number for malformed lines and with the example id for invariant
/// violations.
std::vector<QAExample> load_examples(const std::string& path);

/// Writes examples in the same line-delimited JSON schema load_examples reads.
void save_examples(const std::vector<QAExample>& examples, const std::string& path);

}  // namespace paraqa
