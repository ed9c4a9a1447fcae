#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "paraqa/corpus.hpp"

namespace paraqa {

/// Fixed vocabulary. Ids 0..3 are PAD/CLS/SEP/UNK, followed by the atomic
/// markup families [paragraph=i], [list=i], [table=i] for i < p_max, then
/// corpus tokens by descending frequency. The layout is identical for every
/// corpus so checkpoints stay compatible across data files.
class Vocab {
  public:
    static constexpr int kPad = 0;
    static constexpr int kCls = 1;
    static constexpr int kSep = 2;
    static constexpr int kUnk = 3;
    static constexpr int kReserved = 4;

    Vocab() = default;
    Vocab(int p_max, std::vector<std::string> corpus_tokens);

    int size() const { return static_cast<int>(tokens_.size()); }
    int p_max() const { return p_max_; }
    int markup_count() const { return 3 * p_max_; }

    const std::string& token(int id) const;
    /// Token id, or UNK for out-of-vocabulary tokens.
    int lookup(std::string_view token) const;

    int markup_id(ParagraphKind kind, int index) const;
    bool is_markup(int id) const { return id >= kReserved && id < kReserved + markup_count(); }
    bool is_special(int id) const { return id < kReserved + markup_count(); }

  private:
    int p_max_ = 0;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
};

/// Lowercase whitespace/punctuation token boundaries: maximal alphanumeric
/// runs and single punctuation characters, with their source spans. Pure
/// boundary computation, independent of any vocabulary.
std::vector<CharSpan> token_spans(std::string_view text);

/// Most-frequent-first vocabulary over the questions and document texts,
/// capped at cap total entries (ties broken lexicographically).
Vocab build_vocab(const std::vector<QAExample>& corpus, int cap, int p_max);

struct Encoded {
    std::vector<int> token_ids;
    std::vector<CharSpan> char_spans;
};

Encoded encode(std::string_view text, const Vocab& vocab);

/// Document token sequence with one atomic markup token ahead of each
/// paragraph's content and a registry of where those markup tokens sit.
struct MarkedSequence {
    std::vector<int> token_ids;
    std::vector<CharSpan> char_spans;                   // markup tokens carry empty spans
    std::vector<std::pair<int, int>> paragraph_index;   // (token position, paragraph id)

    int size() const { return static_cast<int>(token_ids.size()); }
};

/// Interleaves [paragraph=i]/[list=i]/[table=i] tokens with encoded paragraph
/// content. Throws CapacityError when the document has more paragraphs than
/// the vocabulary's markup family supports.
MarkedSequence insert_markup(const QAExample& example, const Vocab& vocab);

/// Content-only variant used when paragraph markup is disabled: same token
/// stream minus the markup tokens (paragraph_index stays empty).
MarkedSequence sequence_without_markup(const QAExample& example, const Vocab& vocab);

/// Inverse of encode up to whitespace normalization; special and markup ids
/// render as their bracketed names. Throws InputError on unknown ids.
std::string decode_tokens(const std::vector<int>& token_ids, const Vocab& vocab);

/// One token per line, line number == id.
void save_vocab(const Vocab& vocab, const std::string& path);
Vocab load_vocab(const std::string& path);

}  // namespace paraqa
