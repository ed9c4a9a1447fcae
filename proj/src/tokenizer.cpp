#include "paraqa/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "paraqa/errors.hpp"

namespace paraqa {

namespace {

bool is_word_char(unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c >= 0x80;
}

bool is_space_char(unsigned char c) {
    return std::isspace(c) != 0;
}

std::string lowercased(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

constexpr std::string_view kFamilyNames[3] = {"paragraph", "list", "table"};

}  // namespace

Vocab::Vocab(int p_max, std::vector<std::string> corpus_tokens) : p_max_(p_max) {
    tokens_ = {"[PAD]", "[CLS]", "[SEP]", "[UNK]"};
    for (std::string_view family : kFamilyNames) {
        for (int i = 0; i < p_max_; ++i) {
            tokens_.push_back("[" + std::string(family) + "=" + std::to_string(i) + "]");
        }
    }
    for (std::string& t : corpus_tokens) {
        tokens_.push_back(std::move(t));
    }
    ids_.reserve(tokens_.size());
    for (int id = 0; id < static_cast<int>(tokens_.size()); ++id) {
        if (!ids_.emplace(tokens_[static_cast<std::size_t>(id)], id).second) {
            throw InputError("duplicate vocabulary token: " + tokens_[static_cast<std::size_t>(id)]);
        }
    }
}

const std::string& Vocab::token(int id) const {
    if (id < 0 || id >= size()) {
        throw InputError("token id out of range: " + std::to_string(id));
    }
    return tokens_[static_cast<std::size_t>(id)];
}

int Vocab::lookup(std::string_view token) const {
    const auto it = ids_.find(std::string(token));
    return it == ids_.end() ? kUnk : it->second;
}

int Vocab::markup_id(ParagraphKind kind, int index) const {
    if (index < 0 || index >= p_max_) {
        throw CapacityError("markup index " + std::to_string(index) + " exceeds p_max " +
                            std::to_string(p_max_));
    }
    return kReserved + static_cast<int>(kind) * p_max_ + index;
}

std::vector<CharSpan> token_spans(std::string_view text) {
    std::vector<CharSpan> out;
    const int n = static_cast<int>(text.size());
    int i = 0;
    while (i < n) {
        const auto c = static_cast<unsigned char>(text[static_cast<std::size_t>(i)]);
        if (is_space_char(c)) {
            ++i;
        } else if (is_word_char(c)) {
            int j = i + 1;
            while (j < n && is_word_char(static_cast<unsigned char>(text[static_cast<std::size_t>(j)]))) {
                ++j;
            }
            out.push_back({i, j});
            i = j;
        } else {
            out.push_back({i, i + 1});
            ++i;
        }
    }
    return out;
}

Vocab build_vocab(const std::vector<QAExample>& corpus, int cap, int p_max) {
    if (p_max < 1) {
        throw InputError("p_max must be >= 1");
    }
    const int reserved = Vocab::kReserved + 3 * p_max;
    if (cap <= reserved) {
        throw InputError("vocab cap " + std::to_string(cap) +
                         " leaves no room for corpus tokens (reserved+markup = " +
                         std::to_string(reserved) + ")");
    }
    // std::map keeps counting deterministic and gives the lexicographic tie
    // order for free.
    std::map<std::string, long> counts;
    for (const QAExample& e : corpus) {
        for (const std::string* text : {&e.question, &e.document_text}) {
            const std::string lower = lowercased(*text);
            for (const CharSpan s : token_spans(lower)) {
                counts[lower.substr(static_cast<std::size_t>(s.start),
                                    static_cast<std::size_t>(s.length()))] += 1;
            }
        }
    }
    std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    const std::size_t keep = std::min(ranked.size(), static_cast<std::size_t>(cap - reserved));
    std::vector<std::string> kept;
    kept.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        kept.push_back(ranked[i].first);
    }
    return Vocab(p_max, std::move(kept));
}

Encoded encode(std::string_view text, const Vocab& vocab) {
    Encoded out;
    const std::string lower = lowercased(text);
    for (const CharSpan s : token_spans(lower)) {
        out.token_ids.push_back(vocab.lookup(std::string_view(lower).substr(
            static_cast<std::size_t>(s.start), static_cast<std::size_t>(s.length()))));
        out.char_spans.push_back(s);
    }
    return out;
}

namespace {

MarkedSequence build_sequence(const QAExample& example, const Vocab& vocab, bool with_markup) {
    if (example.paragraphs.empty()) {
        throw InputError("example \"" + example.id + "\" has no paragraphs");
    }
    if (static_cast<int>(example.paragraphs.size()) > vocab.p_max()) {
        throw CapacityError("example \"" + example.id + "\" has " +
                            std::to_string(example.paragraphs.size()) +
                            " paragraphs but p_max is " + std::to_string(vocab.p_max()));
    }
    MarkedSequence out;
    for (const Paragraph& p : example.paragraphs) {
        if (with_markup) {
            out.paragraph_index.emplace_back(out.size(), p.id);
            out.token_ids.push_back(vocab.markup_id(p.kind, p.id));
            out.char_spans.push_back({p.char_start, p.char_start});
        }
        const std::string_view content = std::string_view(example.document_text)
                                             .substr(static_cast<std::size_t>(p.char_start),
                                                     static_cast<std::size_t>(p.char_end - p.char_start));
        const Encoded enc = encode(content, vocab);
        for (std::size_t k = 0; k < enc.token_ids.size(); ++k) {
            out.token_ids.push_back(enc.token_ids[k]);
            out.char_spans.push_back(
                {enc.char_spans[k].start + p.char_start, enc.char_spans[k].end + p.char_start});
        }
    }
    return out;
}

}  // namespace

MarkedSequence insert_markup(const QAExample& example, const Vocab& vocab) {
    return build_sequence(example, vocab, /*with_markup=*/true);
}

MarkedSequence sequence_without_markup(const QAExample& example, const Vocab& vocab) {
    return build_sequence(example, vocab, /*with_markup=*/false);
}

std::string decode_tokens(const std::vector<int>& token_ids, const Vocab& vocab) {
    std::string out;
    for (std::size_t i = 0; i < token_ids.size(); ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += vocab.token(token_ids[i]);
    }
    return out;
}

void save_vocab(const Vocab& vocab, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) {
        throw InputError("cannot write vocab file: " + path);
    }
    for (int id = 0; id < vocab.size(); ++id) {
        out << vocab.token(id) << '\n';
    }
}

Vocab load_vocab(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) {
        throw InputError("cannot open vocab file: " + path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    int p_max = 0;
    while (Vocab::kReserved + p_max < static_cast<int>(lines.size()) &&
           lines[static_cast<std::size_t>(Vocab::kReserved + p_max)].rfind("[paragraph=", 0) == 0) {
        ++p_max;
    }
    if (p_max == 0) {
        throw InputError("vocab file has no markup tokens: " + path);
    }
    const int reserved = Vocab::kReserved + 3 * p_max;
    if (static_cast<int>(lines.size()) < reserved) {
        throw InputError("vocab file truncated: " + path);
    }
    std::vector<std::string> corpus_tokens(lines.begin() + reserved, lines.end());
    Vocab vocab(p_max, std::move(corpus_tokens));
    for (int id = 0; id < reserved; ++id) {
        if (vocab.token(id) != lines[static_cast<std::size_t>(id)]) {
            throw InputError("vocab file has unexpected reserved layout at id " +
                             std::to_string(id) + ": " + path);
        }
    }
    return vocab;
}

}  // namespace paraqa
