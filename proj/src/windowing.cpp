#include "paraqa/windowing.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "paraqa/errors.hpp"
#include "paraqa/rng.hpp"

namespace paraqa {

using nlohmann::json;

void WindowConfig::validate() const {
    if (seq_len < 3) {
        throw InputError("seq_len must be >= 3");
    }
    if (doc_stride < 1 || doc_stride > seq_len) {
        throw InputError("doc_stride must satisfy 0 < stride <= seq_len");
    }
    for (const double rate : {has_answer_keep_rate, no_answer_keep_rate}) {
        if (!(rate >= 0.0 && rate <= 1.0)) {
            throw InputError("keep rates must be in [0, 1]");
        }
    }
}

std::vector<std::uint8_t> Window::span_mask() const {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(seq_len()), 0);
    for (int pos = 0; pos < seq_len(); ++pos) {
        mask[static_cast<std::size_t>(pos)] = span_allowed(pos) ? 1 : 0;
    }
    return mask;
}

int Window::slot_of_paragraph(int paragraph_id) const {
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        if (candidates[j].second == paragraph_id) {
            return 1 + static_cast<int>(j);
        }
    }
    return kClsSlot;
}

namespace {

struct GlobalRange {
    int paragraph_id = 0;
    int begin = 0;  // global content-token range [begin, end)
    int end = 0;
};

// Content-token extent of each paragraph in the marked sequence. Tokens never
// straddle paragraph boundaries, so a char-span containment test suffices.
std::vector<GlobalRange> content_ranges(const MarkedSequence& marked,
                                        const std::vector<Paragraph>& paragraphs) {
    std::vector<GlobalRange> out;
    for (const Paragraph& p : paragraphs) {
        GlobalRange r{p.id, -1, -1};
        for (int t = 0; t < marked.size(); ++t) {
            const CharSpan s = marked.char_spans[static_cast<std::size_t>(t)];
            if (s.length() > 0 && s.start >= p.char_start && s.end <= p.char_end) {
                if (r.begin < 0) {
                    r.begin = t;
                }
                r.end = t + 1;
            }
        }
        if (r.begin >= 0) {
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace

std::vector<Window> make_windows(const MarkedSequence& marked,
                                 const std::vector<Paragraph>& paragraphs,
                                 const std::vector<int>& question_ids, const WindowConfig& cfg,
                                 const std::string& example_id, bool example_has_answer) {
    cfg.validate();
    const int question_len = static_cast<int>(question_ids.size());
    const int capacity = cfg.seq_len - question_len - 2;
    if (capacity < 1) {
        throw InputError("question too long for seq_len " + std::to_string(cfg.seq_len) +
                         " (example \"" + example_id + "\")");
    }
    if (cfg.doc_stride > capacity) {
        throw InputError("doc_stride " + std::to_string(cfg.doc_stride) +
                         " exceeds per-window document capacity " + std::to_string(capacity) +
                         " (example \"" + example_id + "\")");
    }
    const int total = marked.size();
    if (total == 0) {
        throw InputError("empty marked sequence (example \"" + example_id + "\")");
    }

    const std::vector<GlobalRange> ranges = content_ranges(marked, paragraphs);

    std::vector<Window> out;
    int offset = 0;
    while (true) {
        const int begin = offset;
        const int end = std::min(begin + capacity, total);

        Window w;
        w.example_id = example_id;
        w.ordinal = static_cast<int>(out.size());
        w.question_len = question_len;
        w.doc_begin = begin;
        w.doc_end = end;
        w.example_has_answer = example_has_answer;

        w.token_ids.reserve(static_cast<std::size_t>(cfg.seq_len));
        w.token_ids.push_back(Vocab::kCls);
        w.token_ids.insert(w.token_ids.end(), question_ids.begin(), question_ids.end());
        w.token_ids.push_back(Vocab::kSep);
        for (int t = begin; t < end; ++t) {
            w.token_ids.push_back(marked.token_ids[static_cast<std::size_t>(t)]);
            w.doc_char_spans.push_back(marked.char_spans[static_cast<std::size_t>(t)]);
        }
        w.token_ids.resize(static_cast<std::size_t>(cfg.seq_len), Vocab::kPad);

        const int doc_offset = w.doc_offset();
        for (const GlobalRange& r : ranges) {
            const int lo = std::max(r.begin, begin);
            const int hi = std::min(r.end, end);
            if (lo < hi) {
                w.paragraph_ranges.push_back(
                    {r.paragraph_id, doc_offset + (lo - begin), doc_offset + (hi - begin)});
            }
        }
        for (const auto& [pos, pid] : marked.paragraph_index) {
            if (pos < begin || pos >= end) {
                continue;
            }
            const bool has_content = std::any_of(
                w.paragraph_ranges.begin(), w.paragraph_ranges.end(),
                [pid](const ParagraphTokenRange& r) { return r.paragraph_id == pid; });
            if (has_content) {
                w.candidates.emplace_back(doc_offset + (pos - begin), pid);
            }
        }

        out.push_back(std::move(w));
        if (begin + capacity >= total) {
            break;
        }
        offset += cfg.doc_stride;
    }
    return out;
}

WindowLabels map_gold(const Window& window, const GoldAnnotation& gold,
                      const MarkedSequence& marked) {
    WindowLabels labels;
    if (!gold.la_paragraph.has_value()) {
        return labels;
    }
    const int slot = window.slot_of_paragraph(*gold.la_paragraph);
    if (slot == kClsSlot) {
        return labels;
    }
    if (!gold.sa_span.has_value()) {
        labels.la_slot = slot;  // long-answer-only supervision
        return labels;
    }

    // Smallest global token range covering the gold characters.
    const CharSpan sa = *gold.sa_span;
    int first = -1;
    int last = -1;
    for (int t = 0; t < marked.size(); ++t) {
        const CharSpan s = marked.char_spans[static_cast<std::size_t>(t)];
        if (std::min(s.end, sa.end) - std::max(s.start, sa.start) > 0) {
            if (first < 0) {
                first = t;
            }
            last = t;
        }
    }
    if (first < 0) {
        labels.la_slot = slot;  // span covers no tokens; keep paragraph supervision
        return labels;
    }
    if (first < window.doc_begin || last >= window.doc_end) {
        return labels;  // partially visible spans make the window a negative
    }
    labels.la_slot = slot;
    labels.y_start = window.doc_offset() + (first - window.doc_begin);
    labels.y_end = window.doc_offset() + (last - window.doc_begin);
    return labels;
}

std::vector<Window> subsample_negatives(const std::vector<Window>& windows,
                                        const WindowConfig& cfg) {
    std::vector<Window> out;
    for (const Window& w : windows) {
        if (w.labels.is_positive()) {
            out.push_back(w);
            continue;
        }
        const double rate = w.example_has_answer ? cfg.has_answer_keep_rate
                                                 : cfg.no_answer_keep_rate;
        SplitMix64 rng(hash_mix(hash_mix(cfg.seed, fnv1a(w.example_id)),
                                static_cast<std::uint64_t>(w.ordinal)));
        if (rng.uniform01() < rate) {
            out.push_back(w);
        }
    }
    return out;
}

std::vector<Window> preprocess_example(const QAExample& example, const Vocab& vocab,
                                       const WindowConfig& cfg, bool papr_enabled,
                                       bool subsample) {
    const MarkedSequence marked = papr_enabled ? insert_markup(example, vocab)
                                               : sequence_without_markup(example, vocab);
    const Encoded question = encode(example.question, vocab);
    const bool has_answer = example.gold.has_value() && example.gold->has_answer();
    std::vector<Window> windows =
        make_windows(marked, example.paragraphs, question.token_ids, cfg, example.id, has_answer);
    if (example.gold.has_value()) {
        for (Window& w : windows) {
            w.labels = map_gold(w, *example.gold, marked);
        }
    }
    if (subsample) {
        windows = subsample_negatives(windows, cfg);
    }
    return windows;
}

namespace {

constexpr int kWindowSchemaVersion = 1;

json window_to_json(const Window& w) {
    json j;
    j["version"] = kWindowSchemaVersion;
    j["id"] = w.example_id;
    j["ordinal"] = w.ordinal;
    j["token_ids"] = w.token_ids;
    j["question_len"] = w.question_len;
    j["doc_span"] = {w.doc_begin, w.doc_end};
    json cands = json::array();
    for (const auto& [pos, pid] : w.candidates) {
        cands.push_back({pos, pid});
    }
    j["candidates"] = cands;
    json ranges = json::array();
    for (const ParagraphTokenRange& r : w.paragraph_ranges) {
        ranges.push_back({r.paragraph_id, r.begin, r.end});
    }
    j["paragraph_ranges"] = ranges;
    json spans = json::array();
    for (const CharSpan& s : w.doc_char_spans) {
        spans.push_back({s.start, s.end});
    }
    j["char_spans"] = spans;
    json labels;
    labels["y_start"] = w.labels.y_start.has_value() ? json(*w.labels.y_start) : json(nullptr);
    labels["y_end"] = w.labels.y_end.has_value() ? json(*w.labels.y_end) : json(nullptr);
    labels["la_slot"] = w.labels.la_slot;
    j["labels"] = labels;
    j["has_answer"] = w.example_has_answer;
    return j;
}

Window window_from_json(const json& j) {
    if (j.at("version").get<int>() != kWindowSchemaVersion) {
        throw StateError("unsupported window schema version");
    }
    Window w;
    w.example_id = j.at("id").get<std::string>();
    w.ordinal = j.at("ordinal").get<int>();
    w.token_ids = j.at("token_ids").get<std::vector<int>>();
    w.question_len = j.at("question_len").get<int>();
    w.doc_begin = j.at("doc_span").at(0).get<int>();
    w.doc_end = j.at("doc_span").at(1).get<int>();
    for (const json& c : j.at("candidates")) {
        w.candidates.emplace_back(c.at(0).get<int>(), c.at(1).get<int>());
    }
    for (const json& r : j.at("paragraph_ranges")) {
        w.paragraph_ranges.push_back({r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>()});
    }
    for (const json& s : j.at("char_spans")) {
        w.doc_char_spans.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
    }
    const json& labels = j.at("labels");
    if (!labels.at("y_start").is_null()) {
        w.labels.y_start = labels.at("y_start").get<int>();
    }
    if (!labels.at("y_end").is_null()) {
        w.labels.y_end = labels.at("y_end").get<int>();
    }
    w.labels.la_slot = labels.at("la_slot").get<int>();
    w.example_has_answer = j.at("has_answer").get<bool>();
    return w;
}

}  // namespace

void write_windows_jsonl(const std::vector<Window>& windows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) {
        throw InputError("cannot write windows file: " + path);
    }
    for (const Window& w : windows) {
        out << window_to_json(w).dump() << '\n';
    }
}

std::vector<Window> read_windows_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) {
        throw InputError("cannot open windows file: " + path);
    }
    std::vector<Window> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            out.push_back(window_from_json(json::parse(line)));
        } catch (const json::exception& ex) {
            throw InputError(path + ":" + std::to_string(line_no) + ": malformed window: " +
                             ex.what());
        }
    }
    return out;
}

}  // namespace paraqa
