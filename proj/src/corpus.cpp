#include "paraqa/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "paraqa/errors.hpp"

namespace paraqa {

using nlohmann::json;

std::string_view to_string(ParagraphKind kind) {
    switch (kind) {
        case ParagraphKind::paragraph: return "paragraph";
        case ParagraphKind::list: return "list";
        case ParagraphKind::table: return "table";
    }
    return "paragraph";
}

ParagraphKind paragraph_kind_from_string(std::string_view name) {
    if (name == "paragraph") return ParagraphKind::paragraph;
    if (name == "list") return ParagraphKind::list;
    if (name == "table") return ParagraphKind::table;
    throw InputError("unknown paragraph kind: " + std::string(name));
}

std::string_view to_string(Violation v) {
    switch (v) {
        case Violation::question_empty: return "QUESTION_EMPTY";
        case Violation::paragraph_bounds: return "PARAGRAPH_BOUNDS";
        case Violation::paragraph_order: return "PARAGRAPH_ORDER";
        case Violation::paragraph_overlap: return "PARAGRAPH_OVERLAP";
        case Violation::paragraph_ids: return "PARAGRAPH_IDS";
        case Violation::la_out_of_range: return "LA_OUT_OF_RANGE";
        case Violation::sa_without_la: return "SA_WITHOUT_LA";
        case Violation::sa_span_invalid: return "SA_SPAN_INVALID";
        case Violation::sa_outside_la: return "SA_OUTSIDE_LA";
    }
    return "UNKNOWN";
}

namespace {

bool is_separator_char(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
}

bool all_whitespace(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return is_separator_char(c); });
}

}  // namespace

std::vector<Paragraph> impute_paragraphs(std::string_view text) {
    std::vector<Paragraph> out;
    const int n = static_cast<int>(text.size());
    int segment_start = 0;
    int i = 0;
    auto flush = [&](int segment_end) {
        if (segment_end > segment_start &&
            !all_whitespace(text.substr(segment_start, segment_end - segment_start))) {
            Paragraph p;
            p.id = static_cast<int>(out.size());
            p.char_start = segment_start;
            p.char_end = segment_end;
            out.push_back(p);
        }
    };
    while (i < n) {
        if (!is_separator_char(text[i])) {
            ++i;
            continue;
        }
        int run_end = i;
        int newlines = 0;
        while (run_end < n && is_separator_char(text[run_end])) {
            newlines += text[run_end] == '\n' ? 1 : 0;
            ++run_end;
        }
        if (newlines >= 2) {
            flush(i);
            segment_start = run_end;
        }
        i = run_end;
    }
    flush(n);
    return out;
}

std::vector<Violation> validate_example(const QAExample& example) {
    std::vector<Violation> out;
    auto add = [&](Violation v) {
        if (std::find(out.begin(), out.end(), v) == out.end()) {
            out.push_back(v);
        }
    };

    if (example.question.empty()) {
        add(Violation::question_empty);
    }

    const int text_len = static_cast<int>(example.document_text.size());
    for (std::size_t k = 0; k < example.paragraphs.size(); ++k) {
        const Paragraph& p = example.paragraphs[k];
        if (!(0 <= p.char_start && p.char_start < p.char_end && p.char_end <= text_len)) {
            add(Violation::paragraph_bounds);
        }
        if (p.id != static_cast<int>(k)) {
            add(Violation::paragraph_ids);
        }
        if (k > 0) {
            const Paragraph& prev = example.paragraphs[k - 1];
            if (p.char_start < prev.char_start) {
                add(Violation::paragraph_order);
            }
            if (p.char_start < prev.char_end) {
                add(Violation::paragraph_overlap);
            }
        }
    }

    if (example.gold.has_value()) {
        const GoldAnnotation& gold = *example.gold;
        if (gold.la_paragraph.has_value()) {
            const int la = *gold.la_paragraph;
            if (la < 0 || la >= static_cast<int>(example.paragraphs.size())) {
                add(Violation::la_out_of_range);
            }
        }
        if (gold.sa_span.has_value()) {
            const CharSpan sa = *gold.sa_span;
            if (!(0 <= sa.start && sa.start < sa.end && sa.end <= text_len)) {
                add(Violation::sa_span_invalid);
            }
            if (!gold.la_paragraph.has_value()) {
                add(Violation::sa_without_la);
            } else {
                const int la = *gold.la_paragraph;
                if (la >= 0 && la < static_cast<int>(example.paragraphs.size())) {
                    const Paragraph& p = example.paragraphs[static_cast<std::size_t>(la)];
                    if (sa.start < p.char_start || sa.end > p.char_end) {
                        add(Violation::sa_outside_la);
                    }
                }
            }
        }
    }
    return out;
}

namespace {

QAExample parse_example(const json& j) {
    QAExample e;
    e.id = j.at("id").get<std::string>();
    e.question = j.at("question").get<std::string>();
    e.document_text = j.at("text").get<std::string>();
    if (j.contains("paragraphs")) {
        int next_id = 0;
        for (const json& pj : j.at("paragraphs")) {
            Paragraph p;
            p.id = next_id++;
            p.char_start = pj.at("start").get<int>();
            p.char_end = pj.at("end").get<int>();
            if (pj.contains("kind")) {
                p.kind = paragraph_kind_from_string(pj.at("kind").get<std::string>());
            }
            e.paragraphs.push_back(p);
        }
    } else {
        e.paragraphs = impute_paragraphs(e.document_text);
    }
    if (j.contains("gold")) {
        GoldAnnotation gold;
        const json& gj = j.at("gold");
        if (gj.contains("la") && !gj.at("la").is_null()) {
            gold.la_paragraph = gj.at("la").get<int>();
        }
        if (gj.contains("sa") && !gj.at("sa").is_null()) {
            const json& sj = gj.at("sa");
            gold.sa_span = CharSpan{sj.at(0).get<int>(), sj.at(1).get<int>()};
        }
        e.gold = gold;
    }
    return e;
}

}  // namespace

std::vector<QAExample> load_examples(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) {
        throw InputError("cannot open corpus file: " + path);
    }
    std::vector<QAExample> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || all_whitespace(line)) {
            continue;
        }
        QAExample e;
        try {
            e = parse_example(json::parse(line));
        } catch (const json::exception& ex) {
            throw InputError(path + ":" + std::to_string(line_no) + ": malformed example: " +
                             ex.what());
        }
        const std::vector<Violation> violations = validate_example(e);
        if (!violations.empty()) {
            std::ostringstream msg;
            msg << "example \"" << e.id << "\" violates:";
            for (Violation v : violations) {
                msg << ' ' << to_string(v);
            }
            throw InputError(msg.str());
        }
        out.push_back(std::move(e));
    }
    return out;
}

void save_examples(const std::vector<QAExample>& examples, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) {
        throw InputError("cannot write corpus file: " + path);
    }
    for (const QAExample& e : examples) {
        json j;
        j["id"] = e.id;
        j["question"] = e.question;
        j["text"] = e.document_text;
        json pj = json::array();
        for (const Paragraph& p : e.paragraphs) {
            pj.push_back({{"start", p.char_start}, {"end", p.char_end}, {"kind", to_string(p.kind)}});
        }
        j["paragraphs"] = pj;
        if (e.gold.has_value()) {
            json gj;
            gj["la"] = e.gold->la_paragraph.has_value() ? json(*e.gold->la_paragraph) : json(nullptr);
            gj["sa"] = e.gold->sa_span.has_value()
                           ? json::array({e.gold->sa_span->start, e.gold->sa_span->end})
                           : json(nullptr);
            j["gold"] = gj;
        }
        out << j.dump() << '\n';
    }
}

}  // namespace paraqa
