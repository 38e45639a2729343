#include "bugloc/textprep.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

namespace bugloc::textprep {

namespace {

const char* const kDefaultStopWords[] = {
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and",
    "any", "are", "as", "at", "be", "because", "been", "before", "being", "below",
    "between", "both", "but", "by", "can", "cannot", "could", "did", "do", "does",
    "doing", "down", "during", "each", "few", "for", "from", "further", "had",
    "has", "have", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself",
    "just", "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of",
    "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out",
    "over", "own", "same", "she", "should", "so", "some", "such", "than", "that",
    "the", "their", "theirs", "them", "themselves", "then", "there", "these",
    "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "very", "was", "we", "were", "what", "when", "where", "which", "while", "who",
    "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves",
};

// 50 reserved words plus the literals true/false/null.
const char* const kDefaultJavaKeywords[] = {
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char",
    "class", "const", "continue", "default", "do", "double", "else", "enum",
    "extends", "final", "finally", "float", "for", "goto", "if", "implements",
    "import", "instanceof", "int", "interface", "long", "native", "new",
    "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "try", "void", "volatile", "while", "true", "false", "null",
};

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ascii_alnum(char c) { return is_ascii_alpha(c) || is_ascii_digit(c); }
bool is_ident_char(char c) { return is_ascii_alnum(c) || c == '_' || c == '$'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
char to_lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

// ---- Porter stemmer -------------------------------------------------------

bool stem_is_consonant(std::string_view w, std::size_t i) {
    char c = w[i];
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return false;
    if (c == 'y') return i == 0 ? true : !stem_is_consonant(w, i - 1);
    return true;
}

// m in [C](VC)^m[V]
int stem_measure(std::string_view w) {
    std::size_t i = 0, n = w.size();
    int m = 0;
    while (i < n && stem_is_consonant(w, i)) ++i;
    while (i < n) {
        while (i < n && !stem_is_consonant(w, i)) ++i;
        if (i >= n) break;
        ++m;
        while (i < n && stem_is_consonant(w, i)) ++i;
    }
    return m;
}

bool stem_has_vowel(std::string_view w) {
    for (std::size_t i = 0; i < w.size(); ++i)
        if (!stem_is_consonant(w, i)) return true;
    return false;
}

bool ends_double_consonant(std::string_view w) {
    std::size_t n = w.size();
    return n >= 2 && w[n - 1] == w[n - 2] && stem_is_consonant(w, n - 1);
}

// *o: ends cvc where the final consonant is not w, x or y
bool ends_cvc(std::string_view w) {
    std::size_t n = w.size();
    if (n < 3) return false;
    if (!stem_is_consonant(w, n - 3) || stem_is_consonant(w, n - 2) || !stem_is_consonant(w, n - 1))
        return false;
    char c = w[n - 1];
    return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

struct SuffixRule {
    std::string_view from;
    std::string_view to;
};

// Applies the longest matching rule whose stem satisfies cond; at most one
// rule fires per step.
template <typename Cond>
void apply_rule_step(std::string& w, const SuffixRule* rules, std::size_t count, Cond cond) {
    const SuffixRule* best = nullptr;
    for (std::size_t i = 0; i < count; ++i) {
        if (ends_with(w, rules[i].from) && (!best || rules[i].from.size() > best->from.size()))
            best = &rules[i];
    }
    if (!best) return;
    std::string_view stem(w.data(), w.size() - best->from.size());
    if (cond(stem, best->from)) {
        w.resize(stem.size());
        w.append(best->to);
    }
}

void porter_step1a(std::string& w) {
    if (ends_with(w, "sses")) {
        w.resize(w.size() - 2);
    } else if (ends_with(w, "ies")) {
        w.resize(w.size() - 2);
    } else if (ends_with(w, "ss")) {
        // keep
    } else if (ends_with(w, "s")) {
        w.resize(w.size() - 1);
    }
}

void porter_step1b(std::string& w) {
    if (ends_with(w, "eed")) {
        if (stem_measure(std::string_view(w).substr(0, w.size() - 3)) > 0) w.resize(w.size() - 1);
        return;
    }
    bool fired = false;
    if (ends_with(w, "ed") && stem_has_vowel(std::string_view(w).substr(0, w.size() - 2))) {
        w.resize(w.size() - 2);
        fired = true;
    } else if (ends_with(w, "ing") && stem_has_vowel(std::string_view(w).substr(0, w.size() - 3))) {
        w.resize(w.size() - 3);
        fired = true;
    }
    if (!fired) return;
    if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
        w.push_back('e');
    } else if (ends_double_consonant(w) && w.back() != 'l' && w.back() != 's' && w.back() != 'z') {
        w.resize(w.size() - 1);
    } else if (stem_measure(w) == 1 && ends_cvc(w)) {
        w.push_back('e');
    }
}

void porter_step1c(std::string& w) {
    if (ends_with(w, "y") && stem_has_vowel(std::string_view(w).substr(0, w.size() - 1)))
        w.back() = 'i';
}

const SuffixRule kStep2Rules[] = {
    {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
    {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},   {"entli", "ent"},
    {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
    {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
    {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
};

const SuffixRule kStep3Rules[] = {
    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
    {"ical", "ic"},  {"ful", ""},   {"ness", ""},
};

const SuffixRule kStep4Rules[] = {
    {"al", ""},    {"ance", ""}, {"ence", ""}, {"er", ""},  {"ic", ""},
    {"able", ""},  {"ible", ""}, {"ant", ""},  {"ement", ""}, {"ment", ""},
    {"ent", ""},   {"ion", ""},  {"ou", ""},   {"ism", ""}, {"ate", ""},
    {"iti", ""},   {"ous", ""},  {"ive", ""},  {"ize", ""},
};

void porter_step5a(std::string& w) {
    if (!ends_with(w, "e")) return;
    std::string_view stem(w.data(), w.size() - 1);
    int m = stem_measure(stem);
    if (m > 1 || (m == 1 && !ends_cvc(stem))) w.resize(w.size() - 1);
}

void porter_step5b(std::string& w) {
    if (stem_measure(w) > 1 && ends_double_consonant(w) && w.back() == 'l') w.resize(w.size() - 1);
}

}  // namespace

std::string porter_stem(std::string_view word) {
    std::string w(word);
    if (w.size() <= 1) return w;
    porter_step1a(w);
    porter_step1b(w);
    porter_step1c(w);
    apply_rule_step(w, kStep2Rules, std::size(kStep2Rules),
                    [](std::string_view stem, std::string_view) { return stem_measure(stem) > 0; });
    apply_rule_step(w, kStep3Rules, std::size(kStep3Rules),
                    [](std::string_view stem, std::string_view) { return stem_measure(stem) > 0; });
    apply_rule_step(w, kStep4Rules, std::size(kStep4Rules),
                    [](std::string_view stem, std::string_view suffix) {
                        if (stem_measure(stem) <= 1) return false;
                        if (suffix == "ion") return ends_with(stem, "s") || ends_with(stem, "t");
                        return true;
                    });
    porter_step5a(w);
    porter_step5b(w);
    return w;
}

// ---- Term lists ------------------------------------------------------------

TermFilter::TermFilter(std::vector<std::string> stop_words, std::vector<std::string> java_keywords)
    : stop_list_(std::move(stop_words)), keyword_list_(std::move(java_keywords)) {
    stop_.insert(stop_list_.begin(), stop_list_.end());
    keywords_.insert(keyword_list_.begin(), keyword_list_.end());
}

const TermFilter& TermFilter::defaults() {
    static const TermFilter instance(
        std::vector<std::string>(std::begin(kDefaultStopWords), std::end(kDefaultStopWords)),
        std::vector<std::string>(std::begin(kDefaultJavaKeywords), std::end(kDefaultJavaKeywords)));
    return instance;
}

std::vector<std::string> load_term_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open term list: " + path);
    std::vector<std::string> terms;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t\r");
        terms.push_back(line.substr(b, e - b + 1));
    }
    return terms;
}

// ---- Tokenizer -------------------------------------------------------------

namespace {

// Sub-splits one identifier unit on '_'/'$', camel humps and digit/letter
// transitions. "HTTPServer2" -> http, server, 2.
std::vector<std::string> split_unit(std::string_view unit) {
    std::vector<std::string> parts;
    std::string cur;
    for (std::size_t i = 0; i < unit.size(); ++i) {
        char c = unit[i];
        if (!is_ascii_alnum(c)) {  // '_' or '$'
            if (!cur.empty()) parts.push_back(std::move(cur));
            cur.clear();
            continue;
        }
        if (!cur.empty()) {
            char prev = unit[i - 1];
            bool boundary = false;
            if (is_ascii_digit(c) != is_ascii_digit(prev) && is_ascii_alnum(prev)) {
                boundary = true;
            } else if (is_upper(c) && is_lower(prev)) {
                boundary = true;  // camelCase hump
            } else if (is_upper(prev) && is_upper(c) && i + 1 < unit.size() && is_lower(unit[i + 1])) {
                boundary = true;  // acronym boundary: "HTTPServer" -> HTTP | Server
            }
            if (boundary) {
                parts.push_back(std::move(cur));
                cur.clear();
            }
        }
        cur.push_back(to_lower(c));
    }
    if (!cur.empty()) parts.push_back(std::move(cur));
    return parts;
}

bool all_letters(std::string_view s) {
    for (char c : s)
        if (!is_ascii_alpha(c)) return false;
    return !s.empty();
}

}  // namespace

TokenStream tokenize(std::string_view text, SourceKind kind, const TermFilter& filter) {
    TokenStream out;
    out.source_kind = kind;
    const bool drop_keywords = kind == SourceKind::kSourceCode;

    auto emit = [&](const std::string& raw) {
        if (raw.empty()) return;
        if (filter.is_stop_word(raw)) return;
        if (drop_keywords && filter.is_java_keyword(raw)) return;
        std::string stemmed = all_letters(raw) ? porter_stem(raw) : raw;
        // re-check: stemming can land on a listed term ("imported" -> "import")
        if (filter.is_stop_word(stemmed)) return;
        if (drop_keywords && filter.is_java_keyword(stemmed)) return;
        out.tokens.push_back(std::move(stemmed));
    };

    std::size_t i = 0, n = text.size();
    while (i < n) {
        while (i < n && !is_ident_char(text[i])) ++i;
        std::size_t start = i;
        while (i < n && is_ident_char(text[i])) ++i;
        if (i == start) continue;
        std::string_view unit = text.substr(start, i - start);

        auto parts = split_unit(unit);
        if (parts.size() > 1) {
            // unsplit compound, lowercased and stripped to alphanumerics; only
            // all-letter compounds stay stable under re-tokenization
            std::string compound;
            compound.reserve(unit.size());
            for (char c : unit)
                if (is_ascii_alnum(c)) compound.push_back(to_lower(c));
            if (all_letters(compound)) emit(compound);
        }
        for (const auto& p : parts) emit(p);
    }
    return out;
}

std::unordered_map<std::string, double> term_frequencies(const TokenStream& stream) {
    std::unordered_map<std::string, double> tf;
    for (const auto& t : stream.tokens) tf[t] += 1.0;
    return tf;
}

}  // namespace bugloc::textprep
