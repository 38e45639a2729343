#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace bugloc::textprep {

enum class SourceKind { kReportText, kSourceCode };

/// Lowercase stemmed terms; no stop words, and no Java keywords for
/// kSourceCode input.
struct TokenStream {
    std::vector<std::string> tokens;
    SourceKind source_kind = SourceKind::kReportText;
};

/// Term lists used by the tokenizer. Defaults are the pinned English
/// stop-word list and the 50 Java reserved words plus true/false/null;
/// either can be replaced from a one-term-per-line file.
class TermFilter {
public:
    static const TermFilter& defaults();

    TermFilter(std::vector<std::string> stop_words, std::vector<std::string> java_keywords);

    bool is_stop_word(std::string_view w) const { return stop_.count(std::string(w)) > 0; }
    bool is_java_keyword(std::string_view w) const { return keywords_.count(std::string(w)) > 0; }

    const std::vector<std::string>& stop_words() const { return stop_list_; }
    const std::vector<std::string>& java_keywords() const { return keyword_list_; }

private:
    std::vector<std::string> stop_list_;
    std::vector<std::string> keyword_list_;
    std::unordered_set<std::string> stop_;
    std::unordered_set<std::string> keywords_;
};

/// Reads a one-term-per-line list; '#' starts a comment, blank lines ignored.
std::vector<std::string> load_term_list(const std::string& path);

/// Classic Porter (1980) stemmer, steps 1a-5b. Expects a lowercase
/// alphabetic word.
std::string porter_stem(std::string_view word);

/// Splits, lowercases, filters and stems raw text.
///
/// Identifier-level units (maximal runs of [A-Za-z0-9_$]) are sub-split on
/// non-alphanumerics, camelCase humps and digit/letter transitions. A unit
/// that splits into several parts is additionally emitted unsplit (lowercased,
/// alphanumerics only) when the unsplit form is purely alphabetic, so
/// "parseFile" yields the stems of "parsefile", "parse" and "file". Stop words
/// are dropped always; Java keywords are dropped for kSourceCode. Both filters
/// are checked again after stemming so no emitted token is a list member.
TokenStream tokenize(std::string_view text, SourceKind kind, const TermFilter& filter = TermFilter::defaults());

/// Term-frequency map of a stream, for cosine similarity.
std::unordered_map<std::string, double> term_frequencies(const TokenStream& stream);

}  // namespace bugloc::textprep
