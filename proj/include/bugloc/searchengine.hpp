#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "bugloc/textprep.hpp"

namespace bugloc::search {

/// Scalar document attribute (timestamps as epoch seconds).
using Attribute = std::int64_t;
using AttributeMap = std::map<std::string, Attribute>;

/// Predicate over a document's attributes; documents failing it are excluded
/// before ranking. Index-wide statistics (N, avgdl) are fixed at build time.
using AttributeFilter = std::function<bool(const AttributeMap&)>;

struct FieldedDocument {
    std::string doc_id;
    std::map<std::string, std::vector<std::string>> fields;  // field -> tokens
    AttributeMap attributes;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct SearchHit {
    std::string doc_id;
    double score = 0;
};

/// In-memory fielded inverted index with BM25 ranking. Build-then-query:
/// immutable after build, safe for concurrent queries.
class InvertedIndex {
public:
    static constexpr std::size_t kNoLimit = static_cast<std::size_t>(-1);

    InvertedIndex() = default;

    /// Throws std::invalid_argument on duplicate doc ids.
    static InvertedIndex build(const std::vector<FieldedDocument>& docs,
                               std::vector<std::string> schema, Bm25Params params = {});

    /// BM25 over one field. Results sorted by descending score, ties broken
    /// by ascending doc_id; only documents containing at least one query term
    /// (and passing the filter) appear. Throws on unknown field.
    std::vector<SearchHit> query(const std::string& field, const std::vector<std::string>& terms,
                                 const AttributeFilter& filter = nullptr,
                                 std::size_t limit = kNoLimit) const;

    /// Weighted sum of per-field BM25 scores; weights must be >= 0.
    std::vector<SearchHit> multi_field_query(const std::map<std::string, double>& field_weights,
                                             const std::vector<std::string>& terms,
                                             const AttributeFilter& filter = nullptr,
                                             std::size_t limit = kNoLimit) const;

    std::size_t doc_count() const { return doc_ids_.size(); }
    const std::vector<std::string>& schema() const { return schema_; }
    const Bm25Params& params() const { return params_; }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    const AttributeMap& attributes(const std::string& doc_id) const;

    /// Line-based dump with a version header; byte-identical for identical
    /// input corpora.
    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static InvertedIndex load(std::istream& in);
    static InvertedIndex load_file(const std::string& path);

private:
    struct Posting {
        std::uint32_t doc = 0;
        std::uint32_t tf = 0;
    };
    struct Field {
        std::unordered_map<std::string, std::vector<Posting>> postings;
        std::vector<std::uint32_t> lengths;  // per doc ordinal
        double avg_length = 0;
    };

    const Field& field_or_throw(const std::string& name) const;
    double idf(const Field& f, const std::string& term) const;
    // accumulates weighted bm25 into per-doc scores
    void accumulate(const Field& f, double weight, const std::vector<std::string>& terms,
                    std::vector<double>& scores) const;
    std::vector<SearchHit> finalize(std::vector<double>& scores, const AttributeFilter& filter,
                                    std::size_t limit) const;

    std::vector<std::string> schema_;
    Bm25Params params_;
    std::vector<std::string> doc_ids_;  // ordinal -> id
    std::unordered_map<std::string, std::uint32_t> ordinals_;
    std::vector<AttributeMap> attributes_;
    std::map<std::string, Field> fields_;
};

/// Divides scores by the maximum score; no-op on empty input. Used to make
/// search scores scale-stable across queries and projects.
void max_normalize(std::vector<SearchHit>& hits);

}  // namespace bugloc::search
