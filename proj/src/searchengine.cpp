#include "bugloc/searchengine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bugloc::search {

namespace {

std::string percent_encode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) {
        if (c <= ' ' || c == '%' || c == 0x7f) {
            char buf[4];
            std::snprintf(buf, sizeof(buf), "%%%02X", c);
            out += buf;
        } else {
            out.push_back(static_cast<char>(c));
        }
    }
    return out;
}

std::string percent_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            out.push_back(static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16)));
            i += 2;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

InvertedIndex InvertedIndex::build(const std::vector<FieldedDocument>& docs,
                                   std::vector<std::string> schema, Bm25Params params) {
    InvertedIndex idx;
    idx.schema_ = std::move(schema);
    idx.params_ = params;
    for (const auto& name : idx.schema_) idx.fields_[name];

    for (const auto& doc : docs) {
        if (!idx.ordinals_.emplace(doc.doc_id, static_cast<std::uint32_t>(idx.doc_ids_.size())).second)
            throw std::invalid_argument("duplicate doc id: " + doc.doc_id);
        idx.doc_ids_.push_back(doc.doc_id);
        idx.attributes_.push_back(doc.attributes);
    }

    for (auto& [name, field] : idx.fields_) {
        field.lengths.assign(idx.doc_ids_.size(), 0);
        std::uint64_t total = 0;
        for (std::size_t d = 0; d < docs.size(); ++d) {
            auto it = docs[d].fields.find(name);
            if (it == docs[d].fields.end()) continue;
            const auto& tokens = it->second;
            field.lengths[d] = static_cast<std::uint32_t>(tokens.size());
            total += tokens.size();
            std::unordered_map<std::string, std::uint32_t> tf;
            for (const auto& t : tokens) ++tf[t];
            for (auto& [term, count] : tf)
                field.postings[term].push_back({static_cast<std::uint32_t>(d), count});
        }
        // postings were appended in ascending doc order per term already; sort
        // anyway so the invariant does not depend on map iteration details
        for (auto& [term, plist] : field.postings)
            std::sort(plist.begin(), plist.end(),
                      [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
        field.avg_length =
            idx.doc_ids_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(idx.doc_ids_.size());
    }
    return idx;
}

const InvertedIndex::Field& InvertedIndex::field_or_throw(const std::string& name) const {
    auto it = fields_.find(name);
    if (it == fields_.end()) throw std::invalid_argument("unknown index field: " + name);
    return it->second;
}

const AttributeMap& InvertedIndex::attributes(const std::string& doc_id) const {
    auto it = ordinals_.find(doc_id);
    if (it == ordinals_.end()) throw std::invalid_argument("unknown doc id: " + doc_id);
    return attributes_[it->second];
}

double InvertedIndex::idf(const Field& f, const std::string& term) const {
    auto it = f.postings.find(term);
    if (it == f.postings.end()) return 0.0;
    double n = static_cast<double>(it->second.size());
    double N = static_cast<double>(doc_ids_.size());
    // +1 inside the log keeps scores non-negative
    return std::log(1.0 + (N - n + 0.5) / (n + 0.5));
}

void InvertedIndex::accumulate(const Field& f, double weight, const std::vector<std::string>& terms,
                               std::vector<double>& scores) const {
    if (weight <= 0) return;
    const double k1 = params_.k1;
    const double b = params_.b;
    for (const auto& term : terms) {
        auto it = f.postings.find(term);
        if (it == f.postings.end()) continue;
        double w_idf = idf(f, term);
        for (const Posting& p : it->second) {
            double tf = static_cast<double>(p.tf);
            double len = static_cast<double>(f.lengths[p.doc]);
            double norm = k1 * (1.0 - b + b * len / f.avg_length);
            scores[p.doc] += weight * w_idf * tf * (k1 + 1.0) / (tf + norm);
        }
    }
}

std::vector<SearchHit> InvertedIndex::finalize(std::vector<double>& scores,
                                               const AttributeFilter& filter,
                                               std::size_t limit) const {
    std::vector<SearchHit> hits;
    for (std::size_t d = 0; d < scores.size(); ++d) {
        if (scores[d] <= 0) continue;
        if (filter && !filter(attributes_[d])) continue;
        hits.push_back({doc_ids_[d], scores[d]});
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (hits.size() > limit) hits.resize(limit);
    return hits;
}

std::vector<SearchHit> InvertedIndex::query(const std::string& field,
                                            const std::vector<std::string>& terms,
                                            const AttributeFilter& filter,
                                            std::size_t limit) const {
    const Field& f = field_or_throw(field);
    std::vector<double> scores(doc_ids_.size(), 0.0);
    accumulate(f, 1.0, terms, scores);
    return finalize(scores, filter, limit);
}

std::vector<SearchHit> InvertedIndex::multi_field_query(
    const std::map<std::string, double>& field_weights, const std::vector<std::string>& terms,
    const AttributeFilter& filter, std::size_t limit) const {
    for (const auto& [name, weight] : field_weights) {
        field_or_throw(name);
        if (weight < 0) throw std::invalid_argument("negative field weight for: " + name);
    }
    std::vector<double> scores(doc_ids_.size(), 0.0);
    for (const auto& [name, weight] : field_weights)
        accumulate(fields_.at(name), weight, terms, scores);
    return finalize(scores, filter, limit);
}

void max_normalize(std::vector<SearchHit>& hits) {
    if (hits.empty()) return;
    double max_score = 0;
    for (const auto& h : hits) max_score = std::max(max_score, h.score);
    if (max_score <= 0) return;
    for (auto& h : hits) h.score /= max_score;
}

// ---- serialization ---------------------------------------------------------

void InvertedIndex::save(std::ostream& out) const {
    out << "buglocidx 1\n";
    out << "params " << format_double(params_.k1) << ' ' << format_double(params_.b) << '\n';
    out << "schema";
    for (const auto& f : schema_) out << ' ' << percent_encode(f);
    out << '\n';
    out << "docs " << doc_ids_.size() << '\n';
    for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
        out << "doc " << percent_encode(doc_ids_[d]);
        for (const auto& [k, v] : attributes_[d]) out << ' ' << percent_encode(k) << '=' << v;
        out << '\n';
    }
    for (const auto& name : schema_) {
        const Field& f = fields_.at(name);
        out << "field " << percent_encode(name) << '\n';
        out << "lengths";
        for (auto len : f.lengths) out << ' ' << len;
        out << '\n';
        std::vector<std::string> terms;
        terms.reserve(f.postings.size());
        for (const auto& [term, _] : f.postings) terms.push_back(term);
        std::sort(terms.begin(), terms.end());
        for (const auto& term : terms) {
            out << "term " << percent_encode(term);
            for (const Posting& p : f.postings.at(term)) out << ' ' << p.doc << ':' << p.tf;
            out << '\n';
        }
    }
    out << "end\n";
}

void InvertedIndex::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write index file: " + path);
    save(out);
}

InvertedIndex InvertedIndex::load(std::istream& in) {
    InvertedIndex idx;
    std::string line;
    auto fail = [](const std::string& why) -> void { throw std::runtime_error("bad index file: " + why); };

    if (!std::getline(in, line) || line != "buglocidx 1") fail("missing or unsupported header");
    if (!std::getline(in, line)) fail("missing params");
    {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> idx.params_.k1 >> idx.params_.b;
        if (tag != "params" || !ls) fail("params line");
    }
    if (!std::getline(in, line)) fail("missing schema");
    {
        std::istringstream ls(line);
        std::string tag, f;
        ls >> tag;
        if (tag != "schema") fail("schema line");
        while (ls >> f) idx.schema_.push_back(percent_decode(f));
    }
    std::size_t n_docs = 0;
    if (!std::getline(in, line)) fail("missing docs count");
    {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> n_docs;
        if (tag != "docs" || !ls) fail("docs line");
    }
    for (std::size_t d = 0; d < n_docs; ++d) {
        if (!std::getline(in, line)) fail("truncated doc list");
        std::istringstream ls(line);
        std::string tag, id, attr;
        ls >> tag >> id;
        if (tag != "doc") fail("doc line");
        idx.doc_ids_.push_back(percent_decode(id));
        idx.ordinals_[idx.doc_ids_.back()] = static_cast<std::uint32_t>(d);
        AttributeMap attrs;
        while (ls >> attr) {
            auto eq = attr.find('=');
            if (eq == std::string::npos) fail("doc attribute");
            attrs[percent_decode(attr.substr(0, eq))] = std::stoll(attr.substr(eq + 1));
        }
        idx.attributes_.push_back(std::move(attrs));
    }
    Field* current = nullptr;
    while (std::getline(in, line)) {
        if (line == "end") break;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "field") {
            std::string name;
            ls >> name;
            current = &idx.fields_[percent_decode(name)];
        } else if (tag == "lengths") {
            if (!current) fail("lengths before field");
            std::uint32_t len;
            std::uint64_t total = 0;
            while (ls >> len) {
                current->lengths.push_back(len);
                total += len;
            }
            if (current->lengths.size() != n_docs) fail("length count mismatch");
            current->avg_length = n_docs == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(n_docs);
        } else if (tag == "term") {
            if (!current) fail("term before field");
            std::string term, posting;
            ls >> term;
            auto& plist = current->postings[percent_decode(term)];
            while (ls >> posting) {
                auto colon = posting.find(':');
                if (colon == std::string::npos) fail("posting");
                plist.push_back({static_cast<std::uint32_t>(std::stoul(posting.substr(0, colon))),
                                 static_cast<std::uint32_t>(std::stoul(posting.substr(colon + 1)))});
            }
        } else {
            fail("unknown line tag: " + tag);
        }
    }
    for (const auto& name : idx.schema_) idx.fields_[name];  // fields may be empty
    return idx;
}

InvertedIndex InvertedIndex::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open index file: " + path);
    return load(in);
}

}  // namespace bugloc::search
