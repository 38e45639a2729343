#include "bugloc/codestruct.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>
#include <vector>

namespace bugloc::codestruct {

namespace {

bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

// Words that can never be a method name; everything else followed by a
// parameter list and a body brace at type-member level counts.
const std::unordered_set<std::string_view>& reserved_words() {
    static const std::unordered_set<std::string_view> words = {
        "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char",
        "class", "const", "continue", "default", "do", "double", "else", "enum",
        "extends", "final", "finally", "float", "for", "goto", "if", "implements",
        "import", "instanceof", "int", "interface", "long", "native", "new",
        "package", "private", "protected", "public", "return", "short", "static",
        "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
        "transient", "try", "void", "volatile", "while", "true", "false", "null",
    };
    return words;
}

struct Token {
    enum Kind { kIdent, kPunct } kind;
    std::string_view text;
};

std::vector<Token> lex(std::string_view masked) {
    std::vector<Token> tokens;
    std::size_t i = 0, n = masked.size();
    while (i < n) {
        char c = masked[i];
        if (is_ident_start(c)) {
            std::size_t start = i;
            while (i < n && is_ident_char(masked[i])) ++i;
            tokens.push_back({Token::kIdent, masked.substr(start, i - start)});
        } else if (static_cast<unsigned char>(c) > ' ') {
            tokens.push_back({Token::kPunct, masked.substr(i, 1)});
            ++i;
        } else {
            ++i;
        }
    }
    return tokens;
}

bool punct(const Token& t, char c) { return t.kind == Token::kPunct && t.text[0] == c; }

// skips <...> respecting nesting; i points at '<'
std::size_t skip_generics(const std::vector<Token>& toks, std::size_t i) {
    int depth = 0;
    while (i < toks.size()) {
        if (punct(toks[i], '<')) ++depth;
        else if (punct(toks[i], '>')) {
            if (--depth == 0) return i + 1;
        } else if (punct(toks[i], ';') || punct(toks[i], '{')) {
            return i;  // malformed; bail out
        }
        ++i;
    }
    return i;
}

std::size_t skip_balanced_parens(const std::vector<Token>& toks, std::size_t i) {
    int depth = 0;
    while (i < toks.size()) {
        if (punct(toks[i], '(')) ++depth;
        else if (punct(toks[i], ')')) {
            if (--depth == 0) return i + 1;
        }
        ++i;
    }
    return i;
}

void push_unique(std::vector<std::string>& seq, std::unordered_set<std::string>& seen,
                 std::string_view name) {
    if (seen.insert(std::string(name)).second) seq.emplace_back(name);
}

}  // namespace

std::string mask_comments_and_literals(std::string_view src) {
    std::string out(src);
    std::size_t i = 0, n = src.size();
    auto blank = [&](std::size_t from, std::size_t to) {
        for (std::size_t k = from; k < to && k < n; ++k)
            if (out[k] != '\n') out[k] = ' ';
    };
    while (i < n) {
        char c = src[i];
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            std::size_t start = i;
            while (i < n && src[i] != '\n') ++i;
            blank(start, i);
        } else if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            std::size_t start = i;
            i += 2;
            while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) ++i;
            i = (i + 1 < n) ? i + 2 : n;
            blank(start, i);
        } else if (c == '"' && i + 2 < n && src[i + 1] == '"' && src[i + 2] == '"') {
            std::size_t start = i;  // text block
            i += 3;
            while (i + 2 < n && !(src[i] == '"' && src[i + 1] == '"' && src[i + 2] == '"')) ++i;
            i = (i + 2 < n) ? i + 3 : n;
            blank(start, i);
        } else if (c == '"' || c == '\'') {
            char quote = c;
            std::size_t start = i++;
            while (i < n && src[i] != quote && src[i] != '\n') {
                if (src[i] == '\\' && i + 1 < n) ++i;
                ++i;
            }
            if (i < n && src[i] == quote) ++i;  // unterminated literals end at newline
            blank(start, i);
        } else {
            ++i;
        }
    }
    return out;
}

FileStructure parse_structure(std::string_view path, std::string_view content) {
    FileStructure fs;
    fs.path = std::string(path);
    auto slash = path.find_last_of('/');
    fs.file_name = std::string(slash == std::string_view::npos ? path : path.substr(slash + 1));
    if (fs.file_name.size() > 5 && fs.file_name.substr(fs.file_name.size() - 5) == ".java")
        fs.file_name_stem = fs.file_name.substr(0, fs.file_name.size() - 5);
    else
        fs.file_name_stem = fs.file_name;

    const std::string masked = mask_comments_and_literals(content);
    const std::vector<Token> toks = lex(masked);

    std::unordered_set<std::string> seen_classes, seen_methods;

    enum class Ctx { kType, kEnumHeader, kBlock };
    std::vector<Ctx> stack;
    bool pending_type = false;  // a type declaration's body brace is expected
    bool pending_enum = false;
    std::unordered_set<std::size_t> anon_body_braces;  // token indices of `new X(...) {`

    for (std::size_t i = 0; i < toks.size(); ++i) {
        const Token& t = toks[i];
        if (t.kind == Token::kIdent) {
            if (t.text == "package" && fs.package_name.empty()) {
                std::string name;
                std::size_t j = i + 1;
                while (j < toks.size() && !punct(toks[j], ';')) {
                    name.append(toks[j].text);
                    ++j;
                }
                fs.package_name = name;
                i = j;
            } else if (t.text == "import") {
                std::size_t j = i + 1;
                if (j < toks.size() && toks[j].kind == Token::kIdent && toks[j].text == "static") ++j;
                std::string name;
                while (j < toks.size() && !punct(toks[j], ';')) {
                    name.append(toks[j].text);
                    ++j;
                }
                if (!name.empty()) fs.imports.push_back(std::move(name));
                i = j;
            } else if (t.text == "class" || t.text == "interface" || t.text == "enum") {
                if (i + 1 < toks.size() && toks[i + 1].kind == Token::kIdent) {
                    push_unique(fs.classes, seen_classes, toks[i + 1].text);
                    pending_type = true;
                    pending_enum = t.text == "enum";
                    ++i;
                }
            } else if (t.text == "new") {
                // lookahead: qualified name, optional type args, argument
                // list, then a brace opens an anonymous class body
                std::size_t j = i + 1;
                while (j < toks.size() &&
                       (toks[j].kind == Token::kIdent || punct(toks[j], '.')))
                    ++j;
                if (j < toks.size() && punct(toks[j], '<')) j = skip_generics(toks, j);
                if (j < toks.size() && punct(toks[j], '(')) {
                    j = skip_balanced_parens(toks, j);
                    if (j < toks.size() && punct(toks[j], '{')) anon_body_braces.insert(j);
                }
            } else if (!stack.empty() && stack.back() == Ctx::kType &&
                       !reserved_words().count(t.text) &&
                       (i == 0 || !(punct(toks[i - 1], '.') ||
                                    (toks[i - 1].kind == Token::kIdent && toks[i - 1].text == "new")))) {
                // candidate member: identifier, parameter list, optional throws
                // clause, body brace; constructor calls (`new X() {`) and
                // qualified calls are not declarations
                std::size_t j = i + 1;
                if (j < toks.size() && punct(toks[j], '(')) {
                    j = skip_balanced_parens(toks, j);
                    bool ok = j < toks.size();
                    bool in_throws = false;
                    while (ok && j < toks.size() && !punct(toks[j], '{')) {
                        const Token& g = toks[j];
                        if (g.kind == Token::kIdent) {
                            if (g.text == "throws") in_throws = true;
                            else if (!in_throws) ok = false;
                        } else if (!(punct(g, '.') || punct(g, ','))) {
                            ok = false;
                        }
                        ++j;
                    }
                    if (ok && j < toks.size() && punct(toks[j], '{'))
                        push_unique(fs.methods, seen_methods, t.text);
                    // main loop continues from the identifier; braces and
                    // parens are handled as they are reached
                }
            }
        } else {
            char c = t.text[0];
            if (c == '{') {
                if (pending_type) {
                    stack.push_back(pending_enum ? Ctx::kEnumHeader : Ctx::kType);
                    pending_type = pending_enum = false;
                } else if (anon_body_braces.count(i)) {
                    stack.push_back(Ctx::kType);  // anonymous class body
                } else {
                    stack.push_back(Ctx::kBlock);
                }
            } else if (c == '}') {
                if (!stack.empty()) stack.pop_back();
            } else if (c == ';') {
                // the constant list of an enum body ends at the first ';'
                if (!stack.empty() && stack.back() == Ctx::kEnumHeader) stack.back() = Ctx::kType;
            } else if (c == '<' && pending_type) {
                i = skip_generics(toks, i) - 1;  // type parameters of a declaration
            }
        }
    }
    return fs;
}

FileStructure parse_structure(const SnapshotFile& file) {
    return parse_structure(file.path, file.content);
}

}  // namespace bugloc::codestruct
