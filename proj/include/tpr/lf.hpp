#pragma once
// Logical-form story files and the optional English template matcher.
//
// Line-oriented grammar ('#' starts a comment):
//
//   FACT  ::= "FACT" ["~"] IDENT "(" IDENT "," IDENT ["," IDENT] ")"
//             ["@" "t" "=" INT]
//   QUERY ::= "QUERY" vars ":" ["EXISTS" vars ":"] atom ("&" atom)*
//             ["WHERE" constraint (("&"|",") constraint)*]
//   atom  ::= IDENT "(" term ("," term)* ")"
//   term  ::= IDENT | "?" IDENT
//   constraint ::= "?" IDENT "!=" IDENT
//
// A two-argument FACT atom is stamped with the line's implicit timestep
// (or the dummy symbol for "<"); "@ t=K" overrides the timestep. Variables
// repeated across query atoms become equality constraints when the query
// is compiled, and WHERE clauses become evaluation exclusions.

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tpr/query.hpp"

namespace tpr {

class parse_error : public std::runtime_error {
public:
    parse_error(std::size_t line, std::size_t col, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(col) +
                             ": " + msg),
          line_(line),
          col_(col) {}

    std::size_t line() const { return line_; }
    std::size_t col() const { return col_; }

private:
    std::size_t line_, col_;
};

struct FactLine {
    bool negated = false;
    std::string pred;
    std::vector<std::string> args;  // 2 or 3, as written
    std::optional<std::size_t> time_override;
    std::size_t line = 0;
};

struct QueryLine {
    Query query;
    std::size_t line = 0;
};

struct StoryFile {
    std::vector<std::variant<FactLine, QueryLine>> entries;
};

namespace lfdetail {

struct Token {
    enum class Kind { ident, number, punct, end };
    Kind kind = Kind::end;
    std::string text;
    std::size_t col = 0;
};

inline bool ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c == '@' || c == '<' || c >= 0x80;
}
inline bool ident_cont(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

class Lexer {
public:
    Lexer(const std::string& text, std::size_t line_no) : s_(text), line_(line_no) { advance(); }

    const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

    Token expect_ident(const char* what) {
        if (tok_.kind != Token::Kind::ident) fail(std::string("expected ") + what);
        return next();
    }

    void expect_punct(const std::string& p) {
        if (tok_.kind != Token::Kind::punct || tok_.text != p)
            fail("expected '" + p + "'");
        advance();
    }

    bool accept_punct(const std::string& p) {
        if (tok_.kind == Token::Kind::punct && tok_.text == p) {
            advance();
            return true;
        }
        return false;
    }

    bool accept_keyword(const std::string& kw) {
        if (tok_.kind == Token::Kind::ident && tok_.text == kw) {
            advance();
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw parse_error(line_, tok_.col + 1, msg);
    }

private:
    void advance() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
        tok_ = Token{};
        tok_.col = pos_;
        if (pos_ >= s_.size() || s_[pos_] == '#') {
            tok_.kind = Token::Kind::end;
            return;
        }
        unsigned char c = static_cast<unsigned char>(s_[pos_]);
        if (ident_start(c)) {
            std::size_t start = pos_++;
            while (pos_ < s_.size() && ident_cont(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            tok_.kind = Token::Kind::ident;
            tok_.text = s_.substr(start, pos_ - start);
            return;
        }
        if (std::isdigit(c)) {
            std::size_t start = pos_++;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            tok_.kind = Token::Kind::number;
            tok_.text = s_.substr(start, pos_ - start);
            return;
        }
        if (c == '!' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '=') {
            tok_.kind = Token::Kind::punct;
            tok_.text = "!=";
            pos_ += 2;
            return;
        }
        static const std::string singles = "(),:&?~=";
        if (singles.find(static_cast<char>(c)) != std::string::npos) {
            tok_.kind = Token::Kind::punct;
            tok_.text = std::string(1, static_cast<char>(c));
            ++pos_;
            return;
        }
        throw parse_error(line_, pos_ + 1, std::string("unexpected character '") +
                                               static_cast<char>(c) + "'");
    }

    const std::string& s_;
    std::size_t line_;
    std::size_t pos_ = 0;
    Token tok_;
};

inline QueryTerm parse_term(Lexer& lx) {
    if (lx.accept_punct("?")) {
        auto t = lx.expect_ident("variable name");
        return qvar(t.text);
    }
    auto t = lx.peek().kind == Token::Kind::number ? lx.next() : lx.expect_ident("term");
    return qconst(t.text);
}

inline QueryAtom parse_atom(Lexer& lx, std::size_t line_no) {
    QueryAtom atom;
    atom.pred = lx.expect_ident("predicate").text;
    lx.expect_punct("(");
    atom.args.push_back(parse_term(lx));
    while (lx.accept_punct(",")) atom.args.push_back(parse_term(lx));
    lx.expect_punct(")");
    if (atom.args.size() > 3)
        throw parse_error(line_no, lx.peek().col, "predicates take at most 3 arguments");
    return atom;
}

}  // namespace lfdetail

inline StoryFile parse_story(const std::string& text) {
    using lfdetail::Lexer;
    using lfdetail::Token;
    StoryFile out;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        Lexer lx(raw, line_no);
        if (lx.peek().kind == Token::Kind::end) continue;
        if (lx.accept_keyword("FACT")) {
            FactLine f;
            f.line = line_no;
            f.negated = lx.accept_punct("~");
            QueryAtom atom = lfdetail::parse_atom(lx, line_no);
            f.pred = atom.pred;
            if (atom.args.size() < 2)
                throw parse_error(line_no, 1, "facts need at least 2 arguments");
            for (const auto& t : atom.args) {
                if (t.kind != QueryTerm::Kind::constant)
                    throw parse_error(line_no, 1, "facts cannot contain variables");
                f.args.push_back(t.name);
            }
            if (lx.accept_keyword("@")) {
                auto t = lx.expect_ident("'t' in timestep override");
                if (t.text != "t") throw parse_error(line_no, t.col + 1, "expected 't='");
                lx.expect_punct("=");
                if (lx.peek().kind != Token::Kind::number)
                    lx.fail("expected a timestep number");
                f.time_override = std::stoul(lx.next().text);
                if (*f.time_override == 0)
                    throw parse_error(line_no, 1, "timesteps are 1-based");
            }
            if (lx.peek().kind != Token::Kind::end) lx.fail("trailing input after fact");
            out.entries.push_back(std::move(f));
        } else if (lx.accept_keyword("QUERY")) {
            QueryLine q;
            q.line = line_no;
            auto parse_vars = [&](std::vector<std::string>& into) {
                lx.expect_punct("?");
                into.push_back(lx.expect_ident("variable name").text);
                while (lx.accept_punct(",")) {
                    lx.expect_punct("?");
                    into.push_back(lx.expect_ident("variable name").text);
                }
            };
            parse_vars(q.query.query_vars);
            lx.expect_punct(":");
            if (lx.accept_keyword("EXISTS")) {
                parse_vars(q.query.exist_vars);
                lx.expect_punct(":");
            }
            q.query.atoms.push_back(lfdetail::parse_atom(lx, line_no));
            while (lx.accept_punct("&"))
                q.query.atoms.push_back(lfdetail::parse_atom(lx, line_no));
            if (lx.accept_keyword("WHERE")) {
                do {
                    lx.expect_punct("?");
                    std::string var = lx.expect_ident("variable name").text;
                    lx.expect_punct("!=");
                    std::string sym = lx.expect_ident("symbol").text;
                    q.query.exclusions[var].push_back(sym);
                } while (lx.accept_punct(",") || lx.accept_punct("&"));
            }
            if (lx.peek().kind != Token::Kind::end) lx.fail("trailing input after query");
            out.entries.push_back(std::move(q));
        } else {
            throw parse_error(line_no, lx.peek().col + 1, "expected FACT or QUERY");
        }
    }
    return out;
}

inline std::string render(const StoryFile& sf) {
    std::string out;
    for (const auto& entry : sf.entries) {
        if (const auto* f = std::get_if<FactLine>(&entry)) {
            out += "FACT ";
            if (f->negated) out += "~";
            out += f->pred + "(";
            for (std::size_t i = 0; i < f->args.size(); ++i) {
                if (i) out += ", ";
                out += f->args[i];
            }
            out += ")";
            if (f->time_override) out += " @ t=" + std::to_string(*f->time_override);
        } else {
            const auto& q = std::get<QueryLine>(entry).query;
            out += "QUERY ";
            for (std::size_t i = 0; i < q.query_vars.size(); ++i) {
                if (i) out += ", ";
                out += "?" + q.query_vars[i];
            }
            out += " :";
            if (!q.exist_vars.empty()) {
                out += " EXISTS ";
                for (std::size_t i = 0; i < q.exist_vars.size(); ++i) {
                    if (i) out += ", ";
                    out += "?" + q.exist_vars[i];
                }
                out += " :";
            }
            for (std::size_t a = 0; a < q.atoms.size(); ++a) {
                out += a ? " & " : " ";
                out += q.atoms[a].pred + "(";
                for (std::size_t i = 0; i < q.atoms[a].args.size(); ++i) {
                    if (i) out += ", ";
                    const auto& t = q.atoms[a].args[i];
                    out += t.kind == QueryTerm::Kind::variable ? "?" + t.name : t.name;
                }
                out += ")";
            }
            if (!q.exclusions.empty()) {
                out += " WHERE ";
                bool first = true;
                for (const auto& [var, syms] : q.exclusions)
                    for (const auto& sym : syms) {
                        if (!first) out += " & ";
                        first = false;
                        out += "?" + var + " != " + sym;
                    }
            }
        }
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// English templates
// ---------------------------------------------------------------------------

struct Template {
    std::vector<std::string> pattern;  // lowercased words; "%X" captures one word
    std::string lf;                    // LF line with %X placeholders
};

/// Maps captured words to single-letter symbols (lowercased first letter of
/// the word). Two different words mapping to the same letter is an error.
class EnglishContext {
public:
    std::string symbol_for(const std::string& word, std::size_t line_no) {
        auto it = word_to_symbol_.find(word);
        if (it != word_to_symbol_.end()) return it->second;
        std::string sym(1, static_cast<char>(std::tolower(static_cast<unsigned char>(word[0]))));
        auto [owner, inserted] = symbol_to_word_.try_emplace(sym, word);
        if (!inserted && owner->second != word)
            throw parse_error(line_no, 1, "symbol collision: '" + word + "' and '" +
                                              owner->second + "' both shorten to '" + sym + "'");
        word_to_symbol_[word] = sym;
        return sym;
    }

private:
    std::map<std::string, std::string> word_to_symbol_;
    std::map<std::string, std::string> symbol_to_word_;
};

namespace lfdetail {

inline std::vector<std::string> english_words(const std::string& line) {
    std::vector<std::string> words;
    std::string cur;
    for (char ch : line) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c == '%') {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(cur);
    std::vector<std::string> kept;
    for (auto& w : words)
        if (w != "a" && w != "an" && w != "the") kept.push_back(std::move(w));
    return kept;
}

}  // namespace lfdetail

inline std::vector<Template> builtin_templates() {
    auto t = [](const char* pattern, const char* lf) {
        return Template{lfdetail::english_words(pattern), lf};
    };
    return {
        t("%A picked up %B", "FACT @(%B, %A)"),
        t("%A went to %B", "FACT @(%A, %B)"),
        t("%A dropped %B", "FACT ~@(%B, %A)"),
        t("%X is north of %Y", "FACT n(%X, %Y)"),
        t("%X is south of %Y", "FACT s(%X, %Y)"),
        t("%X is east of %Y", "FACT e(%X, %Y)"),
        t("%X is west of %Y", "FACT w(%X, %Y)"),
        t("where was %X before %Y",
          "QUERY ?w : EXISTS ?t, ?u : @(%X, %Y, ?u) & @(%X, ?w, ?t) & <(?t, ?u) WHERE ?w != %Y"),
        t("how do you go from %X to %Y", "QUERY ?p : path(%X, %Y)"),
    };
}

/// One "pattern => LF" rule per line; '#' comments allowed. Template order
/// is part of the format: the first matching rule wins.
inline std::vector<Template> parse_templates(const std::string& text) {
    std::vector<Template> out;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string stripped = raw.substr(0, raw.find('#'));
        if (stripped.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto arrow = stripped.find("=>");
        if (arrow == std::string::npos)
            throw parse_error(line_no, 1, "template rule needs 'pattern => LF'");
        Template t;
        t.pattern = lfdetail::english_words(stripped.substr(0, arrow));
        t.lf = stripped.substr(arrow + 2);
        auto first = t.lf.find_first_not_of(" \t");
        t.lf = first == std::string::npos ? "" : t.lf.substr(first);
        if (t.pattern.empty() || t.lf.empty())
            throw parse_error(line_no, 1, "empty template side");
        out.push_back(std::move(t));
    }
    return out;
}

struct EnglishLF {
    enum class Kind { no_match, fact, query };
    Kind kind = Kind::no_match;
    std::variant<FactLine, QueryLine> entry;
};

/// Matches an English sentence against the template table (first match
/// wins) and returns the instantiated LF. No match is a value, not an
/// error: out-of-template input is never guessed at.
inline EnglishLF english_to_lf(const std::string& line, const std::vector<Template>& templates,
                               EnglishContext& ctx, std::size_t line_no = 1) {
    auto words = lfdetail::english_words(line);
    for (const auto& tmpl : templates) {
        if (tmpl.pattern.size() != words.size()) continue;
        std::map<std::string, std::string> captures;
        bool ok = true;
        for (std::size_t i = 0; i < words.size() && ok; ++i) {
            const std::string& p = tmpl.pattern[i];
            if (!p.empty() && p[0] == '%')
                captures[p] = words[i];
            else
                ok = p == words[i];
        }
        if (!ok) continue;
        std::string lf = tmpl.lf;
        for (const auto& [ph, word] : captures) {
            std::string sym = ctx.symbol_for(word, line_no);
            std::size_t pos = 0;
            // case-insensitive placeholder match on the LF side
            std::string upper = ph;
            while ((pos = lf.find('%', pos)) != std::string::npos) {
                std::size_t end = pos + 1;
                while (end < lf.size() &&
                       std::isalnum(static_cast<unsigned char>(lf[end])))
                    ++end;
                std::string found = lf.substr(pos, end - pos);
                std::string lowered = found;
                for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                if (lowered == ph) {
                    lf = lf.substr(0, pos) + sym + lf.substr(end);
                    pos += sym.size();
                } else {
                    pos = end;
                }
            }
        }
        StoryFile parsed = parse_story(lf);
        if (parsed.entries.size() != 1)
            throw parse_error(line_no, 1, "template expands to more than one LF line");
        EnglishLF out;
        out.entry = std::move(parsed.entries.front());
        out.kind = std::holds_alternative<FactLine>(out.entry) ? EnglishLF::Kind::fact
                                                               : EnglishLF::Kind::query;
        if (const auto* f = std::get_if<FactLine>(&out.entry)) {
            (void)f;
            std::get<FactLine>(out.entry).line = line_no;
        } else {
            std::get<QueryLine>(out.entry).line = line_no;
        }
        return out;
    }
    return {};
}

}  // namespace tpr
