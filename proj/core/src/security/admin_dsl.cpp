#include "actordb/security/admin_dsl.hpp"

#include <algorithm>
#include <cctype>

#include "actordb/common/error.hpp"

namespace actordb::security {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) == std::toupper(static_cast<unsigned char>(y));
         });
}

enum class Tok { Word, Number, Quoted, LParen, RParen, Comma, Semi, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::Quoted: return "'" + t.text + "'";
    default: return "'" + t.text + "'";
  }
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '-') {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    Token t{Tok::End, {}, line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      t.kind = Tok::Word;
      t.text = std::string(s.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      t.kind = Tok::Number;
      t.text = std::string(s.substr(i, j - i));
      advance(j - i);
    } else if (c == '\'') {
      std::size_t j = i + 1;
      std::string text;
      for (;;) {
        if (j >= s.size()) throw SyntaxError(line, col, {"closing quote"}, "end of input");
        if (s[j] == '\'') {
          if (j + 1 < s.size() && s[j + 1] == '\'') {
            text.push_back('\'');
            j += 2;
            continue;
          }
          break;
        }
        text.push_back(s[j++]);
      }
      t.kind = Tok::Quoted;
      t.text = std::move(text);
      advance(j + 1 - i);
    } else {
      switch (c) {
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case ',': t.kind = Tok::Comma; break;
        case ';': t.kind = Tok::Semi; break;
        default: throw SyntaxError(line, col, {"keyword", "identifier", "'('", "')'", "','", "';'"}, std::string(1, c));
      }
      t.text = std::string(1, c);
      advance(1);
    }
    out.push_back(std::move(t));
  }
  out.push_back({Tok::End, {}, line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<AdminCommand> script() {
    std::vector<AdminCommand> out;
    while (peek().kind != Tok::End) {
      out.push_back(statement());
      expect_punct(Tok::Semi, "';'");
    }
    return out;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    throw SyntaxError(t.line, t.column, std::move(expected), describe(t));
  }

  bool at_keyword(std::string_view kw, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::Word && iequals(t.text, kw);
  }

  void keyword(std::string_view kw) {
    if (!at_keyword(kw)) fail({std::string(kw)});
    ++pos_;
  }

  void expect_punct(Tok kind, const char* what) {
    if (peek().kind != kind) fail({what});
    ++pos_;
  }

  std::string ident() {
    const Token& t = peek();
    if (t.kind != Tok::Word && t.kind != Tok::Number && t.kind != Tok::Quoted) fail({"identifier"});
    ++pos_;
    return t.text;
  }

  std::vector<std::string> namelist() {
    expect_punct(Tok::LParen, "'('");
    std::vector<std::string> names{ident()};
    while (peek().kind == Tok::Comma) {
      ++pos_;
      names.push_back(ident());
    }
    expect_punct(Tok::RParen, "')'");
    return names;
  }

  void actors_of_type() {
    keyword("ACTORS");
    keyword("OF");
    keyword("TYPE");
  }

  AdminCommand statement() {
    if (at_keyword("CREATE") || at_keyword("DROP")) {
      bool create = at_keyword("CREATE");
      ++pos_;
      actors_of_type();
      std::string type = ident();
      keyword("WITH");
      keyword("NAMES");
      keyword("IN");
      auto names = namelist();
      if (create) return CreateActors{std::move(type), std::move(names)};
      return DropActors{std::move(type), std::move(names)};
    }
    if (at_keyword("REVOKE")) {
      ++pos_;
      keyword("ACCESS");
      keyword("TO");
      actors_of_type();
      keyword("ALL");
      keyword("FROM");
      actors_of_type();
      keyword("ALL");
      return RevokeAll{};
    }
    if (at_keyword("GRANT")) {
      ++pos_;
      Grant g;
      g.subject = pattern();
      keyword("ACCESS");
      keyword("TO");
      g.objects.push_back(pattern());
      while (at_keyword("AND")) {
        ++pos_;
        keyword("ACCESS");
        keyword("TO");
        g.objects.push_back(pattern());
      }
      return g;
    }
    fail({"CREATE", "DROP", "GRANT", "REVOKE"});
  }

  ActorPattern pattern() {
    ActorPattern p;
    actors_of_type();
    p.type_name = ident();
    if (at_keyword("WITH") && at_keyword("METHODS", 1)) {
      pos_ += 2;
      keyword("IN");
      p.methods = namelist();
    }
    if (at_keyword("WITH")) {
      ++pos_;
      if (!at_keyword("NAMES")) fail(p.methods ? std::vector<std::string>{"NAMES"} : std::vector<std::string>{"METHODS", "NAMES"});
      ++pos_;
      keyword("IN");
      p.names = namelist();
    }
    return p;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

bool plain_ident(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalnum(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string quote(const std::string& s) {
  if (plain_ident(s)) return s;
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  return out + "'";
}

std::string names(const std::vector<std::string>& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += quote(v[i]);
  }
  return out + ")";
}

std::string pattern_text(const ActorPattern& p) {
  std::string out = "ACTORS OF TYPE " + quote(p.type_name);
  if (p.methods) out += " WITH METHODS IN " + names(*p.methods);
  if (p.names) out += " WITH NAMES IN " + names(*p.names);
  return out;
}

}  // namespace

bool ActorPattern::any_type() const { return iequals(type_name, "ALL"); }

std::vector<AdminCommand> parse_admin_script(std::string_view text) { return Parser(lex(text)).script(); }

std::string pretty_print(const AdminCommand& command) {
  struct Printer {
    std::string operator()(const CreateActors& c) const {
      return "CREATE ACTORS OF TYPE " + quote(c.type_name) + " WITH NAMES IN " + names(c.names) + ";\n";
    }
    std::string operator()(const DropActors& c) const {
      return "DROP ACTORS OF TYPE " + quote(c.type_name) + " WITH NAMES IN " + names(c.names) + ";\n";
    }
    std::string operator()(const RevokeAll&) const {
      return "REVOKE ACCESS TO ACTORS OF TYPE ALL FROM ACTORS OF TYPE ALL;\n";
    }
    std::string operator()(const Grant& g) const {
      std::string out = "GRANT " + pattern_text(g.subject) + "\n ACCESS TO\n   " + pattern_text(g.objects.front());
      for (std::size_t i = 1; i < g.objects.size(); ++i) out += "\n AND ACCESS TO\n   " + pattern_text(g.objects[i]);
      return out + ";\n";
    }
  };
  return std::visit(Printer{}, command);
}

std::string pretty_print(const std::vector<AdminCommand>& commands) {
  std::string out;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (i) out += "\n";
    out += pretty_print(commands[i]);
  }
  return out;
}

}  // namespace actordb::security
