#include "pathagent/script/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdlib>

namespace pathagent::script {

LineIndex::LineIndex(std::string_view source) {
  starts_.push_back(0);
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (source[i] == '\n') starts_.push_back(i + 1);
  }
}

SourcePos LineIndex::position(std::size_t offset) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
  auto line = static_cast<int>(it - starts_.begin());
  auto col = static_cast<int>(offset - starts_[static_cast<std::size_t>(line - 1)]) + 1;
  return {line, col};
}

namespace {

constexpr std::array<std::string_view, 23> kMultiCharOps = {
    "**=", "//=", ">>=", "<<=", "...", "->", "**", "//", "==", "!=", "<=", ">=",
    "+=",  "-=",  "*=",  "/=",  "%=",  "&=", "|=", "^=", ":=", "<<", ">>"};

constexpr std::string_view kSingleCharOps = "+-*/%@&|^~<>()[]{},:.;=!";

bool is_ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}

bool is_ident_char(unsigned char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Lexer {
 public:
  Lexer(std::string_view src, const LineIndex& lines, std::size_t begin, std::size_t end,
        bool expression_mode)
      : src_(src), lines_(lines), pos_(begin), end_(end), expr_mode_(expression_mode) {}

  std::vector<Token> run() {
    if (expr_mode_) {
      while (true) {
        skip_inline_space(true);
        if (pos_ >= end_) break;
        lex_token();
      }
      push(TokenKind::End, end_, end_);
      return std::move(tokens_);
    }

    bool line_start = true;
    while (pos_ < end_) {
      if (line_start && depth_ == 0) {
        if (!handle_indentation()) break;
        line_start = false;
        continue;
      }
      skip_inline_space(false);
      if (pos_ >= end_) break;
      char c = src_[pos_];
      if (c == '\n' || c == '\r') {
        std::size_t nl = pos_;
        consume_newline();
        if (depth_ == 0) {
          push(TokenKind::Newline, nl, nl + 1);
          line_start = true;
        }
        continue;
      }
      lex_token();
    }
    if (!tokens_.empty() && tokens_.back().kind != TokenKind::Newline &&
        tokens_.back().kind != TokenKind::Dedent) {
      push(TokenKind::Newline, end_, end_);
    }
    if (depth_ > 0) fail("unexpected EOF: unclosed bracket", bracket_open_);
    while (indents_.size() > 1) {
      indents_.pop_back();
      push(TokenKind::Dedent, end_, end_);
    }
    push(TokenKind::End, end_, end_);
    return std::move(tokens_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError(msg, lines_.position(at));
  }

  void push(TokenKind kind, std::size_t b, std::size_t e) {
    Token t;
    t.kind = kind;
    t.begin = b;
    t.end = e;
    auto p = lines_.position(b);
    t.line = p.line;
    t.column = p.column;
    if (kind == TokenKind::Name || kind == TokenKind::Op || kind == TokenKind::Int ||
        kind == TokenKind::Float) {
      t.text = std::string(src_.substr(b, e - b));
    }
    tokens_.push_back(std::move(t));
  }

  void consume_newline() {
    if (src_[pos_] == '\r' && pos_ + 1 < end_ && src_[pos_ + 1] == '\n') ++pos_;
    ++pos_;
  }

  // Returns false at end of input.
  bool handle_indentation() {
    while (pos_ < end_) {
      std::size_t line_begin = pos_;
      int width = 0;
      while (pos_ < end_ && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\f')) {
        if (src_[pos_] == '\t') {
          width = (width / 8 + 1) * 8;
        } else if (src_[pos_] == ' ') {
          ++width;
        }
        ++pos_;
      }
      if (pos_ >= end_) return false;
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < end_ && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
        if (pos_ < end_) consume_newline();
        continue;
      }
      if (c == '\n' || c == '\r') {
        consume_newline();
        continue;
      }
      if (c == '\\' && pos_ + 1 < end_ && (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
        fail("unexpected line continuation", pos_);
      }
      if (width > indents_.back()) {
        indents_.push_back(width);
        push(TokenKind::Indent, line_begin, pos_);
      } else {
        while (width < indents_.back()) {
          indents_.pop_back();
          push(TokenKind::Dedent, pos_, pos_);
        }
        if (width != indents_.back()) {
          fail("unindent does not match any outer indentation level", pos_);
        }
      }
      return true;
    }
    return false;
  }

  void skip_inline_space(bool newlines_too) {
    while (pos_ < end_) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\f') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < end_ && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
      } else if (c == '\\' && pos_ + 1 < end_ &&
                 (src_[pos_ + 1] == '\n' || src_[pos_ + 1] == '\r')) {
        ++pos_;
        consume_newline();
      } else if ((c == '\n' || c == '\r') && (newlines_too || depth_ > 0)) {
        consume_newline();
      } else {
        break;
      }
    }
  }

  void lex_token() {
    unsigned char c = static_cast<unsigned char>(src_[pos_]);
    if (is_ident_start(c)) {
      std::size_t b = pos_;
      while (pos_ < end_ && is_ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      std::string_view word = src_.substr(b, pos_ - b);
      if (pos_ < end_ && (src_[pos_] == '\'' || src_[pos_] == '"') && word.size() <= 2) {
        std::string prefix;
        for (char ch : word) prefix += static_cast<char>(std::tolower(ch));
        bool valid = prefix == "r" || prefix == "f" || prefix == "u" || prefix == "b" ||
                     prefix == "rf" || prefix == "fr" || prefix == "br" || prefix == "rb";
        if (valid) {
          if (prefix.find('b') != std::string::npos) {
            fail("bytes literals are not supported", b);
          }
          lex_string(b, prefix.find('r') != std::string::npos,
                     prefix.find('f') != std::string::npos);
          return;
        }
      }
      push(TokenKind::Name, b, pos_);
      return;
    }
    if (c >= '0' && c <= '9') {
      lex_number();
      return;
    }
    if (c == '.' && pos_ + 1 < end_ && src_[pos_ + 1] >= '0' && src_[pos_ + 1] <= '9') {
      lex_number();
      return;
    }
    if (c == '\'' || c == '"') {
      lex_string(pos_, false, false);
      return;
    }
    for (auto op : kMultiCharOps) {
      if (src_.substr(pos_, op.size()) == op && pos_ + op.size() <= end_) {
        push(TokenKind::Op, pos_, pos_ + op.size());
        pos_ += op.size();
        return;
      }
    }
    if (kSingleCharOps.find(static_cast<char>(c)) != std::string_view::npos) {
      if (c == '(' || c == '[' || c == '{') {
        if (depth_ == 0) bracket_open_ = pos_;
        ++depth_;
      } else if (c == ')' || c == ']' || c == '}') {
        if (depth_ == 0 && !expr_mode_) fail(std::string("unmatched '") + static_cast<char>(c) + "'", pos_);
        if (depth_ > 0) --depth_;
      }
      push(TokenKind::Op, pos_, pos_ + 1);
      ++pos_;
      return;
    }
    fail(std::string("invalid character '") + static_cast<char>(c) + "'", pos_);
  }

  void lex_number() {
    std::size_t b = pos_;
    auto digits = [&](auto pred) {
      while (pos_ < end_ && (pred(src_[pos_]) || src_[pos_] == '_')) ++pos_;
    };
    auto dec = [](char ch) { return ch >= '0' && ch <= '9'; };
    if (src_[pos_] == '0' && pos_ + 1 < end_ &&
        std::string_view("xXoObB").find(src_[pos_ + 1]) != std::string_view::npos) {
      char base_ch = static_cast<char>(std::tolower(src_[pos_ + 1]));
      int base = base_ch == 'x' ? 16 : base_ch == 'o' ? 8 : 2;
      pos_ += 2;
      std::size_t db = pos_;
      digits([&](char ch) { return std::isxdigit(static_cast<unsigned char>(ch)) != 0; });
      std::string clean;
      for (std::size_t i = db; i < pos_; ++i) {
        if (src_[i] != '_') clean += src_[i];
      }
      std::int64_t v = 0;
      auto res = std::from_chars(clean.data(), clean.data() + clean.size(), v, base);
      if (clean.empty() || res.ptr != clean.data() + clean.size()) {
        fail("invalid numeric literal", b);
      }
      if (res.ec == std::errc::result_out_of_range) fail("integer literal too large", b);
      push(TokenKind::Int, b, pos_);
      tokens_.back().int_value = v;
      return;
    }
    bool is_float = false;
    digits(dec);
    if (pos_ < end_ && src_[pos_] == '.') {
      is_float = true;
      ++pos_;
      digits(dec);
    }
    if (pos_ < end_ && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < end_ && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < end_ && dec(src_[pos_])) {
        is_float = true;
        digits(dec);
      } else {
        pos_ = save;
      }
    }
    if (pos_ < end_ && (src_[pos_] == 'j' || src_[pos_] == 'J')) {
      fail("complex literals are not supported", b);
    }
    if (pos_ < end_ && is_ident_start(static_cast<unsigned char>(src_[pos_]))) {
      fail("invalid decimal literal", b);
    }
    std::string clean;
    for (std::size_t i = b; i < pos_; ++i) {
      if (src_[i] != '_') clean += src_[i];
    }
    if (is_float) {
      push(TokenKind::Float, b, pos_);
      tokens_.back().float_value = std::strtod(clean.c_str(), nullptr);
      return;
    }
    if (clean.size() > 1 && clean[0] == '0' &&
        clean.find_first_not_of('0') != std::string::npos) {
      fail("leading zeros in decimal integer literals are not permitted", b);
    }
    std::int64_t v = 0;
    auto res = std::from_chars(clean.data(), clean.data() + clean.size(), v);
    if (res.ec == std::errc::result_out_of_range) fail("integer literal too large", b);
    push(TokenKind::Int, b, pos_);
    tokens_.back().int_value = v;
  }

  void lex_string(std::size_t token_begin, bool raw, bool fstring) {
    char q = src_[pos_];
    bool triple = pos_ + 2 < end_ && src_[pos_ + 1] == q && src_[pos_ + 2] == q;
    std::size_t qlen = triple ? 3 : 1;
    pos_ += qlen;
    std::size_t content_begin = pos_;
    while (true) {
      if (pos_ >= end_) {
        fail(triple ? "unterminated triple-quoted string literal"
                    : "unterminated string literal",
             token_begin);
      }
      char c = src_[pos_];
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (!triple && (c == '\n' || c == '\r')) fail("unterminated string literal", token_begin);
      if (c == q) {
        if (!triple) break;
        if (pos_ + 2 < end_ && src_[pos_ + 1] == q && src_[pos_ + 2] == q) break;
      }
      ++pos_;
    }
    std::size_t content_end = pos_;
    pos_ += qlen;
    Token t;
    t.kind = TokenKind::String;
    t.begin = token_begin;
    t.end = pos_;
    auto p = lines_.position(token_begin);
    t.line = p.line;
    t.column = p.column;
    t.text = std::string(src_.substr(token_begin, pos_ - token_begin));
    t.raw = raw;
    t.fstring = fstring;
    t.content_begin = content_begin;
    t.content_end = content_end;
    if (!fstring) {
      auto body = src_.substr(content_begin, content_end - content_begin);
      t.value = raw ? std::string(body) : decode_escapes(body, content_begin, lines_);
    }
    tokens_.push_back(std::move(t));
  }

  std::string_view src_;
  const LineIndex& lines_;
  std::size_t pos_;
  std::size_t end_;
  bool expr_mode_;
  int depth_ = 0;
  std::size_t bracket_open_ = 0;
  std::vector<int> indents_{0};
  std::vector<Token> tokens_;
};

}  // namespace

std::string decode_escapes(std::string_view body, std::size_t offset, const LineIndex& lines) {
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c != '\\' || i + 1 >= body.size()) {
      out += c;
      continue;
    }
    char e = body[++i];
    auto hex = [&](std::size_t n) -> std::uint32_t {
      if (i + n >= body.size()) {
        throw ParseError("truncated escape sequence", lines.position(offset + i));
      }
      std::uint32_t v = 0;
      auto sv = body.substr(i + 1, n);
      auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v, 16);
      if (sv.size() != n || res.ptr != sv.data() + sv.size()) {
        throw ParseError("truncated escape sequence", lines.position(offset + i));
      }
      i += n;
      return v;
    };
    switch (e) {
      case '\n': break;
      case '\r':
        if (i + 1 < body.size() && body[i + 1] == '\n') ++i;
        break;
      case '\\': out += '\\'; break;
      case '\'': out += '\''; break;
      case '"': out += '"'; break;
      case 'a': out += '\a'; break;
      case 'b': out += '\b'; break;
      case 'f': out += '\f'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 't': out += '\t'; break;
      case 'v': out += '\v'; break;
      case 'x': append_utf8(out, hex(2)); break;
      case 'u': append_utf8(out, hex(4)); break;
      case 'U': {
        auto cp = hex(8);
        if (cp > 0x10FFFF) throw ParseError("illegal Unicode character", lines.position(offset + i));
        append_utf8(out, cp);
        break;
      }
      case 'N':
        throw ParseError("named unicode escapes are not supported", lines.position(offset + i));
      default:
        if (e >= '0' && e <= '7') {
          std::uint32_t v = static_cast<std::uint32_t>(e - '0');
          for (int k = 0; k < 2 && i + 1 < body.size() && body[i + 1] >= '0' && body[i + 1] <= '7'; ++k) {
            v = v * 8 + static_cast<std::uint32_t>(body[++i] - '0');
          }
          append_utf8(out, v);
        } else {
          out += '\\';
          out += e;
        }
    }
  }
  return out;
}

std::vector<Token> tokenize(std::string_view source, const LineIndex& lines, std::size_t begin,
                            std::size_t end, bool expression_mode) {
  return Lexer(source, lines, begin, end, expression_mode).run();
}

std::vector<Token> tokenize(std::string_view source) {
  LineIndex lines(source);
  return tokenize(source, lines, 0, source.size(), false);
}

}  // namespace pathagent::script
