#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pathagent/script/errors.hpp"

namespace pathagent::script {

enum class TokenKind { Name, Int, Float, String, Op, Newline, Indent, Dedent, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // source text for names/ops/numbers
  std::size_t begin = 0;
  std::size_t end = 0;
  int line = 0;
  int column = 0;

  std::int64_t int_value = 0;
  double float_value = 0.0;

  // String literals. For f-strings `value` is empty and the raw body
  // [content_begin, content_end) is parsed by the parser.
  std::string value;
  bool fstring = false;
  bool raw = false;
  std::size_t content_begin = 0;
  std::size_t content_end = 0;

  bool is_op(std::string_view op) const { return kind == TokenKind::Op && text == op; }
  bool is_name(std::string_view n) const { return kind == TokenKind::Name && text == n; }
};

/// Maps byte offsets to 1-based line/column.
class LineIndex {
 public:
  explicit LineIndex(std::string_view source);
  SourcePos position(std::size_t offset) const;

 private:
  std::vector<std::size_t> starts_;
};

/// Tokenizes source[begin, end). In expression mode there is no indentation
/// tracking and newlines are insignificant (used for f-string fields).
std::vector<Token> tokenize(std::string_view source, const LineIndex& lines,
                            std::size_t begin, std::size_t end, bool expression_mode);

std::vector<Token> tokenize(std::string_view source);

/// Decodes backslash escapes in a non-raw string body. Throws ParseError.
std::string decode_escapes(std::string_view body, std::size_t offset, const LineIndex& lines);

}  // namespace pathagent::script
