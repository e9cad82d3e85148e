#pragma once

#include <cstdint>
#include <optional>
#include <vector>

// Structural descriptions of a PII phrase that survive redaction. A
// tombstone keeps these instead of the original text: enough to
// regenerate a same-shaped replacement (date surface form and
// components, digit counts, word classes) plus a one-way hash for
// equality checks, but never the raw string.

namespace deidforge {

enum class DateForm {
  NumericSlash,        // "6/3 2021" or "6/3"
  SpokenMonthDayYear,  // "april 7 2020"
  SpokenOrdinal,       // "first of may 2021"
  MonthOnly,           // "april"
  DayOfWeekOnly,       // "tuesday"
  Unparsed,
};

struct DateExpression {
  DateForm form = DateForm::Unparsed;
  std::optional<int> day;      // 1..31
  std::optional<int> month;    // 1..12
  std::optional<int> year;
  std::optional<int> weekday;  // 0..6, DayOfWeekOnly

  bool operator==(const DateExpression&) const = default;
};

enum class NumberTokenKind { Digits, Word, Other };

struct NumberTokenShape {
  NumberTokenKind kind = NumberTokenKind::Other;
  int digit_count = 0;              // Digits
  int word_class = -1;              // Word: index into the number-word class table
  std::uint64_t text_hash = 0;      // hash of the normalized original token
};

struct SurrogateHint {
  std::uint64_t phrase_hash = 0;  // hash of the normalized original phrase
  std::optional<DateExpression> date;
  std::vector<NumberTokenShape> number_shape;
};

}  // namespace deidforge
