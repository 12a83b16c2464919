#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coedit {

struct NumberedLine {
  int number = 0; // 1-based
  std::string text;

  bool operator==(const NumberedLine &) const = default;
};

/// One zero-context region of a unified diff.
///
/// For a pure addition `pre_start` is the pre-image line after which the
/// block is inserted; for a pure deletion `post_start` is the post-image
/// line after which the block was removed (both as printed in the header).
struct Hunk {
  int pre_start = 0;
  std::vector<NumberedLine> deleted;
  int post_start = 0;
  std::vector<NumberedLine> added;
};

enum class EditType { Replacement, Addition, Deletion };
enum class Granularity { Line, Block };

const char *to_string(EditType t);
const char *to_string(Granularity g);
EditType edit_type_from_string(std::string_view s);
Granularity granularity_from_string(std::string_view s);

struct EditEvent {
  EditType edit_type = EditType::Replacement;
  std::vector<NumberedLine> pre_lines;
  std::vector<NumberedLine> post_lines;
  std::optional<std::int64_t> levenshtein;
  std::optional<double> entropy_pre;
  std::optional<double> entropy_post;
  Granularity granularity = Granularity::Line;
};

/// Parses a zero-context unified diff (file headers are skipped). Throws
/// Error(MalformedDiff) on bad hunk headers or when a hunk body does not
/// match the counts in its header.
std::vector<Hunk> parse_diff(std::string_view diff);

/// Unit-cost edit distance over Unicode code points (invalid UTF-8 bytes
/// count as one code point each).
std::int64_t levenshtein(std::string_view a, std::string_view b);

/// Number of code points in a UTF-8 string, same counting rule as
/// levenshtein().
std::int64_t char_count(std::string_view s);

/// Shannon entropy in bits over the byte histogram of the UTF-8 encoding.
/// The empty string has entropy 0.
double entropy(std::string_view s);

/// Positional pairing d_i <-> a_i; surplus lines become additions or
/// deletions.
std::vector<EditEvent> match_lines(const Hunk &hunk);

/// Whole hunk as a single event; lines are joined with "\n".
std::vector<EditEvent> match_blocks(const Hunk &hunk);

inline constexpr double kDefaultBinaryEntropyThreshold = 4.2;

bool flag_binary_like(std::optional<double> entropy_pre,
                      std::optional<double> entropy_post,
                      double threshold = kDefaultBinaryEntropyThreshold);

std::string join_lines(const std::vector<NumberedLine> &lines);

/// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

} // namespace coedit
