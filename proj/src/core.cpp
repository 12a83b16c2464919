#include "coedit/core.hpp"

#include "coedit/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

namespace coedit {

const char *to_string(EditType t) {
  switch (t) {
  case EditType::Replacement: return "replacement";
  case EditType::Addition: return "addition";
  case EditType::Deletion: return "deletion";
  }
  return "?";
}

const char *to_string(Granularity g) {
  return g == Granularity::Line ? "line" : "block";
}

EditType edit_type_from_string(std::string_view s) {
  if (s == "replacement") return EditType::Replacement;
  if (s == "addition") return EditType::Addition;
  if (s == "deletion") return EditType::Deletion;
  throw Error(ErrorKind::InvalidArgument, "unknown edit type '" + std::string(s) + "'");
}

Granularity granularity_from_string(std::string_view s) {
  if (s == "line") return Granularity::Line;
  if (s == "block") return Granularity::Block;
  throw Error(ErrorKind::InvalidArgument, "unknown granularity '" + std::string(s) + "'");
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

bool parse_int(std::string_view s, int &out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && out >= 0;
}

// "-12,3" or "+4" -> start, count
bool parse_range(std::string_view s, char sign, int &start, int &count) {
  if (s.empty() || s.front() != sign) return false;
  s.remove_prefix(1);
  auto comma = s.find(',');
  if (comma == std::string_view::npos) {
    count = 1;
    return parse_int(s, start);
  }
  return parse_int(s.substr(0, comma), start) && parse_int(s.substr(comma + 1), count);
}

[[noreturn]] void malformed(const std::string &what, std::string_view line) {
  throw Error(ErrorKind::MalformedDiff, what + ": '" + std::string(line) + "'");
}

void decode_utf8(std::string_view s, std::vector<char32_t> &out) {
  out.clear();
  out.reserve(s.size());
  const auto *p = reinterpret_cast<const unsigned char *>(s.data());
  std::size_t n = s.size(), i = 0;
  while (i < n) {
    unsigned char c = p[i];
    int len = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      len = 1;
      cp = c;
    } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
      len = 4;
      cp = c & 0x07;
    }
    bool ok = len > 0 && i + len <= n;
    for (int k = 1; ok && k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) ok = false;
      else cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    if (ok && len == 3 && (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
    if (ok && len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) ok = false;
    if (!ok) {
      // lone invalid byte; mapped outside the Unicode range so it never
      // compares equal to a real code point
      out.push_back(0x110000u + c);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
}

} // namespace

std::vector<Hunk> parse_diff(std::string_view diff) {
  std::vector<Hunk> hunks;
  auto lines = split_lines(diff);
  std::size_t i = 0;
  while (i < lines.size()) {
    std::string_view line = lines[i];
    if (line.substr(0, 3) != "@@ ") {
      // body lines left over after a hunk's counts were met
      bool file_header = line.substr(0, 4) == "--- " || line.substr(0, 4) == "+++ ";
      if (!hunks.empty() && !line.empty() && !file_header &&
          (line.front() == '+' || line.front() == '-' || line.front() == ' '))
        malformed("hunk body does not match header counts", line);
      ++i;
      continue;
    }
    auto close = line.find(" @@", 3);
    if (close == std::string_view::npos) malformed("unterminated hunk header", line);
    std::string_view ranges = line.substr(3, close - 3);
    auto space = ranges.find(' ');
    if (space == std::string_view::npos) malformed("bad hunk header", line);
    int pre_start = 0, pre_count = 0, post_start = 0, post_count = 0;
    if (!parse_range(ranges.substr(0, space), '-', pre_start, pre_count) ||
        !parse_range(ranges.substr(space + 1), '+', post_start, post_count))
      malformed("bad hunk header", line);
    if (pre_count == 0 && post_count == 0) malformed("empty hunk", line);

    Hunk hunk;
    hunk.pre_start = pre_start;
    hunk.post_start = post_start;
    ++i;
    int seen_del = 0, seen_add = 0;
    while (i < lines.size() && (seen_del < pre_count || seen_add < post_count)) {
      std::string_view body = lines[i];
      if (body.empty()) malformed("empty line inside hunk", body);
      char tag = body.front();
      if (tag == '-' && seen_del < pre_count) {
        hunk.deleted.push_back({pre_start + seen_del, std::string(body.substr(1))});
        ++seen_del;
      } else if (tag == '+' && seen_add < post_count) {
        hunk.added.push_back({post_start + seen_add, std::string(body.substr(1))});
        ++seen_add;
      } else if (tag == '\\') {
        // "\ No newline at end of file"
      } else {
        malformed("hunk body does not match header counts", body);
      }
      ++i;
    }
    if (seen_del != pre_count || seen_add != post_count)
      malformed("truncated hunk", line);
    while (i < lines.size() && !lines[i].empty() && lines[i].front() == '\\') ++i;
    hunks.push_back(std::move(hunk));
  }
  std::stable_sort(hunks.begin(), hunks.end(),
                   [](const Hunk &a, const Hunk &b) { return a.pre_start < b.pre_start; });
  return hunks;
}

std::int64_t char_count(std::string_view s) {
  std::vector<char32_t> cps;
  decode_utf8(s, cps);
  return static_cast<std::int64_t>(cps.size());
}

std::int64_t levenshtein(std::string_view a, std::string_view b) {
  thread_local std::vector<char32_t> x, y;
  thread_local std::vector<std::int64_t> row;
  decode_utf8(a, x);
  decode_utf8(b, y);

  std::size_t lo = 0;
  while (lo < x.size() && lo < y.size() && x[lo] == y[lo]) ++lo;
  std::size_t ex = x.size(), ey = y.size();
  while (ex > lo && ey > lo && x[ex - 1] == y[ey - 1]) {
    --ex;
    --ey;
  }
  std::size_t n = ex - lo, m = ey - lo;
  if (n == 0) return static_cast<std::int64_t>(m);
  if (m == 0) return static_cast<std::int64_t>(n);
  const char32_t *xs = x.data() + lo;
  const char32_t *ys = y.data() + lo;
  if (n < m) {
    std::swap(xs, ys);
    std::swap(n, m);
  }
  row.resize(m + 1);
  for (std::size_t j = 0; j <= m; ++j) row[j] = static_cast<std::int64_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    std::int64_t diag = row[0];
    row[0] = static_cast<std::int64_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      std::int64_t up = row[j];
      std::int64_t best = diag + (xs[i - 1] == ys[j - 1] ? 0 : 1);
      best = std::min(best, up + 1);
      best = std::min(best, row[j - 1] + 1);
      row[j] = best;
      diag = up;
    }
  }
  return row[m];
}

double entropy(std::string_view s) {
  if (s.empty()) return 0.0;
  std::array<std::size_t, 256> freq{};
  for (unsigned char c : s) ++freq[c];
  const double n = static_cast<double>(s.size());
  double h = 0.0;
  for (std::size_t f : freq) {
    if (f == 0) continue;
    double p = static_cast<double>(f) / n;
    h -= p * std::log2(p);
  }
  // 0 for a single symbol; avoid returning -0.0
  return h <= 0.0 ? 0.0 : h;
}

std::string join_lines(const std::vector<NumberedLine> &lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i].text;
  }
  return out;
}

namespace {

std::int64_t total_chars(const std::vector<NumberedLine> &lines) {
  std::int64_t total = 0;
  for (const auto &l : lines) total += char_count(l.text);
  return total;
}

} // namespace

std::vector<EditEvent> match_lines(const Hunk &hunk) {
  std::vector<EditEvent> events;
  const auto &del = hunk.deleted;
  const auto &add = hunk.added;
  std::size_t paired = std::min(del.size(), add.size());
  for (std::size_t i = 0; i < paired; ++i) {
    EditEvent e;
    e.edit_type = EditType::Replacement;
    e.pre_lines = {del[i]};
    e.post_lines = {add[i]};
    e.levenshtein = levenshtein(del[i].text, add[i].text);
    e.entropy_pre = entropy(del[i].text);
    e.entropy_post = entropy(add[i].text);
    events.push_back(std::move(e));
  }
  for (std::size_t i = paired; i < add.size(); ++i) {
    EditEvent e;
    e.edit_type = EditType::Addition;
    e.post_lines = {add[i]};
    e.levenshtein = char_count(add[i].text);
    e.entropy_post = entropy(add[i].text);
    events.push_back(std::move(e));
  }
  for (std::size_t i = paired; i < del.size(); ++i) {
    EditEvent e;
    e.edit_type = EditType::Deletion;
    e.pre_lines = {del[i]};
    e.entropy_pre = entropy(del[i].text);
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<EditEvent> match_blocks(const Hunk &hunk) {
  std::vector<EditEvent> events;
  if (hunk.deleted.empty() && hunk.added.empty()) return events;
  EditEvent e;
  e.granularity = Granularity::Block;
  e.pre_lines = hunk.deleted;
  e.post_lines = hunk.added;
  std::string pre = join_lines(hunk.deleted);
  std::string post = join_lines(hunk.added);
  if (!hunk.deleted.empty() && !hunk.added.empty()) {
    e.edit_type = EditType::Replacement;
    e.levenshtein = levenshtein(pre, post);
    e.entropy_pre = entropy(pre);
    e.entropy_post = entropy(post);
  } else if (hunk.added.empty()) {
    e.edit_type = EditType::Deletion;
    e.entropy_pre = entropy(pre);
  } else {
    e.edit_type = EditType::Addition;
    e.levenshtein = total_chars(hunk.added);
    e.entropy_post = entropy(post);
  }
  events.push_back(std::move(e));
  return events;
}

bool flag_binary_like(std::optional<double> entropy_pre, std::optional<double> entropy_post,
                      double threshold) {
  if (threshold < 0.0 || threshold > 8.0)
    throw Error(ErrorKind::InvalidArgument, "entropy threshold must lie in [0, 8]");
  double hi = -1.0;
  if (entropy_pre) hi = std::max(hi, *entropy_pre);
  if (entropy_post) hi = std::max(hi, *entropy_post);
  return hi > threshold;
}

std::string sanitize_utf8(std::string_view bytes) {
  std::vector<char32_t> cps;
  decode_utf8(bytes, cps);
  std::string out;
  out.reserve(bytes.size());
  for (char32_t cp : cps) {
    if (cp >= 0x110000u) cp = 0xFFFD;
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

} // namespace coedit
