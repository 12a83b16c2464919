#include "coedit/cyclomatic.hpp"

#include "coedit/util.hpp"

#include <array>
#include <string>

namespace coedit {

namespace {

struct ExtensionEntry {
  std::string_view ext;
  Language language;
};

constexpr std::array kExtensions{
    ExtensionEntry{"c", Language::CFamily},    ExtensionEntry{"h", Language::CFamily},
    ExtensionEntry{"cc", Language::CFamily},   ExtensionEntry{"cpp", Language::CFamily},
    ExtensionEntry{"cxx", Language::CFamily},  ExtensionEntry{"hh", Language::CFamily},
    ExtensionEntry{"hpp", Language::CFamily},  ExtensionEntry{"hxx", Language::CFamily},
    ExtensionEntry{"ipp", Language::CFamily},  ExtensionEntry{"inl", Language::CFamily},
    ExtensionEntry{"cu", Language::CFamily},   ExtensionEntry{"m", Language::CFamily},
    ExtensionEntry{"mm", Language::CFamily},   ExtensionEntry{"java", Language::CFamily},
    ExtensionEntry{"kt", Language::CFamily},   ExtensionEntry{"scala", Language::CFamily},
    ExtensionEntry{"js", Language::CFamily},   ExtensionEntry{"jsx", Language::CFamily},
    ExtensionEntry{"mjs", Language::CFamily},  ExtensionEntry{"ts", Language::CFamily},
    ExtensionEntry{"tsx", Language::CFamily},  ExtensionEntry{"cs", Language::CFamily},
    ExtensionEntry{"go", Language::CFamily},   ExtensionEntry{"swift", Language::CFamily},
    ExtensionEntry{"php", Language::CFamily},  ExtensionEntry{"dart", Language::CFamily},
    ExtensionEntry{"rs", Language::Rust},      ExtensionEntry{"py", Language::Python},
    ExtensionEntry{"pyx", Language::Python},   ExtensionEntry{"rb", Language::Ruby},
    ExtensionEntry{"sh", Language::Shell},     ExtensionEntry{"bash", Language::Shell},
    ExtensionEntry{"zsh", Language::Shell},
};

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

bool is_branch_keyword(std::string_view w, Language lang) {
  auto any = [&](std::initializer_list<std::string_view> words) {
    for (auto k : words)
      if (k == w) return true;
    return false;
  };
  switch (lang) {
  case Language::CFamily: return any({"if", "for", "while", "case", "catch"});
  case Language::Rust: return any({"if", "for", "while", "loop"});
  case Language::Python: return any({"if", "elif", "for", "while", "except", "and", "or", "case"});
  case Language::Ruby:
    return any({"if", "elsif", "unless", "while", "until", "for", "when", "rescue", "and", "or"});
  case Language::Shell: return any({"if", "elif", "for", "while", "until"});
  }
  return false;
}

bool hash_comments(Language l) {
  return l == Language::Python || l == Language::Ruby || l == Language::Shell;
}

} // namespace

std::optional<Language> language_for_path(std::string_view path) {
  auto slash = path.rfind('/');
  std::string_view base = slash == std::string_view::npos ? path : path.substr(slash + 1);
  auto dot = base.rfind('.');
  if (dot == std::string_view::npos || dot == 0) return std::nullopt;
  std::string ext = to_lower(base.substr(dot + 1));
  for (const auto &e : kExtensions)
    if (e.ext == ext) return e.language;
  return std::nullopt;
}

std::optional<int> cyclomatic_complexity(std::string_view text, std::string_view path) {
  auto lang = language_for_path(path);
  if (!lang) return std::nullopt;
  return cyclomatic_complexity(text, *lang);
}

std::optional<int> cyclomatic_complexity(std::string_view s, Language lang) {
  int branches = 0;
  const std::size_t n = s.size();
  std::size_t i = 0;
  auto at = [&](std::size_t k) { return k < n ? s[k] : '\0'; };
  auto skip_to_eol = [&] {
    while (i < n && s[i] != '\n') ++i;
  };
  auto skip_quoted = [&](char q, bool escapes, bool multiline) {
    ++i;
    while (i < n) {
      char c = s[i];
      if (escapes && c == '\\') {
        i += 2;
        continue;
      }
      if (c == q) {
        ++i;
        return;
      }
      if (c == '\n' && !multiline) return;
      ++i;
    }
  };

  while (i < n) {
    char c = s[i];
    if (hash_comments(lang) && c == '#') {
      bool word_start = i == 0 || s[i - 1] == ' ' || s[i - 1] == '\t' || s[i - 1] == '\n' ||
                        s[i - 1] == ';';
      if (lang != Language::Shell || word_start) {
        skip_to_eol();
        continue;
      }
    }
    if ((lang == Language::CFamily || lang == Language::Rust) && c == '/' && at(i + 1) == '/') {
      skip_to_eol();
      continue;
    }
    if ((lang == Language::CFamily || lang == Language::Rust) && c == '/' && at(i + 1) == '*') {
      auto end = s.find("*/", i + 2);
      i = end == std::string_view::npos ? n : end + 2;
      continue;
    }
    if (lang == Language::Python && (c == '"' || c == '\'') && at(i + 1) == c && at(i + 2) == c) {
      std::string_view delim = s.substr(i, 3);
      auto end = s.find(delim, i + 3);
      i = end == std::string_view::npos ? n : end + 3;
      continue;
    }
    if (c == '"') {
      skip_quoted('"', true, lang == Language::Shell || lang == Language::Ruby);
      continue;
    }
    if (c == '\'') {
      if (lang == Language::Rust) {
        // char literal 'x' or '\n'; otherwise a lifetime
        if (at(i + 1) == '\\' || at(i + 2) == '\'') {
          skip_quoted('\'', true, false);
        } else {
          ++i;
        }
        continue;
      }
      skip_quoted('\'', lang != Language::Shell, lang == Language::Shell || lang == Language::Ruby);
      continue;
    }
    if (c == '`' && (lang == Language::CFamily || lang == Language::Shell)) {
      skip_quoted('`', true, true);
      continue;
    }
    if (ident_start(c)) {
      std::size_t start = i;
      while (i < n && ident_char(s[i])) ++i;
      bool preprocessor = start > 0 && s[start - 1] == '#';
      if (!preprocessor && is_branch_keyword(s.substr(start, i - start), lang)) ++branches;
      continue;
    }
    if ((c == '&' && at(i + 1) == '&') || (c == '|' && at(i + 1) == '|')) {
      if (lang != Language::Python) ++branches;
      i += 2;
      continue;
    }
    if (c == '=' && at(i + 1) == '>' && lang == Language::Rust) {
      ++branches;
      i += 2;
      continue;
    }
    if (c == '?' && (lang == Language::CFamily || lang == Language::Ruby)) {
      // ?. and ?? are null-handling operators, not conditionals
      if (at(i + 1) == '.' || at(i + 1) == '?') {
        i += 2;
        continue;
      }
      // Ruby predicate method names end in '?'
      bool predicate = lang == Language::Ruby && i > 0 && ident_char(s[i - 1]);
      if (!predicate) ++branches;
    }
    ++i;
  }
  return 1 + branches;
}

} // namespace coedit
