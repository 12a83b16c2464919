#pragma once

#include <optional>
#include <string_view>

namespace coedit {

enum class Language { CFamily, Rust, Python, Ruby, Shell };

/// Language from a file name's extension; nullopt for anything the scanner
/// has no keyword set for (images, markup, text).
std::optional<Language> language_for_path(std::string_view path);

/// McCabe complexity approximated as 1 + number of branch points found by a
/// token scanner that skips comments and string literals.
///
///   C family  if for while case catch && || ?      (c, h, cpp, java, js, ts, go, cs, ...)
///   Rust      if for while loop && || =>
///   Python    if elif for while except and or case
///   Ruby      if elsif unless while until for when rescue && || and or ?
///   Shell     if elif for while until && ||
std::optional<int> cyclomatic_complexity(std::string_view text, Language language);
std::optional<int> cyclomatic_complexity(std::string_view text, std::string_view path);

} // namespace coedit
