#pragma once

#include "fixture_repo.hpp"

#include <cstddef>
#include <string>

namespace fixture {

inline const Author kAlice{"Alice Liddell", "Alice@Example.org"};
inline const Author kBob{"Bob Marley", "bob@example.org"};
inline const Author kCarol{"Carol Danvers", "carol@example.org"};

// Monday 2021-03-01 09:00 UTC
inline constexpr Timestamp kT0 = 1614589200;
inline constexpr Timestamp kMinute = 60;
inline constexpr Timestamp kHour = 3600;
inline constexpr Timestamp kDay = 86400;

/// Three authors over three weeks: a feature branch merged back (the merge
/// drops one branch line and introduces one line of its own), a rename of
/// src/util.c to src/helpers.c, and src/extra.c created from lines copied
/// out of src/core.c.
History main_history();

// Hand count over main_history(): every author touches src/core.c, so the
// co-authorship network has all three pairs; bob and carol only ever edit
// alice's lines (and their own), alice edits both of theirs.
inline constexpr std::size_t kMainCoauthorLinks = 3; // m_f
inline constexpr std::size_t kMainCoeditLinks = 2;   // m_l: alice-bob, alice-carol
inline constexpr double kMainDelta = 1.5;

// Notable lines of main_history().
inline const std::string kDiscardedLine = "int feature_only_scratch_value = 42;";
inline const std::string kMergeLine = "int merge_glue_value = resolve_merge_state(7);";
inline const std::string kCopiedLine =
    "int widget_gamma_total_count = compute_widget_total(gamma_source_vector, 3);";

/// alice writes src/window.c on day 0; on days 400 and 401 bob and carol
/// each edit one of her lines. In [day 365, day 730) both editors share the
/// file (1 co-authorship link) while the lines they edit come from outside
/// the window (2 co-editing links).
History window_history();
inline constexpr Timestamp kWindowStart = kT0 + 365 * kDay;
inline constexpr Timestamp kWindowLength = 365 * kDay;
inline constexpr double kWindowDelta = 0.5; // 1 / 2
inline constexpr double kWindowFullDelta = 1.5; // 3 / 2

/// A root commit, then a commit adding `wide` text files, then one adding
/// `wide - 1` more.
History wide_history(int wide);

/// `commits` pseudo-random line edits by four authors over 24 C files.
History scale_history(int commits, unsigned seed);

} // namespace fixture
