#include "fixtures.hpp"

#include <random>

namespace fixture {

namespace {

const std::string kCore = "src/core.c";
const std::string kUtil = "src/util.c";
const std::string kHelpers = "src/helpers.c";
const std::string kExtra = "src/extra.c";
const std::string kReadme = "README.md";
const std::string kNotes = "docs/notes.txt";

std::string widget(const std::string &name, int arg) {
  return "int widget_" + name + "_total_count = compute_widget_total(" + name + "_source_vector, " +
         std::to_string(arg) + ");";
}

std::string helper(const std::string &name, const std::string &op) {
  return "int util_" + name + "_helper(int value) { return value " + op + "; }";
}

} // namespace

History main_history() {
  History h;
  Tree t;
  t = set_file(t, kCore,
               {"#include \"core.h\"", widget("alpha", 1), widget("beta", 2), widget("gamma", 3),
                "  if (widget_alpha_total_count) reset_alpha();", widget("delta", 4),
                widget("epsilon", 5), "", "int finish_core(void);", "int core_version = 1;"});
  t = set_file(t, kReadme,
               {"# Widget toolkit", "Counts widgets.", "Build with make.", "Report bugs to the tracker."});
  h.commit("c01", kAlice, kT0, {}, t);

  t = replace_text(t, kCore, "int core_version = 1;", "int core_version = 2;");
  h.commit("c02", kAlice, kT0 + 3 * kMinute, {"c01"}, t);

  t = set_file(t, kUtil,
               {"#include \"util.h\"", helper("first", "+ 1"), helper("second", "* 2"),
                helper("third", "- 3"), "  if (util_debug_enabled) util_log_state();",
                helper("fourth", "/ 4"), helper("fifth", "% 5"), helper("sixth", "^ 6")});
  t = replace_text(t, kCore, widget("beta", 2), widget("beta", 20));
  h.commit("c03", kBob, kT0 + kHour, {"c02"}, t);

  t = erase_text(t, kCore, "int finish_core(void);");
  t = replace_text(t, kCore, "int core_version = 2;", "int core_version = 3;");
  h.commit("c04", kCarol, kT0 + 2 * kHour, {"c03"}, t);

  t = replace_text(t, kUtil, helper("first", "+ 1"), helper("first", "+ 11"));
  t = replace_text(t, kUtil, helper("second", "* 2"), helper("second", "* 22"));
  t = insert_after_text(t, kUtil, helper("second", "* 22"), {helper("extra", "+ 100")});
  h.commit("c05", kAlice, kT0 + kDay, {"c04"}, t);

  t = replace_text(t, kUtil, helper("extra", "+ 100"), helper("extra", "+ 101"));
  h.commit("c06", kAlice, kT0 + kDay + 7 * kMinute, {"c05"}, t);

  t = replace_text(t, kReadme, "Counts widgets.", "Counts and sorts widgets.");
  t = replace_text(t, kCore, "  if (widget_alpha_total_count) reset_alpha();",
                   "  if (widget_alpha_total_count > 0) reset_alpha();");
  h.commit("c07", kBob, kT0 + 2 * kDay, {"c06"}, t);

  // a whitespace-only edit of a blank line
  t = replace_text(t, kCore, "", "  ");
  t = replace_text(t, kReadme, "Build with make.", "Build with make or ninja.");
  h.commit("c08", kCarol, kT0 + 2 * kDay + 30, {"c07"}, t);

  Tree feature = t;
  feature = replace_text(feature, kCore, widget("alpha", 1), widget("alpha", 10));
  feature = insert_after_text(feature, kCore, widget("gamma", 3), {kDiscardedLine});
  h.commit("f1", kBob, kT0 + 3 * kDay, {"c08"}, feature, "feature");

  t = replace_text(t, kCore, widget("epsilon", 5), widget("epsilon", 50));
  h.commit("m1", kAlice, kT0 + 3 * kDay + kHour, {"c08"}, t);

  feature = replace_text(feature, kUtil, helper("fifth", "% 5"), helper("fifth", "% 7"));
  h.commit("f2", kBob, kT0 + 3 * kDay + 2 * kHour, {"f1"}, feature, "feature");

  // The merge keeps both sides' edits except the scratch line, and adds a
  // line found in neither parent.
  t = feature;
  t = erase_text(t, kCore, kDiscardedLine);
  t = replace_text(t, kCore, widget("epsilon", 5), widget("epsilon", 50));
  t = insert_after_text(t, kCore, "int core_version = 3;", {kMergeLine});
  h.commit("M", kCarol, kT0 + 4 * kDay, {"m1", "f2"}, t);

  {
    Lines helpers = t.at(kUtil);
    helpers[0] = "#include \"helpers.h\"";
    t = remove_file(t, kUtil);
    t = set_file(t, kHelpers, helpers);
  }
  h.commit("r1", kBob, kT0 + 5 * kDay, {"M"}, t).renames[kHelpers] = kUtil;

  t = replace_text(t, kHelpers, helper("first", "+ 11"), helper("first", "+ 12"));
  h.commit("r2", kCarol, kT0 + 6 * kDay, {"r1"}, t);

  t = set_file(t, kExtra,
               {"#include \"extra.h\"", widget("alpha", 10), widget("beta", 20), kCopiedLine,
                "int extra_only_marker = 99;"});
  h.commit("cp", kAlice, kT0 + 7 * kDay, {"r2"}, t);

  t = replace_text(t, kCore, widget("gamma", 3), widget("gamma", 30));
  t = replace_text(t, kHelpers, helper("extra", "+ 101"), helper("extra", "+ 102"));
  h.commit("d01", kBob, kT0 + 8 * kDay, {"cp"}, t);

  t = replace_text(t, kCore, widget("delta", 4), widget("delta", 40));
  t = replace_text(t, kReadme, "Report bugs to the tracker.", "Report bugs on the issue tracker.");
  h.commit("d02", kCarol, kT0 + 9 * kDay, {"d01"}, t);

  t = replace_text(t, kCore, widget("beta", 20), widget("beta", 200));
  t = replace_text(t, kExtra, "int extra_only_marker = 99;", "int extra_only_marker = 98;");
  h.commit("d03", kAlice, kT0 + 10 * kDay, {"d02"}, t);

  t = replace_text(t, kCore, widget("epsilon", 50), widget("epsilon", 51));
  h.commit("d04", kAlice, kT0 + 10 * kDay + 4 * kMinute, {"d03"}, t);

  t = erase_text(t, kReadme, "# Widget toolkit");
  t = replace_text(t, kHelpers, helper("second", "* 22"), helper("second", "* 23"));
  h.commit("d05", kBob, kT0 + 11 * kDay, {"d04"}, t);

  t = replace_text(t, kCore, kMergeLine, "int merge_glue_value = resolve_merge_state(8);");
  t = replace_text(t, kCore, "#include \"core.h\"", "#include \"core_api.h\"");
  h.commit("d06", kCarol, kT0 + 12 * kDay, {"d05"}, t);

  t = remove_file(t, kReadme);
  h.commit("d07", kAlice, kT0 + 13 * kDay, {"d06"}, t);

  t = set_file(t, kNotes, {"Release notes", "First public build", "Known issues: none"});
  h.commit("d08", kBob, kT0 + 14 * kDay, {"d07"}, t);

  t = replace_text(t, kNotes, "First public build", "First public build, tagged v0.1");
  h.commit("d09", kAlice, kT0 + 14 * kDay + 2 * kHour, {"d08"}, t);

  t = replace_text(t, kCore, "  if (widget_alpha_total_count > 0) reset_alpha();",
                   "  if (widget_alpha_total_count > 1) reset_alpha();");
  t = insert_after_text(t, kCore, "  if (widget_alpha_total_count > 1) reset_alpha();",
                        {"  if (widget_beta_total_count) reset_beta();"});
  h.commit("d10", kBob, kT0 + 15 * kDay, {"d09"}, t);

  t = replace_text(t, kCore, widget("alpha", 10), widget("alpha", 11));
  h.commit("d11", kAlice, kT0 + 15 * kDay + 2 * kMinute, {"d10"}, t);

  t = replace_text(t, kHelpers, helper("first", "+ 12"), helper("first", "+ 13"));
  t = replace_text(t, kExtra, "int extra_only_marker = 98;", "int extra_only_marker = 97;");
  h.commit("d12", kCarol, kT0 + 16 * kDay, {"d11"}, t);

  t = replace_text(t, kHelpers, "#include \"helpers.h\"", "#include \"helpers_api.h\"");
  h.commit("d13", kAlice, kT0 + 17 * kDay, {"d12"}, t);

  t = replace_text(t, kHelpers, "  if (util_debug_enabled) util_log_state();",
                   "  if (util_debug_enabled) util_log_state_verbose();");
  h.commit("d14", kBob, kT0 + 18 * kDay, {"d13"}, t);

  t = replace_text(t, kCore, "int core_version = 3;", "int core_version = 5;");
  t = replace_text(t, kCore, widget("epsilon", 51), widget("epsilon", 52));
  h.commit("d15", kCarol, kT0 + 19 * kDay, {"d14"}, t);

  t = replace_text(t, kCore, "int core_version = 5;", "int core_version = 6;");
  h.commit("d16", kAlice, kT0 + 20 * kDay, {"d15"}, t);
  return h;
}

History window_history() {
  History h;
  Tree t;
  t = set_file(t, "src/window.c",
               {"int window_first = open_window(1);", "int window_second = open_window(2);",
                "int window_third = open_window(3);", "  if (window_first) close_window();",
                "int window_fifth = open_window(5);", "int window_sixth = open_window(6);"});
  h.commit("w1", kAlice, kT0, {}, t);
  t = replace_text(t, "src/window.c", "int window_second = open_window(2);",
                   "int window_second = open_window(22);");
  h.commit("w2", kBob, kT0 + 400 * kDay, {"w1"}, t);
  t = replace_text(t, "src/window.c", "int window_fifth = open_window(5);",
                   "int window_fifth = open_window(55);");
  h.commit("w3", kCarol, kT0 + 401 * kDay, {"w2"}, t);
  return h;
}

History wide_history(int wide) {
  History h;
  Tree t;
  t = set_file(t, "root.txt", {"root"});
  h.commit("root", kAlice, kT0, {}, t);
  for (int i = 0; i < wide; ++i)
    t = set_file(t, "wide/a" + std::to_string(i) + ".txt", {"file a" + std::to_string(i)});
  h.commit("too_wide", kBob, kT0 + kHour, {"root"}, t);
  for (int i = 0; i + 1 < wide; ++i)
    t = set_file(t, "wide/b" + std::to_string(i) + ".txt", {"file b" + std::to_string(i)});
  h.commit("just_fits", kCarol, kT0 + 2 * kHour, {"too_wide"}, t);
  return h;
}

History scale_history(int commits, unsigned seed) {
  const Author authors[] = {kAlice, kBob, kCarol, {"Dan Brown", "dan@example.org"}};
  const int files = 24;
  std::mt19937 rng(seed);
  History h;
  Tree t;
  int counter = 0;
  auto fresh = [&](int file) {
    ++counter;
    if (counter % 5 == 0)
      return "  if (flag_" + std::to_string(counter) + ") handle_" + std::to_string(file) + "();";
    return "int value_" + std::to_string(counter) + " = compute(" + std::to_string(file) + ", " +
           std::to_string(counter * 7) + ");";
  };
  for (int f = 0; f < files; ++f) {
    Lines lines;
    for (int k = 0; k < 30; ++k) lines.push_back(fresh(f));
    t = set_file(t, "src/f" + std::to_string(f) + ".c", lines);
  }
  Timestamp time = kT0;
  h.commit("s0", authors[0], time, {}, t);
  for (int i = 1; i < commits; ++i) {
    time += 600 + static_cast<Timestamp>(rng() % 7200);
    int touched = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < touched; ++k) {
      int f = static_cast<int>(rng() % files);
      std::string path = "src/f" + std::to_string(f) + ".c";
      auto &lines = t.at(path);
      int line = 1 + static_cast<int>(rng() % lines.size());
      t = replace_line(t, path, line, fresh(f));
      if (rng() % 3 == 0) t = insert_after(t, path, line, {fresh(f)});
    }
    h.commit("s" + std::to_string(i), authors[rng() % 4], time, {"s" + std::to_string(i - 1)}, t);
  }
  return h;
}

} // namespace fixture
