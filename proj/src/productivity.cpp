#include "coedit/productivity.hpp"

#include "coedit/error.hpp"
#include "coedit/util.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace coedit {

std::vector<Contribution> aggregate_contributions(const std::string &author,
                                                  const std::vector<AuthoredCommit> &commits,
                                                  Timestamp delta) {
  std::vector<Contribution> out;
  for (const auto &c : commits) {
    if (!out.empty() && c.time - out.back().end_time < delta) {
      out.back().commit_hashes.push_back(c.hash);
      out.back().end_time = c.time;
      continue;
    }
    Contribution k;
    k.author = author;
    k.commit_hashes = {c.hash};
    k.start_time = k.end_time = c.time;
    k.is_first_in_project = out.empty();
    out.push_back(std::move(k));
  }
  return out;
}

const std::vector<std::string> &feature_columns() {
  static const std::vector<std::string> cols = {
      "author", "start_time", "lev",   "ict",   "prod",  "own", "cyc_l", "cyc_f", "nol_l",
      "nol_f",  "noc_t",      "nof",   "tpe_l", "tpe_e", "noc_d", "nfc", "wkd"};
  return cols;
}

double feature_value(const FeatureRow &r, const std::string &c) {
  if (c == "start_time") return static_cast<double>(r.start_time);
  if (c == "lev") return r.lev;
  if (c == "ict") return r.ict;
  if (c == "prod") return r.prod;
  if (c == "own") return r.own;
  if (c == "cyc_l") return r.cyc_l;
  if (c == "cyc_f") return r.cyc_f;
  if (c == "nol_l") return r.nol_l;
  if (c == "nol_f") return r.nol_f;
  if (c == "noc_t") return r.noc_t;
  if (c == "nof") return r.nof;
  if (c == "tpe_l") return r.tpe_l;
  if (c == "tpe_e") return r.tpe_e;
  if (c == "noc_d") return r.noc_d;
  if (c == "nfc") return r.nfc;
  if (c == "wkd") return r.wkd ? 1.0 : 0.0;
  throw Error(ErrorKind::InvalidArgument, "unknown feature '" + c + "'");
}

FeatureReport compute_features(const Store &store, const FeatureOptions &options) {
  FeatureReport report;
  auto commits = store.commits();
  std::stable_sort(commits.begin(), commits.end(), [](const auto &a, const auto &b) {
    if (a.meta.author_time != b.meta.author_time) return a.meta.author_time < b.meta.author_time;
    return a.meta.topo_index < b.meta.topo_index;
  });

  std::set<std::string> roots;
  std::vector<Timestamp> project_times;
  std::map<std::string, std::vector<AuthoredCommit>> by_author;
  for (const auto &c : commits) {
    if (c.meta.parent_hashes.empty()) roots.insert(c.meta.hash);
    project_times.push_back(c.meta.author_time);
    by_author[c.author_id].push_back({c.meta.hash, c.meta.author_time});
  }

  auto all_edits = store.query_edits();
  std::map<std::string, std::vector<const EditRecord *>> edits_of;
  for (const auto &e : all_edits) edits_of[e.modifying_commit].push_back(&e);

  auto count_before = [](const std::vector<Timestamp> &sorted, Timestamp t) {
    return static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
  };

  for (const auto &[author, authored] : by_author) {
    auto contributions = aggregate_contributions(author, authored, options.delta);
    report.contributions += contributions.size();
    std::vector<Timestamp> author_times;
    for (const auto &c : authored) author_times.push_back(c.time);

    for (std::size_t k = 0; k < contributions.size(); ++k) {
      const auto &con = contributions[k];
      std::vector<const EditRecord *> kept;
      for (const auto &h : con.commit_hashes) {
        auto it = edits_of.find(h);
        if (it == edits_of.end()) continue;
        for (const EditRecord *e : it->second) {
          ++report.edits_considered;
          if (e->edit_type != EditType::Replacement || e->merge_discard) {
            ++report.edits_not_replacement;
          } else if (e->pre_blank || e->post_blank) {
            ++report.edits_blank;
          } else if (!e->file_cyclomatic || !e->file_total_lines) {
            ++report.edits_no_complexity;
          } else if (options.drop_initial_commit && roots.count(e->original_commit)) {
            ++report.edits_initial_commit;
          } else {
            kept.push_back(e);
          }
        }
      }
      if (k == 0) {
        ++report.rows_first_contribution;
        continue;
      }
      if (kept.empty()) {
        ++report.rows_without_edits;
        continue;
      }

      FeatureRow row;
      row.author = author;
      row.start_time = con.start_time;
      row.ict = static_cast<double>(con.start_time - contributions[k - 1].end_time) / kSecondsPerHour;
      double own_lev = 0, cyc = 0, nol = 0, tpe = 0, tpe_sum = 0;
      // later commits overwrite earlier ones: one value per file, from the
      // contribution's final version of it
      std::map<std::string, std::pair<double, double>> per_file;
      for (const EditRecord *e : kept) {
        double lev = static_cast<double>(e->levenshtein.value_or(0));
        double age = static_cast<double>(e->timestamp - e->original_timestamp) / kSecondsPerYear;
        row.lev += lev;
        if (e->original_author == e->modifying_author) own_lev += lev;
        cyc += lev * *e->file_cyclomatic;
        nol += lev * *e->file_total_lines;
        tpe += lev * age;
        tpe_sum += age;
        per_file[e->path()] = {static_cast<double>(*e->file_cyclomatic),
                               static_cast<double>(*e->file_total_lines)};
      }
      if (row.ict <= 0 || row.lev <= 0) {
        ++report.rows_undefined;
        continue;
      }
      row.prod = row.lev / row.ict;
      row.own = own_lev / row.lev;
      row.cyc_l = cyc / row.lev;
      row.nol_l = nol / row.lev;
      row.tpe_l = tpe / row.lev;
      row.tpe_e = tpe_sum / static_cast<double>(kept.size());
      for (const auto &[file, v] : per_file) {
        row.cyc_f += v.first;
        row.nol_f += v.second;
      }
      row.nof = static_cast<double>(per_file.size());
      row.cyc_f /= row.nof;
      row.nol_f /= row.nof;
      row.noc_t = count_before(project_times, con.start_time) / 1000.0;
      row.noc_d = count_before(author_times, con.start_time) / 1000.0;
      row.nfc = static_cast<double>(con.start_time - authored.front().time) / kSecondsPerYear;
      row.wkd = utc_weekday(con.start_time) < 5;
      report.rows.push_back(std::move(row));
    }
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const auto &a, const auto &b) {
    if (a.start_time != b.start_time) return a.start_time < b.start_time;
    return a.author < b.author;
  });
  return report;
}

std::vector<FeatureRow> clean_rows(const std::vector<FeatureRow> &rows, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw Error(ErrorKind::InvalidArgument, "epsilon must lie in [0, 1)");
  if (epsilon == 0.0 || rows.empty()) return rows;
  std::vector<double> prods;
  for (const auto &r : rows) prods.push_back(r.prod);
  std::sort(prods.begin(), prods.end());
  const double n = static_cast<double>(rows.size());
  // the small slack keeps e.g. 0.95 * 100 at rank 95 despite binary rounding
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - epsilon) * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, rows.size());
  double threshold = prods[rank - 1];
  std::vector<FeatureRow> kept;
  for (const auto &r : rows)
    if (r.prod <= threshold) kept.push_back(r);
  return kept;
}

std::string render_feature_csv(const std::vector<FeatureRow> &rows) {
  std::ostringstream out;
  const auto &cols = feature_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto &r : rows) {
    out << csv_field(r.author) << "," << r.start_time;
    for (std::size_t i = 2; i < cols.size(); ++i) {
      out << ",";
      if (cols[i] == "wkd") out << (r.wkd ? 1 : 0);
      else out << format_double(feature_value(r, cols[i]));
    }
    out << "\n";
  }
  return out.str();
}

void export_feature_table(const std::vector<FeatureRow> &rows, const std::filesystem::path &out) {
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + out.string());
  f << render_feature_csv(rows);
  if (!f) throw Error(ErrorKind::InvalidArgument, "write failed for " + out.string());
}

std::vector<FeatureRow> parse_feature_csv(std::string_view text) {
  auto table = parse_csv(text);
  if (table.empty()) return {};
  if (table.front() != feature_columns())
    throw Error(ErrorKind::InvalidArgument, "not a feature table: unexpected header");
  std::vector<FeatureRow> rows;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto &t = table[i];
    if (t.size() != feature_columns().size())
      throw Error(ErrorKind::InvalidArgument, "feature row " + std::to_string(i) + " malformed");
    auto num = [&](std::size_t c) {
      double v = 0;
      auto [p, ec] = std::from_chars(t[c].data(), t[c].data() + t[c].size(), v);
      if (ec != std::errc()) throw Error(ErrorKind::InvalidArgument, "bad number '" + t[c] + "'");
      return v;
    };
    FeatureRow r;
    r.author = t[0];
    r.start_time = std::stoll(t[1]);
    r.lev = num(2);
    r.ict = num(3);
    r.prod = num(4);
    r.own = num(5);
    r.cyc_l = num(6);
    r.cyc_f = num(7);
    r.nol_l = num(8);
    r.nol_f = num(9);
    r.noc_t = num(10);
    r.nof = num(11);
    r.tpe_l = num(12);
    r.tpe_e = num(13);
    r.noc_d = num(14);
    r.nfc = num(15);
    r.wkd = t[16] == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

} // namespace coedit
