#pragma once

#include "coedit/store.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace coedit {

struct Contribution {
  std::string author;
  std::vector<std::string> commit_hashes; // in time order
  Timestamp start_time = 0;
  Timestamp end_time = 0;
  bool is_first_in_project = false; // the author's first contribution
};

struct AuthoredCommit {
  std::string hash;
  Timestamp time = 0;
};

/// Greedy chaining: a commit joins the running contribution iff its gap to
/// the previous member is strictly less than delta. Input must be sorted.
std::vector<Contribution> aggregate_contributions(const std::string &author,
                                                  const std::vector<AuthoredCommit> &commits,
                                                  Timestamp delta);

struct FeatureRow {
  std::string author;
  Timestamp start_time = 0;
  double lev = 0;   // characters
  double ict = 0;   // hours
  double prod = 0;  // characters per hour
  double own = 0;   // fraction of lev on own code
  double cyc_l = 0;
  double cyc_f = 0;
  double nol_l = 0;
  double nol_f = 0;
  double noc_t = 0; // thousands of commits
  double nof = 0;
  double tpe_l = 0; // years
  double tpe_e = 0; // years
  double noc_d = 0; // thousands of commits
  double nfc = 0;   // years
  bool wkd = false;

  bool operator==(const FeatureRow &) const = default;
};

/// Column names in export order.
const std::vector<std::string> &feature_columns();
/// Numeric value of a feature column by name (wkd as 0/1).
double feature_value(const FeatureRow &row, const std::string &column);

struct FeatureOptions {
  Timestamp delta = 5 * 60;
  bool drop_initial_commit = false;
};

struct FeatureReport {
  std::vector<FeatureRow> rows;
  std::size_t contributions = 0;
  std::size_t edits_considered = 0;
  std::size_t edits_not_replacement = 0;
  std::size_t edits_blank = 0;
  std::size_t edits_no_complexity = 0;
  std::size_t edits_initial_commit = 0;
  std::size_t rows_first_contribution = 0;
  std::size_t rows_without_edits = 0;
  std::size_t rows_undefined = 0; // ict <= 0 or lev = 0
};

FeatureReport compute_features(const Store &store, const FeatureOptions &options = {});

/// Removes rows whose prod exceeds the nearest-rank (1 - epsilon) quantile,
/// i.e. the value at rank ceil((1 - epsilon) * n) of the sorted prods.
/// Order of the kept rows is preserved.
std::vector<FeatureRow> clean_rows(const std::vector<FeatureRow> &rows, double epsilon);

std::string render_feature_csv(const std::vector<FeatureRow> &rows);
void export_feature_table(const std::vector<FeatureRow> &rows, const std::filesystem::path &out);
std::vector<FeatureRow> parse_feature_csv(std::string_view text);

// ---- statistics -------------------------------------------------------------

struct RankTestResult {
  double u_statistic = 0;
  double p_value = 1;
  bool exact = false;
  std::size_t n_own = 0;
  std::size_t n_foreign = 0;
  double median_own = 0;
  double median_foreign = 0;
  double mean_own = 0;
  double mean_foreign = 0;
};

/// One-sided rank-sum test, alternative: `own` is stochastically greater.
/// Exact null distribution (with mid-ranks) when n_own + n_foreign <= 20,
/// otherwise normal approximation with tie and continuity correction.
RankTestResult rank_test(const std::vector<double> &own, const std::vector<double> &foreign);

double median(std::vector<double> v);
double mean(const std::vector<double> &v);

/// Mid-ranks (1-based).
std::vector<double> average_ranks(const std::vector<double> &v);
std::optional<double> pearson(const std::vector<double> &x, const std::vector<double> &y);
std::optional<double> spearman(const std::vector<double> &x, const std::vector<double> &y);

struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> values;
};

CorrelationMatrix spearman_matrix(const std::vector<FeatureRow> &rows,
                                  const std::vector<std::string> &features);
CorrelationMatrix spearman_matrix(const std::vector<std::vector<double>> &columns,
                                  const std::vector<std::string> &names);

struct LinearModel {
  std::vector<std::string> names; // "(Intercept)" first
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  std::vector<double> t_values;
  std::vector<double> p_values;
  std::size_t n = 0;
  std::size_t df_residual = 0;
  double r_squared = 0;
};

/// OLS with intercept. Throws Error(RankDeficient) naming the collinear
/// columns, InvalidArgument when rows < predictors + 2.
LinearModel fit_ols(const std::vector<std::vector<double>> &predictors,
                    const std::vector<std::string> &names, const std::vector<double> &y);

/// prod ~ own + cyc_l + nof + noc_d + noc_t + tpe_l + nfc + wkd
const std::vector<std::string> &lm_predictors();
LinearModel fit_lm(const std::vector<FeatureRow> &rows);

/// {test, p_value, medians, means, coefficients, ...} for the CLI.
std::string statistics_report_json(const std::vector<FeatureRow> &rows);

} // namespace coedit
