#include "coedit/error.hpp"
#include "coedit/productivity.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace coedit {

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double> &v) {
  if (v.empty()) return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> average_ranks(const std::vector<double> &v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

RankTestResult rank_test(const std::vector<double> &own, const std::vector<double> &foreign) {
  if (own.empty() || foreign.empty())
    throw Error(ErrorKind::InvalidArgument, "rank test needs two non-empty samples");
  RankTestResult res;
  res.n_own = own.size();
  res.n_foreign = foreign.size();
  res.median_own = median(own);
  res.median_foreign = median(foreign);
  res.mean_own = mean(own);
  res.mean_foreign = mean(foreign);

  std::vector<double> pooled(own);
  pooled.insert(pooled.end(), foreign.begin(), foreign.end());
  auto ranks = average_ranks(pooled);
  const std::size_t n1 = own.size(), n2 = foreign.size(), n = n1 + n2;
  double r1 = 0;
  for (std::size_t i = 0; i < n1; ++i) r1 += ranks[i];
  const double d1 = static_cast<double>(n1), d2 = static_cast<double>(n2), dn = static_cast<double>(n);
  res.u_statistic = r1 - d1 * (d1 + 1) / 2;

  if (n <= 20) {
    res.exact = true;
    // Doubled mid-ranks are integers; count size-n1 subsets by rank sum.
    std::vector<int> twice(n);
    int total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      twice[i] = static_cast<int>(std::lround(2 * ranks[i]));
      total += twice[i];
    }
    std::vector<std::vector<double>> count(n1 + 1, std::vector<double>(total + 1, 0.0));
    count[0][0] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = std::min(i + 1, n1); k >= 1; --k)
        for (int s = total; s >= twice[i]; --s) count[k][s] += count[k - 1][s - twice[i]];
    }
    int observed = static_cast<int>(std::lround(2 * r1));
    double hits = 0, all = 0;
    for (int s = 0; s <= total; ++s) {
      all += count[n1][s];
      if (s >= observed) hits += count[n1][s];
    }
    res.p_value = hits / all;
    return res;
  }

  double ties = 0;
  std::vector<double> sorted(ranks);
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  double mu = d1 * d2 / 2;
  double var = d1 * d2 / 12 * ((dn + 1) - ties / (dn * (dn - 1)));
  if (var <= 0) {
    res.p_value = 1.0;
    return res;
  }
  double z = (res.u_statistic - mu - 0.5) / std::sqrt(var);
  res.p_value = 0.5 * std::erfc(z / std::sqrt(2.0));
  return res;
}

std::optional<double> pearson(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> spearman(const std::vector<double> &x, const std::vector<double> &y) {
  return pearson(average_ranks(x), average_ranks(y));
}

CorrelationMatrix spearman_matrix(const std::vector<std::vector<double>> &columns,
                                  const std::vector<std::string> &names) {
  if (!columns.empty() && columns.front().size() < 3)
    throw Error(ErrorKind::InvalidArgument, "Spearman correlations need at least 3 rows");
  CorrelationMatrix m;
  m.names = names;
  std::vector<std::vector<double>> ranks;
  for (const auto &c : columns) ranks.push_back(average_ranks(c));
  const std::size_t k = columns.size();
  m.values.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      auto r = pearson(ranks[i], ranks[j]);
      if (i == j && r) r = 1.0;
      m.values[i][j] = m.values[j][i] = r;
    }
  }
  return m;
}

CorrelationMatrix spearman_matrix(const std::vector<FeatureRow> &rows,
                                  const std::vector<std::string> &features) {
  if (rows.size() < 3) throw Error(ErrorKind::InvalidArgument, "Spearman correlations need at least 3 rows");
  std::vector<std::vector<double>> columns;
  for (const auto &f : features) {
    std::vector<double> c;
    for (const auto &r : rows) c.push_back(feature_value(r, f));
    columns.push_back(std::move(c));
  }
  return spearman_matrix(columns, features);
}

LinearModel fit_ols(const std::vector<std::vector<double>> &predictors,
                    const std::vector<std::string> &names, const std::vector<double> &y) {
  const std::size_t n = y.size();
  const std::size_t p = predictors.size() + 1;
  if (names.size() != predictors.size())
    throw Error(ErrorKind::InvalidArgument, "predictor names and columns differ in number");
  if (n < p + 1)
    throw Error(ErrorKind::InvalidArgument,
                "linear model needs at least " + std::to_string(p + 1) + " rows, got " +
                    std::to_string(n));
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    auto r = static_cast<Eigen::Index>(i);
    X(r, 0) = 1.0;
    for (std::size_t j = 0; j < predictors.size(); ++j) {
      if (predictors[j].size() != n)
        throw Error(ErrorKind::InvalidArgument, "column " + names[j] + " has the wrong length");
      X(r, static_cast<Eigen::Index>(j + 1)) = predictors[j][i];
    }
    Y(r) = y[i];
  }

  LinearModel lm;
  lm.names = {"(Intercept)"};
  lm.names.insert(lm.names.end(), names.begin(), names.end());
  lm.n = n;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  const auto rank = static_cast<std::size_t>(qr.rank());
  const auto &perm = qr.colsPermutation().indices();
  if (rank < p) {
    // each column left out of the pivoted basis, plus the basis columns it
    // is a combination of
    const auto r = static_cast<Eigen::Index>(rank);
    Eigen::MatrixXd R = qr.matrixR().topLeftCorner(r, static_cast<Eigen::Index>(p)).triangularView<Eigen::Upper>();
    std::set<std::size_t> involved;
    for (Eigen::Index j = r; j < static_cast<Eigen::Index>(p); ++j) {
      involved.insert(static_cast<std::size_t>(perm(j)));
      Eigen::VectorXd coef =
          R.topLeftCorner(r, r).triangularView<Eigen::Upper>().solve(R.col(j).head(r));
      for (Eigen::Index k = 0; k < r; ++k)
        if (std::abs(coef(k)) > 1e-8) involved.insert(static_cast<std::size_t>(perm(k)));
    }
    std::string cols;
    for (auto j : involved) cols += (cols.empty() ? "" : ", ") + lm.names[j];
    throw Error(ErrorKind::RankDeficient, "design matrix is rank deficient; collinear columns: " + cols);
  }

  Eigen::VectorXd beta = qr.solve(Y);
  Eigen::VectorXd resid = Y - X * beta;
  double rss = resid.squaredNorm();
  double ybar = Y.mean();
  double tss = (Y.array() - ybar).square().sum();
  lm.df_residual = n - p;
  double sigma2 = rss / static_cast<double>(lm.df_residual);
  lm.r_squared = tss > 0 ? 1.0 - rss / tss : 1.0;

  // (X'X)^-1 = P R^-1 R^-T P'
  Eigen::MatrixXd R = qr.matrixR().topLeftCorner(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p))
                          .triangularView<Eigen::Upper>();
  Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
  Eigen::MatrixXd cov_perm = Rinv * Rinv.transpose();
  std::vector<double> var(p);
  for (std::size_t j = 0; j < p; ++j) {
    auto pj = static_cast<Eigen::Index>(j);
    var[static_cast<std::size_t>(perm(pj))] = cov_perm(pj, pj);
  }

  boost::math::students_t dist(static_cast<double>(lm.df_residual));
  for (std::size_t j = 0; j < p; ++j) {
    double b = beta(static_cast<Eigen::Index>(j));
    double se = std::sqrt(sigma2 * var[j]);
    double t = se > 0 ? b / se : (b == 0 ? 0.0 : std::copysign(INFINITY, b));
    double pv = std::isinf(t) ? 0.0 : 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
    lm.coefficients.push_back(b);
    lm.standard_errors.push_back(se);
    lm.t_values.push_back(t);
    lm.p_values.push_back(pv);
  }
  return lm;
}

const std::vector<std::string> &lm_predictors() {
  static const std::vector<std::string> p = {"own", "cyc_l", "nof", "noc_d",
                                             "noc_t", "tpe_l", "nfc", "wkd"};
  return p;
}

LinearModel fit_lm(const std::vector<FeatureRow> &rows) {
  std::vector<std::vector<double>> cols;
  for (const auto &name : lm_predictors()) {
    std::vector<double> c;
    for (const auto &r : rows) c.push_back(feature_value(r, name));
    cols.push_back(std::move(c));
  }
  std::vector<double> y;
  for (const auto &r : rows) y.push_back(r.prod);
  return fit_ols(cols, lm_predictors(), y);
}

namespace {

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

} // namespace

std::string statistics_report_json(const std::vector<FeatureRow> &rows) {
  nlohmann::json j;
  j["rows"] = rows.size();
  j["test"] = "rank-sum, one-sided: prod(own >= 0.5) > prod(own < 0.5)";
  std::vector<double> own, foreign;
  for (const auto &r : rows) (r.own >= 0.5 ? own : foreign).push_back(r.prod);
  if (own.empty() || foreign.empty()) {
    j["p_value"] = nullptr;
    j["rank_test_error"] = "one of the groups is empty";
  } else {
    auto t = rank_test(own, foreign);
    j["p_value"] = t.p_value;
    j["u_statistic"] = t.u_statistic;
    j["exact"] = t.exact;
    j["n"] = {{"own", t.n_own}, {"foreign", t.n_foreign}};
    j["medians"] = {{"own", t.median_own}, {"foreign", t.median_foreign}};
    j["means"] = {{"own", t.mean_own}, {"foreign", t.mean_foreign}};
  }
  try {
    auto lm = fit_lm(rows);
    nlohmann::json coef = nlohmann::json::object();
    for (std::size_t i = 0; i < lm.names.size(); ++i) {
      coef[lm.names[i]] = {{"estimate", number_or_null(lm.coefficients[i])},
                           {"std_error", number_or_null(lm.standard_errors[i])},
                           {"t_value", number_or_null(lm.t_values[i])},
                           {"p_value", number_or_null(lm.p_values[i])}};
    }
    j["coefficients"] = coef;
    j["lm"] = {{"formula", "prod ~ own + cyc_l + nof + noc_d + noc_t + tpe_l + nfc + wkd"},
               {"n", lm.n},
               {"df_residual", lm.df_residual},
               {"r_squared", number_or_null(lm.r_squared)}};
  } catch (const Error &e) {
    j["coefficients"] = nullptr;
    j["lm_error"] = e.what();
  }
  if (rows.size() >= 3) {
    std::vector<std::string> names(feature_columns().begin() + 2, feature_columns().end());
    auto m = spearman_matrix(rows, names);
    nlohmann::json sp = nlohmann::json::object();
    for (std::size_t a = 0; a < names.size(); ++a) {
      nlohmann::json row = nlohmann::json::object();
      for (std::size_t b = 0; b < names.size(); ++b)
        row[names[b]] = m.values[a][b] ? nlohmann::json(*m.values[a][b]) : nlohmann::json(nullptr);
      sp[names[a]] = row;
    }
    j["spearman"] = sp;
  }
  return j.dump(2);
}

} // namespace coedit
