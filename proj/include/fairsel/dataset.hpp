#pragma once

// Selection experiments on real scores: a CSV column is taken as the latent
// quality W, synthetic group-dependent noise produces W_hat, and the finite
// selection rules are compared across budgets and noise ratios.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fairsel/asymptotic.hpp"
#include "fairsel/errors.hpp"
#include "fairsel/model.hpp"
#include "fairsel/montecarlo.hpp"
#include "fairsel/records.hpp"
#include "fairsel/rng.hpp"

namespace fairsel::data {

// One parsed CSV row and the physical line it started on.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC 4180: comma separated, double-quoted fields may hold commas, quotes
// ("") and line breaks; CRLF and LF line ends both accepted. Blank lines are
// skipped.
[[nodiscard]] inline std::vector<CsvRow> parse_csv(std::istream& in) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  row.line = 1;
  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    const bool blank = row.fields.size() == 1 && row.fields[0].empty();
    if (!blank) rows.push_back(std::move(row));
    row = CsvRow{};
  };
  char ch = 0;
  while (in.get(ch)) {
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started || !field.empty()) {
          throw schema_error("line " + std::to_string(line) + ": stray quote inside a field");
        }
        quoted = true;
        field_started = true;
        break;
      case ',': end_field(); break;
      case '\r':
        if (in.peek() != '\n') field.push_back(ch);
        break;
      case '\n':
        end_field();
        end_row();
        row.line = ++line;
        break;
      default: field.push_back(ch); field_started = true;
    }
  }
  if (quoted) throw schema_error("line " + std::to_string(line) + ": unterminated quoted field");
  if (field_started || !field.empty() || !row.fields.empty()) {
    end_field();
    end_row();
  }
  return rows;
}

// Quotes a field when it contains a delimiter, quote or line break.
[[nodiscard]] inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct Record {
  std::string id;
  Group group = Group::A;
  double quality = 0.0;

  friend bool operator==(const Record&, const Record&) = default;
};

struct Schema {
  std::string id_col = "id";
  std::string group_col = "group";
  std::string quality_col = "quality";
};

// Label -> group, e.g. {"F": A, "M": B}.
using GroupMap = std::map<std::string, Group, std::less<>>;

// Parses "F=A,M=B".
[[nodiscard]] inline GroupMap parse_group_map(std::string_view spec) {
  GroupMap out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', pos), spec.size());
    std::string_view item = spec.substr(pos, comma - pos);
    while (!item.empty() && (item.front() == ' ' || item.front() == '\t')) item.remove_prefix(1);
    while (!item.empty() && (item.back() == ' ' || item.back() == '\t')) item.remove_suffix(1);
    const std::size_t eq = item.rfind('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw configuration_error("group map entry '" + std::string(item) +
                                "' is not of the form label=A or label=B");
    }
    std::string_view target = item.substr(eq + 1);
    while (!target.empty() && target.front() == ' ') target.remove_prefix(1);
    std::string_view label = item.substr(0, eq);
    while (!label.empty() && label.back() == ' ') label.remove_suffix(1);
    if (target != "A" && target != "B") {
      throw configuration_error("group map entry '" + std::string(item) +
                                "' must map to A or B");
    }
    out[std::string(label)] = target == "A" ? Group::A : Group::B;
    pos = comma + 1;
  }
  return out;
}

struct LoadResult {
  std::vector<Record> records;
  std::size_t dropped = 0;                // rows with a blank or non-numeric quality
  std::vector<std::size_t> dropped_lines;  // their line numbers
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

inline std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == name) return i;
  }
  std::string cols;
  for (const auto& h : header) cols += (cols.empty() ? "" : ", ") + h;
  throw schema_error("column '" + name + "' not found; header has: " + cols);
}

}  // namespace detail

[[nodiscard]] inline LoadResult load_records(std::istream& in, const Schema& schema,
                                             const GroupMap& group_map) {
  const auto rows = parse_csv(in);
  if (rows.empty()) throw schema_error("input has no header row");
  const auto& header = rows.front().fields;
  const std::size_t id_i = detail::column_index(header, schema.id_col);
  const std::size_t group_i = detail::column_index(header, schema.group_col);
  const std::size_t quality_i = detail::column_index(header, schema.quality_col);
  const std::size_t width = std::max({id_i, group_i, quality_i}) + 1;

  LoadResult out;
  std::map<std::string, std::vector<std::size_t>> unknown;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() < width) {
      throw schema_error("line " + std::to_string(row.line) + ": expected at least " +
                         std::to_string(width) + " fields, found " +
                         std::to_string(row.fields.size()));
    }
    const std::string label(detail::trim(row.fields[group_i]));
    const auto g = group_map.find(label);
    if (g == group_map.end()) {
      unknown[label].push_back(row.line);
      continue;
    }
    double q = 0.0;
    if (!detail::parse_double(row.fields[quality_i], q)) {
      ++out.dropped;
      out.dropped_lines.push_back(row.line);
      continue;
    }
    out.records.push_back({row.fields[id_i], g->second, q});
  }
  if (!unknown.empty()) {
    std::string msg = "unknown group labels:";
    for (const auto& [label, lines] : unknown) {
      msg += " '" + label + "' (line";
      msg += lines.size() > 1 ? "s " : " ";
      for (std::size_t i = 0; i < lines.size() && i < 10; ++i) {
        msg += (i ? "," : "") + std::to_string(lines[i]);
      }
      if (lines.size() > 10) msg += ",...";
      msg += ")";
    }
    throw schema_error(msg);
  }
  for (Group g : {Group::A, Group::B}) {
    const bool present = std::any_of(out.records.begin(), out.records.end(),
                                     [g](const Record& r) { return r.group == g; });
    if (!present) {
      throw configuration_error(std::string("group ") + to_string(g) +
                                " has no records with a usable quality value");
    }
  }
  return out;
}

[[nodiscard]] inline LoadResult load_records(const std::string& path, const Schema& schema,
                                             const GroupMap& group_map) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw configuration_error("cannot open '" + path + "'");
  return load_records(in, schema, group_map);
}

// Writes records back as id,group,quality with the group labels given.
inline void write_records(std::ostream& out, const std::vector<Record>& records,
                          const Schema& schema, const std::array<std::string, 2>& labels) {
  out << csv_escape(schema.id_col) << ',' << csv_escape(schema.group_col) << ','
      << csv_escape(schema.quality_col) << '\n';
  std::array<char, 32> buf{};
  for (const auto& r : records) {
    const int len = std::snprintf(buf.data(), buf.size(), "%.17g", r.quality);
    out << csv_escape(r.id) << ',' << csv_escape(labels[static_cast<std::size_t>(r.group)]) << ','
        << std::string_view(buf.data(), static_cast<std::size_t>(len)) << '\n';
  }
}

struct GroupStats {
  double mean = 0.0;
  double std = 0.0;  // population convention (divide by count)
  std::size_t count = 0;
};

[[nodiscard]] inline std::array<GroupStats, 2> group_stats(const std::vector<Record>& records) {
  std::array<GroupStats, 2> out{};
  std::array<double, 2> total{};
  for (const auto& r : records) {
    const auto g = static_cast<std::size_t>(r.group);
    ++out[g].count;
    total[g] += r.quality;
  }
  for (std::size_t g = 0; g < 2; ++g) {
    if (out[g].count == 0) {
      throw configuration_error(std::string("group ") + to_string(static_cast<Group>(g)) +
                                " is empty");
    }
    out[g].mean = total[g] / static_cast<double>(out[g].count);
  }
  std::array<double, 2> ss{};
  for (const auto& r : records) {
    const auto g = static_cast<std::size_t>(r.group);
    const double d = r.quality - out[g].mean;
    ss[g] += d * d;
  }
  for (std::size_t g = 0; g < 2; ++g) out[g].std = std::sqrt(ss[g] / static_cast<double>(out[g].count));
  return out;
}

// Cohort with W from the records (in file order) and W_hat = W - beta + sigma * eps.
// The cohort's priors are the per-group empirical normals, used for Bayesian
// scoring. Deviate i comes from counter (replication, i), so runs that differ
// only in sigma share their noise draws.
[[nodiscard]] inline mc::Cohort synthesize_cohort(const std::vector<Record>& records,
                                                  std::array<double, 2> sigma,
                                                  std::array<double, 2> beta, std::uint64_t seed,
                                                  std::uint32_t replication = 0) {
  for (double s : sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw domain_error("sigma must be finite and >= 0");
  }
  if (records.size() > 0xFFFFFFFFu) throw configuration_error("too many records");
  const auto stats = group_stats(records);
  mc::Cohort c;
  c.seed = seed;
  c.replication = replication;
  c.n_a = stats[0].count;
  c.n_b = stats[1].count;
  c.spec.p_a = static_cast<double>(c.n_a) / static_cast<double>(records.size());
  for (std::size_t g = 0; g < 2; ++g) {
    c.spec.prior[g] = NormalPrior{stats[g].mean, stats[g].std};
    c.spec.sigma[g] = sigma[g];
    c.spec.beta[g] = beta[g];
  }
  const rng::CounterRng gen(seed);
  c.candidates.resize(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto idx = static_cast<std::uint32_t>(i);
    const auto g = static_cast<std::size_t>(records[i].group);
    double w_hat = records[i].quality - beta[g];
    if (sigma[g] > 0.0) w_hat += sigma[g] * gen.normal(replication, idx, rng::Stream::noise);
    c.candidates[i] = {idx, records[i].group, records[i].quality, w_hat};
  }
  return c;
}

struct ExperimentConfig {
  std::vector<double> alpha_grid;  // in (0, 1]
  std::vector<Algorithm> algorithms{std::begin(all_algorithms), std::end(all_algorithms)};
  double gamma = 0.8;
  std::vector<double> k_values{1.0};
  // The scaled group gets noise k * sigma, the other group sigma.
  double sigma = 1.0;
  Group scaled_group = Group::A;
  std::array<double, 2> beta{0.0, 0.0};
  std::uint64_t seed = 0;
};

struct ExperimentResult {
  std::vector<CurveRecord> records;  // k-major, then alpha, then algorithm
  std::vector<std::string> notes;    // skipped points
};

namespace detail {

// Smallest W_hat among the selected members of group g; NaN if none.
inline double applied_threshold(const mc::Cohort& c, const mc::SelectionResult& r, Group g) {
  double t = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::uint32_t i : r.selected) {
    if (c.candidates[i].group != g) continue;
    any = true;
    t = std::min(t, c.candidates[i].w_hat);
  }
  return any ? t : nan_value;
}

}  // namespace detail

[[nodiscard]] inline ExperimentResult run_dataset_experiment(const std::vector<Record>& records,
                                                             const ExperimentConfig& cfg) {
  if (cfg.alpha_grid.empty()) throw configuration_error("empty alpha grid");
  for (double a : cfg.alpha_grid) {
    if (!(a > 0.0 && a <= 1.0)) {
      throw configuration_error("dataset alpha values must lie in (0, 1], got " + std::to_string(a));
    }
  }
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) throw configuration_error("gamma must lie in [0, 1]");
  if (!(cfg.sigma >= 0.0) || !std::isfinite(cfg.sigma)) {
    throw configuration_error("sigma must be finite and >= 0");
  }
  for (double k : cfg.k_values) {
    if (!(k >= 0.0) || !std::isfinite(k)) throw configuration_error("k must be finite and >= 0");
  }

  ExperimentResult out;
  const std::size_t n = records.size();
  const auto scaled = static_cast<std::size_t>(cfg.scaled_group);
  for (double k : cfg.k_values) {
    std::array<double, 2> sigma{cfg.sigma, cfg.sigma};
    sigma[scaled] = k * cfg.sigma;
    const mc::Cohort cohort = synthesize_cohort(records, sigma, cfg.beta, cfg.seed);
    const mc::CohortSelector selector(cohort, mc::Scoring::closed_form_normal, true);

    // Normal-theory overlays from the plug-in model.
    double cross_obl = nan_value, cross_bayes = nan_value, a_min = nan_value, a_max = nan_value;
    std::optional<PopulationModel> plug;
    try {
      plug = cohort.spec.moment_model();
      if (auto c = asymptotic::crossover_budget_oblivious(*plug)) cross_obl = *c;
      if (auto c = asymptotic::crossover_budget_bayesian(*plug)) cross_bayes = *c;
      const auto region = asymptotic::improvement_region(*plug);
      a_min = region.alpha_min;
      a_max = region.alpha_max;
    } catch (const error& e) {
      out.notes.push_back("k = " + std::to_string(k) + ": no normal-theory overlay (" + e.what() +
                          ")");
      plug.reset();
    }

    for (double alpha : cfg.alpha_grid) {
      const auto m = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
      if (m < 1) {
        out.notes.push_back("alpha = " + std::to_string(alpha) + ", k = " + std::to_string(k) +
                            ": floor(alpha n) < 1, point skipped");
        continue;
      }
      const double q_obl = mc::sample_utility(cohort, selector.select(Algorithm::oblivious, m, 0.0));
      const double q_opt = mc::sample_utility(cohort, selector.select(Algorithm::bayesian, m, 0.0));
      const double q_dp =
          mc::sample_utility(cohort, selector.select(Algorithm::demographic_parity, m, 1.0));
      double bound = nan_value, bound_gamma = nan_value;
      if (plug && alpha < 1.0) {
        try {
          bound = asymptotic::fairness_cost_bound(*plug, Budget(alpha), GammaLevel(1.0)).upper;
          bound_gamma =
              asymptotic::fairness_cost_bound(*plug, Budget(alpha), GammaLevel(cfg.gamma)).upper;
        } catch (const error&) {
        }
      }
      for (Algorithm alg : cfg.algorithms) {
        const auto res = selector.select(alg, m, cfg.gamma);
        const auto [xa, xb] = mc::selection_fractions(cohort, res);
        CurveRecord rec;
        rec.alpha = alpha;
        rec.algorithm = alg;
        rec.gamma = effective_gamma(alg, cfg.gamma);
        rec.x_a = xa;
        rec.x_b = xb;
        rec.theta_a = detail::applied_threshold(cohort, res, Group::A);
        rec.theta_b = detail::applied_threshold(cohort, res, Group::B);
        rec.utility = mc::sample_utility(cohort, res);
        rec.ratio_dp_obl = q_dp / q_obl;
        rec.ratio_opt_dp = q_opt / q_dp;
        rec.crossover_obl = cross_obl;
        rec.crossover_bayes = cross_bayes;
        rec.alpha_min = a_min;
        rec.alpha_max = a_max;
        rec.fairness_bound = bound;
        rec.fairness_bound_gamma = bound_gamma;
        rec.k = k;
        rec.source = "dataset";
        out.records.push_back(std::move(rec));
      }
    }
  }
  return out;
}

}  // namespace fairsel::data
