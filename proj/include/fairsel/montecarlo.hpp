#pragma once

// Finite-population selection: seeded cohorts, the selection rules applied to
// a sample, and a replication harness that averages sample utilities.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "fairsel/asymptotic.hpp"
#include "fairsel/errors.hpp"
#include "fairsel/model.hpp"
#include "fairsel/prior.hpp"
#include "fairsel/records.hpp"
#include "fairsel/rng.hpp"

namespace fairsel::mc {

// Quality prior and estimator per group, plus the group-A share.
struct CohortSpec {
  std::array<QualityPrior, 2> prior{};
  std::array<double, 2> beta{0.0, 0.0};
  std::array<double, 2> sigma{0.0, 0.0};
  double p_a = 0.5;

  [[nodiscard]] static CohortSpec from_model(const PopulationModel& pop) {
    CohortSpec s;
    for (Group g : {Group::A, Group::B}) {
      const auto& p = pop.group(g);
      const auto i = static_cast<std::size_t>(g);
      s.prior[i] = NormalPrior{p.mu, p.eta};
      s.beta[i] = p.beta;
      s.sigma[i] = p.sigma;
    }
    s.p_a = pop.p_a();
    return s;
  }

  [[nodiscard]] bool normal_priors() const noexcept {
    return prior[0].is_normal() && prior[1].is_normal();
  }

  // Normal model with each prior replaced by N(mean, sd^2).
  [[nodiscard]] PopulationModel moment_model(bool allow_degenerate = false) const {
    std::array<GroupParams, 2> g{};
    for (std::size_t i = 0; i < 2; ++i) {
      g[i] = {prior[i].mean(), prior[i].sd(), beta[i], sigma[i]};
    }
    return PopulationModel(g[0], g[1], p_a, allow_degenerate);
  }
};

struct Candidate {
  std::uint32_t index = 0;
  Group group = Group::A;
  double w = 0.0;      // latent quality
  double w_hat = 0.0;  // estimate
};

struct Cohort {
  std::vector<Candidate> candidates;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  CohortSpec spec;
  std::uint64_t seed = 0;
  std::uint32_t replication = 0;

  [[nodiscard]] std::size_t size() const noexcept { return candidates.size(); }
  [[nodiscard]] std::size_t group_size(Group g) const noexcept {
    return g == Group::A ? n_a : n_b;
  }
};

// n_A = floor(p_A n) A-candidates followed by n - n_A B-candidates. Candidate i
// draws its quality and noise from counters (replication, i).
[[nodiscard]] inline Cohort generate_cohort(const CohortSpec& spec, std::size_t n,
                                            std::uint64_t seed, std::uint32_t replication = 0) {
  if (n < 2) throw configuration_error("cohort needs at least two candidates");
  if (n > 0xFFFFFFFFu) throw configuration_error("cohort size exceeds the 32-bit index range");
  const auto n_a = static_cast<std::size_t>(std::floor(spec.p_a * static_cast<double>(n)));
  if (n_a == 0 || n_a == n) {
    throw configuration_error("n = " + std::to_string(n) + " leaves a group empty at p_a = " +
                              std::to_string(spec.p_a));
  }
  for (double s : spec.sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw domain_error("noise sigma must be finite, >= 0");
  }
  const rng::CounterRng gen(seed);
  Cohort c;
  c.n_a = n_a;
  c.n_b = n - n_a;
  c.spec = spec;
  c.seed = seed;
  c.replication = replication;
  c.candidates.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::uint32_t>(i);
    const Group g = i < n_a ? Group::A : Group::B;
    const auto gi = static_cast<std::size_t>(g);
    const double w = spec.prior[gi].sample(gen, replication, idx);
    double w_hat = w - spec.beta[gi];
    if (spec.sigma[gi] > 0.0) w_hat += spec.sigma[gi] * gen.normal(replication, idx, rng::Stream::noise);
    c.candidates[i] = {idx, g, w, w_hat};
  }
  return c;
}

enum class Scoring {
  automatic,           // closed form for normal priors, quadrature otherwise
  closed_form_normal,  // affine shrinkage; normal priors only
  quadrature,          // numerical posterior mean under the actual prior
  plugin_normal,       // closed form under a moment-matched normal prior
};

[[nodiscard]] inline const char* to_string(Scoring s) noexcept {
  switch (s) {
    case Scoring::automatic: return "auto";
    case Scoring::closed_form_normal: return "closed_form";
    case Scoring::quadrature: return "quadrature";
    case Scoring::plugin_normal: return "plugin";
  }
  return "?";
}

[[nodiscard]] inline std::optional<Scoring> parse_scoring(std::string_view s) {
  if (s == "auto") return Scoring::automatic;
  if (s == "closed_form" || s == "closed_form_normal") return Scoring::closed_form_normal;
  if (s == "quadrature") return Scoring::quadrature;
  if (s == "plugin" || s == "plugin_normal") return Scoring::plugin_normal;
  return std::nullopt;
}

// Posterior means E[W | W_hat] for every candidate.
[[nodiscard]] inline std::vector<double> score_bayesian(const Cohort& cohort,
                                                        Scoring scoring = Scoring::automatic) {
  const auto& spec = cohort.spec;
  if (scoring == Scoring::automatic) {
    scoring = spec.normal_priors() ? Scoring::closed_form_normal : Scoring::quadrature;
  }
  if (scoring == Scoring::closed_form_normal && !spec.normal_priors()) {
    throw scoring_error("closed-form posterior scoring requires normal priors; the cohort uses " +
                        spec.prior[0].name() + "/" + spec.prior[1].name());
  }
  std::array<GroupParams, 2> params{};
  for (std::size_t i = 0; i < 2; ++i) {
    params[i] = {spec.prior[i].mean(), spec.prior[i].sd(), spec.beta[i], spec.sigma[i]};
    if (scoring != Scoring::quadrature && !std::isfinite(params[i].eta)) {
      throw scoring_error("plug-in normal scoring needs a prior with finite variance");
    }
  }
  std::vector<double> out(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    const auto& c = cohort.candidates[i];
    const auto gi = static_cast<std::size_t>(c.group);
    if (scoring == Scoring::quadrature) {
      out[i] = posterior_mean_numeric(c.w_hat, spec.prior[gi], spec.sigma[gi], spec.beta[gi]);
    } else if (params[gi].sigma == 0.0) {
      out[i] = c.w_hat + params[gi].beta;
    } else {
      out[i] = posterior_mean(c.w_hat, params[gi]);
    }
  }
  return out;
}

[[nodiscard]] inline std::vector<double> score_oblivious(const Cohort& cohort) {
  std::vector<double> out(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) out[i] = cohort.candidates[i].w_hat;
  return out;
}

struct SelectionResult {
  Algorithm algorithm = Algorithm::oblivious;
  std::vector<std::uint32_t> selected;  // candidate indices, in order of selection
  std::size_t count_a = 0;
  std::size_t count_b = 0;
};

// Candidates sorted by score (descending, ties by index), globally and per
// group, so repeated selections at different m share one sort.
class Ranking {
 public:
  Ranking(const Cohort& cohort, std::vector<double> scores)
      : cohort_(&cohort), scores_(std::move(scores)) {
    if (scores_.size() != cohort.size()) throw domain_error("one score per candidate required");
    for (double s : scores_) {
      if (std::isnan(s)) throw numeric_error("NaN candidate score");
    }
    order_.resize(scores_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    std::sort(order_.begin(), order_.end(), [this](std::uint32_t l, std::uint32_t r) {
      if (scores_[l] != scores_[r]) return scores_[l] > scores_[r];
      return l < r;
    });
    rank_in_group_.resize(scores_.size());
    for (std::uint32_t i : order_) {
      auto& list = by_group_[static_cast<std::size_t>(cohort.candidates[i].group)];
      rank_in_group_[i] = list.size();
      list.push_back(i);
    }
  }

  [[nodiscard]] const Cohort& cohort() const noexcept { return *cohort_; }
  [[nodiscard]] std::span<const double> scores() const noexcept { return scores_; }
  [[nodiscard]] std::span<const std::uint32_t> order() const noexcept { return order_; }
  [[nodiscard]] std::span<const std::uint32_t> order(Group g) const noexcept {
    return by_group_[static_cast<std::size_t>(g)];
  }

  // Top m by score.
  [[nodiscard]] SelectionResult top(std::size_t m, Algorithm tag) const {
    check_m(m);
    SelectionResult r;
    r.algorithm = tag;
    r.selected.assign(order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(m));
    count(r);
    return r;
  }

  // The best q_A A-candidates and q_B B-candidates, then the best of the rest
  // until m are chosen.
  [[nodiscard]] SelectionResult with_quotas(std::size_t m, std::size_t q_a, std::size_t q_b,
                                            Algorithm tag) const {
    check_m(m);
    if (q_a + q_b > m) throw constraint_error("quotas exceed the number of seats");
    SelectionResult r;
    r.algorithm = tag;
    r.selected.reserve(m);
    const std::array<std::size_t, 2> quota{q_a, q_b};
    for (std::size_t gi = 0; gi < 2; ++gi) {
      const auto& list = by_group_[gi];
      const std::size_t take = std::min(quota[gi], list.size());
      r.selected.insert(r.selected.end(), list.begin(),
                        list.begin() + static_cast<std::ptrdiff_t>(take));
    }
    for (std::uint32_t i : order_) {
      if (r.selected.size() >= m) break;
      const auto gi = static_cast<std::size_t>(cohort_->candidates[i].group);
      if (rank_in_group_[i] < quota[gi]) continue;
      r.selected.push_back(i);
    }
    count(r);
    return r;
  }

 private:
  void check_m(std::size_t m) const {
    if (m < 1 || m > scores_.size()) {
      throw domain_error("selection size m = " + std::to_string(m) + " must lie in [1, " +
                         std::to_string(scores_.size()) + "]");
    }
  }

  void count(SelectionResult& r) const {
    for (std::uint32_t i : r.selected) {
      if (cohort_->candidates[i].group == Group::A) {
        ++r.count_a;
      } else {
        ++r.count_b;
      }
    }
  }

  const Cohort* cohort_;
  std::vector<double> scores_;
  std::vector<std::uint32_t> order_;
  std::array<std::vector<std::uint32_t>, 2> by_group_;
  std::vector<std::size_t> rank_in_group_;
};

// Minimum per-group counts under the gamma rule, ceil(m gamma n_A / (n_B + gamma n_A))
// and ceil(m gamma n_B / (n_A + gamma n_B)), capped at the group size. When the
// two together exceed m the larger is lowered by one (B on a tie) until they fit.
[[nodiscard]] inline std::array<std::size_t, 2> gamma_quotas(std::size_t m, std::size_t n_a,
                                                             std::size_t n_b, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw domain_error("gamma must lie in [0, 1]");
  const double md = static_cast<double>(m);
  const double na = static_cast<double>(n_a);
  const double nb = static_cast<double>(n_b);
  auto quota = [&](double own, double rest, std::size_t cap) -> std::size_t {
    const double denom = rest + gamma * own;
    if (gamma == 0.0 || denom <= 0.0) return 0;
    const double raw = md * gamma * own / denom;
    const auto q = static_cast<std::size_t>(std::max(0.0, std::ceil(raw - 1e-9)));
    return std::min(q, cap);
  };
  std::array<std::size_t, 2> q{quota(na, nb, n_a), quota(nb, na, n_b)};
  while (q[0] + q[1] > m) {
    if (q[0] > q[1]) {
      --q[0];
    } else {
      --q[1];
    }
  }
  return q;
}

[[nodiscard]] inline SelectionResult select_oblivious(const Cohort& cohort, std::size_t m) {
  return Ranking(cohort, score_oblivious(cohort)).top(m, Algorithm::oblivious);
}

[[nodiscard]] inline SelectionResult select_bayesian(const Cohort& cohort, std::size_t m,
                                                     Scoring scoring = Scoring::automatic) {
  return Ranking(cohort, score_bayesian(cohort, scoring)).top(m, Algorithm::bayesian);
}

enum class Base { oblivious, bayesian };

[[nodiscard]] inline SelectionResult select_gamma_fair(const Ranking& ranking, std::size_t m,
                                                       double gamma, Algorithm tag) {
  const auto& c = ranking.cohort();
  const auto q = gamma_quotas(m, c.n_a, c.n_b, gamma);
  return ranking.with_quotas(m, q[0], q[1], tag);
}

[[nodiscard]] inline SelectionResult select_gamma_fair(const Cohort& cohort, std::size_t m,
                                                       double gamma, Base base,
                                                       Scoring scoring = Scoring::automatic) {
  if (base == Base::oblivious) {
    return select_gamma_fair(Ranking(cohort, score_oblivious(cohort)), m, gamma,
                             Algorithm::gamma_oblivious);
  }
  return select_gamma_fair(Ranking(cohort, score_bayesian(cohort, scoring)), m, gamma,
                           Algorithm::gamma_bayesian);
}

// Mean latent quality of the selected candidates.
[[nodiscard]] inline double sample_utility(const Cohort& cohort, const SelectionResult& result) {
  if (result.selected.empty()) throw domain_error("empty selection has no utility");
  // Summed in index order so equal sets give bit-identical utilities.
  std::vector<std::uint32_t> idx(result.selected);
  std::sort(idx.begin(), idx.end());
  double total = 0.0;
  for (std::uint32_t i : idx) {
    if (i >= cohort.size()) throw domain_error("selection refers to a candidate outside the cohort");
    total += cohort.candidates[i].w;
  }
  return total / static_cast<double>(result.selected.size());
}

// Selected share of each group.
[[nodiscard]] inline std::pair<double, double> selection_fractions(const Cohort& cohort,
                                                                   const SelectionResult& result) {
  auto frac = [](std::size_t k, std::size_t n) {
    return n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n);
  };
  return {frac(result.count_a, cohort.n_a), frac(result.count_b, cohort.n_b)};
}

// Scores and rankings of one cohort for every algorithm.
class CohortSelector {
 public:
  CohortSelector(const Cohort& cohort, Scoring scoring, bool need_bayes)
      : cohort_(&cohort), obl_(cohort, score_oblivious(cohort)) {
    if (need_bayes) bayes_.emplace(cohort, score_bayesian(cohort, scoring));
  }

  [[nodiscard]] SelectionResult select(Algorithm alg, std::size_t m, double gamma) const {
    switch (alg) {
      case Algorithm::oblivious: return obl_.top(m, alg);
      case Algorithm::bayesian: return bayes().top(m, alg);
      case Algorithm::gamma_oblivious: return select_gamma_fair(obl_, m, gamma, alg);
      case Algorithm::gamma_bayesian: return select_gamma_fair(bayes(), m, gamma, alg);
      case Algorithm::demographic_parity: return select_gamma_fair(obl_, m, 1.0, alg);
    }
    throw domain_error("unknown algorithm");
  }

  [[nodiscard]] const Cohort& cohort() const noexcept { return *cohort_; }

 private:
  const Ranking& bayes() const {
    if (!bayes_) throw domain_error("Bayesian ranking was not computed for this cohort");
    return *bayes_;
  }

  const Cohort* cohort_;
  Ranking obl_;
  std::optional<Ranking> bayes_;
};

[[nodiscard]] inline bool needs_bayesian(std::span<const Algorithm> algorithms) {
  return std::any_of(algorithms.begin(), algorithms.end(), [](Algorithm a) {
    return a == Algorithm::bayesian || a == Algorithm::gamma_bayesian;
  });
}

struct ReplicationSummary {
  Algorithm algorithm = Algorithm::oblivious;
  double gamma = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t K = 0;
  double mean_utility = nan_value;
  double std_utility = nan_value;
  double ci_halfwidth = nan_value;  // one standard error of the mean
  double mean_x_a = nan_value;
  double mean_x_b = nan_value;
  bool std_degenerate = false;  // K = 1: std reported as 0
  // Large-population values at alpha = m / n under the moment-matched normal
  // model; NaN where undefined.
  double asymptotic_utility = nan_value;
  double asymptotic_x_a = nan_value;
  double asymptotic_x_b = nan_value;
};

// Mean over replications of a per-replication utility ratio.
struct RatioSummary {
  std::string name;  // "ratio_dp_obl" or "ratio_opt_dp"
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t K = 0;
  double mean = nan_value;
  double std = nan_value;
  double ci_halfwidth = nan_value;
  bool std_degenerate = false;
  double asymptotic = nan_value;
};

struct ReplicationReport {
  std::vector<ReplicationSummary> summaries;  // m-major, then algorithm order
  std::vector<RatioSummary> ratios;           // m-major
};

struct ReplicationOptions {
  Scoring scoring = Scoring::automatic;
  // Worker threads; 0 reads FAIRSEL_THREADS and falls back to the hardware count.
  unsigned threads = 0;
};

[[nodiscard]] inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FAIRSEL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    if (end != env && *end == '\0' && v < 0) {
      throw configuration_error("FAIRSEL_THREADS must be a non-negative integer");
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

struct Stats {
  double mean = 0.0;
  double std = 0.0;
  double ci = 0.0;
  bool degenerate = false;
};

inline Stats describe(std::span<const double> xs) {
  Stats s;
  const auto k = static_cast<double>(xs.size());
  double total = 0.0;
  for (double x : xs) total += x;
  s.mean = total / k;
  if (xs.size() < 2) {
    s.degenerate = true;
    return s;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / (k - 1.0));
  s.ci = s.std / std::sqrt(k);
  return s;
}

// Runs body(r) for r in [0, count) on `threads` workers; rethrows the first failure.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t r = 0; r < count; ++r) body(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t r = next.fetch_add(1);
        if (r >= count) return;
        try {
          body(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::optional<asymptotic::SelectionOutcome> reference_outcome(const PopulationModel& pop,
                                                                     double alpha, Algorithm alg,
                                                                     double gamma) {
  if (alpha >= 1.0) {
    asymptotic::SelectionOutcome o;
    o.x_a = o.x_b = 1.0;
    o.theta_a = o.theta_b = -std::numeric_limits<double>::infinity();
    o.utility = pop.p_a() * pop.a().mu + pop.p_b() * pop.b().mu;
    return o;
  }
  try {
    return asymptotic::outcome(pop, Budget(alpha), alg, GammaLevel(gamma));
  } catch (const error&) {
    return std::nullopt;
  }
}

}  // namespace detail

// K independent cohorts of size n; replication r uses counters (r, candidate)
// under the master seed, so the report does not depend on the thread count.
[[nodiscard]] inline ReplicationReport replicate(const CohortSpec& spec, std::size_t n,
                                                 std::span<const std::size_t> m_values,
                                                 std::size_t K, std::uint64_t seed,
                                                 std::span<const Algorithm> algorithms,
                                                 double gamma, const ReplicationOptions& opt = {}) {
  if (K < 1) throw configuration_error("K must be at least 1");
  if (K > 0xFFFFFFFFu) throw configuration_error("K exceeds the 32-bit replication counter");
  if (algorithms.empty()) throw configuration_error("no algorithms requested");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw configuration_error("gamma must lie in [0, 1]");
  for (std::size_t m : m_values) {
    if (m < 1 || m > n) {
      throw configuration_error("m = " + std::to_string(m) + " must lie in [1, n]");
    }
  }
  const std::size_t n_m = m_values.size();
  const std::size_t n_alg = algorithms.size();
  const bool need_bayes = needs_bayesian(algorithms);

  // values[((r * n_m) + mi) * n_alg + ai] = {utility, x_a, x_b}
  std::vector<std::array<double, 3>> values(K * n_m * n_alg);
  detail::parallel_for(K, resolve_threads(opt.threads), [&](std::size_t r) {
    const Cohort cohort = generate_cohort(spec, n, seed, static_cast<std::uint32_t>(r));
    const CohortSelector sel(cohort, opt.scoring, need_bayes);
    for (std::size_t mi = 0; mi < n_m; ++mi) {
      for (std::size_t ai = 0; ai < n_alg; ++ai) {
        const auto res = sel.select(algorithms[ai], m_values[mi], gamma);
        const auto [xa, xb] = selection_fractions(cohort, res);
        values[(r * n_m + mi) * n_alg + ai] = {sample_utility(cohort, res), xa, xb};
      }
    }
  });

  std::optional<PopulationModel> reference;
  if (spec.normal_priors()) {
    try {
      reference = spec.moment_model(true);
    } catch (const error&) {
      reference.reset();
    }
  }

  auto find = [&](Algorithm a) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < n_alg; ++i) {
      if (algorithms[i] == a) return i;
    }
    return std::nullopt;
  };
  const auto i_obl = find(Algorithm::oblivious);
  const auto i_opt = find(Algorithm::bayesian);
  const auto i_dp = find(Algorithm::demographic_parity);

  ReplicationReport report;
  std::vector<double> column(K);
  for (std::size_t mi = 0; mi < n_m; ++mi) {
    const double alpha = static_cast<double>(m_values[mi]) / static_cast<double>(n);
    std::vector<double> ref_utility(n_alg, nan_value);
    for (std::size_t ai = 0; ai < n_alg; ++ai) {
      ReplicationSummary s;
      s.algorithm = algorithms[ai];
      s.gamma = effective_gamma(algorithms[ai], gamma);
      s.n = n;
      s.m = m_values[mi];
      s.K = K;
      std::array<detail::Stats, 3> st{};
      for (std::size_t f = 0; f < 3; ++f) {
        for (std::size_t r = 0; r < K; ++r) column[r] = values[(r * n_m + mi) * n_alg + ai][f];
        st[f] = detail::describe(column);
      }
      s.mean_utility = st[0].mean;
      s.std_utility = st[0].std;
      s.ci_halfwidth = st[0].ci;
      s.std_degenerate = st[0].degenerate;
      s.mean_x_a = st[1].mean;
      s.mean_x_b = st[2].mean;
      if (reference) {
        if (auto o = detail::reference_outcome(*reference, alpha, algorithms[ai], gamma)) {
          s.asymptotic_utility = o->utility;
          s.asymptotic_x_a = o->x_a;
          s.asymptotic_x_b = o->x_b;
          ref_utility[ai] = o->utility;
        }
      }
      report.summaries.push_back(s);
    }
    auto ratio = [&](const char* name, std::size_t num, std::size_t den) {
      RatioSummary rs;
      rs.name = name;
      rs.n = n;
      rs.m = m_values[mi];
      rs.K = K;
      for (std::size_t r = 0; r < K; ++r) {
        column[r] = values[(r * n_m + mi) * n_alg + num][0] / values[(r * n_m + mi) * n_alg + den][0];
      }
      const auto st = detail::describe(column);
      rs.mean = st.mean;
      rs.std = st.std;
      rs.ci_halfwidth = st.ci;
      rs.std_degenerate = st.degenerate;
      rs.asymptotic = ref_utility[num] / ref_utility[den];
      report.ratios.push_back(rs);
    };
    if (i_obl && i_dp) ratio("ratio_dp_obl", *i_dp, *i_obl);
    if (i_opt && i_dp) ratio("ratio_opt_dp", *i_opt, *i_dp);
  }
  return report;
}

}  // namespace fairsel::mc
