// Copyright 2026 The kdbalance Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kdb/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "kdb/baselines.hpp"
#include "kdb/error.hpp"
#include "kdb/rng.hpp"

namespace kdb {
namespace {

// Shared by both covariate sets of the Kang-Schafer design.
constexpr double kKsPropensity[4] = {-1.0, 0.5, -0.25, -0.1};
constexpr double kKsIntercept = 210.0;
constexpr double kKsOutcome[4] = {27.4, 13.7, 13.7, 13.7};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void standardize_columns(Matrix& m) {
  const double n = static_cast<double>(m.rows());
  for (Index d = 0; d < m.cols(); ++d) {
    auto col = m.col(d);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / (n - 1.0));
    if (!(sd > 0.0)) throw Error(ErrorCode::kZeroVariance, "cannot standardize a constant column");
    col /= sd;
  }
}

void require_both_groups(const Vector& t) {
  const double n1 = t.sum();
  if (n1 < 1.0 || n1 > static_cast<double>(t.size()) - 1.0) {
    throw Error(ErrorCode::kDegenerateAssignment, "simulated assignment left a group empty");
  }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

const std::vector<double>& default_lambdas(const ExperimentConfig& cfg, std::vector<double>& storage) {
  if (!cfg.lambdas.empty()) return cfg.lambdas;
  if (const auto* s2 = std::get_if<Sim2Config>(&cfg.design)) return s2->lambda_grid;
  storage = {0.0};
  return storage;
}

std::vector<std::string> reported_hidden(const ExperimentConfig& cfg) {
  if (!cfg.hidden_asmd.empty()) return cfg.hidden_asmd;
  if (std::holds_alternative<Sim2Config>(cfg.design)) return {"X5", "X6"};
  return {};
}

SimulatedData generate(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (const auto* ks = std::get_if<KangSchaferConfig>(&cfg.design)) {
    KangSchaferConfig c = *ks;
    c.seed = seed;
    return kang_schafer_generate(c);
  }
  Sim2Config c = std::get<Sim2Config>(cfg.design);
  c.seed = seed;
  return sim2_generate(c);
}

double design_truth(const ExperimentConfig& cfg) {
  if (const auto* ks = std::get_if<KangSchaferConfig>(&cfg.design)) return ks->gamma;
  return std::get<Sim2Config>(cfg.design).gamma;
}

struct Evaluation {
  const Dataset* data = nullptr;
  const SimulatedData* sim = nullptr;  // null outside simulations
  Target target = Target::kATE;
  double tau = 0.0;
  std::vector<Index> hidden_columns;
  QPOptions qp;
};

MethodOutcome evaluate(const Evaluation& ev, Method m, double lambda, const InformationMatrix* base) {
  MethodOutcome out;
  try {
    if (m == Method::kOracle) {
      out.estimate = method_estimate(*ev.data, m, ev.target, nullptr);
      out.ok = true;
      return out;
    }
    if (base == nullptr) throw Error(ErrorCode::kInvalidArgument, "kernel information unavailable");
    const BalanceWeights w = method_weights(*ev.data, m, ev.target, lambda, *base, ev.qp);
    out.estimate = method_estimate(*ev.data, m, ev.target, &w);
    // Balance statistics can be undefined (e.g. a resample with a constant
    // covariate); the estimate still counts.
    try {
      out.balance = balance_report(*ev.data, w, base->bandwidth, ev.target);
      for (Index h : ev.hidden_columns) {
        const Vector col = ev.sim->hidden.col(h);
        out.hidden_asmd.push_back(ev.target == Target::kATE ? asmd_ate(*ev.data, w, col) : asmd_att(*ev.data, w, col));
      }
    } catch (const Error& e) {
      out.balance.reset();
      out.hidden_asmd.clear();
      out.failure = e.what();
    }
    if (ev.sim != nullptr) {
      const BiasTerms terms = bias_decomposition(*ev.sim, w, ev.tau);
      out.identity_residual = std::abs(terms.sum() - (out.estimate - ev.tau));
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out = MethodOutcome{};
    out.failure = e.what();
  }
  return out;
}

bool lambda_free(Method m) { return m == Method::kUnadjusted || m == Method::kIpw || m == Method::kOracle; }

std::vector<std::vector<MethodOutcome>> evaluate_all(const Evaluation& ev, const std::vector<Method>& methods,
                                                     const std::vector<double>& lambdas, BandwidthRule rule) {
  std::optional<InformationMatrix> base;
  std::string kernel_failure;
  try {
    base = information_matrix(*ev.data, median_bandwidth(ev.data->x(), rule), 0.0);
  } catch (const std::exception& e) {
    kernel_failure = e.what();
  }
  std::vector<std::vector<MethodOutcome>> grid(lambdas.size(), std::vector<MethodOutcome>(methods.size()));
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    for (std::size_t k = 0; k < methods.size(); ++k) {
      if (l > 0 && lambda_free(methods[k])) {
        grid[l][k] = grid[0][k];
        continue;
      }
      if (!base && methods[k] != Method::kOracle) {
        grid[l][k].failure = kernel_failure;
        continue;
      }
      grid[l][k] = evaluate(ev, methods[k], lambdas[l], base ? &*base : nullptr);
    }
  }
  return grid;
}

template <typename Task>
void run_indexed(Index count, unsigned jobs, Task task) {
  const unsigned workers = static_cast<unsigned>(std::clamp<Index>(static_cast<Index>(std::max(jobs, 1U)), 1, std::max<Index>(count, 1)));
  if (workers <= 1) {
    for (Index r = 0; r < count; ++r) task(r);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (Index r = next.fetch_add(1); r < count; r = next.fetch_add(1)) task(r);
    });
  }
  for (auto& th : pool) th.join();
}

MonteCarloSummary aggregate_records(std::vector<ReplicationRecord> records, const std::vector<Method>& methods,
                                    const std::vector<double>& lambdas,
                                    const std::vector<std::vector<double>>& truths) {
  MonteCarloSummary s;
  s.replications = static_cast<Index>(records.size());
  for (const auto& rec : records) {
    if (!rec.generated) ++s.failed_replications;
  }
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    for (std::size_t k = 0; k < methods.size(); ++k) {
      MethodSummary row;
      row.method = methods[k];
      row.lambda = lambdas[l];
      std::vector<double> estimates;
      BalanceReport acc;
      Index balanced = 0;
      Index with_hidden = 0;
      for (const auto& rec : records) {
        if (!rec.generated) continue;
        const MethodOutcome& o = rec.outcomes[l][k];
        if (!o.ok) continue;
        estimates.push_back(o.estimate);
        row.max_identity_residual = std::max(row.max_identity_residual, o.identity_residual);
        if (row.hidden_asmd.size() < o.hidden_asmd.size()) row.hidden_asmd.resize(o.hidden_asmd.size(), 0.0);
        for (std::size_t h = 0; h < o.hidden_asmd.size(); ++h) row.hidden_asmd[h] += o.hidden_asmd[h];
        if (!o.hidden_asmd.empty()) ++with_hidden;
        if (o.balance) {
          const BalanceReport& b = *o.balance;
          acc.rw += b.rw;
          acc.kd += b.kd;
          acc.max_asmd += b.max_asmd;
          acc.mean_asmd += b.mean_asmd;
          acc.med_asmd += b.med_asmd;
          acc.mean_ks += b.mean_ks;
          acc.mean_t += b.mean_t;
          if (acc.per_covariate_asmd.size() < b.per_covariate_asmd.size()) {
            acc.per_covariate_asmd.resize(b.per_covariate_asmd.size(), 0.0);
          }
          for (std::size_t d = 0; d < b.per_covariate_asmd.size(); ++d) {
            acc.per_covariate_asmd[d] += b.per_covariate_asmd[d];
          }
          ++balanced;
        }
      }
      row.successes = static_cast<Index>(estimates.size());
      row.failures = s.replications - row.successes;
      if (row.successes >= 2) row.estimate = estimator_metrics(std::string(to_string(methods[k])), estimates, truths[l][k]);
      for (double& h : row.hidden_asmd) h /= static_cast<double>(with_hidden);
      if (balanced > 0) {
        const double nb = static_cast<double>(balanced);
        acc.rw /= nb;
        acc.kd /= nb;
        acc.max_asmd /= nb;
        acc.mean_asmd /= nb;
        acc.med_asmd /= nb;
        acc.mean_ks /= nb;
        acc.mean_t /= nb;
        for (double& v : acc.per_covariate_asmd) v /= nb;
        row.balance = acc;
      }
      s.rows.push_back(std::move(row));
    }
  }
  s.records = std::move(records);
  return s;
}

std::string fmt_num(double v, int precision) {
  if (!std::isfinite(v)) return std::isnan(v) ? "NA" : (v > 0 ? "Inf" : "-Inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  // Avoid "-0.00000" in the rounded tables.
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

}  // namespace

std::string_view to_string(CovariateSet s) noexcept { return s == CovariateSet::kX ? "X" : "U"; }

CovariateSet parse_covariate_set(std::string_view s) {
  const std::string v = lower(s);
  if (v == "x") return CovariateSet::kX;
  if (v == "u") return CovariateSet::kU;
  throw Error(ErrorCode::kInvalidArgument, "covariate set must be X or U, got '" + std::string(s) + "'");
}

void KangSchaferConfig::validate() const {
  if (n < 20) throw Error(ErrorCode::kInvalidArgument, "Kang-Schafer design needs N >= 20");
  if (!(std::abs(rho) < 1.0)) throw Error(ErrorCode::kInvalidArgument, "rho must lie in (-1, 1)");
  if (!(sigma2_outcome >= 0.0) || !std::isfinite(sigma2_outcome)) {
    throw Error(ErrorCode::kInvalidArgument, "outcome variance must be nonnegative");
  }
  if (!std::isfinite(gamma)) throw Error(ErrorCode::kInvalidArgument, "gamma must be finite");
}

void Sim2Config::validate() const {
  if (n < 4) throw Error(ErrorCode::kInvalidArgument, "second design needs N >= 4");
  if (!(p_treat > 0.0 && p_treat < 1.0)) throw Error(ErrorCode::kInvalidArgument, "p_treat must lie in (0, 1)");
  if (!(std::abs(0.5 + alpha2) < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "control covariance is not positive definite");
  }
  if (!(sigma2_outcome >= 0.0) || !std::isfinite(sigma2_outcome)) {
    throw Error(ErrorCode::kInvalidArgument, "outcome variance must be nonnegative");
  }
  for (double l : lambda_grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw Error(ErrorCode::kInvalidArgument, "lambda must be nonnegative");
  }
}

SimulatedData kang_schafer_generate(const KangSchaferConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const Index n = cfg.n;
  Matrix x(n, 4);
  for (Index i = 0; i < n; ++i) {
    for (Index d = 0; d < 4; ++d) x(i, d) = rng.normal();
  }
  Matrix u(n, 4);
  for (Index i = 0; i < n; ++i) {
    u(i, 0) = std::exp(x(i, 0) / 2.0);
    u(i, 1) = x(i, 1) / (1.0 + std::exp(x(i, 0))) + 10.0;
    u(i, 2) = std::pow(x(i, 0) * x(i, 2) / 25.0 + 0.6, 3);
    u(i, 3) = std::pow(x(i, 1) + x(i, 3) + 20.0, 2);
  }
  standardize_columns(u);

  const Matrix& zt = cfg.delta_t == CovariateSet::kX ? x : u;
  const Matrix& zo = cfg.delta_o == CovariateSet::kX ? x : u;
  const double sigma = std::sqrt(cfg.sigma2_outcome);
  const double tail = std::sqrt(1.0 - cfg.rho * cfg.rho);
  Vector t(n), y(n), y0(n), y1(n), mu0(n), mu1(n);
  for (Index i = 0; i < n; ++i) {
    double eta = 0.0;
    double mu = kKsIntercept;
    for (Index d = 0; d < 4; ++d) {
      eta += kKsPropensity[d] * zt(i, d);
      mu += kKsOutcome[d] * zo(i, d);
    }
    t(i) = rng.bernoulli(sigmoid(eta)) ? 1.0 : 0.0;
    const double z0 = rng.normal();
    const double z1 = rng.normal();
    mu0(i) = mu;
    mu1(i) = mu + cfg.gamma;
    y0(i) = mu0(i) + sigma * z0;
    y1(i) = mu1(i) + sigma * (cfg.rho * z0 + tail * z1);
    y(i) = t(i) == 1.0 ? y1(i) : y0(i);
  }
  require_both_groups(t);
  return SimulatedData{Dataset::validate(std::move(x), std::move(t), std::move(y), std::move(y0), std::move(y1)),
                       std::move(mu0), std::move(mu1), std::move(u), {"U1", "U2", "U3", "U4"}};
}

SimulatedData sim2_generate(const Sim2Config& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const Index n = cfg.n;
  Matrix full(n, 6);
  Vector t(n);
  for (Index i = 0; i < n; ++i) {
    const bool treated = rng.bernoulli(cfg.p_treat);
    t(i) = treated ? 1.0 : 0.0;
    const double shift = treated ? 0.0 : cfg.alpha1;
    const double c = treated ? 0.5 : 0.5 + cfg.alpha2;
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    full(i, 0) = 1.0 + shift + z1;
    full(i, 1) = 2.0 + shift + c * z1 + std::sqrt(1.0 - c * c) * z2;
    full(i, 2) = rng.normal();
    full(i, 3) = rng.normal();
    full(i, 4) = full(i, 0) * full(i, 1);
    full(i, 5) = full(i, 2) * full(i, 2);
  }
  require_both_groups(t);
  standardize_columns(full);

  const double coef[6] = {20.0, 10.0, 5.0, 5.0, cfg.alpha3, cfg.alpha4};
  const double sigma = std::sqrt(cfg.sigma2_outcome);
  Vector y(n), y0(n), y1(n), mu0(n), mu1(n);
  for (Index i = 0; i < n; ++i) {
    double mu = 0.0;
    for (Index d = 0; d < 6; ++d) mu += coef[d] * full(i, d);
    mu0(i) = mu;
    mu1(i) = mu + cfg.gamma;
    y0(i) = mu0(i) + sigma * rng.normal();
    y1(i) = mu1(i) + sigma * rng.normal();
    y(i) = t(i) == 1.0 ? y1(i) : y0(i);
  }
  Matrix observed = full.leftCols(4);
  return SimulatedData{
      Dataset::validate(std::move(observed), std::move(t), std::move(y), std::move(y0), std::move(y1)),
      std::move(mu0), std::move(mu1), std::move(full), {"X1", "X2", "X3", "X4", "X5", "X6"}};
}

BiasTerms bias_decomposition(const SimulatedData& sim, const BalanceWeights& w, double tau) {
  const Dataset& data = sim.data;
  if (sim.mu0.size() != data.size() || sim.mu1.size() != data.size()) {
    throw Error(ErrorCode::kMissingPotentialOutcomes, "potential-outcome means are unavailable");
  }
  if (w.p.size() != data.n1() || w.q.size() != data.n0()) {
    throw Error(ErrorCode::kDimensionMismatch, "weights are not dimensioned to the dataset");
  }
  const Vector& y = data.y();
  BiasTerms b;
  double effect = 0.0;
  double treated_mu0 = 0.0;
  double treated_noise = 0.0;
  Index k = 0;
  for (Index i : data.treated()) {
    const double wi = w.p(k++);
    effect += wi * (sim.mu1(i) - sim.mu0(i));
    treated_mu0 += wi * sim.mu0(i);
    treated_noise += wi * (y(i) - sim.mu1(i));
  }
  double control_mu0 = 0.0;
  double control_noise = 0.0;
  k = 0;
  for (Index j : data.control()) {
    const double wj = w.q(k++);
    control_mu0 += wj * sim.mu0(j);
    control_noise += wj * (y(j) - sim.mu0(j));
  }
  b.term1 = effect - tau;
  b.term2 = treated_mu0 - control_mu0;
  b.term3 = treated_noise - control_noise;
  return b;
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::kUnadjusted: return "UnAD";
    case Method::kIpw: return "IPW";
    case Method::kKDBC: return "KDBC";
    case Method::kKDM1: return "KDM1";
    case Method::kOracle: return "Oracle";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  const std::string v = lower(s);
  if (v == "unad" || v == "unadjusted") return Method::kUnadjusted;
  if (v == "ipw") return Method::kIpw;
  if (v == "kdbc") return Method::kKDBC;
  if (v == "kdm1") return Method::kKDM1;
  if (v == "oracle") return Method::kOracle;
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + std::string(s) + "'");
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    const std::string_view item = list.substr(start, end - start);
    if (!item.empty()) {
      const Method m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    start = end + 1;
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "method list is empty");
  return out;
}

BalanceWeights method_weights(const Dataset& data, Method m, Target target, double lambda,
                              const InformationMatrix& base, const QPOptions& qp) {
  switch (m) {
    case Method::kUnadjusted:
      return unadjusted_weights(data);
    case Method::kIpw: {
      const PropensityModel model = fit_propensity_logistic(data);
      return target == Target::kATE ? ipw_ate_weights(model, data) : ipw_att_weights(model, data);
    }
    case Method::kKDBC:
    case Method::kKDM1: {
      const BalanceScheme scheme{target, m == Method::kKDM1 ? MomentConstraints::kFirstMoment : MomentConstraints::kNone,
                                 lambda};
      return solve_balance(data, scheme, base, qp).weights;
    }
    case Method::kOracle:
      break;
  }
  throw Error(ErrorCode::kInvalidArgument, "the oracle estimator has no weights");
}

double method_estimate(const Dataset& data, Method m, Target target, const BalanceWeights* w) {
  if (m == Method::kOracle) return target == Target::kATE ? oracle_ate(data) : oracle_att(data);
  if (w == nullptr) throw Error(ErrorCode::kInvalidArgument, "weights required");
  return target == Target::kATE ? estimate_ate(data, *w) : estimate_att(data, *w);
}

MonteCarloSummary aggregate(const ExperimentConfig& cfg, std::vector<ReplicationRecord> records) {
  std::vector<double> storage;
  const std::vector<double>& lambdas = default_lambdas(cfg, storage);
  const double truth = design_truth(cfg);
  const std::vector<std::vector<double>> truths(lambdas.size(), std::vector<double>(cfg.methods.size(), truth));
  MonteCarloSummary s = aggregate_records(std::move(records), cfg.methods, lambdas, truths);
  s.design = std::holds_alternative<KangSchaferConfig>(cfg.design) ? "kang-schafer" : "sim2";
  s.target = cfg.target;
  s.truth = truth;
  s.hidden_names = reported_hidden(cfg);
  return s;
}

MonteCarloSummary monte_carlo(const ExperimentConfig& cfg) {
  if (cfg.reps < 2) throw Error(ErrorCode::kTooFewEstimates, "monte carlo needs at least two replications");
  if (cfg.methods.empty()) throw Error(ErrorCode::kInvalidArgument, "no methods requested");
  std::visit([](const auto& d) { d.validate(); }, cfg.design);
  std::vector<double> storage;
  const std::vector<double>& lambdas = default_lambdas(cfg, storage);
  for (double l : lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw Error(ErrorCode::kInvalidArgument, "lambda must be nonnegative");
  }
  const std::uint64_t base_seed =
      std::visit([](const auto& d) { return d.seed; }, cfg.design);
  const std::vector<std::string> hidden = reported_hidden(cfg);
  const double truth = design_truth(cfg);

  std::vector<ReplicationRecord> records(static_cast<std::size_t>(cfg.reps));
  run_indexed(cfg.reps, cfg.jobs, [&](Index r) {
    ReplicationRecord& rec = records[static_cast<std::size_t>(r)];
    rec.index = r;
    rec.seed = child_seed(base_seed, static_cast<std::uint64_t>(r));
    try {
      const SimulatedData sim = generate(cfg, rec.seed);
      rec.generated = true;
      Evaluation ev;
      ev.data = &sim.data;
      ev.sim = &sim;
      ev.target = cfg.target;
      ev.tau = truth;
      ev.qp = cfg.qp;
      for (const auto& name : hidden) {
        const auto it = std::find(sim.hidden_names.begin(), sim.hidden_names.end(), name);
        if (it == sim.hidden_names.end()) throw Error(ErrorCode::kInvalidArgument, "unknown hidden column " + name);
        ev.hidden_columns.push_back(static_cast<Index>(it - sim.hidden_names.begin()));
      }
      rec.outcomes = evaluate_all(ev, cfg.methods, lambdas, cfg.bandwidth_rule);
    } catch (const std::exception& e) {
      rec.generated = false;
      rec.failure = e.what();
      rec.outcomes.clear();
    }
  });
  return aggregate(cfg, std::move(records));
}

MonteCarloSummary bootstrap(const Dataset& data, const BootstrapConfig& cfg) {
  if (cfg.resamples < 2) throw Error(ErrorCode::kTooFewEstimates, "bootstrap needs at least two resamples");
  if (cfg.methods.empty()) throw Error(ErrorCode::kInvalidArgument, "no methods requested");
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be nonnegative");
  }
  const std::vector<double> lambdas{cfg.lambda};

  Evaluation full;
  full.data = &data;
  full.target = cfg.target;
  full.qp = cfg.qp;
  const auto full_outcomes = evaluate_all(full, cfg.methods, lambdas, cfg.bandwidth_rule);
  std::vector<std::vector<double>> truths(1);
  for (const auto& o : full_outcomes[0]) {
    truths[0].push_back(o.ok ? o.estimate : std::numeric_limits<double>::quiet_NaN());
  }

  const Index n = data.size();
  std::vector<ReplicationRecord> records(static_cast<std::size_t>(cfg.resamples));
  run_indexed(cfg.resamples, cfg.jobs, [&](Index b) {
    ReplicationRecord& rec = records[static_cast<std::size_t>(b)];
    rec.index = b;
    rec.seed = child_seed(cfg.seed, static_cast<std::uint64_t>(b));
    Rng rng(rec.seed);
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::optional<Dataset> sample;
    for (int attempt = 0; attempt <= cfg.max_redraws && !sample; ++attempt) {
      if (cfg.resampling == Resampling::kPooled) {
        for (auto& i : idx) i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
      } else {
        std::size_t k = 0;
        for (Index g = 0; g < data.n1(); ++g) idx[k++] = data.treated()[rng.below(static_cast<std::uint64_t>(data.n1()))];
        for (Index g = 0; g < data.n0(); ++g) idx[k++] = data.control()[rng.below(static_cast<std::uint64_t>(data.n0()))];
      }
      try {
        sample = data.rows(idx);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kEmptyGroup) throw;
      }
    }
    if (!sample) {
      rec.failure = "every redraw left a group empty";
      return;
    }
    rec.generated = true;
    Evaluation ev;
    ev.data = &*sample;
    ev.target = cfg.target;
    ev.qp = cfg.qp;
    rec.outcomes = evaluate_all(ev, cfg.methods, lambdas, cfg.bandwidth_rule);
  });

  MonteCarloSummary s = aggregate_records(std::move(records), cfg.methods, lambdas, truths);
  s.design = "bootstrap";
  s.target = cfg.target;
  s.truth = std::numeric_limits<double>::quiet_NaN();
  return s;
}

void write_summary(std::ostream& out, const MonteCarloSummary& s, char delim, int precision) {
  const double na = std::numeric_limits<double>::quiet_NaN();
  out << "method" << delim << "lambda" << delim << (s.target == Target::kATE ? "ATE" : "ATT") << delim
      << "abs(Bias)" << delim << "sd" << delim << "RMSE" << delim << "pctBias" << delim << "rw" << delim << "KD"
      << delim << "maxASMD" << delim << "meanASMD" << delim << "medASMD" << delim << "meanKS" << delim << "meanT";
  for (const auto& h : s.hidden_names) out << delim << h << "ASMD";
  out << delim << "successes" << delim << "failures" << '\n';
  for (const auto& row : s.rows) {
    const auto num = [&](double v) { return fmt_num(v, precision); };
    const EstimateReport* e = row.estimate ? &*row.estimate : nullptr;
    const BalanceReport* b = row.balance ? &*row.balance : nullptr;
    out << to_string(row.method) << delim << num(row.lambda) << delim << num(e ? e->mean : na) << delim
        << num(e ? std::abs(e->bias) : na) << delim << num(e ? e->sd : na) << delim << num(e ? e->rmse : na)
        << delim << num(e ? e->pct_bias : na) << delim << num(b ? b->rw : na) << delim << num(b ? b->kd : na)
        << delim << num(b ? b->max_asmd : na) << delim << num(b ? b->mean_asmd : na) << delim
        << num(b ? b->med_asmd : na) << delim << num(b ? b->mean_ks : na) << delim << num(b ? b->mean_t : na);
    for (std::size_t h = 0; h < s.hidden_names.size(); ++h) {
      const bool have = h < row.hidden_asmd.size() && row.successes > 0 && row.method != Method::kOracle;
      out << delim << num(have ? row.hidden_asmd[h] : na);
    }
    out << delim << row.successes << delim << row.failures << '\n';
  }
}

}  // namespace kdb
