#include "expcs/recon.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "expcs/error.hpp"
#include "expcs/io.hpp"

namespace expcs {

Penalty Penalty::l1(double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ParameterError("l1 weight must be >= 0");
  return {Kind::l1, tau, 0};
}

Penalty Penalty::support_code(unsigned bits) { return {Kind::support_code, 0.0, bits}; }

Penalty Penalty::uniform(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw ParameterError("penalty must be >= 0");
  return {Kind::uniform, value, 0};
}

double Penalty::value(std::span<const double> x) const {
  switch (kind) {
    case Kind::l1:
      return weight * l1_norm(x);
    case Kind::support_code: {
      const auto support = static_cast<double>(
          std::count_if(x.begin(), x.end(), [](double v) { return v != 0.0; }));
      return (support + 1.0) * std::log(2.0 * static_cast<double>(x.size())) +
             support * bits * std::log(2.0);
    }
    case Kind::uniform:
      return weight;
  }
  return 0.0;
}

Penalty parse_penalty(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ParameterError("penalty must look like 'kind:value'");
  const std::string kind = spec.substr(0, colon);
  const std::string arg = spec.substr(colon + 1);
  try {
    std::size_t used = 0;
    if (kind == "l1") {
      const double tau = std::stod(arg, &used);
      if (used == arg.size()) return Penalty::l1(tau);
    } else if (kind == "support") {
      const auto bits = std::stoul(arg, &used);
      if (used == arg.size() && bits <= 32) return Penalty::support_code(static_cast<unsigned>(bits));
    } else if (kind == "uniform") {
      const double v = std::stod(arg, &used);
      if (used == arg.size()) return Penalty::uniform(v);
    }
  } catch (const std::logic_error&) {
  }
  throw ParameterError("cannot parse penalty '" + spec + "'");
}

std::string to_string(const Penalty& p) {
  switch (p.kind) {
    case Penalty::Kind::l1:
      return "l1:" + format_double(p.weight);
    case Penalty::Kind::support_code:
      return "support:" + std::to_string(p.bits);
    case Penalty::Kind::uniform:
      return "uniform:" + format_double(p.weight);
  }
  return {};
}

double kraft_sum(const Penalty& penalty, std::span<const Signal> candidates) {
  double total = 0.0;
  for (const auto& x : candidates) total += std::exp(-penalty.value(x));
  return total;
}

double kraft_sum_support_code_exhaustive(std::size_t n, unsigned bits) {
  if (n == 0) throw ParameterError("n must be positive");
  if (bits > 8) throw ParameterError("at most 8 amplitude bits");
  const std::uint32_t radix = (1u << bits) + 1;  // digit 0 = zero entry
  const Penalty pen = Penalty::support_code(bits);

  // Every candidate with support size s has the same penalty; evaluate the
  // penalty once per size on a representative vector.
  std::vector<long double> weight(n + 1);
  for (std::size_t s = 0; s <= n; ++s) {
    Signal rep(n, 0.0);
    std::fill(rep.begin(), rep.begin() + static_cast<std::ptrdiff_t>(s), 1.0);
    weight[s] = std::exp(-static_cast<long double>(pen.value(rep)));
  }

  // Split on the leading two digits; each chunk walks its own odometer.
  const std::size_t lead_digits = std::min<std::size_t>(2, n);
  std::uint64_t chunks = 1;
  for (std::size_t t = 0; t < lead_digits; ++t) chunks *= radix;
  const std::size_t tail = n - lead_digits;
  std::vector<long double> partial(chunks, 0.0L);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    std::size_t lead_support = 0;
    for (std::uint64_t v = static_cast<std::uint64_t>(c), t = 0; t < lead_digits; ++t, v /= radix) {
      lead_support += (v % radix) != 0;
    }
    std::vector<std::uint32_t> digit(tail, 0);
    std::size_t support = lead_support;
    long double acc = 0.0L;
    while (true) {
      acc += weight[support];
      std::size_t t = 0;
      for (; t < tail; ++t) {
        if (digit[t] == 0) ++support;
        if (++digit[t] < radix) break;
        digit[t] = 0;
        --support;
      }
      if (t == tail) break;
    }
    partial[static_cast<std::size_t>(c)] = acc;
  }
  long double total = 0.0L;
  for (auto p : partial) total += p;
  return static_cast<double>(total);
}

double default_lambda(std::size_t k, std::size_t n) {
  if (n < 2) throw ParameterError("n must be at least 2");
  return 0.01 / (static_cast<double>(std::max<std::size_t>(k, 1)) * std::log(static_cast<double>(n)));
}

bool lambda_in_regime(double lambda, std::size_t k, std::size_t n) {
  return lambda * static_cast<double>(std::max<std::size_t>(k, 1)) *
             std::log(static_cast<double>(n)) <
         0.1;
}

Signal shift_to_gamma(std::span<const double> f, double lambda, const CoverSet& cover) {
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  if (f.size() != cover.indicator.size()) throw DimensionError("f and cover differ in length");
  Signal x(f.begin(), f.end());
  for (auto i : cover.indices) x[i] += lambda;
  return x;
}

CandidateSet::CandidateSet(std::vector<Signal> theta, double lambda, CoverSet cover)
    : theta_(std::move(theta)), lambda_(lambda), cover_(std::move(cover)) {
  if (theta_.empty()) throw ParameterError("candidate set is empty");
  for (std::size_t c = 0; c < theta_.size(); ++c) {
    const auto& f = theta_[c];
    if (f.size() != cover_.indicator.size()) {
      throw DimensionError("candidate " + std::to_string(c) + " has the wrong length");
    }
    if (std::any_of(f.begin(), f.end(), [](double v) { return !(v >= 0.0); })) {
      throw PreconditionError("candidate " + std::to_string(c) + " has a negative entry");
    }
    if (std::abs(l1_norm(f) - 1.0) > 1e-9) {
      throw PreconditionError("candidate " + std::to_string(c) + " is not l1-normalised");
    }
    gamma_.push_back(shift_to_gamma(f, lambda_, cover_));
  }
}

double map_objective(const SensingMatrix& phi, std::span<const std::uint64_t> y,
                     std::span<const double> x, const Penalty& penalty) {
  if (x.size() != phi.n() || y.size() != phi.m()) throw DimensionError("map_objective: sizes");
  if (std::any_of(x.begin(), x.end(), [](double v) { return !(v >= 0.0); })) {
    throw DomainError("map_objective: x must be nonnegative");
  }
  return neg_log_likelihood(phi.apply(x), y) + 2.0 * penalty.value(x);
}

namespace {

std::vector<double> shift_intensity(const SensingMatrix& phi, double lambda,
                                    const CoverSet& cover) {
  Signal shift(phi.n(), 0.0);
  for (auto i : cover.indices) shift[i] = lambda;
  return phi.apply(shift);
}

// Data term and its gradient from the current means beta = Phi f + shift.
double data_value(std::span<const double> beta, std::span<const std::uint64_t> y) {
  return neg_log_likelihood(beta, y);
}

void data_grad(const SensingMatrix& phi, std::span<const double> beta,
               std::span<const std::uint64_t> y, std::vector<double>& ratio,
               std::vector<double>& grad) {
  for (std::size_t j = 0; j < beta.size(); ++j) {
    ratio[j] = 1.0 - static_cast<double>(y[j]) / beta[j];
  }
  phi.apply_adjoint(ratio, grad);
}

}  // namespace

std::vector<double> data_gradient(const SensingMatrix& phi, std::span<const std::uint64_t> y,
                                  std::span<const double> f, double lambda,
                                  const CoverSet& cover) {
  const auto x = shift_to_gamma(f, lambda, cover);
  const auto beta = phi.apply(x);
  std::vector<double> ratio(phi.m()), grad(phi.n());
  data_grad(phi, beta, y, ratio, grad);
  return grad;
}

double data_term(const SensingMatrix& phi, std::span<const std::uint64_t> y,
                 std::span<const double> f, double lambda, const CoverSet& cover) {
  return neg_log_likelihood(phi.apply(shift_to_gamma(f, lambda, cover)), y);
}

ReconResult solve_map(const SensingMatrix& phi, std::span<const std::uint64_t> y,
                      const ReconConfig& cfg, const CoverSet& cover) {
  if (y.size() != phi.m()) throw DimensionError("counts length does not match m");
  if (cover.indicator.size() != phi.n()) throw DimensionError("cover length does not match n");
  if (cfg.penalty.kind != Penalty::Kind::l1) {
    throw ParameterError("continuous mode needs an l1 penalty");
  }
  if (!(cfg.lambda > 0.0)) throw ParameterError("lambda must be positive");
  if (cfg.max_iters == 0) throw ParameterError("max_iters must be positive");

  const std::size_t n = phi.n();
  const std::size_t m = phi.m();
  const double tau2 = 2.0 * cfg.penalty.weight;
  const auto shift = shift_intensity(phi, cfg.lambda, cover);

  // Back-projection start, f0 = Phi^T y / d.
  std::vector<double> yd(y.begin(), y.end());
  std::vector<double> f = phi.apply_adjoint(yd);
  for (double& v : f) v = std::max(0.0, v * phi.scale());

  std::vector<double> beta(m), ratio(m), grad(n);
  auto means_of = [&](std::span<const double> v, std::vector<double>& out) {
    phi.apply(v, out);
    for (std::size_t j = 0; j < m; ++j) out[j] += shift[j];
  };
  auto objective = [&](std::span<const double> v, std::span<const double> b) {
    return data_value(b, y) + tau2 * std::accumulate(v.begin(), v.end(), 0.0);
  };

  means_of(f, beta);
  double obj = objective(f, beta);
  if (!std::isfinite(obj)) throw Error("solve_map: non-finite objective at initialisation");
  data_grad(phi, beta, y, ratio, grad);

  // First step from the curvature along the gradient:
  // g'g / g'Hg with H = Phi^T diag(y / beta^2) Phi.
  double step = 1.0;
  {
    std::vector<double> pg(m);
    phi.apply(grad, pg);
    double num = 0.0, den = 0.0;
    for (double g : grad) num += g * g;
    for (std::size_t j = 0; j < m; ++j) {
      den += static_cast<double>(y[j]) * pg[j] * pg[j] / (beta[j] * beta[j]);
    }
    if (den > 0.0 && num > 0.0) step = num / den;
  }

  constexpr double kSigma = 1e-4;
  constexpr double kMinStep = 1e-30;
  constexpr double kMaxStep = 1e30;
  constexpr int kMaxHalvings = 80;

  ReconResult result;
  result.objective_trace.push_back(obj);
  std::vector<double> f_new(n), beta_new(m), grad_new(n);
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    bool accepted = false;
    double obj_new = obj;
    double moved_sq = 0.0;
    for (int h = 0; h <= kMaxHalvings; ++h) {
      moved_sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        f_new[i] = std::max(0.0, f[i] - step * (grad[i] + tau2));
        const double diff = f_new[i] - f[i];
        moved_sq += diff * diff;
      }
      if (moved_sq == 0.0) break;
      means_of(f_new, beta_new);
      obj_new = objective(f_new, beta_new);
      if (obj_new <= obj - kSigma / (2.0 * step) * moved_sq) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    result.iters = it + 1;
    if (!accepted) {
      // No representable decrease along the projected gradient: stationary
      // to working precision.
      result.converged = true;
      break;
    }
    data_grad(phi, beta_new, y, ratio, grad_new);

    double ss = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = f_new[i] - f[i];
      ss += s * s;
      sr += s * (grad_new[i] - grad[i]);
    }
    step = sr > 0.0 ? std::clamp(ss / sr, kMinStep, kMaxStep) : std::min(step * 2.0, kMaxStep);

    const double change = std::abs(obj - obj_new) / std::max(std::abs(obj_new), 1e-300);
    f.swap(f_new);
    beta.swap(beta_new);
    grad.swap(grad_new);
    obj = obj_new;
    result.objective_trace.push_back(obj);
    if (change < cfg.tol) {
      result.converged = true;
      break;
    }
  }

  result.x_hat = shift_to_gamma(f, cfg.lambda, cover);
  result.f_hat.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.f_hat[i] = std::max(0.0, result.x_hat[i] - cfg.lambda * cover.indicator[i]);
  }
  return result;
}

ReconResult solve_map(const SensingMatrix& phi, std::span<const std::uint64_t> y,
                      const CandidateSet& gamma, const Penalty& penalty) {
  ReconResult result;
  std::size_t best = 0;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < gamma.size(); ++c) {
    const double obj = map_objective(phi, y, gamma.member(c), penalty);
    result.objective_trace.push_back(obj);
    if (obj < best_obj) {
      best_obj = obj;
      best = c;
    }
  }
  result.x_hat = gamma.member(best);
  result.f_hat = gamma.theta(best);
  result.iters = gamma.size();
  result.converged = true;
  result.candidate_index = best;
  return result;
}

void save_result(const std::string& dir, const ReconResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);
  save_vector((base / "x_hat.txt").string(), result.x_hat);
  save_vector((base / "f_hat.txt").string(), result.f_hat);
  save_vector((base / "objective_trace.txt").string(), result.objective_trace);
  nlohmann::ordered_json j;
  j["x_hat_file"] = "x_hat.txt";
  j["f_hat_file"] = "f_hat.txt";
  j["iters"] = result.iters;
  j["converged"] = result.converged;
  j["objective_trace_file"] = "objective_trace.txt";
  if (result.candidate_index) j["candidate_index"] = *result.candidate_index;
  write_file((base / "result.json").string(), j.dump(2) + "\n");
}

}  // namespace expcs
