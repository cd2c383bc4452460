#include "qra/qae.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qra::qae {

namespace {

constexpr double kMedianDenom = 0.19290679475430708; // 2 (8/pi^2 - 1/2)^2

bool is_pow2(std::uint64_t t) { return t >= 2 && (t & (t - 1)) == 0; }

// c - 2 floor(c/2), exact for c < 2^53; sin(pi c) = +- sin(pi reduce2(c)).
double reduce2(double c) { return c - 2.0 * std::floor(0.5 * c); }

} // namespace

void QueryLedger::charge(std::uint64_t t) {
  if (__builtin_add_overflow(state_prep_queries, t, &state_prep_queries) ||
      __builtin_add_overflow(rotation_queries, t, &rotation_queries))
    throw std::overflow_error("QueryLedger: query count overflow");
}

void QueryLedger::merge(const QueryLedger& other) {
  if (__builtin_add_overflow(state_prep_queries, other.state_prep_queries,
                             &state_prep_queries) ||
      __builtin_add_overflow(rotation_queries, other.rotation_queries,
                             &rotation_queries))
    throw std::overflow_error("QueryLedger: query count overflow");
}

OutcomeSampler::OutcomeSampler(double a, std::uint64_t t, Path path) {
  if (!(a >= 0.0 && a <= 1.0))
    throw std::domain_error("OutcomeSampler: amplitude must be in [0,1]");
  if (!is_pow2(t))
    throw std::invalid_argument("OutcomeSampler: t must be a power of two >= 2");
  t_ = t;
  omega_ = std::asin(std::sqrt(a)) / M_PI; // in [0, 1/2]

  enumerated_ = (path == Path::enumerate) ||
                (path == Path::automatic && t <= kEnumerateLimit);
  if (!enumerated_) return;

  const auto add_branch = [&](double c, double weight) {
    const double f = c - std::floor(c);
    const std::size_t n = static_cast<std::size_t>(t_);
    if (f == 0.0) {
      pmf_[static_cast<std::size_t>(c) % n] += weight;
      return;
    }
    const double s = std::sin(M_PI * reduce2(c));
    const double num = (s * s) / (static_cast<double>(t_) * static_cast<double>(t_));
    for (std::size_t y = 0; y < n; ++y) {
      const double delta = (static_cast<double>(y) - c) / static_cast<double>(t_);
      const double r = delta - std::round(delta);
      const double sd = std::sin(M_PI * r);
      pmf_[y] += weight * num / (sd * sd);
    }
  };

  pmf_.assign(static_cast<std::size_t>(t_), 0.0);
  const double c = omega_ * static_cast<double>(t_); // exact: t is a power of two
  add_branch(c, 0.5);
  add_branch(static_cast<double>(t_) - c, 0.5);

  cdf_.resize(pmf_.size());
  double acc = 0.0;
  for (std::size_t y = 0; y < pmf_.size(); ++y) {
    acc += pmf_[y];
    cdf_[y] = acc;
  }
  total_ = acc;
}

const std::vector<double>& OutcomeSampler::pmf() const {
  if (!enumerated_)
    throw std::logic_error("OutcomeSampler: pmf available only when enumerated");
  return pmf_;
}

std::uint64_t OutcomeSampler::sample_branch(double c, Stream& rng) const {
  const double fl = std::floor(c);
  const double f = c - fl;
  const std::uint64_t k0 = static_cast<std::uint64_t>(fl) % t_;
  if (f == 0.0) return k0;

  const double s = std::sin(M_PI * reduce2(c));
  const double num = (s * s) / (static_cast<double>(t_) * static_cast<double>(t_));
  const std::uint64_t half = t_ / 2;

  // Two one-sided tails around the peak: down side distances f + j, up side
  // distances (1 - f) + j, j = 0, 1, ... Each point is dominated by
  // min(1, 1/(4 d^2)); the first one or two points get a unit cap, the rest
  // are covered by a continuous 1/(4 x^2) envelope sampled by inversion.
  const double g_dn = f, g_up = 1.0 - f;
  const int caps_dn = g_dn < 0.5 ? 2 : 1;
  const int caps_up = g_up < 0.5 ? 2 : 1;
  const double x0_dn = g_dn + caps_dn - 1.0;
  const double x0_up = g_up + caps_up - 1.0;
  const double w_dn = caps_dn + 0.25 / x0_dn;
  const double w_up = caps_up + 0.25 / x0_up;
  const double w_total = w_dn + w_up;

  for (;;) {
    double pick = rng.uniform01() * w_total;
    const bool down = pick < w_dn;
    if (!down) pick -= w_dn;
    const double g = down ? g_dn : g_up;
    const int caps = down ? caps_dn : caps_up;
    const double x0 = down ? x0_dn : x0_up;

    std::uint64_t j;
    double envelope;
    if (pick < static_cast<double>(caps)) {
      j = static_cast<std::uint64_t>(pick); // uniform over the capped points
      envelope = 1.0;
    } else {
      const double x = x0 / rng.uniform01();
      if (!(x < 9.0e15)) continue; // beyond exact integer range; mass ~1e-17
      const double jr = std::floor(x - g) + 1.0;
      if (jr < static_cast<double>(caps)) continue;
      j = static_cast<std::uint64_t>(jr);
      const double dj = g + static_cast<double>(j);
      envelope = 0.25 / ((dj - 1.0) * dj);
    }
    if (j >= half) continue;

    const double d = g + static_cast<double>(j);
    const double sd = std::sin(M_PI * d / static_cast<double>(t_));
    const double q = num / (sd * sd);
    if (rng.uniform01() * envelope < q) {
      return down ? (k0 + t_ - j) % t_ : (k0 + 1 + j) % t_;
    }
  }
}

std::uint64_t OutcomeSampler::draw_outcome(Stream& rng) const {
  if (enumerated_) {
    const double u = rng.uniform01() * total_;
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::uint64_t>(it == cdf_.end() ? cdf_.size() - 1
                                                       : it - cdf_.begin());
  }
  const double c = omega_ * static_cast<double>(t_);
  const bool mirror = rng.uniform01() < 0.5;
  return sample_branch(mirror ? static_cast<double>(t_) - c : c, rng);
}

double OutcomeSampler::draw(Stream& rng) const {
  const std::uint64_t y = draw_outcome(rng);
  const double s = std::sin(M_PI * static_cast<double>(y) / static_cast<double>(t_));
  return s * s;
}

double qae_run(double a, const QaeConfig& cfg, Stream& rng) {
  if (cfg.mode == Mode::exact) {
    if (!is_pow2(cfg.t))
      throw std::invalid_argument("qae_run: t must be a power of two >= 2");
    if (!(a >= 0.0 && a <= 1.0))
      throw std::domain_error("qae_run: amplitude must be in [0,1]");
    return a;
  }
  return OutcomeSampler(a, cfg.t).draw(rng);
}

double qae_sample(double a, std::uint64_t t, Stream& rng) {
  return qae_run(a, QaeConfig{t, Mode::sampled}, rng);
}

std::uint64_t choose_t(double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::domain_error("choose_t: eps must be in (0,1)");
  const double req = 4.0 * M_PI / eps;
  std::uint64_t t = 2;
  while (static_cast<double>(t) < req) {
    if (t > (std::uint64_t{1} << 61))
      throw std::overflow_error("choose_t: required t too large");
    t <<= 1;
  }
  return t;
}

std::uint64_t median_repetitions(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::domain_error("median_repetitions: delta must be in (0,1)");
  const double raw = std::log(1.0 / delta) / kMedianDenom;
  std::uint64_t m = static_cast<std::uint64_t>(std::ceil(raw));
  if (m < 1) m = 1;
  if (m % 2 == 0) ++m;
  return m;
}

MedianResult median_amplify(const std::function<double()>& draw, double delta) {
  const std::uint64_t m = median_repetitions(delta);
  std::vector<double> vals(static_cast<std::size_t>(m));
  for (auto& v : vals) v = draw();
  auto mid = vals.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(vals.begin(), mid, vals.end());
  return {*mid, m};
}

QmciResult qmci(const std::function<double()>& amplitude,
                const std::string& payoff_id, double eps, double delta,
                Mode mode, std::uint64_t stream_key) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::domain_error("qmci(" + payoff_id + "): eps must be in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::domain_error("qmci(" + payoff_id + "): delta must be in (0,1)");

  double a = amplitude();
  if (a < 0.0 && a > -1e-12) a = 0.0;
  if (a > 1.0 && a < 1.0 + 1e-12) a = 1.0;
  if (!(a >= 0.0 && a <= 1.0))
    throw std::runtime_error("qmci(" + payoff_id + "): amplitude outside [0,1]");

  const std::uint64_t t = choose_t(eps);
  QmciResult res;
  res.epsilon = eps;
  res.delta = delta;

  if (mode == Mode::exact) {
    const auto med = median_amplify([&] { return a; }, delta);
    res.estimate = med.estimate;
    res.repetitions = med.repetitions;
  } else {
    const OutcomeSampler sampler(a, t);
    std::uint64_t rep = 0;
    const auto med = median_amplify(
        [&] {
          Stream rng(derive_key(stream_key, {rep++}));
          return sampler.draw(rng);
        },
        delta);
    res.estimate = med.estimate;
    res.repetitions = med.repetitions;
  }
  for (std::uint64_t r = 0; r < res.repetitions; ++r) res.ledger.charge(t);
  return res;
}

} // namespace qra::qae
