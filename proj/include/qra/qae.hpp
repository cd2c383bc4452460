#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qra/rng.hpp"

namespace qra::qae {

enum class Mode { sampled, exact };

struct QaeConfig {
  std::uint64_t t = 2; // power of two; number of applications of U and V
  Mode mode = Mode::sampled;
};

// Oracle-call accounting: state_prep counts calls charged to the
// state-preparation oracle, rotation to the payoff rotation oracle.
struct QueryLedger {
  std::uint64_t state_prep_queries = 0;
  std::uint64_t rotation_queries = 0;

  void charge(std::uint64_t t);
  void merge(const QueryLedger& other);
};

struct QmciResult {
  double estimate = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t repetitions = 0; // odd
  QueryLedger ledger;
};

// Phase-estimation outcome distribution for amplitude a with grid size t:
// theta = arcsin(sqrt(a)), omega = theta/pi, and outcome y in {0..t-1} drawn
// from the mixture (weight 1/2 each) of the two eigenphase branches
//   p(y) = sin^2(pi t Delta) / (t^2 sin^2(pi Delta)),  Delta = y/t -+ omega,
// returning the estimate sin^2(pi y / t). Small t enumerates the pmf exactly;
// large t uses exact rejection sampling from a min(1, 1/(4 d^2)) envelope
// around each branch's peak, so cost per draw is O(1) regardless of t.
class OutcomeSampler {
 public:
  enum class Path { automatic, enumerate, reject };
  static constexpr std::uint64_t kEnumerateLimit = std::uint64_t{1} << 16;

  OutcomeSampler(double a, std::uint64_t t, Path path = Path::automatic);

  double draw(Stream& rng) const;
  std::uint64_t draw_outcome(Stream& rng) const;

  // Enumerated pmf (only when the enumerate path is active).
  const std::vector<double>& pmf() const;
  double pmf_total() const { return total_; }
  std::uint64_t t() const { return t_; }

 private:
  std::uint64_t sample_branch(double c, Stream& rng) const;

  double omega_ = 0.0;
  std::uint64_t t_ = 2;
  bool enumerated_ = false;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double total_ = 0.0;
};

// Single QAE run: estimate of a using U and V t times, distributed per the
// phase-estimation outcome law (within 2 pi sqrt(a(1-a))/t + pi^2/t^2 of a
// with probability at least 8/pi^2).
// Exact mode returns a itself; callers charge t queries either way.
double qae_run(double a, const QaeConfig& cfg, Stream& rng);
double qae_sample(double a, std::uint64_t t, Stream& rng);

// Smallest power of two >= 4 pi / eps.
std::uint64_t choose_t(double eps);

// Smallest odd m >= ln(1/delta) / (2 (8/pi^2 - 1/2)^2).
std::uint64_t median_repetitions(double delta);

struct MedianResult {
  double estimate = 0.0;
  std::uint64_t repetitions = 0;
};

// Runs `draw` median_repetitions(delta) times and returns the median.
MedianResult median_amplify(const std::function<double()>& draw, double delta);

// QMCI(A, phi, eps, delta): the closure returns the exact amplitude
// a = E[phi]; the simulator draws QAE outcomes around it and boosts with the
// median. Charges t queries per repetition to both oracles, in exact mode too.
QmciResult qmci(const std::function<double()>& amplitude,
                const std::string& payoff_id, double eps, double delta,
                Mode mode, std::uint64_t stream_key);

} // namespace qra::qae
