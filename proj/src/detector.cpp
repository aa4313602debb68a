#include "wmlab/detector.hpp"

#include <cmath>
#include <stdexcept>

namespace wmlab::wm {

std::string tail_mode_name(TailMode m) {
  return m == TailMode::SingleTail ? "single-tail" : "double-tail";
}

TailMode tail_mode_from_name(const std::string& s) {
  if (s == "single-tail" || s == "single") return TailMode::SingleTail;
  if (s == "double-tail" || s == "double") return TailMode::DoubleTail;
  throw std::invalid_argument("unknown tail mode: " + s);
}

namespace {

using u128 = unsigned __int128;

// C(n,k) exactly; n <= 64 keeps every value within 128 bits
u128 binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  u128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<u128>(n - k + i);
    r = r / static_cast<u128>(i);
  }
  return r;
}

// P(X > t) or P(X >= t) for X ~ Binomial(n, 1/2)
long double upper_tail(int n, int t, bool inclusive) {
  const int from = inclusive ? t : t + 1;
  u128 sum = 0;
  for (int i = from; i <= n; ++i) sum += binom(n, i);
  return static_cast<long double>(sum) / std::pow(2.0L, n);
}

// P(X < t) or P(X <= t)
long double lower_tail(int n, int t, bool inclusive) {
  const int to = inclusive ? t : t - 1;
  u128 sum = 0;
  for (int i = 0; i <= to && i >= 0; ++i) sum += binom(n, i);
  if (to < 0) return 0.0L;
  return static_cast<long double>(sum) / std::pow(2.0L, n);
}

}  // namespace

double binomial_tail_fpr(int n, int t, TailMode mode, TailRule rule) {
  if (n < 1 || n > 64) throw std::invalid_argument("binomial_tail_fpr: n must be in [1,64]");
  if (t < 0 || t > n) throw std::invalid_argument("binomial_tail_fpr: t out of range");
  const bool ge = rule == TailRule::GreaterEqual;
  long double fpr = upper_tail(n, t, ge);
  if (mode == TailMode::DoubleTail) fpr += lower_tail(n, n - t, ge);
  if (fpr > 1.0L) fpr = 1.0L;
  return static_cast<double>(fpr);
}

TauResult tau_for_fpr(int n, double eta, TailMode mode, TailRule rule) {
  if (n < 1 || n > 64) throw std::invalid_argument("tau_for_fpr: n must be in [1,64]");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("tau_for_fpr: eta must be in (0,1)");
  const int t0 = n / 2 + 1;  // ensures tau > 0.5
  for (int t = t0; t <= n; ++t) {
    const double fpr = binomial_tail_fpr(n, t, mode, rule);
    if (fpr <= eta) {
      return {static_cast<double>(t) / n, fpr, t, true};
    }
  }
  return {1.0, binomial_tail_fpr(n, n, mode, rule), n, false};
}

bool Detector::detect_ba(double ba) const {
  const bool upper = rule == TailRule::GreaterEqual ? ba >= tau : ba > tau;
  if (mode == TailMode::SingleTail) return upper;
  const bool lower = rule == TailRule::GreaterEqual ? ba <= 1.0 - tau : ba < 1.0 - tau;
  return upper || lower;
}

double Detector::ba_to_w(const img::Image& image) const {
  if (!model) throw std::runtime_error("Detector: no model bound");
  return bitwise_accuracy(decode(*model, image), w);
}

bool Detector::detect(const img::Image& image) const { return detect_ba(ba_to_w(image)); }

}  // namespace wmlab::wm
