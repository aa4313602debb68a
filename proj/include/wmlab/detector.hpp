#pragma once

#include <string>

#include "wmlab/wm_model.hpp"

namespace wmlab::wm {

enum class TailMode { SingleTail, DoubleTail };

// Inequality convention used both to pick the threshold grid point and to
// detect. StrictGreater (positive iff BA > tau) reproduces the usual
// operating points; GreaterEqual is the alternate reading.
enum class TailRule { StrictGreater, GreaterEqual };

std::string tail_mode_name(TailMode m);
TailMode tail_mode_from_name(const std::string& s);

// Exact false-detection probability of the rule at threshold t/n under a
// Binomial(n, 1/2) bit-match model, by exact tail summation (n <= 64).
double binomial_tail_fpr(int n, int t, TailMode mode, TailRule rule = TailRule::StrictGreater);

struct TauResult {
  double tau = 1.0;
  double exact_fpr = 0.0;
  int t = 0;        // threshold on the match count; tau = t/n
  bool feasible = true;
};

// Smallest grid threshold whose exact FPR stays within eta. When no grid
// point is feasible, returns tau = 1 with its exact FPR and feasible=false.
TauResult tau_for_fpr(int n, double eta, TailMode mode,
                      TailRule rule = TailRule::StrictGreater);

// Bitwise-accuracy detector bound to a decoder and a ground-truth watermark.
struct Detector {
  const WatermarkModel* model = nullptr;
  WatermarkBits w;
  double tau = 0.83;
  TailMode mode = TailMode::DoubleTail;
  TailRule rule = TailRule::StrictGreater;

  bool detect_ba(double ba) const;
  bool detect(const img::Image& image) const;  // true = flagged AI-generated
  double ba_to_w(const img::Image& image) const;
};

}  // namespace wmlab::wm
