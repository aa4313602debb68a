#include "wmlab/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "wmlab/postprocess.hpp"

namespace wmlab::img {

namespace {

void require_same_shape(const Image& a, const Image& b, const char* who) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

std::vector<double> to_gray(const Image& im) {
  std::vector<double> g(static_cast<size_t>(im.height()) * im.width(), 0.0);
  const double inv_c = 1.0 / im.channels();
  for (int c = 0; c < im.channels(); ++c)
    for (int y = 0; y < im.height(); ++y)
      for (int x = 0; x < im.width(); ++x)
        g[static_cast<size_t>(y) * im.width() + x] += im.at(c, y, x) * inv_c;
  return g;
}

// separable valid-mode Gaussian filtering: rows first, then columns
std::vector<double> filter_valid(const std::vector<double>& in, int h, int w,
                                 const std::vector<double>& k, int& oh, int& ow) {
  const int ks = static_cast<int>(k.size());
  ow = w - ks + 1;
  oh = h - ks + 1;
  std::vector<double> rows(static_cast<size_t>(h) * ow, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < ks; ++i) s += k[i] * in[static_cast<size_t>(y) * w + x + i];
      rows[static_cast<size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<size_t>(oh) * ow, 0.0);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < ks; ++i) s += k[i] * rows[static_cast<size_t>(y + i) * ow + x];
      out[static_cast<size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

double metric_linf(const Image& a, const Image& b) {
  require_same_shape(a, b, "metric_linf");
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m / 2.0;
}

double metric_l2(const Image& a, const Image& b) {
  require_same_shape(a, b, "metric_l2");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = (a.data()[i] - b.data()[i]) / 2.0;
    s += d * d;
  }
  return std::sqrt(s);
}

double metric_ssim(const Image& a, const Image& b) {
  require_same_shape(a, b, "metric_ssim");
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  constexpr double kL = 2.0;
  constexpr double kC1 = (0.02 * kL) * (0.02 * kL);
  constexpr double kC2 = (0.03 * kL) * (0.03 * kL);
  if (a.height() < kWin || a.width() < kWin)
    throw std::invalid_argument("metric_ssim: image smaller than the 11x11 window");

  const auto ga = to_gray(a);
  const auto gb = to_gray(b);
  const int h = a.height(), w = a.width();
  const auto kern = gaussian_kernel(kWin, kSigma);

  std::vector<double> aa(ga.size()), bb(ga.size()), ab(ga.size());
  for (size_t i = 0; i < ga.size(); ++i) {
    aa[i] = ga[i] * ga[i];
    bb[i] = gb[i] * gb[i];
    ab[i] = ga[i] * gb[i];
  }

  int oh = 0, ow = 0;
  const auto mu_a = filter_valid(ga, h, w, kern, oh, ow);
  const auto mu_b = filter_valid(gb, h, w, kern, oh, ow);
  const auto m_aa = filter_valid(aa, h, w, kern, oh, ow);
  const auto m_bb = filter_valid(bb, h, w, kern, oh, ow);
  const auto m_ab = filter_valid(ab, h, w, kern, oh, ow);

  double total = 0.0;
  for (size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = m_aa[i] - ma * ma;
    const double vb = m_bb[i] - mb * mb;
    const double cov = m_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
             ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
  }
  return total / static_cast<double>(mu_a.size());
}

}  // namespace wmlab::img
