#include "dews/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dews/error.hpp"
#include "dews/schedule.hpp"

namespace dews {

namespace {

std::size_t reflect101(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  if (m == 1) return 0;
  while (i < 0 || i >= m) {
    if (i < 0) i = -i;
    if (i >= m) i = 2 * (m - 1) - i;
  }
  return static_cast<std::size_t>(i);
}

}  // namespace

BitAccuracy bit_accuracy(const Bits& decoded, const Bits& truth) {
  require(decoded.size() == truth.size(), ErrorCode::ShapeMismatch, "bit_accuracy: length mismatch");
  require(!truth.empty(), ErrorCode::InvalidArgument, "bit_accuracy: empty payload");
  std::size_t same = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) same += (decoded[i] != 0) == (truth[i] != 0);
  BitAccuracy r;
  r.ba = static_cast<double>(same) / static_cast<double>(truth.size());
  r.ber = static_cast<double>(truth.size() - same) / static_cast<double>(truth.size());
  return r;
}

double roc_auc(std::span<const double> pos, std::span<const double> neg) {
  require(!pos.empty() && !neg.empty(), ErrorCode::InvalidArgument, "roc_auc: empty score set");
  std::vector<double> n(neg.begin(), neg.end());
  std::sort(n.begin(), n.end());
  double wins = 0.0;
  for (double p : pos) {
    const auto lo = std::lower_bound(n.begin(), n.end(), p);
    const auto hi = std::upper_bound(lo, n.end(), p);
    wins += static_cast<double>(lo - n.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

double fpr_at_tpr(std::span<const double> pos, std::span<const double> neg, double target_tpr) {
  require(!pos.empty() && !neg.empty(), ErrorCode::InvalidArgument, "fpr_at_tpr: empty score set");
  require(target_tpr > 0.0 && target_tpr <= 1.0, ErrorCode::OutOfRange, "fpr_at_tpr: target must lie in (0, 1]");
  std::vector<double> p(pos.begin(), pos.end());
  std::sort(p.begin(), p.end(), std::greater<>());
  const auto k = static_cast<std::size_t>(std::ceil(target_tpr * static_cast<double>(p.size()) - 1e-12));
  const double tau = p[std::max<std::size_t>(k, 1) - 1];
  const auto fp = std::count_if(neg.begin(), neg.end(), [&](double s) { return s >= tau; });
  return static_cast<double>(fp) / static_cast<double>(neg.size());
}

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  require(!a.empty(), ErrorCode::InvalidArgument, "psnr: empty image");
  double se = 0.0;
  const auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) se += (x[i] - y[i]) * (x[i] - y[i]);
  if (se == 0.0) return kInfinity;
  return -10.0 * std::log10(se / static_cast<double>(x.size()));
}

double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b, "ssim");
  require(!a.empty(), ErrorCode::InvalidArgument, "ssim: empty image");
  constexpr int kWin = 8;
  constexpr double n = kWin * kWin;
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const std::size_t h = a.height(), w = a.width();
  // Summed-area tables over the reflect-padded plane; row/col 0 are zero.
  const std::size_t ph = h + kWin - 1, pw = w + kWin - 1, stride = pw + 1;
  std::vector<double> ia((ph + 1) * stride), ib(ia.size()), iaa(ia.size()), ibb(ia.size()), iab(ia.size());
  double total = 0.0;
  for (std::size_t c = 0; c < a.channels(); ++c) {
    const auto pa = a.plane(c), pb = b.plane(c);
    for (std::size_t y = 0; y < ph; ++y) {
      const std::size_t row = reflect101(static_cast<std::ptrdiff_t>(y), h) * w;
      double ra = 0, rb = 0, raa = 0, rbb = 0, rab = 0;
      for (std::size_t x = 0; x < pw; ++x) {
        const std::size_t i = row + reflect101(static_cast<std::ptrdiff_t>(x), w);
        const double u = pa[i], v = pb[i];
        ra += u, rb += v, raa += u * u, rbb += v * v, rab += u * v;
        const std::size_t k = (y + 1) * stride + x + 1, up = k - stride;
        ia[k] = ia[up] + ra;
        ib[k] = ib[up] + rb;
        iaa[k] = iaa[up] + raa;
        ibb[k] = ibb[up] + rbb;
        iab[k] = iab[up] + rab;
      }
    }
    auto box = [&](const std::vector<double>& t, std::size_t y0, std::size_t x0) {
      const std::size_t y1 = y0 + kWin, x1 = x0 + kWin;
      return t[y1 * stride + x1] - t[y0 * stride + x1] - t[y1 * stride + x0] + t[y0 * stride + x0];
    };
    double sum = 0.0;
    for (std::size_t y0 = 0; y0 < h; ++y0)
      for (std::size_t x0 = 0; x0 < w; ++x0) {
        const double ma = box(ia, y0, x0) / n, mb = box(ib, y0, x0) / n;
        const double va = box(iaa, y0, x0) / n - ma * ma, vb = box(ibb, y0, x0) / n - mb * mb;
        const double cov = box(iab, y0, x0) / n - ma * mb;
        sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      }
    total += sum / static_cast<double>(h * w);
  }
  return total / static_cast<double>(a.channels());
}

Bits majority_vote(const std::vector<Bits>& rows) {
  require(!rows.empty() && rows.size() % 2 == 1, ErrorCode::InvalidArgument, "majority_vote: need an odd seed count");
  const std::size_t L = rows.front().size();
  Bits out(L);
  for (std::size_t j = 0; j < L; ++j) {
    std::size_t ones = 0;
    for (const auto& r : rows) {
      require(r.size() == L, ErrorCode::ShapeMismatch, "majority_vote: ragged bit matrix");
      ones += r[j] ? 1 : 0;
    }
    out[j] = 2 * ones > rows.size() ? 1 : 0;
  }
  return out;
}

}  // namespace dews
