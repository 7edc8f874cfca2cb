#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace cqr::detail {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct QuadratureResult {
  Vec<N> value{};
  Vec<N> error{};
  bool converged = false;
  int intervals = 0;
};

/**
 * Globally adaptive Gauss-Kronrod (7/15) for vector-valued integrands.
 * The interval with the worst relative error is bisected until every
 * component satisfies err <= rel_tol * |value| or the budget runs out.
 * Components are expected to be single-signed (no cancellation).
 */
template <std::size_t N, class F>
QuadratureResult<N> integrate_adaptive(F&& f, double a, double b, double rel_tol,
                                       int initial_segments = 1, int max_intervals = 400) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  static const auto& kx = GK::abscissa();
  static const auto& kw = GK::weights();
  // Gauss 7-point weights live on the odd Kronrod nodes.
  static const auto& gw = boost::math::quadrature::gauss<double, 7>::weights();

  struct Segment {
    double a, b;
    Vec<N> value, error;
  };

  auto rule = [&](double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    Vec<N> kron{}, gauss{};
    const Vec<N> fc = f(mid);
    for (std::size_t c = 0; c < N; ++c) {
      kron[c] = kw[0] * fc[c];
      gauss[c] = gw[0] * fc[c];
    }
    for (std::size_t j = 1; j < kx.size(); ++j) {
      const Vec<N> f1 = f(mid - half * kx[j]);
      const Vec<N> f2 = f(mid + half * kx[j]);
      for (std::size_t c = 0; c < N; ++c) {
        kron[c] += kw[j] * (f1[c] + f2[c]);
        if (j % 2 == 0) gauss[c] += gw[j / 2] * (f1[c] + f2[c]);
      }
    }
    Segment s{lo, hi, {}, {}};
    for (std::size_t c = 0; c < N; ++c) {
      s.value[c] = half * kron[c];
      s.error[c] = std::abs(half * (kron[c] - gauss[c]));
    }
    return s;
  };

  std::vector<Segment> segs;
  const double step = (b - a) / initial_segments;
  for (int i = 0; i < initial_segments; ++i)
    segs.push_back(rule(a + i * step, i + 1 == initial_segments ? b : a + (i + 1) * step));

  QuadratureResult<N> out;
  for (;;) {
    out.value.fill(0.0);
    out.error.fill(0.0);
    for (const auto& s : segs)
      for (std::size_t c = 0; c < N; ++c) {
        out.value[c] += s.value[c];
        out.error[c] += s.error[c];
      }
    bool done = true;
    for (std::size_t c = 0; c < N; ++c)
      if (out.error[c] > rel_tol * std::abs(out.value[c]) && out.error[c] > 1e-300) done = false;
    out.intervals = static_cast<int>(segs.size());
    if (done) {
      out.converged = true;
      return out;
    }
    if (static_cast<int>(segs.size()) >= max_intervals) return out;

    std::size_t worst = 0;
    double worst_score = -1.0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      double score = 0.0;
      for (std::size_t c = 0; c < N; ++c) {
        const double scale = std::abs(out.value[c]);
        if (scale > 0.0) score = std::max(score, segs[i].error[c] / scale);
      }
      if (score > worst_score) {
        worst_score = score;
        worst = i;
      }
    }
    const Segment s = segs[worst];
    const double mid = 0.5 * (s.a + s.b);
    segs[worst] = rule(s.a, mid);
    segs.insert(segs.begin() + static_cast<std::ptrdiff_t>(worst) + 1, rule(mid, s.b));
  }
}

}  // namespace cqr::detail
