#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>

namespace cqr::detail {

/// Outcome of one integration sweep.
enum class OdeStatus { ok, step_underflow };

template <std::size_t N>
struct OdeResult {
  std::array<double, N> y{};
  double z = 0.0;
  std::size_t steps = 0;
  std::size_t rejected = 0;
  OdeStatus status = OdeStatus::ok;
};

/**
 * Dormand-Prince 5(4) with a caller-supplied step cap. `rhs(z, y)` returns
 * dy/dz, `max_step(z, y)` bounds the next step, `observe(z, y)` is called
 * after every accepted step.
 */
template <std::size_t N, class Rhs, class Cap, class Observe>
OdeResult<N> dopri45(Rhs&& rhs, Cap&& max_step, Observe&& observe, std::array<double, N> y,
                     double z0, double z1, double rtol, double atol) {
  using S = std::array<double, N>;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeResult<N> out;
  double z = z0;
  double h = std::min(max_step(z, y), z1 - z0);
  S k1 = rhs(z, y);

  auto axpy = [](const S& base, double h, std::initializer_list<std::pair<double, const S*>> terms) {
    S r = base;
    for (const auto& [c, k] : terms)
      for (std::size_t i = 0; i < N; ++i) r[i] += h * c * (*k)[i];
    return r;
  };

  while (z < z1) {
    h = std::min({h, max_step(z, y), z1 - z});
    if (h <= 1e-14 * std::max(std::abs(z), 1e-300)) {
      out.status = OdeStatus::step_underflow;
      break;
    }
    const S k2 = rhs(z + c2 * h, axpy(y, h, {{a21, &k1}}));
    const S k3 = rhs(z + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const S k4 = rhs(z + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const S k5 = rhs(z + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const S k6 =
        rhs(z + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const S y_new = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const double z_new = (z1 - z - h) <= 1e-15 * z1 ? z1 : z + h;
    const S k7 = rhs(z_new, y_new);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err = std::max(err, std::abs(e) / sc);
    }

    if (err <= 1.0) {
      z = z_new;
      y = y_new;
      k1 = k7;
      ++out.steps;
      observe(z, y);
      const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
      h *= grow;
    } else {
      ++out.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }
  out.y = y;
  out.z = z;
  return out;
}

}  // namespace cqr::detail
