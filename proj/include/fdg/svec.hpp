#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace fdg {

/// Small fixed-size vector of doubles with the arithmetic needed by flux
/// kernels. Used for conservative states and flux vectors alike.
template <std::size_t N>
struct SVec {
  std::array<double, N> v{};

  static constexpr std::size_t size() { return N; }
  constexpr double& operator[](std::size_t i) { return v[i]; }
  constexpr const double& operator[](std::size_t i) const { return v[i]; }

  constexpr SVec& operator+=(const SVec& o) {
    for (std::size_t i = 0; i < N; ++i) v[i] += o.v[i];
    return *this;
  }
  constexpr SVec& operator-=(const SVec& o) {
    for (std::size_t i = 0; i < N; ++i) v[i] -= o.v[i];
    return *this;
  }
  constexpr SVec& operator*=(double s) {
    for (auto& x : v) x *= s;
    return *this;
  }

  friend constexpr SVec operator+(SVec a, const SVec& b) { return a += b; }
  friend constexpr SVec operator-(SVec a, const SVec& b) { return a -= b; }
  friend constexpr SVec operator-(SVec a) {
    for (auto& x : a.v) x = -x;
    return a;
  }
  friend constexpr SVec operator*(double s, SVec a) { return a *= s; }
  friend constexpr SVec operator*(SVec a, double s) { return a *= s; }
  friend constexpr bool operator==(const SVec&, const SVec&) = default;

  friend constexpr double dot(const SVec& a, const SVec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += a.v[i] * b.v[i];
    return s;
  }
  friend double max_abs(const SVec& a) {
    double m = 0.0;
    for (double x : a.v) {
      if (std::isnan(x)) return x;
      m = std::max(m, std::abs(x));
    }
    return m;
  }
};

template <int Dim>
using Vector = SVec<static_cast<std::size_t>(Dim)>;

template <int Dim>
double norm(const Vector<Dim>& a) {
  return std::sqrt(dot(a, a));
}

}  // namespace fdg
