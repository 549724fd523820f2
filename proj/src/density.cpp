#include "argsim/density.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <fmt/format.h>

namespace argsim {

namespace {

constexpr double kBisectionTol = 1e-12;

double parse_positive(std::string_view text, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw std::invalid_argument(fmt::format("density: cannot parse {} '{}'", what, text));
  }
  if (!(v > 0.0)) throw std::invalid_argument(fmt::format("density: {} must be positive", what));
  return v;
}

double clamp_inside(double s, double lo, double hi) {
  if (s <= lo) s = std::nextafter(lo, hi);
  if (s >= hi) s = std::nextafter(hi, lo);
  return s;
}

}  // namespace

BreakpointDensity BreakpointDensity::beta(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw std::invalid_argument("density: Beta shapes must be positive and finite");
  }
  BreakpointDensity d;
  d.kind_ = Kind::Beta;
  d.alpha_ = alpha;
  d.beta_ = beta;
  return d;
}

BreakpointDensity BreakpointDensity::parse(std::string_view spec) {
  if (spec == "uniform") return uniform();
  constexpr std::string_view prefix = "beta:";
  if (spec.starts_with(prefix)) {
    std::string_view rest = spec.substr(prefix.size());
    auto comma = rest.find(',');
    if (comma == std::string_view::npos) throw std::invalid_argument("density: expected beta:a,b");
    return beta(parse_positive(rest.substr(0, comma), "alpha"), parse_positive(rest.substr(comma + 1), "beta"));
  }
  throw std::invalid_argument(fmt::format("density: unknown family '{}'", spec));
}

std::string BreakpointDensity::to_string() const {
  if (kind_ == Kind::Uniform) return "uniform";
  return fmt::format("beta:{},{}", alpha_, beta_);
}

double BreakpointDensity::pdf(double s) const {
  if (s < 0.0 || s > 1.0) return 0.0;
  if (kind_ == Kind::Uniform) return 1.0;
  return boost::math::ibeta_derivative(alpha_, beta_, s);
}

double BreakpointDensity::cdf(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  if (kind_ == Kind::Uniform) return s;
  return boost::math::ibeta(alpha_, beta_, s);
}

double BreakpointDensity::mass(double lo, double hi) const {
  if (!(lo < hi)) return 0.0;
  if (kind_ == Kind::Uniform) return std::min(hi, 1.0) - std::max(lo, 0.0);
  // Upper tail through the complement keeps precision near 1.
  if (lo > 0.5) return boost::math::ibetac(alpha_, beta_, lo) - (hi >= 1.0 ? 0.0 : boost::math::ibetac(alpha_, beta_, hi));
  return cdf(hi) - cdf(lo);
}

double BreakpointDensity::inverse_cdf(double q) const {
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  if (kind_ == Kind::Uniform) return q;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > kBisectionTol) {
    double mid = 0.5 * (lo + hi);
    if (cdf(mid) < q) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double BreakpointDensity::truncated_inverse(double lo, double hi, double v) const {
  if (kind_ == Kind::Uniform) return clamp_inside(lo + v * (hi - lo), lo, hi);
  const double target = cdf(lo) + v * (cdf(hi) - cdf(lo));
  double a = lo;
  double b = hi;
  while (b - a > kBisectionTol) {
    double mid = 0.5 * (a + b);
    if (cdf(mid) < target) a = mid;
    else b = mid;
  }
  return clamp_inside(0.5 * (a + b), lo, hi);
}

}  // namespace argsim
