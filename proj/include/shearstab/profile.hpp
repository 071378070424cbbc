#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "detail/cerf.hpp"
#include "errors.hpp"
#include "numerics.hpp"
#include "spline.hpp"

namespace shearstab {

template <class T>
struct ProfileValue {
  T u, du, d2u;
};

// Half-plane base flow U(y) with U(0) = 0 and U -> u_plus exponentially.
class ShearProfile {
 public:
  struct Exponential {  // u_plus (1 - e^{-k y})
    double k;
  };
  struct Erf {  // u_plus erf(y / (2 sqrt(tau))), tau = nu t
    double tau;
  };
  struct HeatedExponential {  // exponential profile after heat flow for time tau = nu t
    double k, tau;
  };
  struct Inflection {  // u_plus (tanh(a(y - yi)) + tanh(a yi)) / (1 + tanh(a yi))
    double a, yi;
  };
  struct Table {
    CubicSpline spline;
  };
  using Shape = std::variant<Exponential, Erf, HeatedExponential, Inflection, Table>;

  static ShearProfile exponential(double u_plus = 1.0, double rate = 1.0) {
    if (!(rate > 0)) throw DomainError("exponential profile needs rate > 0");
    return {Exponential{rate}, u_plus, rate, "exp"};
  }
  static ShearProfile erf(double u_plus, double tau) {
    if (!(tau >= 0)) throw DomainError("erf profile needs tau >= 0");
    const double rate = tau > 0 ? 1.0 / std::sqrt(tau) : std::numeric_limits<double>::infinity();
    return {Erf{tau}, u_plus, rate, "erf"};
  }
  static ShearProfile impulsive(double u_plus) { return erf(u_plus, 0.0); }
  static ShearProfile heated_exponential(double u_plus, double rate, double tau) {
    if (tau == 0) return exponential(u_plus, rate);
    if (!(rate > 0) || !(tau > 0)) throw DomainError("heated exponential needs rate > 0, tau >= 0");
    return {HeatedExponential{rate, tau}, u_plus, std::min(rate, 1.0 / std::sqrt(tau)), "exp+heat"};
  }
  static ShearProfile inflection(double u_plus = 1.0, double sharpness = 2.0, double center = 0.75) {
    if (!(sharpness > 0) || !(center > 0)) throw DomainError("inflection profile needs a > 0, yi > 0");
    return {Inflection{sharpness, center}, u_plus, 2 * sharpness, "inflection"};
  }
  // Samples must start at y = 0; the last sample is taken as the far field.
  static ShearProfile table(std::vector<double> y, std::vector<double> u, double decay_rate) {
    if (y.empty() || y.front() != 0.0) throw DomainError("table profile must start at y = 0");
    if (!(decay_rate > 0)) throw DomainError("table profile needs decay_rate > 0");
    const double up = u.back();
    return {Table{CubicSpline(std::move(y), std::move(u))}, up, decay_rate, "table"};
  }

  double u_plus() const { return u_plus_; }
  double decay_rate() const { return decay_rate_; }
  const std::string& label() const { return label_; }
  const Shape& shape() const { return shape_; }
  bool analytic() const { return !std::holds_alternative<Table>(shape_) && !is_impulsive(); }

  ProfileValue<double> operator()(double y) const {
    if (const auto* t = std::get_if<Table>(&shape_)) {
      if (y >= t->spline.back()) return {u_plus_, 0.0, 0.0};
      const auto v = t->spline(y);
      return {v.f, v.df, v.d2f};
    }
    if (is_impulsive()) return {y > 0 ? u_plus_ : 0.0, 0.0, 0.0};
    const auto v = eval(cplx(y));
    return {v.u.real(), v.du.real(), v.d2u.real()};
  }

  ProfileValue<cplx> operator()(cplx y) const {
    if (!analytic())
      throw UnsupportedEvaluation("profile '" + label_ + "' has no analytic continuation");
    return eval(y);
  }

  // A point beyond which |U - u_plus|, |U'|, |U''| are all below tol * |u_plus|.
  double far_field(double tol = 1e-16) const {
    const double lt = std::log(1.0 / tol);
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Exponential>) {
            return (lt + std::log(std::max(1.0, s.k * s.k))) / s.k;
          } else if constexpr (std::is_same_v<S, Erf>) {
            return 2 * std::sqrt(s.tau) * (std::sqrt(lt) + 1.0);
          } else if constexpr (std::is_same_v<S, HeatedExponential>) {
            return (lt + std::log(std::max(1.0, s.k * s.k))) / s.k + 2 * std::sqrt(s.tau) * (std::sqrt(lt) + 1.0) +
                   2 * s.k * s.tau;
          } else if constexpr (std::is_same_v<S, Inflection>) {
            return s.yi + (lt + std::log(2 * std::max(1.0, 4 * s.a * s.a))) / (2 * s.a);
          } else {
            return s.spline.back();
          }
        },
        shape_);
  }

 private:
  ShearProfile(Shape s, double up, double rate, std::string label)
      : shape_(std::move(s)), u_plus_(up), decay_rate_(rate), label_(std::move(label)) {}

  bool is_impulsive() const {
    const auto* e = std::get_if<Erf>(&shape_);
    return e && e->tau == 0;
  }

  ProfileValue<cplx> eval(cplx y) const {
    const double up = u_plus_;
    return std::visit(
        [&](const auto& s) -> ProfileValue<cplx> {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Exponential>) {
            const cplx e = std::exp(-s.k * y);
            return {up * (1.0 - e), up * s.k * e, -up * s.k * s.k * e};
          } else if constexpr (std::is_same_v<S, Erf>) {
            const double st = std::sqrt(s.tau);
            const cplx g = std::exp(-y * y / (4 * s.tau)) / (detail::kSqrtPi * st);
            return {up * detail::erf(y / (2 * st)), up * g, -up * y / (2 * s.tau) * g};
          } else if constexpr (std::is_same_v<S, HeatedExponential>) {
            return heated(s, y);
          } else if constexpr (std::is_same_v<S, Inflection>) {
            const double t0 = std::tanh(s.a * s.yi);
            const cplx t = std::tanh(s.a * (y - s.yi));
            const cplx sech2 = 1.0 - t * t;
            const double n = up / (1 + t0);
            return {n * (t + t0), n * s.a * sech2, -2.0 * n * s.a * s.a * t * sech2};
          } else {
            throw UnsupportedEvaluation("table profile");
          }
        },
        shape_);
  }

  // Odd extension of e^{-k y} through the heat kernel:
  // w = P - M, P = (1/2) e^{k^2 tau - k y} erfc(a), M = (1/2) e^{k^2 tau + k y} erfc(b),
  // a = (2 k tau - y)/(2 sqrt tau), b = (2 k tau + y)/(2 sqrt tau).
  ProfileValue<cplx> heated(const HeatedExponential& s, cplx y) const {
    const double k = s.k, tau = s.tau, st = std::sqrt(tau);
    const cplx gauss = std::exp(-y * y / (4 * tau));
    const cplx a = (2 * k * tau - y) / (2 * st), b = (2 * k * tau + y) / (2 * st);
    const cplx P = a.real() >= 0 ? 0.5 * gauss * detail::erfcx(a)
                                 : std::exp(k * k * tau - k * y) - 0.5 * gauss * detail::erfcx(-a);
    const cplx M = 0.5 * gauss * detail::erfcx(b);
    const cplx G = gauss / (detail::kSqrtPi * st);
    const cplx dG = -y / (2 * tau) * G;
    const cplx w = P - M;
    const cplx dw = -k * (P + M) + G;
    const cplx d2w = k * k * w + dG;
    const cplx E = detail::erf(y / (2 * st));
    return {u_plus_ * (E - w), u_plus_ * (G - dw), u_plus_ * (dG - d2w)};
  }

  Shape shape_;
  double u_plus_, decay_rate_;
  std::string label_;
};

inline ProfileValue<double> eval_profile(const ShearProfile& p, double y) { return p(y); }
inline ProfileValue<cplx> eval_profile(const ShearProfile& p, cplx y) { return p(y); }

struct CriticalLayer {
  cplx y_c;
  cplx c;
  cplx u_prime_at_yc;
};

namespace detail {

template <class Eval>
bool newton_critical(const Eval& eval, cplx c, cplx& y, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    const auto v = eval(y);
    const cplx r = v.u - c;
    if (std::abs(r) < 1e-14 * std::max(1.0, std::abs(c))) return true;
    if (v.du == cplx(0)) return false;
    cplx dy = r / v.du;
    // Damp steps that would jump far outside the current scale.
    const double cap = 0.5 * (1.0 + std::abs(y));
    if (std::abs(dy) > cap) dy *= cap / std::abs(dy);
    y -= dy;
    if (!std::isfinite(y.real()) || !std::isfinite(y.imag())) return false;
  }
  return std::abs(eval(y).u - c) < 1e-12;
}

}  // namespace detail

// Newton on U(y) = c starting from c / U'(0); if that start is poor, Newton is
// continued along c_k = c k / K from the wall.
inline CriticalLayer critical_layer(const ShearProfile& p, cplx c, int max_iter = 100) {
  if (!(std::abs(c) < std::abs(p.u_plus())))
    throw DomainError("critical layer needs |c| < |u_plus|");
  const bool real_path = c.imag() == 0.0 && !p.analytic();
  if (c.imag() != 0.0 && !p.analytic())
    throw UnsupportedEvaluation("complex critical layer on a non-analytic profile");
  auto eval = [&](cplx y) -> ProfileValue<cplx> {
    if (real_path) {
      const auto v = p(y.real());
      return {v.u, v.du, v.d2u};
    }
    return p(y);
  };
  const auto v0 = eval(0.0);
  if (v0.du == cplx(0)) throw DomainError("critical layer needs U'(0) != 0");
  cplx y = c / v0.du;
  if (detail::newton_critical(eval, c, y, max_iter)) return {y, c, eval(y).du};
  const int K = 32;
  y = 0.0;
  for (int k = 1; k <= K; ++k) {
    if (!detail::newton_critical(eval, c * double(k) / double(K), y, max_iter))
      throw RootNotFound("critical layer Newton did not converge", y);
  }
  return {y, c, eval(y).du};
}

}  // namespace shearstab
