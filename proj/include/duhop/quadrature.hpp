#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "duhop/errors.hpp"

namespace duhop {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Default evaluation budget per integral.
inline constexpr std::size_t kDefaultEvalBudget = 1'000'000;

enum class DomainKind { FullLine, HalfLinePositive, HalfLineNegative, Interval };

/// An open interval of the extended real line. Half-lines may be anchored at
/// any finite point, not just the origin.
struct Domain1D {
  double a = -kInfinity;
  double b = kInfinity;

  static Domain1D full_line() { return {}; }

  static Domain1D half_line_positive(double from = 0.0) {
    if (!std::isfinite(from)) throw DomainError("half-line anchor must be finite");
    return {from, kInfinity};
  }

  static Domain1D half_line_negative(double to = 0.0) {
    if (!std::isfinite(to)) throw DomainError("half-line anchor must be finite");
    return {-kInfinity, to};
  }

  static Domain1D interval(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw DomainError("interval endpoints must be finite");
    if (!(lo < hi)) throw DomainError("interval requires a < b");
    return {lo, hi};
  }

  DomainKind kind() const {
    const bool ia = std::isinf(a), ib = std::isinf(b);
    if (ia && ib) return DomainKind::FullLine;
    if (ia) return DomainKind::HalfLineNegative;
    if (ib) return DomainKind::HalfLinePositive;
    return DomainKind::Interval;
  }

  bool contains(double t) const { return t > a && t < b; }
  bool bounded() const { return std::isfinite(a) && std::isfinite(b); }
};

/// Open-interval intersection; disjoint factors give nullopt.
inline std::optional<Domain1D> intersect(const Domain1D& x, const Domain1D& y) {
  const double lo = std::max(x.a, y.a);
  const double hi = std::min(x.b, y.b);
  if (!(lo < hi)) return std::nullopt;
  return Domain1D{lo, hi};
}

/// Product domain.
struct Domain2D {
  Domain1D dx;
  Domain1D dy;
};

/// Declares local integrand behaviour: |f(t)| ~ |t - location|^{-exponent}
/// near a finite location, or |f(t)| ~ |t|^{-exponent} toward an infinite one.
/// A finite hint with exponent <= 0 is a plain breakpoint (no singularity,
/// but the integrator will split there).
struct SingularityHint {
  double location = 0.0;
  double exponent = 0.0;

  bool is_tail() const { return std::isinf(location); }
};

inline SingularityHint hint_at(double location, double exponent) {
  return {location, exponent};
}
inline SingularityHint hint_tail_pos(double exponent) { return {kInfinity, exponent}; }
inline SingularityHint hint_tail_neg(double exponent) { return {-kInfinity, exponent}; }

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t n_evals = 0;
  bool converged = false;
  /// Set when panels stacked against a singular point or tail failed to decay
  /// geometrically: the integral looks divergent, not merely under-resolved.
  bool diverging = false;
};

/// Sum of piecewise results (value and error add, flags combine).
inline QuadratureResult combine(const QuadratureResult& x, const QuadratureResult& y) {
  QuadratureResult r;
  r.value = x.value + y.value;
  r.abs_error_estimate = x.abs_error_estimate + y.abs_error_estimate;
  r.n_evals = x.n_evals + y.n_evals;
  r.converged = x.converged && y.converged;
  r.diverging = x.diverging || y.diverging;
  return r;
}

namespace qdetail {

// 7-point Gauss / 15-point Kronrod pair on [-1,1].
inline constexpr std::array<double, 8> kXgk = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.02293532201052922, 0.06309209262997855, 0.10479001032225018,
    0.14065325971552591, 0.16900472663926790, 0.19035057806478540,
    0.20443294007529889, 0.20948214108472782};
inline constexpr std::array<double, 4> kWg = {
    0.12948496616886969, 0.27970539148927666, 0.38183005050511894,
    0.41795918367346938};

struct NeumaierSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double t = s + x;
    c += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  double get() const { return s + c; }
};

struct EvalCounter {
  std::size_t used = 0;
  std::size_t bad = 0;  // non-finite samples replaced by 0
};

using Sampler = std::function<double(double)>;

// Wraps a fully composed segment sampler: counts evaluations and zeroes
// non-finite samples, which can only arise from transform arithmetic
// saturating right next to a singular point or tail.
inline Sampler guarded(Sampler f, EvalCounter& counter) {
  return [f = std::move(f), &counter](double x) {
    ++counter.used;
    const double y = f(x);
    if (!std::isfinite(y)) {
      ++counter.bad;
      return 0.0;
    }
    return y;
  };
}

struct PanelEval {
  double integral = 0.0;
  double error = 0.0;
};

// Embedded-rule panel evaluation; the local error follows the classic
// resasc-scaled estimate.
inline PanelEval gk15(const Sampler& g, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double fc = g(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);

  std::array<double, 7> fv1{}, fv2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv1[j] = g(center - dx);
    fv2[j] = g(center + dx);
    const double fsum = fv1[j] + fv2[j];
    resk += kWgk[j] * fsum;
    resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * fsum;
  }

  const double mean = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));

  PanelEval out;
  out.integral = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  out.error = std::abs((resk - resg) * half);
  if (resasc != 0.0 && out.error != 0.0)
    out.error = resasc * std::min(1.0, std::pow(200.0 * out.error / resasc, 1.5));
  out.error = std::max(out.error, 50.0 * std::numeric_limits<double>::epsilon() * resabs);
  return out;
}

struct Panel {
  double a = 0.0, b = 0.0;
  double integral = 0.0;
  double error = 0.0;
  int seg = 0;
};

struct PanelWorse {
  bool operator()(const Panel& x, const Panel& y) const {
    if (x.error != y.error) return x.error < y.error;
    if (x.seg != y.seg) return x.seg > y.seg;
    return x.a > y.a;  // ties resolved left-to-right
  }
};

/// A finite integration segment in (possibly transformed) coordinates.
struct Segment {
  Sampler g;
  double lo = 0.0, hi = 0.0;
  double width() const { return hi - lo; }
};

// ---- domain normalization -------------------------------------------------

struct SubDomain {
  double lo = 0.0, hi = 0.0;  // may be +-inf
  double gamma_lo = 0.0;      // |f| ~ |t-lo|^{-gamma_lo}; 0 means none declared
  double gamma_hi = 0.0;
  double tail_neg = 0.0;  // |f| ~ |t|^{-tail} toward -inf / +inf; 0 = unknown
  double tail_pos = 0.0;
};

inline std::vector<SubDomain> partition_domain(const Domain1D& d,
                                               std::span<const SingularityHint> hints) {
  double tail_pos = 0.0, tail_neg = 0.0;
  std::vector<SingularityHint> pts;
  for (const auto& h : hints) {
    if (h.is_tail()) {
      const bool relevant = h.location > 0 ? std::isinf(d.b) : std::isinf(d.a);
      if (!relevant) continue;
      if (!(h.exponent > 1.0))
        throw NonIntegrableError("tail hint exponent must exceed 1 for integrability");
      double& slot = h.location > 0 ? tail_pos : tail_neg;
      slot = std::max(slot, h.exponent);
    } else {
      if (h.location < d.a || h.location > d.b) continue;
      if (h.exponent >= 1.0)
        throw NonIntegrableError(
            "declared singularity exponent >= 1 at a finite point is not integrable");
      pts.push_back(h);
    }
  }
  std::sort(pts.begin(), pts.end(),
            [](const SingularityHint& x, const SingularityHint& y) {
              return x.location < y.location;
            });
  // merge duplicates, keeping the strongest exponent
  std::vector<SingularityHint> merged;
  for (const auto& h : pts) {
    if (!merged.empty() && merged.back().location == h.location)
      merged.back().exponent = std::max(merged.back().exponent, h.exponent);
    else
      merged.push_back(h);
  }

  std::vector<double> cuts;
  std::vector<double> gammas;  // gamma at each cut
  double gamma_a = 0.0, gamma_b = 0.0;
  for (const auto& h : merged) {
    if (h.location == d.a) {
      gamma_a = h.exponent;
    } else if (h.location == d.b) {
      gamma_b = h.exponent;
    } else {
      cuts.push_back(h.location);
      gammas.push_back(h.exponent);
    }
  }
  // A tail-hinted full line is cut at the origin so each tail lands on a ray
  // transform that can absorb it exactly.
  if (cuts.empty() && d.kind() == DomainKind::FullLine &&
      (tail_pos > 1.0 || tail_neg > 1.0)) {
    cuts.push_back(0.0);
    gammas.push_back(0.0);
  }

  std::vector<SubDomain> out;
  double lo = d.a;
  double glo = gamma_a;
  for (std::size_t i = 0; i <= cuts.size(); ++i) {
    SubDomain sd;
    sd.lo = lo;
    sd.hi = i < cuts.size() ? cuts[i] : d.b;
    sd.gamma_lo = glo;
    sd.gamma_hi = i < cuts.size() ? gammas[i] : gamma_b;
    sd.tail_neg = tail_neg;
    sd.tail_pos = tail_pos;
    out.push_back(sd);
    if (i < cuts.size()) {
      lo = cuts[i];
      glo = gammas[i];
    }
  }
  return out;
}

inline constexpr double kGammaEps = 1e-12;  // exponents below this count as absent
inline constexpr double kMaxGrade = 50.0;   // cap on grading powers

// Finite interval with a declared power singularity at one endpoint:
// t = end -+ r^m with m = 2/(1-gamma) makes the transformed integrand vanish
// linearly at r=0. The offset r^m is added to the endpoint exactly, so
// singularities anchored at 0 are sampled without cancellation.
inline Segment graded_endpoint(const Sampler& f, double lo, double hi, double gamma,
                               bool singular_at_lo) {
  const double m = std::min(2.0 / (1.0 - gamma), kMaxGrade);
  const double range = std::pow(hi - lo, 1.0 / m);
  if (singular_at_lo)
    return Segment{[f, lo, m](double r) {
                     return f(lo + std::pow(r, m)) * m * std::pow(r, m - 1.0);
                   },
                   0.0, range};
  return Segment{[f, hi, m](double r) {
                   return f(hi - std::pow(r, m)) * m * std::pow(r, m - 1.0);
                 },
                 0.0, range};
}

// Ray (anchor, +-inf) mapped to (0,1] with infinity at r=0 (where coordinates
// are exact, so graded panels toward the tail do not lose digits). With a
// declared tail exponent rho the map is t = anchor -+ 1 +- r^{-k},
// k = 2/(rho-1), which again vanishes linearly at r=0; without one it is the
// plain k=1 rational map.
inline Segment ray_segment(const Sampler& f, double anchor, bool positive, double tail) {
  double k = 1.0;
  if (tail > 1.0 && tail < 2.0) k = std::min(2.0 / (tail - 1.0), kMaxGrade);
  const double sign = positive ? 1.0 : -1.0;
  const double base = anchor - sign;
  return Segment{[f, base, sign, k](double r) {
                   const double t = base + sign * std::pow(r, -k);
                   return f(t) * k * std::pow(r, -k - 1.0);
                 },
                 0.0, 1.0};
}

// Maps every sub-domain to finite segments with declared endpoint behaviour
// absorbed by the changes of variable above; an anchored singularity plus a
// hinted tail on the same ray is handled by cutting the ray at anchor+-1.
inline std::vector<Segment> build_segments(const Sampler& f,
                                           const std::vector<SubDomain>& subs) {
  std::vector<Segment> segs;

  auto emit_finite = [&](double lo, double hi, double gl, double gr) {
    if (gl > kGammaEps && gr > kGammaEps) {
      const double mid = 0.5 * (lo + hi);
      segs.push_back(graded_endpoint(f, lo, mid, gl, true));
      segs.push_back(graded_endpoint(f, mid, hi, gr, false));
    } else if (gl > kGammaEps) {
      segs.push_back(graded_endpoint(f, lo, hi, gl, true));
    } else if (gr > kGammaEps) {
      segs.push_back(graded_endpoint(f, lo, hi, gr, false));
    } else {
      segs.push_back(Segment{f, lo, hi});
    }
  };

  auto emit_ray = [&](double anchor, bool positive, double anchor_gamma, double tail) {
    if (anchor_gamma > kGammaEps) {
      const double cut = anchor + (positive ? 1.0 : -1.0);
      if (positive)
        emit_finite(anchor, cut, anchor_gamma, 0.0);
      else
        emit_finite(cut, anchor, 0.0, anchor_gamma);
      segs.push_back(ray_segment(f, cut, positive, tail));
    } else {
      segs.push_back(ray_segment(f, anchor, positive, tail));
    }
  };

  for (const auto& sd : subs) {
    const bool lo_inf = std::isinf(sd.lo), hi_inf = std::isinf(sd.hi);
    if (!lo_inf && !hi_inf) {
      emit_finite(sd.lo, sd.hi, sd.gamma_lo, sd.gamma_hi);
    } else if (!lo_inf && hi_inf) {
      emit_ray(sd.lo, true, sd.gamma_lo, sd.tail_pos);
    } else if (lo_inf && !hi_inf) {
      emit_ray(sd.hi, false, sd.gamma_hi, sd.tail_neg);
    } else {
      segs.push_back(Segment{[f](double s) {
                               const double om = 1.0 - s * s;
                               return f(s / om) * (1.0 + s * s) / (om * om);
                             },
                             -1.0, 1.0});
    }
  }
  return segs;
}

// Looks for a bisection ladder stacked against a segment edge: panel widths
// graded geometrically toward the edge but contributions that fail to decay,
// the signature of a divergent endpoint (as opposed to an under-resolved but
// integrable one, whose ladder contributions shrink geometrically).
inline bool detect_divergence(std::vector<Panel> panels, double tol) {
  std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) {
    if (x.seg != y.seg) return x.seg < y.seg;
    return x.a < y.a;
  });
  const double floor = std::max(tol * 1e-2, 1e-300);

  auto stalls = [&](const std::vector<double>& levels) {
    if (levels.size() < 6) return false;
    if (*std::max_element(levels.begin(), levels.end()) <= floor) return false;
    std::vector<double> ratios;
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
      if (levels[i + 1] <= 0.0) return false;
      ratios.push_back(levels[i] / levels[i + 1]);
    }
    std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
    return ratios[ratios.size() / 2] >= 0.95;
  };

  std::size_t lo = 0;
  while (lo < panels.size()) {
    std::size_t hi = lo;
    while (hi < panels.size() && panels[hi].seg == panels[lo].seg) ++hi;

    // Walk inward from an edge while widths are non-decreasing, merging
    // same-width siblings into one level; require a genuine grading (the
    // widths must span several doublings) before calling it a ladder.
    auto gather = [&](bool from_left) {
      std::vector<double> levels;
      double level_w = 0.0, first_w = 0.0, last_w = 0.0;
      for (std::size_t k = 0; k < hi - lo && levels.size() < 48; ++k) {
        const Panel& p = panels[from_left ? lo + k : hi - 1 - k];
        const double w = p.b - p.a;
        if (levels.empty()) {
          levels.push_back(std::abs(p.integral));
          level_w = first_w = last_w = w;
          continue;
        }
        if (w < 0.7 * level_w) break;  // widths shrinking again: ladder over
        if (w < 1.5 * level_w) {       // same level: merge siblings
          levels.back() += std::abs(p.integral);
          last_w = std::max(last_w, w);
          continue;
        }
        levels.push_back(std::abs(p.integral));
        level_w = last_w = w;
      }
      if (first_w <= 0.0 || last_w / first_w < 32.0) levels.clear();
      return levels;
    };

    for (bool from_left : {true, false})
      if (stalls(gather(from_left))) return true;
    lo = hi;
  }
  return false;
}

struct EngineResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  bool diverging = false;
};

inline EngineResult run_adaptive(const std::vector<Segment>& segs, double tol,
                                 std::size_t budget, EvalCounter& counter) {
  constexpr int kInitialPanels = 8;
  std::priority_queue<Panel, std::vector<Panel>, PanelWorse> active;
  std::vector<Panel> frozen;

  auto eval_panel = [&](int seg, double a, double b) {
    const PanelEval pe = gk15(segs[seg].g, a, b);
    return Panel{a, b, pe.integral, pe.error, seg};
  };

  double err_sum = 0.0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    // Log-spaced initial panels resolve wide one-signed intervals cheaply.
    const bool log_grade = s.lo > 0.0 && s.hi / s.lo > 64.0;
    double prev = s.lo;
    for (int k = 1; k <= kInitialPanels; ++k) {
      double next;
      if (k == kInitialPanels)
        next = s.hi;
      else if (log_grade)
        next = s.lo * std::pow(s.hi / s.lo, double(k) / kInitialPanels);
      else
        next = s.lo + s.width() * double(k) / kInitialPanels;
      if (!(next > prev)) continue;
      Panel p = eval_panel(int(i), prev, next);
      err_sum += p.error;
      active.push(p);
      prev = next;
    }
  }

  int resum_tick = 0;
  auto resum = [&]() {
    // exact recompute to cancel incremental drift
    NeumaierSum e;
    std::vector<Panel> tmp;
    tmp.reserve(active.size());
    while (!active.empty()) {
      tmp.push_back(active.top());
      active.pop();
    }
    for (const auto& p : tmp) e.add(p.error);
    for (const auto& p : frozen) e.add(p.error);
    for (const auto& p : tmp) active.push(p);
    err_sum = e.get();
  };

  double frozen_err = 0.0;  // cannot be reduced by further subdivision
  while (err_sum > tol && frozen_err <= tol && !active.empty() &&
         counter.used + 30 <= budget) {
    Panel worst = active.top();
    active.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const double min_width =
        std::max({1.0, std::abs(worst.a), std::abs(worst.b)}) * 0x1p-50;
    if (worst.b - worst.a <= min_width || mid <= worst.a || mid >= worst.b) {
      frozen.push_back(worst);
      frozen_err += worst.error;
      continue;
    }
    Panel l = eval_panel(worst.seg, worst.a, mid);
    Panel r = eval_panel(worst.seg, mid, worst.b);
    err_sum += l.error + r.error - worst.error;
    active.push(l);
    active.push(r);
    if (++resum_tick % 256 == 0) resum();
  }

  std::vector<Panel> all;
  all.reserve(active.size() + frozen.size());
  while (!active.empty()) {
    all.push_back(active.top());
    active.pop();
  }
  all.insert(all.end(), frozen.begin(), frozen.end());
  std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) {
    if (x.seg != y.seg) return x.seg < y.seg;
    return x.a < y.a;
  });

  NeumaierSum v, e;
  for (const auto& p : all) {
    v.add(p.integral);
    e.add(p.error);
  }

  EngineResult out;
  out.value = v.get();
  out.error = e.get();
  out.converged = out.error <= tol;
  if (!out.converged) out.diverging = detect_divergence(std::move(all), tol);
  return out;
}

inline QuadratureResult integrate_line_impl(const Sampler& f, const Domain1D& d,
                                            std::span<const SingularityHint> hints,
                                            double tol, std::size_t budget,
                                            EvalCounter& counter) {
  if (!(tol > 0.0)) throw ParamError("tolerance must be positive");
  const auto subs = partition_domain(d, hints);
  auto segs = build_segments(f, subs);
  for (auto& s : segs) s.g = guarded(std::move(s.g), counter);
  const std::size_t before = counter.used;
  const EngineResult er = run_adaptive(segs, tol, budget, counter);
  QuadratureResult out;
  out.value = er.value;
  out.abs_error_estimate = er.error;
  out.n_evals = counter.used - before;
  out.converged = er.converged;
  out.diverging = er.diverging;
  return out;
}

}  // namespace qdetail

/// Adaptive integration of f over d. Declared singularities and tails are
/// absorbed by changes of variable; the result carries an absolute error
/// estimate (sum of panel errors) and converged=false with the best estimate
/// when the evaluation budget runs out.
inline QuadratureResult integrate_line(const std::function<double(double)>& f,
                                       const Domain1D& d,
                                       std::span<const SingularityHint> hints,
                                       double tol,
                                       std::size_t budget = kDefaultEvalBudget) {
  qdetail::EvalCounter counter;
  return qdetail::integrate_line_impl(f, d, hints, tol, budget, counter);
}

inline QuadratureResult integrate_line(const std::function<double(double)>& f,
                                       const Domain1D& d, double tol,
                                       std::size_t budget = kDefaultEvalBudget) {
  return integrate_line(f, d, std::span<const SingularityHint>{}, tol, budget);
}

/// Iterated integration over a product domain. The requested tolerance is
/// split between the outer rule and the inner integrals (scaled by the
/// transformed outer width so inner errors fold into the estimate).
inline QuadratureResult integrate_plane(const std::function<double(double, double)>& f,
                                        const Domain2D& d,
                                        std::span<const SingularityHint> hints_x,
                                        std::span<const SingularityHint> hints_y,
                                        double tol,
                                        std::size_t budget = kDefaultEvalBudget) {
  if (!(tol > 0.0)) throw ParamError("tolerance must be positive");

  const auto subs_x = qdetail::partition_domain(d.dx, hints_x);
  double raw_width = 0.0;
  for (const auto& sd : subs_x) {
    if (std::isinf(sd.lo) && std::isinf(sd.hi))
      raw_width += 2.0;
    else if (std::isinf(sd.lo) || std::isinf(sd.hi))
      raw_width += 1.0;
    else
      raw_width += std::max(1.0, sd.hi - sd.lo);
  }
  const double inner_tol = tol / (4.0 * std::max(1.0, raw_width));

  qdetail::EvalCounter counter;
  double max_inner_err = 0.0;
  bool inner_converged = true;
  bool inner_diverging = false;
  const std::vector<SingularityHint> hy(hints_y.begin(), hints_y.end());

  const qdetail::Sampler outer = [&](double x) {
    const auto r = qdetail::integrate_line_impl(
        [&f, x](double y) { return f(x, y); }, d.dy, hy, inner_tol, budget, counter);
    max_inner_err = std::max(max_inner_err, r.abs_error_estimate);
    inner_converged = inner_converged && r.converged;
    inner_diverging = inner_diverging || r.diverging;
    return r.value;
  };

  auto segs = qdetail::build_segments(outer, subs_x);
  for (auto& s : segs) s.g = qdetail::guarded(std::move(s.g), counter);
  double true_width = 0.0;
  for (const auto& s : segs) true_width += s.width();

  const qdetail::EngineResult er =
      qdetail::run_adaptive(segs, 0.5 * tol, budget, counter);

  QuadratureResult out;
  out.value = er.value;
  out.abs_error_estimate = er.error + true_width * max_inner_err;
  out.n_evals = counter.used;
  out.converged = er.converged && inner_converged && out.abs_error_estimate <= tol;
  out.diverging = er.diverging || inner_diverging;
  return out;
}

}  // namespace duhop
