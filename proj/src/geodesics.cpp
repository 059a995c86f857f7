#include "dualgeo/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "dualgeo/io.hpp"

namespace dualgeo {

namespace {

struct Rhs {
  Vec dx;
  Vec dp;
};

struct Halt {
  HaltReason reason;
  std::string detail;
};

bool finite(const Vec& v) { return v.allFinite(); }

bool inside(const Chart* domain, const Vec& x) { return !domain || (domain->in_box(x) && domain->contains(x)); }

Rhs rhs(const AffineConnection& c, double tau, const Vec& x, const Vec& p, const ParameterFn& q) {
  const int n = static_cast<int>(x.size());
  const Mat g = c.metric().at(x);
  const Vec v = g.partialPivLu().solve(p);
  const TensorValue gamma = c.coefficients(x);
  Vec dp = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s += gamma(k, j, i) * v(j) * p(k);
    dp(i) = s;
  }
  if (q) dp += q(tau) * p;
  return {v, dp};
}

// One RK4 step; returns a halt description if any stage is unusable.
std::optional<Halt> rk4_step(const AffineConnection& c, const Chart* domain, double max_step, const ParameterFn& q,
                             double tau, double h, Vec& x, Vec& p, Vec& v) {
  auto stage = [&](double t, const Vec& xs, const Vec& ps, Rhs& out) -> std::optional<Halt> {
    if (!finite(xs) || !finite(ps)) return Halt{HaltReason::NonFinite, "non-finite state at tau=" + format_double(t)};
    if (!inside(domain, xs))
      return Halt{HaltReason::DomainExit, "left the chart domain at " + format_point(xs)};
    try {
      out = rhs(c, t, xs, ps, q);
    } catch (const SingularMetricError& e) {
      return Halt{HaltReason::SingularMetric, e.what()};
    } catch (const DomainError& e) {
      return Halt{HaltReason::DomainExit, e.what()};
    } catch (const Error& e) {
      return Halt{HaltReason::Evaluation, e.what()};
    }
    if (!finite(out.dx) || !finite(out.dp))
      return Halt{HaltReason::NonFinite, "non-finite derivative at " + format_point(xs)};
    return std::nullopt;
  };

  Rhs k1, k2, k3, k4;
  if (auto s = stage(tau, x, p, k1)) return s;
  if (auto s = stage(tau + h / 2, x + (h / 2) * k1.dx, p + (h / 2) * k1.dp, k2)) return s;
  if (auto s = stage(tau + h / 2, x + (h / 2) * k2.dx, p + (h / 2) * k2.dp, k3)) return s;
  if (auto s = stage(tau + h, x + h * k3.dx, p + h * k3.dp, k4)) return s;
  const Vec xn = x + (h / 6) * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
  const Vec pn = p + (h / 6) * (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp);
  if (!finite(xn) || !finite(pn)) return Halt{HaltReason::NonFinite, "step produced a non-finite state"};
  if (!inside(domain, xn)) return Halt{HaltReason::DomainExit, "left the chart domain at " + format_point(xn)};
  if ((xn - x).norm() > max_step)
    return Halt{HaltReason::UnderResolved, "step length exceeded " + format_double(max_step) + " at " + format_point(x)};
  try {
    v = c.metric().at(xn).partialPivLu().solve(pn);
  } catch (const SingularMetricError& e) {
    return Halt{HaltReason::SingularMetric, e.what()};
  }
  x = xn;
  p = pn;
  return std::nullopt;
}

struct Curve {
  std::vector<Point> x;
  std::vector<Vec> v;
  std::vector<double> tau;
  std::vector<double> arc;  // cumulative chord length

  explicit Curve(const Trajectory& t) {
    for (const auto& s : t.states) {
      x.push_back(s.x);
      v.push_back(s.v);
      tau.push_back(s.tau);
    }
    arc.assign(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) arc[i] = arc[i - 1] + (x[i] - x[i - 1]).norm();
  }

  std::size_t segments() const { return x.size() - 1; }

  Vec hermite(std::size_t i, double s) const {
    const double dt = tau[i + 1] - tau[i];
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * x[i] + (s3 - 2 * s2 + s) * dt * v[i] + (-2 * s3 + 3 * s2) * x[i + 1] +
           (s3 - s2) * dt * v[i + 1];
  }

  struct Projection {
    double distance;
    double arc;
    std::size_t segment;
  };

  // Nearest point on the chord polyline.
  Projection project_linear(const Point& q) const {
    if (x.size() == 1) return {(q - x[0]).norm(), 0.0, 0};
    Projection best{std::numeric_limits<double>::infinity(), 0.0, 0};
    for (std::size_t i = 0; i < segments(); ++i) {
      const Vec d = x[i + 1] - x[i];
      const double len2 = d.squaredNorm();
      const double t = std::clamp(len2 > 0 ? (q - x[i]).dot(d) / len2 : 0.0, 0.0, 1.0);
      const double dist = (q - (x[i] + t * d)).norm();
      if (dist < best.distance) best = {dist, arc[i] + t * (arc[i + 1] - arc[i]), i};
    }
    return best;
  }

  // Distance to the Hermite interpolant, refined on the chord-nearest segment and its neighbours.
  double distance(const Point& q) const {
    const Projection lin = project_linear(q);
    if (x.size() == 1) return lin.distance;
    double best = lin.distance;
    const std::size_t lo = lin.segment == 0 ? 0 : lin.segment - 1;
    const std::size_t hi = std::min(segments() - 1, lin.segment + 1);
    for (std::size_t i = lo; i <= hi; ++i) {
      // Golden-section search on the squared distance along the segment.
      constexpr double r = 0.6180339887498949;
      double a = 0.0, b = 1.0;
      double c = b - r * (b - a), d = a + r * (b - a);
      double fc = (hermite(i, c) - q).squaredNorm(), fd = (hermite(i, d) - q).squaredNorm();
      for (int it = 0; it < 60; ++it) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - r * (b - a);
          fc = (hermite(i, c) - q).squaredNorm();
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + r * (b - a);
          fd = (hermite(i, d) - q).squaredNorm();
        }
      }
      best = std::min({best, std::sqrt(std::min(fc, fd)), (x[i] - q).norm(), (x[i + 1] - q).norm()});
    }
    return best;
  }
};

struct OneSided {
  double distance = 0.0;
  double overlap = 0.0;
  int samples = 0;
};

OneSided one_sided(const Curve& a, const Curve& b) {
  double s0 = a.project_linear(b.x.front()).arc;
  double s1 = a.project_linear(b.x.back()).arc;
  if (s0 > s1) std::swap(s0, s1);
  OneSided r;
  r.overlap = s1 - s0;
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    if (a.arc[i] < s0 || a.arc[i] > s1) continue;
    ++r.samples;
    r.distance = std::max(r.distance, b.distance(a.x[i]));
  }
  return r;
}

}  // namespace

std::string to_string(HaltReason r) {
  switch (r) {
    case HaltReason::None: return "none";
    case HaltReason::DomainExit: return "domain-exit";
    case HaltReason::NonFinite: return "non-finite";
    case HaltReason::SingularMetric: return "singular-metric";
    case HaltReason::Evaluation: return "evaluation";
    case HaltReason::UnderResolved: return "under-resolved";
  }
  return "none";
}

std::vector<Point> Trajectory::positions() const {
  std::vector<Point> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.x);
  return out;
}

Trajectory integrate_dual_geodesic(const AffineConnection& c, const Point& x0, const Vec& w0,
                                   const IntegrationOptions& opts) {
  const int n = c.dim();
  if (x0.size() != n || w0.size() != n) throw Error("initial data has the wrong dimension");
  if (!inside(opts.domain, x0)) throw DomainError("x0 outside the chart domain: " + format_point(x0));
  if (w0.norm() == 0.0) throw Error("initial velocity w0 must be nonzero");
  if (!(opts.h > 0.0) || opts.steps < 1) throw Error("step size must be positive and steps at least 1");

  Trajectory t;
  t.h = opts.h;
  t.connection = c.label();
  Vec x = x0;
  Vec p = c.metric().at(x0) * w0;
  Vec v = w0;
  t.states.reserve(static_cast<std::size_t>(opts.steps) + 1);
  t.states.push_back({0.0, x, p, v});
  for (int k = 0; k < opts.steps; ++k) {
    const double tau = k * opts.h;
    if (auto halt = rk4_step(c, opts.domain, opts.max_step_length, opts.q, tau, opts.h, x, p, v)) {
      t.halted = true;
      t.reason = halt->reason;
      t.halt_detail = halt->detail;
      break;
    }
    t.states.push_back({(k + 1) * opts.h, x, p, v});
  }
  return t;
}

std::vector<Trajectory> integrate_batch(const AffineConnection& c, const std::vector<InitialCondition>& ics,
                                        const IntegrationOptions& opts) {
  const long count = static_cast<long>(ics.size());
  std::vector<Trajectory> out(ics.size());
  std::vector<std::exception_ptr> errors(ics.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      out[u] = integrate_dual_geodesic(c, ics[u].x0, ics[u].w0, opts);
    } catch (...) {
      errors[u] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<Trajectory> integrate_batch_serial(const AffineConnection& c,
                                               const std::vector<InitialCondition>& ics,
                                               const IntegrationOptions& opts) {
  std::vector<Trajectory> out;
  out.reserve(ics.size());
  for (const auto& ic : ics) out.push_back(integrate_dual_geodesic(c, ic.x0, ic.w0, opts));
  return out;
}

std::vector<InitialCondition> random_initial_conditions(const Chart& chart, int count, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = chart.dim;
  std::vector<InitialCondition> out;
  for (int k = 0; k < count; ++k) {
    InitialCondition ic;
    ic.x0 = Point(n);
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw Error("could not sample a point inside the chart");
      for (int i = 0; i < n; ++i) ic.x0(i) = chart.lo(i) + unit(rng) * (chart.hi(i) - chart.lo(i));
      if (chart.contains(ic.x0)) break;
    }
    ic.w0 = Vec(n);
    do {
      for (int i = 0; i < n; ++i) ic.w0(i) = normal(rng);
    } while (ic.w0.norm() < 1e-6);
    ic.w0.normalize();
    out.push_back(std::move(ic));
  }
  return out;
}

CoincidenceResult curves_coincide(const Trajectory& a, const Trajectory& b, double tol) {
  if (a.states.empty() || b.states.empty()) throw Error("cannot compare an empty trajectory");
  if (a.dim() != b.dim()) throw Error("trajectories live in different dimensions");
  const Curve pa(a), pb(b);
  const OneSided ab = one_sided(pa, pb);
  const OneSided ba = one_sided(pb, pa);
  CoincidenceResult r;
  r.a_to_b = ab.distance;
  r.b_to_a = ba.distance;
  r.tolerance = tol;
  r.overlap_a = ab.overlap;
  r.overlap_b = ba.overlap;
  // A single shared sample says nothing about the curves.
  const bool trivial = a.states.size() == 1 && b.states.size() == 1;
  const bool enough = trivial || (ab.samples >= 2 && ba.samples >= 2);
  r.coincide = enough && r.a_to_b < tol && r.b_to_a < tol;
  return r;
}

CoincidenceResult reparametrization_check(const AffineConnection& c, const Point& x0, const Vec& w0,
                                          const ParameterFn& q, IntegrationOptions opts, double tol) {
  opts.q = q;
  const Trajectory with_q = integrate_dual_geodesic(c, x0, w0, opts);
  opts.q = nullptr;
  const Trajectory affine = integrate_dual_geodesic(c, x0, w0, opts);
  return curves_coincide(with_q, affine, tol);
}

std::string trajectory_csv(const Trajectory& t) {
  const int n = t.dim();
  std::ostringstream out;
  out << "tau";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= n; ++i) out << ",p" << i;
  out << '\n';
  for (const auto& s : t.states) {
    out << format_double(s.tau);
    for (int i = 0; i < n; ++i) out << ',' << format_double(s.x(i));
    for (int i = 0; i < n; ++i) out << ',' << format_double(s.p(i));
    out << '\n';
  }
  return out.str();
}

nlohmann::json trajectory_json(const Trajectory& t) {
  nlohmann::json j;
  j["method"] = t.method;
  j["h"] = t.h;
  j["connection"] = t.connection;
  j["halted"] = t.halted;
  j["halt_reason"] = to_string(t.reason);
  if (t.halted) j["halt_detail"] = t.halt_detail;
  auto& states = j["states"] = nlohmann::json::array();
  for (const auto& s : t.states) {
    states.push_back({{"tau", s.tau},
                      {"x", std::vector<double>(s.x.data(), s.x.data() + s.x.size())},
                      {"p", std::vector<double>(s.p.data(), s.p.data() + s.p.size())}});
  }
  return j;
}

}  // namespace dualgeo
