#include "survmax/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

#include <fmt/format.h>

#include "survmax/errors.hpp"

namespace survmax {

namespace {

// Kronrod abscissae on [-1, 1], descending; odd indices are the Gauss nodes.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208965042417, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for kXgk[1], kXgk[3], ..., kXgk[9].
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gauss_kronrod(const Integrand& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = kWgk[10] * fc;
  double gauss = 0.0;
  for (int j = 0; j < 10; ++j) {
    const double dx = h * kXgk[j];
    const double sum = f(c - dx) + f(c + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  kronrod *= h;
  gauss *= h;
  double err = std::abs(kronrod - gauss);
  if (!std::isfinite(kronrod)) err = std::numeric_limits<double>::infinity();
  return {a, b, kronrod, err};
}

std::vector<double> initial_nodes(double a, double b, Mesh mesh) {
  std::vector<double> nodes;
  if (mesh == Mesh::Single || !(b > a)) return {a, b};
  constexpr int kUniform = 16;
  for (int i = 0; i <= kUniform; ++i) nodes.push_back(a + (b - a) * i / kUniform);
  if (mesh == Mesh::RightGraded) {
    const double width = (b - a) / kUniform;
    nodes.pop_back();
    for (int k = 1; k <= 48; ++k) nodes.push_back(b - width * std::ldexp(1.0, -k));
    nodes.push_back(b);
  }
  return nodes;
}

bool too_narrow(double a, double b) {
  return (b - a) <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw DomainError("quadrature tolerances must be positive");
  if (max_subdivisions < 10) throw DomainError("max_subdivisions must be at least 10");
}

Mesh peaked_mesh(const QuadratureConfig& cfg, long n, long threshold) {
  return (cfg.endpoint_transform && n >= threshold) ? Mesh::RightGraded : Mesh::Uniform;
}

QuadResult integrate(const Integrand& f, double a, double b, const QuadratureConfig& cfg, Mesh mesh) {
  cfg.validate();
  if (!(a <= b)) throw DomainError(fmt::format("integrate: need a <= b, got [{}, {}]", a, b));
  if (a == b) return {};

  std::priority_queue<Panel> heap;
  double total = 0.0;
  double total_err = 0.0;
  const auto nodes = initial_nodes(a, b, mesh);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    Panel p = gauss_kronrod(f, nodes[i], nodes[i + 1]);
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }
  // Panels too narrow to split are retired; their error stays in the total.
  double retired_err = 0.0;
  int subdivisions = 0;
  while (total_err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
    if (heap.empty() || subdivisions >= cfg.max_subdivisions) {
      throw QuadratureError(
          fmt::format("integrate: tolerance not met on [{}, {}] after {} subdivisions (error {:.3g})", a, b,
                      subdivisions, total_err),
          total, total_err);
    }
    const Panel worst = heap.top();
    heap.pop();
    if (too_narrow(worst.a, worst.b)) {
      retired_err += worst.error;
      if (retired_err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
        throw QuadratureError(fmt::format("integrate: unresolvable feature near {}", worst.a), total, total_err);
      }
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = gauss_kronrod(f, worst.a, mid);
    const Panel right = gauss_kronrod(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }
  return {total, total_err};
}

namespace {

struct VectorPanel {
  double a;
  double b;
  std::vector<double> value;
  double error;
  bool operator<(const VectorPanel& o) const { return error < o.error; }
};

VectorPanel gauss_kronrod_vector(const VectorIntegrand& f, std::size_t dim, double a, double b,
                                 std::vector<double>& s1, std::vector<double>& s2) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::vector<double> kronrod(dim, 0.0);
  std::vector<double> gauss(dim, 0.0);
  f(c, s1);
  for (std::size_t i = 0; i < dim; ++i) kronrod[i] = kWgk[10] * s1[i];
  for (int j = 0; j < 10; ++j) {
    const double dx = h * kXgk[j];
    f(c - dx, s1);
    f(c + dx, s2);
    for (std::size_t i = 0; i < dim; ++i) {
      const double sum = s1[i] + s2[i];
      kronrod[i] += kWgk[j] * sum;
      if (j % 2 == 1) gauss[i] += kWg[j / 2] * sum;
    }
  }
  double err = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    kronrod[i] *= h;
    err = std::max(err, std::abs(kronrod[i] - h * gauss[i]));
    if (!std::isfinite(kronrod[i])) err = std::numeric_limits<double>::infinity();
  }
  return {a, b, std::move(kronrod), err};
}

}  // namespace

VectorQuadResult integrate_vector(const VectorIntegrand& f, std::size_t dim, double a, double b,
                                  const QuadratureConfig& cfg, Mesh mesh) {
  cfg.validate();
  if (!(a <= b)) throw DomainError(fmt::format("integrate_vector: need a <= b, got [{}, {}]", a, b));
  VectorQuadResult out{std::vector<double>(dim, 0.0), 0.0};
  if (a == b || dim == 0) return out;

  std::vector<double> s1(dim), s2(dim);
  std::priority_queue<VectorPanel> heap;
  double scale = 0.0;
  const auto nodes = initial_nodes(a, b, mesh);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    VectorPanel p = gauss_kronrod_vector(f, dim, nodes[i], nodes[i + 1], s1, s2);
    for (std::size_t k = 0; k < dim; ++k) out.value[k] += p.value[k];
    out.error += p.error;
    heap.push(std::move(p));
  }
  auto target = [&] {
    scale = 0.0;
    for (double v : out.value) scale = std::max(scale, std::abs(v));
    return std::max(cfg.abs_tol, cfg.rel_tol * scale);
  };
  double retired_err = 0.0;
  int subdivisions = 0;
  while (out.error > target()) {
    if (heap.empty() || subdivisions >= cfg.max_subdivisions) {
      throw QuadratureError(
          fmt::format("integrate_vector: tolerance not met after {} subdivisions (error {:.3g})", subdivisions,
                      out.error),
          scale, out.error);
    }
    VectorPanel worst = heap.top();
    heap.pop();
    if (too_narrow(worst.a, worst.b)) {
      retired_err += worst.error;
      if (retired_err > target()) throw QuadratureError("integrate_vector: unresolvable feature", scale, out.error);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    VectorPanel left = gauss_kronrod_vector(f, dim, worst.a, mid, s1, s2);
    VectorPanel right = gauss_kronrod_vector(f, dim, mid, worst.b, s1, s2);
    for (std::size_t k = 0; k < dim; ++k) out.value[k] += left.value[k] + right.value[k] - worst.value[k];
    out.error += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++subdivisions;
  }
  return out;
}

double log_pow_integrand_guard(double base, long exponent) {
  if (!(base >= 0.0 && base <= 1.0 + 1e-12)) {
    throw DomainError(fmt::format("probability base {} outside [0, 1]", base));
  }
  if (exponent < 0) throw DomainError("negative exponent");
  if (exponent == 0) return 1.0;
  if (base == 0.0) return 0.0;
  if (base >= 1.0) return 1.0;
  return std::exp(static_cast<double>(exponent) * std::log(base));
}

double pow_one_minus(double deficit, long exponent) {
  if (exponent == 0) return 1.0;
  if (deficit <= 0.0) return 1.0;
  if (deficit >= 1.0) return 0.0;
  return std::exp(static_cast<double>(exponent) * std::log1p(-deficit));
}

double invert_monotone(const Integrand& F, double target, double lo, double hi) {
  if (!(lo <= hi)) throw DomainError("invert_monotone: need lo <= hi");
  double f_lo = F(lo);
  double f_hi = F(hi);
  constexpr double kSlack = 1e-12;
  if (target < f_lo - kSlack || target > f_hi + kSlack) {
    throw BracketError(fmt::format("invert_monotone: target {} outside [F({})={}, F({})={}]", target, lo, f_lo, hi,
                                   f_hi));
  }
  if (f_lo >= target) return lo;
  const double width_tol = 1e-6 * (hi - lo);
  // Invariant: F(lo) < target <= F(hi).
  for (int iter = 0; iter < 200; ++iter) {
    const double width = hi - lo;
    const bool narrow = width <= width_tol;
    if (narrow && (f_hi - target <= 1e-7 || too_narrow(lo, hi))) break;
    if (too_narrow(lo, hi)) break;
    const double mid = 0.5 * (lo + hi);
    const double f_mid = F(mid);
    if (f_mid >= target) {
      hi = mid;
      f_hi = f_mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
  }
  // Secant step inside the final bracket.
  if (f_hi > f_lo) {
    const double x = lo + (target - f_lo) * (hi - lo) / (f_hi - f_lo);
    if (x > lo && x < hi) {
      const double fx = F(x);
      if (std::abs(fx - target) < std::abs(f_hi - target)) return x;
    }
  }
  return hi;
}

CumulativeIntegral::CumulativeIntegral(Integrand f, double lo, double hi, std::vector<double> breakpoints,
                                       const QuadratureConfig& cfg)
    : f_(std::move(f)) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("CumulativeIntegral: need finite lo < hi");
  }
  std::vector<double> cuts{lo, hi};
  for (double x : breakpoints) {
    if (x > lo && x < hi) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Each smooth segment: 32 equal panels, the outer two graded toward the
  // segment ends where quantile transforms may be singular.
  constexpr int kPanels = 32;
  constexpr int kGrading = 12;
  nodes_.push_back(lo);
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s];
    const double b = cuts[s + 1];
    const double w = (b - a) / kPanels;
    for (int k = kGrading; k >= 1; --k) nodes_.push_back(a + w * std::ldexp(1.0, -k));
    for (int i = 1; i < kPanels; ++i) nodes_.push_back(a + w * i);
    for (int k = 1; k <= kGrading; ++k) nodes_.push_back(b - w * std::ldexp(1.0, -k));
    nodes_.push_back(b);
  }
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());

  cumulative_.assign(nodes_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    cumulative_[i + 1] = cumulative_[i] + integrate(f_, nodes_[i], nodes_[i + 1], cfg).value;
  }
}

double CumulativeIntegral::operator()(double x) const {
  if (nodes_.empty()) return 0.0;
  if (x <= nodes_.front()) return 0.0;
  if (x >= nodes_.back()) return cumulative_.back();
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  if (x == nodes_[i]) return cumulative_[i];
  return cumulative_[i] + gauss_kronrod(f_, nodes_[i], x).value;
}

double CumulativeIntegral::between(double a, double b) const {
  if (!(b > a)) return 0.0;
  if (nodes_.empty()) return 0.0;
  a = std::clamp(a, nodes_.front(), nodes_.back());
  b = std::clamp(b, nodes_.front(), nodes_.back());
  // A short interval inside one panel is integrated directly to avoid
  // cancellation between two nearly equal running totals.
  const auto ia = std::upper_bound(nodes_.begin(), nodes_.end(), a);
  const auto ib = std::upper_bound(nodes_.begin(), nodes_.end(), b);
  if (ia == ib && b < nodes_.back()) return gauss_kronrod(f_, a, b).value;
  return (*this)(b) - (*this)(a);
}

}  // namespace survmax
