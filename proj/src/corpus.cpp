#include "klflow/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace klflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

void require_1d(const Point& x) {
  if (x.size() != 1) throw std::invalid_argument("this corpus entry is one-dimensional");
}

Functional scalar_functional(std::string label, std::function<double(double)> value,
                             std::function<double(double)> slope,
                             std::function<std::optional<double>(double)> gradient) {
  Functional f;
  f.label = std::move(label);
  f.dimension = 1;
  f.value = [value](const Point& x) {
    require_1d(x);
    return value(x(0));
  };
  f.analytic_slope = [slope](const Point& x) {
    require_1d(x);
    return slope(x(0));
  };
  f.smooth_gradient = [gradient](const Point& x) -> std::optional<Point> {
    require_1d(x);
    const auto g = gradient(x(0));
    if (!g) return std::nullopt;
    return scalar_point(*g);
  };
  return f;
}

// Global minimisers of the resolvent objective among candidates known to contain them.
std::vector<Point> best_of(const Functional& f, double x, double tau, const std::vector<double>& cands) {
  std::vector<std::pair<double, double>> vals;
  for (double y : cands) {
    const double fy = f(scalar_point(y));
    if (!std::isfinite(fy)) continue;
    vals.emplace_back(fy + (y - x) * (y - x) / (2 * tau), y);
  }
  if (vals.empty()) return {};
  double best = kInf;
  for (const auto& v : vals) best = std::min(best, v.first);
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  std::vector<double> ys;
  for (const auto& v : vals) {
    if (v.first > best + tol) continue;
    if (std::none_of(ys.begin(), ys.end(), [&](double y) { return std::abs(y - v.second) <= 1e-12; })) {
      ys.push_back(v.second);
    }
  }
  std::sort(ys.begin(), ys.end());
  std::vector<Point> out;
  for (double y : ys) out.push_back(scalar_point(y));
  return out;
}

double param(const CorpusId& id, const std::string& key, double fallback, std::set<std::string>& used) {
  used.insert(key);
  const auto it = id.params.find(key);
  if (it == id.params.end()) return fallback;
  const std::string& s = it->second;
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("malformed value for '" + key + "': " + s);
  }
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

CorpusEntry make_quadratic(double lambda, const Point& center) {
  if (!(lambda > 0)) throw std::invalid_argument("quadratic needs lambda > 0");
  if (center.size() < 1) throw std::invalid_argument("quadratic needs a center");
  CorpusEntry e;
  e.id = "quadratic?lambda=" + fmt(lambda) + "&center=" + fmt(center(0)) + "&dim=" + std::to_string(center.size());
  e.provenance = "smooth quadratic baseline";
  Functional& f = e.functional;
  f.label = e.id;
  f.dimension = center.size();
  f.value = [lambda, center](const Point& x) { return lambda / 2 * (x - center).squaredNorm(); };
  f.analytic_slope = [lambda, center](const Point& x) { return lambda * (x - center).norm(); };
  f.smooth_gradient = [lambda, center](const Point& x) -> std::optional<Point> { return Point(lambda * (x - center)); };
  e.trajectory = [lambda, center](const Point& x0, double t, BranchPolicy) -> std::optional<Point> {
    return Point(center + std::exp(-lambda * t) * (x0 - center));
  };
  e.resolvent = [lambda, center](const Point& x, double tau) {
    return std::vector<Point>{Point((x + lambda * tau * center) / (1 + lambda * tau))};
  };
  e.known_alpha = [lambda, center](const Point& x0, double) -> std::optional<double> {
    if ((x0 - center).squaredNorm() == 0) return std::nullopt;
    return 2 * lambda;
  };
  e.matched_theta = [lambda](const Point&) -> std::optional<ParameterFunction> {
    return make_alpha_theta(2 * lambda);
  };
  return e;
}

CorpusEntry make_double_well(double lambda, double a) {
  if (!(lambda > 0) || !(a > 0)) throw std::invalid_argument("double-well needs lambda, a > 0");
  CorpusEntry e;
  e.id = "double-well?lambda=" + fmt(lambda) + "&a=" + fmt(a);
  e.provenance = "non-uniqueness example, two branches from 0";
  e.singular_points = {0.0};
  e.functional = scalar_functional(
      e.id,
      [lambda, a](double x) { return std::min(lambda / 2 * (x - a) * (x - a), lambda / 2 * (x + a) * (x + a)); },
      [lambda, a](double x) { return lambda * std::abs(std::abs(x) - a); },
      [lambda, a](double x) -> std::optional<double> {
        if (x == 0) return std::nullopt;
        return lambda * (x - sign(x) * a);
      });
  e.trajectory = [lambda, a](const Point& x0, double t, BranchPolicy policy) -> std::optional<Point> {
    require_1d(x0);
    double target = sign(x0(0)) * a;
    if (x0(0) == 0) target = policy == BranchPolicy::positive_branch ? a : -a;
    return scalar_point(target + std::exp(-lambda * t) * (x0(0) - target));
  };
  const Functional f = e.functional;
  e.resolvent = [lambda, a, f](const Point& x, double tau) {
    require_1d(x);
    const double s = lambda * tau;
    return best_of(f, x(0), tau, {(x(0) + s * a) / (1 + s), (x(0) - s * a) / (1 + s)});
  };
  e.known_alpha = [lambda, f](const Point& x0, double) -> std::optional<double> {
    if (!(f(x0) > 0)) return std::nullopt;
    return 2 * lambda;
  };
  e.matched_theta = [lambda](const Point&) -> std::optional<ParameterFunction> {
    return make_alpha_theta(2 * lambda);
  };
  return e;
}

CorpusEntry make_truncated_parabola(double x0_ref) {
  if (!(x0_ref > 0)) throw std::invalid_argument("truncated parabola needs x0 > 0");
  CorpusEntry e;
  e.id = "truncated-parabola?x0=" + fmt(x0_ref);
  e.provenance = "truncated parabola with a plateau on the negative axis";
  e.singular_points = {0.0};
  const double plateau = x0_ref * x0_ref / 2;
  e.functional = scalar_functional(
      e.id, [plateau](double x) { return x >= 0 ? x * x : plateau; },
      [](double x) { return x > 0 ? 2 * x : 0.0; },
      [](double x) -> std::optional<double> {
        if (x == 0) return std::nullopt;
        return x > 0 ? 2 * x : 0.0;
      });
  e.trajectory = [](const Point& x0, double t, BranchPolicy) -> std::optional<Point> {
    require_1d(x0);
    if (x0(0) <= 0) return x0;
    return scalar_point(x0(0) * std::exp(-2 * t));
  };
  const Functional f = e.functional;
  e.resolvent = [f](const Point& x, double tau) {
    require_1d(x);
    return best_of(f, x(0), tau, {std::max(x(0), 0.0) / (1 + 2 * tau), std::min(x(0), 0.0), 0.0});
  };
  e.known_alpha = [plateau](const Point& x0, double r) -> std::optional<double> {
    require_1d(x0);
    const double x = x0(0);
    if (x == 0) return std::nullopt;
    if (x < 0) return 0.0;
    if (x - r < 0 && plateau <= x * x) return 0.0;
    return 4.0;
  };
  e.matched_theta = [](const Point&) -> std::optional<ParameterFunction> { return make_alpha_theta(4.0); };
  return e;
}

CorpusEntry make_staircase(double m, double eps) {
  if (!(m > 0) || !(eps > 0)) throw std::invalid_argument("staircase needs m, eps > 0");
  CorpusEntry e;
  e.id = "staircase?m=" + fmt(m) + "&eps=" + fmt(eps);
  e.provenance = "staircase with a downward jump at 1, glued trajectory";
  e.singular_points = {0.0, 1.0};
  e.functional = scalar_functional(
      e.id,
      [m, eps](double x) {
        if (x < 0) return 0.0;
        if (x <= 1) return m * x;
        return m * x + eps;
      },
      [m](double x) { return x > 0 ? m : 0.0; },
      [m](double x) -> std::optional<double> {
        if (x == 0 || x == 1) return std::nullopt;
        return x > 0 ? m : 0.0;
      });
  e.trajectory = [m](const Point& x0, double t, BranchPolicy) -> std::optional<Point> {
    require_1d(x0);
    if (x0(0) <= 0) return x0;
    return scalar_point(std::max(x0(0) - m * t, 0.0));
  };
  const Functional f = e.functional;
  e.resolvent = [m, f](const Point& x, double tau) {
    require_1d(x);
    const double s = x(0) - m * tau;
    std::vector<double> c{std::clamp(s, 0.0, 1.0), std::min(x(0), 0.0), 0.0, 1.0};
    if (s > 1) c.push_back(s);
    return best_of(f, x(0), tau, c);
  };
  e.known_alpha = [m, f](const Point& x0, double) -> std::optional<double> {
    const double f0 = f(x0);
    if (!(f0 > 0)) return std::nullopt;
    return m * m / f0;
  };
  e.matched_theta = [m, f](const Point& x0) -> std::optional<ParameterFunction> {
    const double f0 = f(x0);
    if (!(f0 > 0)) return std::nullopt;
    return make_alpha_theta(m * m / f0);
  };
  return e;
}

CorpusEntry make_asymmetric_double_well(double lambda, double a, double eps) {
  if (!(lambda > 0) || !(a > 0) || !(eps > 0)) throw std::invalid_argument("asymmetric double-well needs lambda, a, eps > 0");
  if (!(eps < lambda * a * a / 2)) throw std::invalid_argument("asymmetric double-well needs eps < lambda a^2 / 2");
  CorpusEntry e;
  e.id = "asymmetric-double-well?lambda=" + fmt(lambda) + "&a=" + fmt(a) + "&eps=" + fmt(eps);
  e.provenance = "asymmetric double-well with a plateau at height eps";
  const double w = std::sqrt(2 * eps / lambda);
  e.singular_points = {0.0, a - w, a + w};
  auto A = [lambda, a](double x) { return lambda / 2 * (x + a) * (x + a); };
  auto B = [lambda, a](double x) { return lambda / 2 * (x - a) * (x - a); };
  e.functional = scalar_functional(
      e.id, [A, B, eps](double x) { return std::min(std::max(B(x), eps), A(x)); },
      [A, B, eps, lambda, a](double x) {
        const double P = std::max(B(x), eps);
        const double sa = lambda * std::abs(x + a);
        const double sb = B(x) > eps ? lambda * std::abs(x - a) : 0.0;
        if (A(x) < P) return sa;
        if (P < A(x)) return sb;
        return std::max(sa, sb);
      },
      [A, B, eps, lambda, a](double x) -> std::optional<double> {
        const double P = std::max(B(x), eps);
        if (A(x) < P) return lambda * (x + a);
        if (P < A(x)) {
          if (B(x) > eps) return lambda * (x - a);
          if (B(x) < eps) return 0.0;
        }
        return std::nullopt;
      });
  e.trajectory = [lambda, a, w](const Point& x0, double t, BranchPolicy policy) -> std::optional<Point> {
    require_1d(x0);
    const double x = x0(0);
    const bool left = x < 0 || (x == 0 && policy != BranchPolicy::positive_branch);
    if (left) return scalar_point(-a + std::exp(-lambda * t) * (x + a));
    if (std::abs(x - a) <= w) return x0;
    const double y = a + std::exp(-lambda * t) * (x - a);
    if (x > a) return scalar_point(std::max(y, a + w));
    return scalar_point(std::min(y, a - w));
  };
  const Functional f = e.functional;
  e.resolvent = [lambda, a, w, f](const Point& x, double tau) {
    require_1d(x);
    const double s = lambda * tau;
    return best_of(f, x(0), tau, {(x(0) - s * a) / (1 + s), (x(0) + s * a) / (1 + s), x(0), a - w, a + w, 0.0});
  };
  e.known_alpha = [lambda, a, w, eps, f](const Point& x0, double r) -> std::optional<double> {
    require_1d(x0);
    const double f0 = f(x0);
    if (!(f0 > 0)) return std::nullopt;
    const bool meets_plateau = x0(0) - r < a + w && x0(0) + r > a - w;
    if (eps <= f0 && meets_plateau) return 0.0;
    return 2 * lambda;
  };
  e.matched_theta = [lambda](const Point&) -> std::optional<ParameterFunction> {
    return make_alpha_theta(2 * lambda);
  };
  return e;
}

CorpusEntry make_power(double p) {
  if (!(p >= 1)) throw std::invalid_argument("power entry needs p >= 1");
  CorpusEntry e;
  e.id = "power?p=" + fmt(p);
  e.provenance = "power family matched to theta(u) = u^(1/p)";
  if (p == 1) e.singular_points = {0.0};
  e.functional = scalar_functional(
      e.id, [p](double x) { return std::pow(std::abs(x), p); },
      [p](double x) { return x == 0 ? 0.0 : p * std::pow(std::abs(x), p - 1); },
      [p](double x) -> std::optional<double> {
        if (x == 0) {
          if (p == 1) return std::nullopt;
          return 0.0;
        }
        return p * std::pow(std::abs(x), p - 1) * sign(x);
      });
  e.trajectory = [p](const Point& x0, double t, BranchPolicy) -> std::optional<Point> {
    require_1d(x0);
    const double y0 = std::abs(x0(0));
    if (y0 == 0) return x0;
    double y = 0;
    if (p == 2) {
      y = y0 * std::exp(-2 * t);
    } else {
      const double base = std::pow(y0, 2 - p) - p * (2 - p) * t;
      y = base <= 0 ? 0.0 : std::pow(base, 1 / (2 - p));
    }
    return scalar_point(sign(x0(0)) * y);
  };
  if (p == 1) {
    e.resolvent = [](const Point& x, double tau) {
      require_1d(x);
      return std::vector<Point>{scalar_point(sign(x(0)) * std::max(std::abs(x(0)) - tau, 0.0))};
    };
  } else if (p == 2) {
    e.resolvent = [](const Point& x, double tau) {
      require_1d(x);
      return std::vector<Point>{scalar_point(x(0) / (1 + 2 * tau))};
    };
  }
  e.known_alpha = [p](const Point& x0, double r) -> std::optional<double> {
    require_1d(x0);
    const double ax = std::abs(x0(0));
    if (ax == 0) return std::nullopt;
    if (p <= 2) return p * p * std::pow(ax, p - 2);
    if (r >= ax) return 0.0;
    return p * p * std::pow(ax - r, p - 2);
  };
  e.matched_theta = [p](const Point&) -> std::optional<ParameterFunction> { return make_power_theta(1 / p, 1 / p); };
  return e;
}

CorpusEntry make_sharpness(double c, double gamma, double M, double eps) {
  if (!(M > 0) || !(eps >= 0)) throw std::invalid_argument("sharpness generator needs M > 0, eps >= 0");
  const auto pf = make_power_theta(c, gamma);
  CorpusEntry e;
  e.id = "sharpness?c=" + fmt(c) + "&gamma=" + fmt(gamma) + "&M=" + fmt(M) + "&eps=" + fmt(eps);
  e.provenance = "sharpness construction theta^{-1}(x + eps) cut off at M";
  e.singular_points = {0.0, M};
  e.functional = scalar_functional(
      e.id,
      [pf, M, eps](double x) {
        if (x < 0) return kInf;
        if (x >= M) return 0.0;
        return pf.inverse(x + eps);
      },
      [pf, M, eps](double x) {
        if (!(x > 0) || x >= M) return 0.0;
        return 1 / pf.derivative(pf.inverse(x + eps));
      },
      [pf, M, eps](double x) -> std::optional<double> {
        if (x > M) return 0.0;
        if (!(x > 0) || x == M) return std::nullopt;
        return 1 / pf.derivative(pf.inverse(x + eps));
      });
  e.trajectory = [c, gamma, M, eps](const Point& x0, double t, BranchPolicy) -> std::optional<Point> {
    require_1d(x0);
    const double x = x0(0);
    if (x <= 0 || x >= M) return x0;
    const double q = (1 - gamma) / gamma;
    const double K = std::pow(gamma / c, q) / c;
    const double s0 = x + eps;
    double s = 0;
    if (q == 1) {
      s = s0 * std::exp(-K * t);
    } else {
      const double base = std::pow(s0, 1 - q) - (1 - q) * K * t;
      s = base <= 0 ? 0.0 : std::pow(base, 1 / (1 - q));
    }
    return scalar_point(std::max(s - eps, 0.0));
  };
  e.known_alpha = [c, gamma, M, eps](const Point& x0, double) -> std::optional<double> {
    require_1d(x0);
    if (gamma != 0.5) return std::nullopt;
    if (x0(0) < 0 || x0(0) >= M || (x0(0) == 0 && eps == 0)) return std::nullopt;
    return 1 / (c * c);
  };
  e.matched_theta = [pf](const Point&) -> std::optional<ParameterFunction> { return pf; };
  return e;
}

CorpusId parse_corpus_id(const std::string& id) {
  CorpusId out;
  const auto q = id.find('?');
  out.name = id.substr(0, q);
  if (out.name.empty()) throw std::invalid_argument("empty corpus id");
  if (q == std::string::npos) return out;
  std::stringstream ss(id.substr(q + 1));
  std::string kv;
  while (std::getline(ss, kv, '&')) {
    if (kv.empty()) continue;
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("malformed corpus parameter: " + kv);
    out.params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

CorpusEntry make_corpus_entry(const std::string& text) {
  const CorpusId id = parse_corpus_id(text);
  std::set<std::string> used;
  auto get = [&](const std::string& key, double fallback) { return param(id, key, fallback, used); };
  CorpusEntry e;
  if (id.name == "quadratic") {
    const double lambda = get("lambda", 1);
    const double center = get("center", 0);
    const double dim = get("dim", 1);
    if (!(dim >= 1) || dim != std::floor(dim)) throw std::invalid_argument("dim must be a positive integer");
    e = make_quadratic(lambda, Point::Constant(static_cast<Eigen::Index>(dim), center));
  } else if (id.name == "double-well") {
    e = make_double_well(get("lambda", 1), get("a", 1));
  } else if (id.name == "truncated-parabola") {
    e = make_truncated_parabola(get("x0", 1));
  } else if (id.name == "staircase") {
    e = make_staircase(get("m", 1), get("eps", 0.1));
  } else if (id.name == "asymmetric-double-well") {
    e = make_asymmetric_double_well(get("lambda", 1), get("a", 1), get("eps", 0.1));
  } else if (id.name == "power") {
    e = make_power(get("p", 2));
  } else if (id.name == "sharpness") {
    e = make_sharpness(get("c", 1), get("gamma", 0.5), get("M", 10), get("eps", 0.1));
  } else {
    throw std::invalid_argument("unknown corpus entry: " + id.name);
  }
  for (const auto& [k, v] : id.params) {
    if (!used.count(k)) throw std::invalid_argument("unknown parameter '" + k + "' for " + id.name);
  }
  return e;
}

std::vector<CorpusListing> list_corpus() {
  std::vector<CorpusListing> out;
  for (const char* id : {"quadratic", "double-well", "truncated-parabola", "staircase", "asymmetric-double-well",
                         "power", "sharpness"}) {
    const auto e = make_corpus_entry(id);
    out.push_back({e.id, e.provenance});
  }
  return out;
}

BruteForceResult brute_force_minimiser(const Functional& f, double lo, double hi, std::size_t grid,
                                       const Point& reference) {
  if (!(lo < hi)) throw std::invalid_argument("brute force needs lo < hi");
  if (grid < 3) throw std::invalid_argument("brute force needs at least 3 grid points");
  const Eigen::Index n = f.dimension;
  BruteForceResult out;

  if (n == 1) {
    std::vector<double> xs(grid);
    std::vector<double> vs(grid);
    for (std::size_t i = 0; i < grid; ++i) {
      xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid - 1);
      vs[i] = f(scalar_point(xs[i]));
    }
    struct Cand {
      double x;
      double v;
      std::size_t run;
      bool boundary;
    };
    std::vector<Cand> cands;
    std::size_t run = 0;
    bool prev_min = false;
    for (std::size_t i = 0; i < grid; ++i) {
      const double left = i > 0 ? vs[i - 1] : kInf;
      const double right = i + 1 < grid ? vs[i + 1] : kInf;
      const bool is_min = std::isfinite(vs[i]) && vs[i] <= left && vs[i] <= right;
      if (!is_min) {
        prev_min = false;
        continue;
      }
      if (!prev_min) ++run;
      prev_min = true;
      double x = xs[i];
      double v = vs[i];
      if (i > 0 && i + 1 < grid) {
        double a = xs[i - 1];
        double b = xs[i + 1];
        const double inv_phi = (std::sqrt(5.0) - 1) / 2;
        for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
          const double x1 = b - inv_phi * (b - a);
          const double x2 = a + inv_phi * (b - a);
          if (f(scalar_point(x1)) <= f(scalar_point(x2))) {
            b = x2;
          } else {
            a = x1;
          }
        }
        const double xm = 0.5 * (a + b);
        const double vm = f(scalar_point(xm));
        if (vm < v) {
          x = xm;
          v = vm;
        }
      }
      cands.push_back({x, v, run, i == 0 || i + 1 == grid});
    }
    if (cands.empty()) {
      out.inconclusive = true;
      return out;
    }
    double best = kInf;
    for (const auto& c : cands) best = std::min(best, c.v);
    const double tol = 1e-9 * std::max(1.0, std::abs(best));
    const double ref = reference.size() == 1 ? reference(0) : 0.0;
    std::map<std::size_t, Cand> reps;
    for (const auto& c : cands) {
      if (c.v > best + tol) continue;
      auto it = reps.find(c.run);
      if (it == reps.end() || std::abs(c.x - ref) < std::abs(it->second.x - ref)) reps[c.run] = c;
    }
    double nearest = kInf;
    bool nearest_boundary = false;
    for (const auto& [r, c] : reps) {
      out.minimisers.push_back(scalar_point(c.x));
      if (std::abs(c.x - ref) < nearest) {
        nearest = std::abs(c.x - ref);
        out.point = scalar_point(c.x);
        out.value = c.v;
        nearest_boundary = c.boundary;
      }
    }
    out.inconclusive = nearest_boundary;
    return out;
  }

  const auto per_dim = std::max<std::size_t>(
      3, static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(grid), 1.0 / static_cast<double>(n)))));
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  const double step = (hi - lo) / static_cast<double>(per_dim - 1);
  double best = kInf;
  Point best_p;
  bool best_boundary = false;
  for (;;) {
    Point p(n);
    bool boundary = false;
    for (Eigen::Index d = 0; d < n; ++d) {
      p(d) = lo + step * static_cast<double>(idx[static_cast<std::size_t>(d)]);
      boundary = boundary || idx[static_cast<std::size_t>(d)] == 0 || idx[static_cast<std::size_t>(d)] + 1 == per_dim;
    }
    const double v = f(p);
    if (v < best || (v == best && distance(p, reference) < distance(best_p, reference))) {
      best = v;
      best_p = p;
      best_boundary = boundary;
    }
    std::size_t d = 0;
    while (d < idx.size() && ++idx[d] == per_dim) idx[d++] = 0;
    if (d == idx.size()) break;
  }
  out.point = best_p;
  out.value = best;
  out.minimisers = {best_p};
  out.inconclusive = !std::isfinite(best) || best_boundary;
  return out;
}

}  // namespace klflow
