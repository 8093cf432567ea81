#include "adrsig/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace adrsig {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

struct Vertex {
  std::vector<double> x;
  double f;
};

class Simplex {
 public:
  Simplex(const std::function<double(std::span<const double>)>& objective, int& evaluations)
      : objective_(objective), evaluations_(evaluations) {}

  double eval(std::span<const double> x) {
    ++evaluations_;
    const double v = objective_(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

  // Runs one descent from `start`; returns true if the tolerance test was met.
  bool run(std::vector<double> start, const SimplexOptions& opt, int& iteration_budget,
           Vertex& best) {
    const std::size_t n = start.size();
    std::vector<Vertex> v;
    v.reserve(n + 1);
    v.push_back({start, eval(start)});
    for (std::size_t i = 0; i < n; ++i) {
      auto x = start;
      x[i] += opt.initial_step;
      const double f = eval(x);
      v.push_back({std::move(x), f});
    }

    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    bool converged = false;
    while (true) {
      std::sort(v.begin(), v.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      if (tolerance_met(v, opt)) {
        converged = true;
        break;
      }
      if (iteration_budget <= 0) break;
      --iteration_budget;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) centroid[j] += v[i].x[j];
      }
      for (auto& c : centroid) c /= static_cast<double>(n);

      auto& worst = v[n];
      for (std::size_t j = 0; j < n; ++j) xr[j] = centroid[j] + kReflect * (centroid[j] - worst.x[j]);
      const double fr = eval(xr);

      if (fr < v[0].f) {
        for (std::size_t j = 0; j < n; ++j) xe[j] = centroid[j] + kExpand * (xr[j] - centroid[j]);
        const double fe = eval(xe);
        if (fe < fr) {
          worst.x = xe;
          worst.f = fe;
        } else {
          worst.x = xr;
          worst.f = fr;
        }
        continue;
      }
      if (fr < v[n - 1].f) {
        worst.x = xr;
        worst.f = fr;
        continue;
      }
      // Contraction: outside if the reflected point beats the worst, inside otherwise.
      const bool outside = fr < worst.f;
      const auto& anchor = outside ? xr : worst.x;
      for (std::size_t j = 0; j < n; ++j) xc[j] = centroid[j] + kContract * (anchor[j] - centroid[j]);
      const double fc = eval(xc);
      if (fc < (outside ? fr : worst.f)) {
        worst.x = xc;
        worst.f = fc;
        continue;
      }
      for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 0; j < n; ++j) v[i].x[j] = v[0].x[j] + kShrink * (v[i].x[j] - v[0].x[j]);
        v[i].f = eval(v[i].x);
      }
    }
    if (v[0].f < best.f || best.x.empty()) best = v[0];
    return converged;
  }

 private:
  static bool tolerance_met(const std::vector<Vertex>& v, const SimplexOptions& opt) {
    const double fbest = v.front().f;
    const double fworst = v.back().f;
    if (!std::isfinite(fbest)) return false;
    if (!(fworst - fbest <= opt.ftol_rel * (std::abs(fbest) + opt.ftol_rel))) return false;
    for (std::size_t i = 1; i < v.size(); ++i) {
      for (std::size_t j = 0; j < v[0].x.size(); ++j) {
        if (std::abs(v[i].x[j] - v[0].x[j]) > opt.xtol) return false;
      }
    }
    return true;
  }

  const std::function<double(std::span<const double>)>& objective_;
  int& evaluations_;
};

}  // namespace

SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                          std::span<const double> start, const SimplexOptions& options) {
  if (start.empty()) throw std::invalid_argument("nelder_mead: empty start vector");
  SimplexResult result;
  Simplex simplex(objective, result.evaluations);
  int budget = options.max_iterations;

  Vertex best{{}, std::numeric_limits<double>::infinity()};
  bool converged = simplex.run({start.begin(), start.end()}, options, budget, best);
  for (int r = 0; r < options.restarts && converged; ++r) {
    const double before = best.f;
    converged = simplex.run(best.x, options, budget, best);
    if (before - best.f <= options.ftol_rel * (std::abs(best.f) + options.ftol_rel)) break;
  }
  result.x = std::move(best.x);
  result.value = best.f;
  result.iterations = options.max_iterations - budget;
  result.converged = converged;
  return result;
}

}  // namespace adrsig
