#include "raogeo/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "raogeo/error.hpp"

namespace raogeo {

namespace {

// QUADPACK qk15 abscissae and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  Vector value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel kronrod(const std::function<Vector(double)>& f, int dim, double a,
              double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  Vector kron = Vector::Zero(dim);
  Vector gauss = Vector::Zero(dim);
  const Vector fc = f(c);
  kron += kWgk[7] * fc;
  gauss += kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const Vector f1 = f(c - dx);
    const Vector f2 = f(c + dx);
    kron += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  kron *= h;
  gauss *= h;
  const double err = (kron - gauss).cwiseAbs().maxCoeff();
  return Panel{a, b, kron, err};
}

}  // namespace

QuadratureResult integrate(const std::function<Vector(double)>& f, int dim,
                           double lo, double hi, const QuadratureOptions& opts,
                           std::span<const double> breakpoints,
                           int initial_panels) {
  if (!(hi > lo)) {
    return QuadratureResult{Vector::Zero(dim), 0.0, 0};
  }
  std::vector<double> cuts{lo, hi};
  for (double b : breakpoints)
    if (b > lo && b < hi) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<Panel> heap;
  Vector total = Vector::Zero(dim);
  double total_err = 0.0;
  const int per = std::max(1, initial_panels);
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double w = (cuts[s + 1] - cuts[s]) / per;
    for (int k = 0; k < per; ++k) {
      const double a = cuts[s] + k * w;
      const double b = (k + 1 == per) ? cuts[s + 1] : a + w;
      Panel p = kronrod(f, dim, a, b);
      total += p.value;
      total_err += p.error;
      heap.push(std::move(p));
    }
  }

  auto target = [&] {
    return opts.tol * std::max(1.0, total.cwiseAbs().maxCoeff());
  };
  while (total_err > target() &&
         static_cast<int>(heap.size()) < opts.max_intervals) {
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(std::move(worst));
      break;
    }
    Panel left = kronrod(f, dim, worst.a, mid);
    Panel right = kronrod(f, dim, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
  }
  // Recompute the sums from the panels to shed accumulated update rounding.
  total.setZero();
  total_err = 0.0;
  const int count = static_cast<int>(heap.size());
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(total_err) || total_err > target()) {
    std::ostringstream msg;
    msg << "quadrature did not converge on [" << lo << ", " << hi
        << "]: error estimate " << total_err << " exceeds " << target();
    throw NumericError(msg.str(), total_err);
  }
  return QuadratureResult{total, total_err, count};
}

ScalarQuadratureResult integrate_scalar(const std::function<double(double)>& f,
                                        double lo, double hi,
                                        const QuadratureOptions& opts,
                                        std::span<const double> breakpoints,
                                        int initial_panels) {
  auto wrapped = [&f](double x) {
    Vector v(1);
    v(0) = f(x);
    return v;
  };
  const auto r = integrate(wrapped, 1, lo, hi, opts, breakpoints, initial_panels);
  return ScalarQuadratureResult{r.value(0), r.error};
}

}  // namespace raogeo
