#include "sundman/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace sundman {

namespace {

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1].
constexpr std::array<double, 8> kKronrodX = {
    0.000000000000000000000000000000000e+00,
    2.077849550078984676006894037732449e-01,
    4.058451513773971669066064120769615e-01,
    5.860872354676911302941448382587296e-01,
    7.415311855993944398638647732807884e-01,
    8.648644233597690727897127886409262e-01,
    9.491079123427585245261896840478513e-01,
    9.914553711208126392068546975263285e-01};
constexpr std::array<double, 8> kKronrodW = {
    2.094821410847278280129991748917143e-01,
    2.044329400752988924141619992346491e-01,
    1.903505780647854099132564024210137e-01,
    1.690047266392679028265834265985503e-01,
    1.406532597155259187451895905102379e-01,
    1.047900103222501838398763225415180e-01,
    6.309209262997855329070066318920429e-02,
    2.293532201052922496373200805896959e-02};
constexpr std::array<double, 4> kGaussW = {
    4.179591836734693877551020408163265e-01,
    3.818300505051189449503697754889751e-01,
    2.797053914892766679014677714237796e-01,
    1.294849661688696932706114326790820e-01};

struct PanelResult {
  double integral;
  double error;
};

PanelResult gk15(const Fn1& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = kKronrodW[0] * fc;
  double gauss = kGaussW[0] * fc;
  for (int i = 1; i < 8; ++i) {
    const double dx = h * kKronrodX[i];
    const double fsum = f(c - dx) + f(c + dx);
    kronrod += kKronrodW[i] * fsum;
    if (i % 2 == 0) gauss += kGaussW[i / 2] * fsum;
  }
  kronrod *= h;
  gauss *= h;
  const double diff = std::fabs(kronrod - gauss);
  // standard QUADPACK-style sharpened estimate
  const double err = diff > 0.0 ? std::pow(200.0 * diff, 1.5) : 0.0;
  return {kronrod, std::min(diff, err)};
}

}  // namespace

double quad(const Fn1& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  if (!(tol > 0.0)) throw QuadError("quad: tol must be positive", 0.0, 0.0);
  const double sgn = a < b ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);

  struct Panel {
    double a, b, integral, error;
  };
  PanelResult whole = gk15(f, lo, hi);
  std::vector<Panel> panels{{lo, hi, whole.integral, whole.error}};

  constexpr int kMaxPanels = 1 << 16;
  for (;;) {
    double total = 0.0, err = 0.0;
    for (const auto& p : panels) {
      total += p.integral;
      err += p.error;
    }
    const double target = tol * std::max(1.0, std::fabs(total));
    if (err <= target) return sgn * total;
    if (static_cast<int>(panels.size()) >= kMaxPanels)
      throw QuadError("quad: no convergence after max subdivisions",
                      sgn * total, err);
    // split the worst panel
    std::size_t worst = 0;
    for (std::size_t i = 1; i < panels.size(); ++i)
      if (panels[i].error > panels[worst].error) worst = i;
    Panel p = panels[worst];
    const double m = 0.5 * (p.a + p.b);
    if (m == p.a || m == p.b)
      throw QuadError("quad: interval underflow", sgn * p.integral, p.error);
    PanelResult left = gk15(f, p.a, m);
    PanelResult right = gk15(f, m, p.b);
    panels[worst] = {p.a, m, left.integral, left.error};
    panels.push_back({m, p.b, right.integral, right.error});
  }
}

NumericFunction::NumericFunction(Fn1 f, double x0, Interval domain, double tol,
                                 int knots)
    : f_(std::move(f)), x0_(x0), domain_(domain), tol_(tol) {
  if (knots < 2) knots = 2;
  if (x0 < domain.lo || x0 > domain.hi)
    throw DomainError("antiderivative base point outside domain");
  knot_x_.resize(knots);
  knot_F_.resize(knots);
  const double h = domain.length() / (knots - 1);
  for (int i = 0; i < knots; ++i) knot_x_[i] = domain.lo + i * h;
  knot_x_.back() = domain.hi;
  // integrate outward from the knot nearest to x0
  const auto it =
      std::min_element(knot_x_.begin(), knot_x_.end(), [x0](double a, double b) {
        return std::fabs(a - x0) < std::fabs(b - x0);
      });
  const int i0 = static_cast<int>(it - knot_x_.begin());
  knot_F_[i0] = quad(f_, x0, knot_x_[i0], tol_);
  for (int i = i0 + 1; i < knots; ++i)
    knot_F_[i] = knot_F_[i - 1] + quad(f_, knot_x_[i - 1], knot_x_[i], tol_);
  for (int i = i0 - 1; i >= 0; --i)
    knot_F_[i] = knot_F_[i + 1] - quad(f_, knot_x_[i], knot_x_[i + 1], tol_);
}

double NumericFunction::operator()(double x) const {
  if (x < domain_.lo - 1e-12 * (1.0 + std::fabs(domain_.lo)) ||
      x > domain_.hi + 1e-12 * (1.0 + std::fabs(domain_.hi)))
    throw DomainError("NumericFunction evaluated outside domain");
  x = std::clamp(x, domain_.lo, domain_.hi);
  const auto it = std::lower_bound(knot_x_.begin(), knot_x_.end(), x);
  std::size_t i = it - knot_x_.begin();
  if (i == knot_x_.size()) --i;
  // use the nearer neighbouring knot
  if (i > 0 && (i == knot_x_.size() || x - knot_x_[i - 1] < knot_x_[i] - x)) --i;
  if (x == knot_x_[i]) return knot_F_[i];
  return knot_F_[i] + quad(f_, knot_x_[i], x, tol_);
}

std::vector<std::pair<double, double>> NumericFunction::knot_table() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(knot_x_.size());
  for (std::size_t i = 0; i < knot_x_.size(); ++i)
    out.emplace_back(knot_x_[i], knot_F_[i]);
  return out;
}

double invert_monotone(const Fn1& F, double y, Interval bracket, double tol) {
  double a = bracket.lo, b = bracket.hi;
  double Fa = F(a), Fb = F(b);
  const double dir = Fb > Fa ? 1.0 : -1.0;
  if ((y - Fa) * dir < 0.0 || (y - Fb) * dir > 0.0)
    throw MonotoneError("invert_monotone: target outside bracket range");
  const double target = tol * std::max(1.0, std::fabs(y));
  double x = 0.5 * (a + b);
  for (int iter = 0; iter < 200; ++iter) {
    // secant step from the bracket ends, clipped into the bracket
    double xs = (Fb != Fa) ? a + (y - Fa) * (b - a) / (Fb - Fa) : 0.5 * (a + b);
    if (!(xs > a && xs < b)) xs = 0.5 * (a + b);
    x = xs;
    const double Fx = F(x);
    if (std::fabs(Fx - y) <= target) return x;
    if ((Fx - y) * dir < 0.0) {
      if ((Fx - Fa) * dir < 0.0)
        throw MonotoneError("invert_monotone: sampled slope changes sign");
      a = x;
      Fa = Fx;
    } else {
      if ((Fb - Fx) * dir < 0.0)
        throw MonotoneError("invert_monotone: sampled slope changes sign");
      b = x;
      Fb = Fx;
    }
    if (b - a <= 1e-16 * std::max(1.0, std::fabs(a))) return 0.5 * (a + b);
  }
  return x;
}

AffineFit fit_affine(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 3) throw FitError("fit_affine: need at least 3 samples");
  double xmin = samples[0].first, xmax = samples[0].first;
  for (const auto& [x, y] : samples) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
  }
  if (xmax - xmin < 1e-12) throw FitError("fit_affine: degenerate x spread");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(samples.size());
  for (const auto& [x, y] : samples) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = n * sxx - sx * sx;
  AffineFit fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  for (const auto& [x, y] : samples)
    fit.max_residual =
        std::max(fit.max_residual, std::fabs(y - (fit.slope * x + fit.intercept)));
  return fit;
}

std::vector<double> lstsq(const std::vector<std::vector<double>>& A,
                          const std::vector<double>& rhs) {
  if (A.empty() || A.size() != rhs.size())
    throw FitError("lstsq: shape mismatch");
  const std::size_t m = A.size(), n = A[0].size();
  // normal equations N c = b
  std::vector<std::vector<double>> N(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) N[i][j] += A[r][i] * A[r][j];
      N[i][n] += A[r][i] * rhs[r];
    }
  }
  // Gaussian elimination with partial pivoting
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(N[r][col]) > std::fabs(N[piv][col])) piv = r;
    std::swap(N[col], N[piv]);
    if (std::fabs(N[col][col]) < 1e-14)
      throw FitError("lstsq: singular normal equations");
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = N[r][col] / N[col][col];
      for (std::size_t c = col; c <= n; ++c) N[r][c] -= factor * N[col][c];
    }
  }
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = N[i][n] / N[i][i];
  return c;
}

PolyFit fit_poly(const std::vector<std::pair<double, double>>& samples,
                 int degree) {
  if (static_cast<int>(samples.size()) < degree + 1)
    throw FitError("fit_poly: not enough samples");
  std::vector<std::vector<double>> A;
  std::vector<double> rhs;
  A.reserve(samples.size());
  for (const auto& [x, y] : samples) {
    std::vector<double> row(degree + 1);
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      row[k] = p;
      p *= x;
    }
    A.push_back(std::move(row));
    rhs.push_back(y);
  }
  PolyFit fit;
  fit.coeff = lstsq(A, rhs);
  for (const auto& [x, y] : samples) {
    double p = 1.0, yhat = 0.0;
    for (int k = 0; k <= degree; ++k) {
      yhat += fit.coeff[k] * p;
      p *= x;
    }
    fit.max_residual = std::max(fit.max_residual, std::fabs(y - yhat));
  }
  return fit;
}

}  // namespace sundman
