#include "optnet/oracle/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "optnet/math/errors.hpp"
#include "optnet/math/rng.hpp"
#include "optnet/nn/network.hpp"
#include "optnet/pricing/black_scholes.hpp"
#include "optnet/pricing/heston.hpp"
#include "optnet/sampling/dataset.hpp"

namespace optnet::oracle {

namespace {

constexpr long double kSqrtPi = 1.772453850905516027298167483341145182798L;
constexpr long double kSqrt2 = 1.414213562373095048801688724209698078570L;

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace

long double erf_series(long double x) {
  const long double x2 = x * x;
  long double term = x;
  long double sum = x;
  for (int n = 1; n < 400; ++n) {
    term *= 2.0L * x2 / (2.0L * n + 1.0L);
    sum += term;
    if (std::fabs(term) <= 1e-22L * std::fabs(sum)) break;
  }
  return 2.0L / kSqrtPi * std::exp(-x2) * sum;
}

long double erfc_continued_fraction(long double x) {
  if (!(x > 0.0L)) throw DomainError("erfc_continued_fraction: x must be positive");
  // erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
  constexpr long double tiny = 1e-300L;
  long double f = x;
  long double c = x;
  long double d = 0.0L;
  for (int k = 1; k < 5000; ++k) {
    const long double a = 0.5L * k;
    d = x + a * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = x + a / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0L / d;
    const long double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0L) <= 1e-21L) break;
  }
  return std::exp(-x * x) / (kSqrtPi * f);
}

long double normal_cdf(long double x) {
  const long double z = -x / kSqrt2;  // Phi(x) = erfc(z) / 2
  if (z > 3.0L) return 0.5L * erfc_continued_fraction(z);
  if (z < -3.0L) return 1.0L - 0.5L * erfc_continued_fraction(-z);
  return 0.5L * (1.0L - erf_series(z));
}

long double bs_call_reference(long double m, long double tau, long double r, long double sigma) {
  const long double vs = sigma * std::sqrt(tau);
  const long double d1 = (std::log(m) + (r + 0.5L * sigma * sigma) * tau) / vs;
  const long double d2 = d1 - vs;
  return m * normal_cdf(d1) - std::exp(-r * tau) * normal_cdf(d2);
}

GradientCheck gradient_check(nn::LayerKind kind, std::uint64_t seed, std::size_t draws) {
  const auto spec = nn::default_spec(kind, 4, 2, 5);
  const nn::Network net(spec);
  constexpr std::size_t batch = 7;
  GradientCheck out{kind, draws};

  for (std::size_t draw = 0; draw < draws; ++draw) {
    RngStream rng = RngStream(derive_seed(seed, "gradient-check")).child(draw);
    nn::ParamSet p = net.init_params(rng.next_u64());
    // Biases start at zero; move every entry off its initial value.
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (double& v : p.at(i).values()) v += 0.3 * rng.normal();
    }
    Mat X(batch, spec.input_dim);
    for (double& v : X.values()) v = 2.0 * rng.uniform() - 1.0;
    Vec w(batch);
    for (double& v : w) v = rng.normal();

    nn::LayerActivations cache;
    net.forward(p, X, &cache);
    const Vec g = net.backward(p, cache, w).flatten();

    const Vec theta = p.flatten();
    nn::ParamSet q = p;
    Vec moved = theta;
    auto f_at = [&](std::size_t i, double dx) {
      moved[i] = theta[i] + dx;
      q.unflatten(moved);
      moved[i] = theta[i];
      const Vec y = net.forward(q, X);
      double s = 0.0;
      for (std::size_t b = 0; b < batch; ++b) s += w[b] * y[b];
      return s;
    };
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double h = 1e-4 * std::max(1.0, std::abs(theta[i]));
      const double fd =
          (8.0 * (f_at(i, h) - f_at(i, -h)) - (f_at(i, 2 * h) - f_at(i, -2 * h))) / (12.0 * h);
      const double rel =
          std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-8});
      out.max_rel_error = std::max(out.max_rel_error, rel);
      ++out.entries;
    }
  }
  return out;
}

bool OracleReport::pass() const {
  return std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.pass; });
}

OracleReport check_bs(const OracleOptions& o) {
  OracleReport rep{"bs", {}};
  RngStream rng(o.seed);
  const Mat grid = sampling::lhs_sample(o.grid_points, sampling::black_scholes_box(), rng);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    const auto x = grid.row(i);
    const double lib = pricing::bs_scaled_call({x[0], x[1], x[2], x[3]});
    const double ref = static_cast<double>(bs_call_reference(x[0], x[1], x[2], x[3]));
    worst = std::max(worst, std::abs(lib - ref));
  }
  rep.lines.push_back({"bs_scaled_call vs long-double erf reference", worst <= 1e-9,
                       fmt("max abs error %.3g over %.0f LHS points (tol 1e-9)", worst,
                           static_cast<double>(grid.rows()))});

  const pricing::BsInputs at{1.0, 1.0, 0.05, 0.2};
  const double vega = pricing::bs_vega_scaled(at);
  const double h = 1e-5;
  const double fd = (pricing::bs_scaled_call({1.0, 1.0, 0.05, 0.2 + h}) -
                     pricing::bs_scaled_call({1.0, 1.0, 0.05, 0.2 - h})) /
                    (2 * h);
  const double rel = std::abs(vega - fd) / std::abs(fd);
  rep.lines.push_back({"bs_vega_scaled vs central difference", rel <= 1e-6,
                       fmt("rel error %.3g at m=1 tau=1 r=0.05 sigma=0.2 (tol 1e-6)", rel)});
  return rep;
}

OracleReport check_iv(const OracleOptions& o) {
  OracleReport rep{"iv", {}};
  RngStream rng(o.seed);
  const Mat grid = sampling::lhs_sample(o.grid_points, sampling::black_scholes_box(), rng);
  double worst = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    const auto x = grid.row(i);
    const double price = pricing::bs_scaled_call({x[0], x[1], x[2], x[3]});
    if (price - pricing::intrinsic_scaled(x[0], x[1], x[2]) <= sampling::kIllPosedTimeValue) {
      ++skipped;
      continue;
    }
    ++used;
    try {
      worst = std::max(worst, std::abs(pricing::implied_vol(price, x[0], x[1], x[2]) - x[3]));
    } catch (const std::exception&) {
      ++failed;
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "max |sigma - implied_vol(price)| %.3g over %zu rows, %zu failed, %zu with time "
                "value <= 1e-12 skipped (tol 1e-7)",
                worst, used, failed, skipped);
  rep.lines.push_back({"implied_vol round trip", failed == 0 && worst <= 1e-7, buf});
  return rep;
}

OracleReport check_heston(const OracleOptions& o) {
  OracleReport rep{"heston", {}};

  double worst_limit = 0.0;
  RngStream rng(derive_seed(o.seed, "heston-limit"));
  const Mat bs = sampling::lhs_sample(200, sampling::black_scholes_box(), rng);
  for (std::size_t i = 0; i < bs.rows(); ++i) {
    const auto x = bs.row(i);
    const double var = x[3] * x[3];
    for (double kappa : {0.5, 2.0}) {
      const pricing::HestonParams p{x[0], x[1], x[2], -0.5, kappa, var, 1e-8, var};
      const double diff = std::abs(pricing::heston_cos_call(p) -
                                   pricing::bs_scaled_call({x[0], x[1], x[2], x[3]}));
      worst_limit = std::max(worst_limit, diff);
    }
  }
  rep.lines.push_back({"heston_cos_call vs Black-Scholes limit", worst_limit <= 1e-6,
                       fmt("max abs error %.3g over 400 points with gamma=1e-8 (tol 1e-6)",
                           worst_limit)});

  std::vector<pricing::HestonParams> points;
  points.push_back({1.0, 1.0, 0.02, -0.5, 1.5, 0.1, 0.3, 0.1});
  RngStream pick(derive_seed(o.seed, "heston-mc"));
  const Mat h = sampling::lhs_sample(o.mc_points, sampling::heston_box(), pick);
  for (std::size_t i = 0; i < h.rows(); ++i) {
    const auto x = h.row(i);
    points.push_back({x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]});
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const double cos = pricing::heston_cos_call(p);
    const auto mc = pricing::mc_heston_oracle(p, o.mc_paths, pricing::default_mc_steps(p.tau),
                                              RngStream(derive_seed(o.seed, "mc")).child(i));
    const double z = std::abs(cos - mc.price) / mc.std_error;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "m=%.3f tau=%.3f r=%.3f rho=%.3f kappa=%.3f vbar=%.3f gamma=%.3f v0=%.3f: "
                  "cos %.6f mc %.6f se %.2g, %.2f se apart (tol 3)",
                  p.m, p.tau, p.r, p.rho, p.kappa, p.vbar, p.gamma, p.v0, cos, mc.price,
                  mc.std_error, z);
    rep.lines.push_back({i == 0 ? "heston_cos_call vs Monte Carlo (reference point)"
                                : "heston_cos_call vs Monte Carlo (LHS point " +
                                      std::to_string(i) + ")",
                         z <= 3.0, buf});
  }
  return rep;
}

OracleReport check_grad(const OracleOptions& o) {
  OracleReport rep{"grad", {}};
  for (auto kind : {nn::LayerKind::Dense, nn::LayerKind::Residual, nn::LayerKind::Highway,
                    nn::LayerKind::GeneralizedHighway, nn::LayerKind::Dgm,
                    nn::LayerKind::DeepDgm, nn::LayerKind::NoRecDgm}) {
    const auto g = gradient_check(kind, o.seed);
    char buf[160];
    std::snprintf(buf, sizeof buf, "max rel error %.3g over %zu entries, %zu draws (tol 1e-6)",
                  g.max_rel_error, g.entries, g.draws);
    rep.lines.push_back({"gradient " + std::string(nn::to_string(kind)),
                         g.max_rel_error <= 1e-6, buf});
  }
  return rep;
}

OracleReport check_params() {
  OracleReport rep{"params", {}};
  using nn::LayerKind;
  struct Case {
    std::string label;
    LayerKind kind;
    std::size_t d, layers, nodes;
    std::size_t expected;
    bool exact;  // false: derived formula, paper value listed for reference
    std::size_t paper;
  };
  std::vector<Case> cases;
  const std::size_t mlp_counts[2][6] = {{2851, 10701, 23551, 41401, 64251, 253501},
                                        {5401, 20801, 46201, 81601, 127001, 504001}};
  const std::size_t widths[6] = {50, 100, 150, 200, 250, 500};
  for (std::size_t l = 0; l < 2; ++l) {
    for (std::size_t j = 0; j < 6; ++j) {
      cases.push_back({"mlp d=4", LayerKind::Dense, 4, l + 2, widths[j], mlp_counts[l][j], true,
                       mlp_counts[l][j]});
    }
  }
  cases.push_back({"mlp d=8", LayerKind::Dense, 8, 2, 50, 3051, true, 3051});
  cases.push_back({"residual", LayerKind::Residual, 4, 3, 50, 7951, true, 7951});
  cases.push_back({"highway", LayerKind::Highway, 4, 3, 50, 15601, true, 15601});
  cases.push_back({"genhighway", LayerKind::GeneralizedHighway, 4, 3, 50, 23251, true, 23251});
  cases.push_back({"highway d=8", LayerKind::Highway, 8, 4, 50, 20901, true, 20901});
  cases.push_back({"genhighway d=8", LayerKind::GeneralizedHighway, 8, 3, 50, 23451, true, 23451});
  cases.push_back({"norecdgm", LayerKind::NoRecDgm, 4, 3, 50, 30901, false, 31059});
  cases.push_back({"dgm", LayerKind::Dgm, 4, 3, 50, 33301, false, 33459});
  cases.push_back({"deepdgm", LayerKind::DeepDgm, 4, 3, 50, 49801, false, 49959});
  cases.push_back({"dgm d=8", LayerKind::Dgm, 8, 2, 50, 24101, false, 24467});

  for (const auto& c : cases) {
    const std::size_t got = nn::count_params(nn::default_spec(c.kind, c.d, c.layers, c.nodes));
    const std::size_t layout = nn::Network(nn::default_spec(c.kind, c.d, c.layers, c.nodes))
                                   .zero_params()
                                   .scalar_count();
    char buf[200];
    if (c.exact) {
      std::snprintf(buf, sizeof buf, "L=%zu n=%zu: %zu (expected %zu, layout %zu)", c.layers,
                    c.nodes, got, c.expected, layout);
    } else {
      std::snprintf(buf, sizeof buf,
                    "L=%zu n=%zu: %zu (formula %zu, layout %zu); published %zu, difference %+lld",
                    c.layers, c.nodes, got, c.expected, layout, c.paper,
                    static_cast<long long>(c.paper) - static_cast<long long>(got));
    }
    rep.lines.push_back({"count " + c.label, got == c.expected && layout == got, buf});
  }
  return rep;
}

std::vector<std::string> check_names() { return {"bs", "heston", "iv", "grad", "params"}; }

OracleReport run_check(std::string_view name, const OracleOptions& o) {
  if (name == "bs") return check_bs(o);
  if (name == "heston") return check_heston(o);
  if (name == "iv") return check_iv(o);
  if (name == "grad") return check_grad(o);
  if (name == "params") return check_params();
  throw UsageError("unknown oracle check '" + std::string(name) +
                   "' (bs, heston, iv, grad, params)");
}

void print_report(const OracleReport& report, std::ostream& out) {
  for (const auto& l : report.lines) {
    out << (l.pass ? "PASS " : "FAIL ") << l.name << ": " << l.detail << '\n';
  }
  out << (report.pass() ? "PASS" : "FAIL") << " oracle " << report.check << '\n';
}

}  // namespace optnet::oracle
