#include "thetalab/analysis.hpp"
#include "thetalab/cftpred.hpp"
#include "thetalab/error.hpp"
#include "thetalab/looptm.hpp"
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace thetalab
{

using std::numbers::pi;

double FitReport::value(std::string const& name) const
{
   for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return values[i];
   throw ValidationError("fit report has no parameter " + name);
}

double FitReport::error(std::string const& name) const
{
   for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return errors[i];
   throw ValidationError("fit report has no parameter " + name);
}

static void check_sizes(std::vector<double> const& a, std::vector<double> const& b, std::size_t min_n,
                        char const* what)
{
   if (a.size() != b.size()) throw ValidationError(std::string(what) + ": inputs differ in length");
   if (a.size() < min_n)
      throw ValidationError(std::string(what) + ": needs at least " + std::to_string(min_n) + " sizes");
}

FitReport fit_central_charge(std::vector<double> const& L, std::vector<double> const& f)
{
   check_sizes(L, f, 3, "fit_central_charge");
   FitReport r;
   r.model = "three-point f_inf - pi c/(6 L^2) + d/L^4, algebraic tail";
   std::vector<double> Lc, cs, fs;
   for (std::size_t i = 0; i + 2 < L.size(); ++i)
   {
      Eigen::Matrix3d A;
      Eigen::Vector3d b;
      for (int k = 0; k < 3; ++k)
      {
         double l = L[i + k];
         A(k, 0) = 1;
         A(k, 1) = -pi / (6 * l * l);
         A(k, 2) = 1 / (l * l * l * l);
         b[k] = f[i + k];
      }
      Eigen::Vector3d s = A.fullPivLu().solve(b);
      Lc.push_back(L[i + 2]);
      fs.push_back(s[0]);
      cs.push_back(s[1]);
      r.sequence.emplace_back(L[i + 2], s[1]);
   }
   double c = cs.back(), finf = fs.back(), cerr = 0, ferr = 0;
   r.converged = true;
   if (cs.size() >= 3)
   {
      auto ec = fit::algebraic_tail(Lc, cs);
      auto ef = fit::algebraic_tail(Lc, fs);
      c = ec.value;
      finf = ef.value;
      cerr = ec.spread;
      ferr = ef.spread;
      r.converged = ec.converged && ef.converged;
      r.extra["omega"] = ec.omega;
      if (!ec.converged) r.flags.push_back("c(L) tail extrapolation failed, last estimate used");
   }
   else if (cs.size() == 2)
   {
      cerr = std::abs(cs[1] - cs[0]);
      ferr = std::abs(fs[1] - fs[0]);
   }
   r.names = {"f_inf", "c"};
   r.values = {finf, c};
   r.errors = {ferr, cerr};
   for (std::size_t i = 0; i < L.size(); ++i)
   {
      double fit = finf - pi * c / (6 * L[i] * L[i]);
      r.residuals.push_back({L[i], f[i], fit});
      r.chi2 += (fit - f[i]) * (fit - f[i]);
   }
   r.dof = int(L.size()) - 2;
   r.aic = fit::aic(r.chi2, int(L.size()), 2, false);
   return r;
}

std::vector<double> effective_central_charge(std::vector<double> const& L,
                                             std::vector<double> const& lambda, double f_inf)
{
   if (L.size() != lambda.size()) throw ValidationError("effective_central_charge: length mismatch");
   std::vector<double> c(L.size());
   for (std::size_t i = 0; i < L.size(); ++i)
   {
      if (!(lambda[i] > 0)) throw DomainError("eigenvalue must be positive");
      c[i] = 6 * L[i] * (std::log(lambda[i]) + L[i] * f_inf) / pi;
   }
   return c;
}

static void finish(FitReport& r, fit::LsqResult const& res, fit::Model const& m,
                   std::vector<double> const& x, std::vector<double> const& y, bool weighted)
{
   r.converged = res.converged;
   r.chi2 = res.chi2;
   r.dof = res.dof;
   r.aic = fit::aic(res.chi2, int(x.size()), int(res.params.size()), weighted);
   for (std::size_t i = 0; i < x.size(); ++i)
      r.residuals.push_back({x[i], y[i], m(x[i], res.params)});
   if (!res.converged) r.flags.push_back("nonlinear fit did not converge");
}

FitReport fit_ceff_log(std::vector<double> const& L, std::vector<double> const& ceff, double gamma, int m,
                       int j, CeffLogOptions opt)
{
   check_sizes(L, ceff, 4, "fit_ceff_log");
   double Aclosed = cft::A_of_gamma(gamma);   // throws at pi/3
   int N = cft::ContinuumLabels{m, j}.N();
   double climit = cft::ceff_continuum_limit(gamma, m);

   // parameter layout
   int ic = -1, iA = -1, iB, id = -1, k = 0;
   if (opt.free_intercept) ic = k++;
   if (!opt.A) iA = k++;
   iB = k++;
   if (opt.power_term) id = k++;
   if (int(L.size()) < k) throw ValidationError("fit_ceff_log: more parameters than sizes");

   double Afix = opt.A.value_or(Aclosed);
   fit::Model model = [=](double x, Eigen::VectorXd const& p) {
      double c = ic >= 0 ? p[ic] : climit;
      double A = iA >= 0 ? p[iA] : Afix;
      double t = p[iB] + std::log(x);
      double v = c - 12.0 * N * N * A / (t * t);
      if (id >= 0) v += p[id] / (x * x);
      return v;
   };

   fit::LsqResult best;
   bool have = false;
   for (double B0 : {0.5, 2.0, 5.0, 10.0, 20.0})
   {
      Eigen::VectorXd p0(k);
      if (ic >= 0) p0[ic] = climit;
      if (iA >= 0) p0[iA] = Aclosed;
      p0[iB] = B0;
      if (id >= 0) p0[id] = 0;
      auto res = fit::levenberg_marquardt(model, L, ceff, {}, p0);
      if (!res.params.allFinite()) continue;
      if (!have || (res.converged && !best.converged) ||
          (res.converged == best.converged && res.chi2 < best.chi2))
      {
         best = res;
         have = true;
      }
   }
   if (!have) throw Error("fit_ceff_log: no finite fit");

   FitReport r;
   r.model = "ceff log-corrected";
   auto push = [&](char const* name, int idx, double fixed) {
      r.names.push_back(name);
      r.values.push_back(idx >= 0 ? best.params[idx] : fixed);
      r.errors.push_back(idx >= 0 ? best.errors[idx] : 0.0);
   };
   push("c_inf", ic, climit);
   push("A", iA, Afix);
   push("B", iB, 0);
   if (id >= 0) push("d", id, 0);
   r.extra["N"] = N;
   if (ic < 0) r.flags.push_back("intercept fixed to closed form");
   if (iA < 0) r.flags.push_back("A fixed");
   finish(r, best, model, L, ceff, false);
   return r;
}

FitReport fit_ceff_power(std::vector<double> const& L, std::vector<double> const& ceff)
{
   check_sizes(L, ceff, 4, "fit_ceff_power");
   fit::Model model = [](double x, Eigen::VectorXd const& p) { return p[0] + p[1] * std::pow(x, -p[2]); };
   fit::LsqResult res;
   bool have = false;
   for (double w0 : {0.25, 0.5, 1.0, 2.0, 3.0})
   {
      // amplitude and intercept from the two end points at fixed omega
      double a = (ceff.front() - ceff.back()) / (std::pow(L.front(), -w0) - std::pow(L.back(), -w0));
      Eigen::VectorXd p0(3);
      p0 << ceff.back() - a * std::pow(L.back(), -w0), a, w0;
      auto t = fit::levenberg_marquardt(model, L, ceff, {}, p0);
      if (!t.params.allFinite()) continue;
      if (!have || t.chi2 < res.chi2)
      {
         res = t;
         have = true;
      }
   }
   if (!have) throw Error("fit_ceff_power: no finite fit");
   FitReport r;
   r.model = "ceff power law";
   r.names = {"c_inf", "a", "omega"};
   r.values = {res.params[0], res.params[1], res.params[2]};
   r.errors = {res.errors[0], res.errors[1], res.errors[2]};
   finish(r, res, model, L, ceff, false);
   if (res.params[2] < 0.05) r.flags.push_back("omega near zero: power law mimics a logarithm");
   return r;
}

VirialReport virial_coefficients(VertexWeights const& w, std::vector<int> const& Ls,
                                 std::vector<double> const& n_tilde)
{
   if (n_tilde.size() < 3) throw ValidationError("virial: need at least 3 values of n~");
   double lo = *std::min_element(n_tilde.begin(), n_tilde.end());
   double hi = *std::max_element(n_tilde.begin(), n_tilde.end());
   if (lo < -0.2 - 1e-12 || hi > 0.2 + 1e-12) throw DomainError("virial: n~ grid must lie in [-0.2, 0.2]");
   if (std::abs(lo + hi) > 1e-12) throw DomainError("virial: n~ grid must be centred at 0");

   VirialReport v;
   v.n_tilde = n_tilde;
   for (int L : Ls)
   {
      std::vector<double> y;
      for (double nt : n_tilde)
      {
         RowOperator op(w, L, 0, TwistSetting::from_weight(nt));
         auto ep = leading_eigenvalues(op, 1);
         if (!ep.converged) throw Error("virial: eigensolver did not converge");
         y.push_back(L * std::log(ep.values[0].real()));
      }
      auto q = fit::polyfit(n_tilde, y, 2);
      v.L.push_back(L);
      v.a1.push_back(q.params[1]);
      v.a2.push_back(q.params[2]);
      v.llog.push_back(y);
   }
   auto& r = v.report;
   r.model = "virial quadratic in n~, algebraic tail in L";
   std::vector<double> Ld(v.L.begin(), v.L.end());
   if (Ld.size() >= 3)
   {
      v.a1_inf = fit::algebraic_tail(Ld, v.a1);
      v.a2_inf = fit::algebraic_tail(Ld, v.a2);
   }
   else
   {
      v.a1_inf.value = v.a1.back();
      v.a2_inf.value = v.a2.back();
      r.flags.push_back("fewer than 3 sizes, last values reported");
   }
   r.names = {"a1", "a2"};
   r.values = {v.a1_inf.value, v.a2_inf.value};
   r.errors = {v.a1_inf.spread, v.a2_inf.spread};
   r.converged = v.a1_inf.converged && v.a2_inf.converged;
   for (std::size_t i = 0; i < v.L.size(); ++i)
      r.sequence.emplace_back(v.L[i], v.a2[i]);
   bool pos = std::all_of(v.a2.begin(), v.a2.end(), [](double a) { return a > 0; });
   bool neg = std::all_of(v.a2.begin(), v.a2.end(), [](double a) { return a < 0; });
   r.extra["a2_sign"] = pos ? 1 : (neg ? -1 : 0);
   return v;
}

TrackedLevels level_tracking(std::vector<double> const& x, std::vector<std::vector<double>> const& levels)
{
   if (x.size() != levels.size()) throw ValidationError("level_tracking: grid and levels differ in length");
   TrackedLevels t;
   t.x = x;
   if (x.empty()) return t;
   std::size_t nl = levels[0].size();
   for (auto const& l : levels)
      nl = std::min(nl, l.size());
   t.curves.assign(nl, std::vector<double>(x.size()));
   t.ambiguous.assign(nl, std::vector<bool>(x.size(), false));
   if (nl == 0) return t;

   std::vector<double> first(levels[0].begin(), levels[0].end());
   std::sort(first.begin(), first.end(), std::greater<>());
   for (std::size_t c = 0; c < nl; ++c)
      t.curves[c][0] = first[c];

   for (std::size_t k = 1; k < x.size(); ++k)
   {
      std::vector<double> pred(nl);
      for (std::size_t c = 0; c < nl; ++c)
      {
         pred[c] = t.curves[c][k - 1];
         if (k >= 2)
            pred[c] += (t.curves[c][k - 1] - t.curves[c][k - 2]) * (x[k] - x[k - 1]) / (x[k - 1] - x[k - 2]);
      }
      // greedy assignment by distance; the candidate list may be longer than nl
      std::vector<double> cand(levels[k].begin(), levels[k].end());
      struct Pair
      {
         double d;
         std::size_t c, j;
      };
      std::vector<Pair> pairs;
      for (std::size_t c = 0; c < nl; ++c)
         for (std::size_t j = 0; j < cand.size(); ++j)
            pairs.push_back({std::abs(pred[c] - cand[j]), c, j});
      std::sort(pairs.begin(), pairs.end(), [](Pair const& a, Pair const& b) {
         return a.d < b.d || (a.d == b.d && (a.c < b.c || (a.c == b.c && a.j < b.j)));
      });
      std::vector<bool> cu(nl, false), ju(cand.size(), false);
      for (auto const& p : pairs)
      {
         if (cu[p.c] || ju[p.j]) continue;
         cu[p.c] = ju[p.j] = true;
         t.curves[p.c][k] = cand[p.j];
      }
      // near-degenerate candidates make the matching ambiguous
      for (std::size_t c = 0; c < nl; ++c)
      {
         double d0 = 1e300, d1 = 1e300;
         for (double v : cand)
         {
            double d = std::abs(pred[c] - v);
            if (d < d0) { d1 = d0; d0 = d; }
            else if (d < d1) d1 = d;
         }
         t.ambiguous[c][k] = d1 < 2 * d0 + 1e-14;
      }
   }
   return t;
}

std::vector<double> derivative(std::vector<double> const& x, std::vector<double> const& y)
{
   std::size_t n = x.size();
   if (y.size() != n) throw ValidationError("derivative: length mismatch");
   if (n < 3) throw ValidationError("derivative: needs at least 3 grid points");
   std::vector<double> d(n);
   bool uniform = true;
   double h = x[1] - x[0];
   for (std::size_t i = 1; i < n; ++i)
      uniform = uniform && std::abs((x[i] - x[i - 1]) - h) < 1e-9 * std::abs(h);
   for (std::size_t i = 1; i + 1 < n; ++i)
   {
      double dh = (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
      if (uniform && i >= 2 && i + 2 < n)
      {
         double d2h = (y[i + 2] - y[i - 2]) / (x[i + 2] - x[i - 2]);
         d[i] = (4 * dh - d2h) / 3;
      }
      else
         d[i] = dh;
   }
   auto one_sided = [&](std::size_t a, std::size_t b, std::size_t c) {
      // quadratic through three points, derivative at x[a]
      double x0 = x[a], x1 = x[b], x2 = x[c];
      double l0 = (2 * x0 - x1 - x2) / ((x0 - x1) * (x0 - x2));
      double l1 = (x0 - x2) / ((x1 - x0) * (x1 - x2));
      double l2 = (x0 - x1) / ((x2 - x0) * (x2 - x1));
      return l0 * y[a] + l1 * y[b] + l2 * y[c];
   };
   d[0] = one_sided(0, 1, 2);
   d[n - 1] = one_sided(n - 1, n - 2, n - 3);
   return d;
}

DensitySweep density_sweep(double p, double tau, double n, double n_tilde, std::vector<double> const& K,
                           std::vector<int> const& Ls, int levels)
{
   if (K.size() < 3) throw ValidationError("density_sweep: K grid needs at least 3 points");
   if (!std::is_sorted(K.begin(), K.end())) throw ValidationError("density_sweep: K grid must be increasing");
   DensitySweep out;
   out.K = K;
   out.p = p;
   out.tau = tau;
   out.n_tilde = n_tilde;
   double h = (K.back() - K.front()) / double(K.size() - 1);

   for (int L : Ls)
   {
      DensitySweep::Size s;
      s.L = L;
      std::vector<std::vector<double>> lv;
      for (double k : K)
      {
         auto w = weights_from_couplings(p, k, tau, n);
         RowOperator op(w, L, 0, TwistSetting::from_weight(n_tilde));
         auto ep = leading_eigenvalues(op, levels);
         std::vector<double> row;
         for (auto const& z : ep.values)
            row.push_back(std::log(std::abs(z)) / L);
         lv.push_back(row);
         s.f0.push_back(-*std::max_element(row.begin(), row.end()));
      }
      std::vector<double> g(s.f0.size());
      for (std::size_t i = 0; i < g.size(); ++i)
         g[i] = -s.f0[i];
      s.density = derivative(K, g);
      s.levels = level_tracking(K, lv);

      auto const& cv = s.levels.curves;
      auto leader = [&](std::size_t k) {
         std::size_t b = 0;
         for (std::size_t c = 1; c < cv.size(); ++c)
            if (cv[c][k] > cv[b][k]) b = c;
         return b;
      };
      bool first = true;
      for (std::size_t k = 0; k + 1 < K.size() && !cv.empty(); ++k)
      {
         std::size_t a = leader(k), b = leader(k + 1);
         if (a == b) continue;
         double d0 = cv[a][k] - cv[b][k], d1 = cv[a][k + 1] - cv[b][k + 1];
         double t = d0 / (d0 - d1);
         double kc = K[k] + t * (K[k + 1] - K[k]);
         s.crossings.push_back(kc);
         if (first)
         {
            auto da = derivative(K, cv[a]), db = derivative(K, cv[b]);
            double sa = da[k] + t * (da[k + 1] - da[k]);
            double sb = db[k] + t * (db[k + 1] - db[k]);
            s.jump = std::abs(sb - sa);
            first = false;
            if (s.levels.ambiguous[a][k + 1] || s.levels.ambiguous[b][k + 1])
               out.warnings.push_back("L=" + std::to_string(L) + ": ambiguous level matching at crossing");
         }
      }
      if (!s.crossings.empty())
      {
         // differences across a crossing straddle a kink; use the leading branch's own slope
         std::vector<std::vector<double>> slopes;
         for (auto const& c : cv) slopes.push_back(derivative(K, c));
         for (std::size_t k = 0; k < K.size(); ++k) s.density[k] = slopes[leader(k)][k];
      }
      else
      {
         // no crossing: the steepest step of the density across one grid spacing
         for (std::size_t k = 0; k + 1 < K.size(); ++k)
            s.jump = std::max(s.jump, std::abs(s.density[k + 1] - s.density[k]));
      }
      auto dd = derivative(K, s.density);
      for (std::size_t k = 0; k < K.size(); ++k)
      {
         // skip grid points adjacent to a crossing where the derivative straddles the jump
         bool near = false;
         for (double kc : s.crossings)
            near = near || std::abs(K[k] - kc) < 2.5 * h;
         if (!near) s.steepness = std::max(s.steepness, std::abs(dd[k]));
      }
      out.sizes.push_back(std::move(s));
   }
   if (K.size() < 9) out.warnings.push_back("K grid coarse: finite differences may be unstable");
   return out;
}

FitReport fit_g1(std::vector<double> const& L, std::vector<double> const& logG, std::vector<double> const& sigma,
                 G1FitOptions opt)
{
   check_sizes(L, logG, 5, "fit_g1");
   bool weighted = !sigma.empty();
   if (weighted && sigma.size() != L.size()) throw ValidationError("fit_g1: sigma has wrong length");
   std::size_t n = L.size();
   bool logc = opt.model == G1Model::LogCorrected;
   for (double l : L)
      if (logc && !(l > std::exp(1.0))) throw DomainError("fit_g1: log-corrected model needs L > e");

   std::vector<std::string> names;
   if (!opt.x1) names.push_back("x1");
   names.push_back("A");
   if (logc)
   {
      names.push_back("z");
      names.push_back("c1");
   }
   else
      names.push_back("B");

   // columns: each parameter enters linearly
   auto row = [&](double l) {
      std::vector<double> r;
      if (!opt.x1) r.push_back(-2 * std::log(l));
      r.push_back(1.0);
      if (logc)
      {
         r.push_back(-0.5 * std::log(std::log(l)));   // coefficient of z; the 1/2 part goes to A
         r.push_back(1 / std::sqrt(std::log(l)));
      }
      else
         r.push_back(-1 / l);
      return r;
   };
   auto offset = [&](double l) {
      double o = opt.x1 ? -2 * *opt.x1 * std::log(l) : 0.0;
      if (logc) o += -0.5 * std::log(std::log(l));
      return o;
   };
   Eigen::MatrixXd A(n, names.size());
   Eigen::VectorXd y(n), s;
   for (std::size_t i = 0; i < n; ++i)
   {
      auto r = row(L[i]);
      for (std::size_t c = 0; c < r.size(); ++c)
         A(i, c) = r[c];
      y[i] = logG[i] - offset(L[i]);
   }
   if (weighted) s = Eigen::Map<Eigen::VectorXd const>(sigma.data(), n);
   auto res = fit::linear_lsq(A, y, s);

   FitReport rep;
   rep.model = logc ? "G1 log-corrected" : "G1 power law";
   rep.names = names;
   for (std::size_t c = 0; c < names.size(); ++c)
   {
      rep.values.push_back(res.params[c]);
      rep.errors.push_back(res.errors[c]);
   }
   if (opt.x1)
   {
      rep.extra["x1_fixed"] = *opt.x1;
      rep.flags.push_back("x1 fixed");
   }
   rep.chi2 = res.chi2;
   rep.dof = res.dof;
   rep.converged = res.converged;
   rep.aic = fit::aic(res.chi2, int(n), int(names.size()), weighted);
   for (std::size_t i = 0; i < n; ++i)
   {
      auto r = row(L[i]);
      double v = offset(L[i]);
      for (std::size_t c = 0; c < r.size(); ++c)
         v += r[c] * res.params[c];
      rep.residuals.push_back({L[i], logG[i], v});
   }
   if (logc)
   {
      double lmin = std::log(std::log(*std::min_element(L.begin(), L.end())));
      double lmax = std::log(std::log(*std::max_element(L.begin(), L.end())));
      if (lmax - lmin < 0.3) rep.flags.push_back("collinearity: log log L range is narrow");
      rep.flags.push_back("z is low-confidence");
      // strong correlation between z and c1 also signals collinearity
      auto const& C = res.covariance;
      int iz = int(names.size()) - 2, ic = int(names.size()) - 1;
      double corr = C(iz, ic) / std::sqrt(std::max(1e-300, C(iz, iz) * C(ic, ic)));
      rep.extra["corr_z_c1"] = corr;
      if (std::abs(corr) > 0.999) rep.flags.push_back("collinearity: z and c1 nearly degenerate");
   }
   return rep;
}

G1Comparison compare_g1(std::vector<double> const& L, std::vector<double> const& logG,
                        std::vector<double> const& sigma, std::optional<double> x1_fixed)
{
   G1Comparison c;
   c.power = fit_g1(L, logG, sigma, {G1Model::PowerLaw, x1_fixed});
   c.logc = fit_g1(L, logG, sigma, {G1Model::LogCorrected, x1_fixed});
   c.delta_aic = c.logc.aic - c.power.aic;
   c.preferred = c.logc.chi2_per_dof() < c.power.chi2_per_dof() ? "logcorrected" : "powerlaw";
   return c;
}

} // namespace thetalab
