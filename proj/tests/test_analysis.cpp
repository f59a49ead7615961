#include "thetalab/analysis.hpp"
#include "thetalab/cftpred.hpp"
#include "thetalab/error.hpp"
#include "thetalab/fit.hpp"
#include <doctest.h>
#include <cmath>
#include <numbers>
#include <random>

using namespace thetalab;
using std::numbers::pi;

TEST_CASE("least squares building blocks")
{
   std::vector<double> x, y;
   for (int i = 0; i < 12; ++i)
   {
      x.push_back(0.3 * i);
      y.push_back(2.5 * std::exp(-0.7 * x.back()) + 0.4);
   }
   fit::Model m = [](double t, Eigen::VectorXd const& p) { return p[0] * std::exp(-p[1] * t) + p[2]; };
   Eigen::VectorXd p0(3);
   p0 << 1, 1, 0;
   auto r = fit::levenberg_marquardt(m, x, y, {}, p0);
   CHECK(r.converged);
   CHECK(r.params[0] == doctest::Approx(2.5).epsilon(1e-8));
   CHECK(r.params[1] == doctest::Approx(0.7).epsilon(1e-8));
   CHECK(r.params[2] == doctest::Approx(0.4).epsilon(1e-8));
   CHECK(r.dof == 9);

   std::vector<double> q;
   for (double t : x) q.push_back(1 - 2 * t + 0.5 * t * t);
   auto pf = fit::polyfit(x, q, 2);
   CHECK(pf.params[0] == doctest::Approx(1.0).epsilon(1e-12));
   CHECK(pf.params[1] == doctest::Approx(-2.0).epsilon(1e-12));
   CHECK(pf.params[2] == doctest::Approx(0.5).epsilon(1e-12));
   CHECK(pf.chi2 < 1e-24);

   std::vector<double> L = {4, 6, 8, 10, 12, 14}, v;
   for (double l : L) v.push_back(2.0 + 3.0 * std::pow(l, -1.7));
   auto e = fit::algebraic_tail(L, v);
   CHECK(e.converged);
   CHECK(e.value == doctest::Approx(2.0).epsilon(1e-9));
   CHECK(e.omega == doctest::Approx(1.7).epsilon(1e-7));
   CHECK_THROWS_AS(fit::algebraic_tail({1, 2}, {1, 2}), ValidationError);
   // an almost flat drift must not be extrapolated through a vanishing exponent
   std::vector<double> slow;
   for (double l : L) slow.push_back(-0.06 - 0.01 * std::pow(l, 0.05));
   auto s = fit::algebraic_tail(L, slow);
   CHECK(std::abs(s.value - slow.back()) <= std::abs(slow.back() - slow.front()));
}

TEST_CASE("central charge from its own model")
{
   std::vector<double> L = {4, 5, 6, 7, 8, 9, 10}, f, g;
   for (double l : L)
   {
      f.push_back(0.1 - pi * 1.5 / (6 * l * l));
      g.push_back(f.back() + 0.37);   // shifted free energy
   }
   auto r = fit_central_charge(L, f);
   CHECK(std::abs(r.value("c") - 1.5) < 1e-10);
   CHECK(std::abs(r.value("f_inf") - 0.1) < 1e-10);
   auto s = fit_central_charge(L, g);
   CHECK(std::abs(s.value("c") - 1.5) < 1e-10);
   CHECK(std::abs(s.value("f_inf") - 0.47) < 1e-10);
   // with a quartic correction the triples stay exact
   std::vector<double> h;
   for (double l : L) h.push_back(0.1 - pi * 1.5 / (6 * l * l) + 0.8 / std::pow(l, 4));
   CHECK(std::abs(fit_central_charge(L, h).value("c") - 1.5) < 1e-9);
   CHECK_THROWS_AS(fit_central_charge({4, 5}, {0.1, 0.2}), ValidationError);

   std::vector<double> lam = {1.2, 1.1};
   auto ce = effective_central_charge({4, 6}, lam, 0.0);
   CHECK(ce[0] == doctest::Approx(6 * 4 * std::log(1.2) / pi));
}

TEST_CASE("log-corrected effective central charge from its own model")
{
   double g = pi / 4;
   int m = 1, N = cft::ContinuumLabels{m, 0}.N();
   double climit = cft::ceff_continuum_limit(g, m);
   std::vector<double> L, c;
   for (int l = 4; l <= 16; l += 2)
   {
      L.push_back(l);
      double t = 2.0 + std::log(double(l));
      c.push_back(climit - 12.0 * N * N * 7.5 / (t * t));
   }
   CeffLogOptions opt;
   opt.A.reset();
   auto r = fit_ceff_log(L, c, g, m, 0, opt);
   CHECK(std::abs(r.value("A") - 7.5) < 1e-8);
   CHECK(std::abs(r.value("B") - 2.0) < 1e-8);
   opt.free_intercept = true;
   opt.A = 7.5;
   auto s = fit_ceff_log(L, c, g, m, 0, opt);
   CHECK(std::abs(s.value("c_inf") - climit) < 1e-8);
   CHECK(std::abs(s.value("B") - 2.0) < 1e-8);
   for (auto const& row : s.residuals) CHECK(std::abs(row.y - row.fit) < 1e-8);
   CHECK_THROWS(fit_ceff_log(L, c, pi / 3, m, 0, {}));

   std::vector<double> pw;
   for (double l : L) pw.push_back(1.0 - 2.0 * std::pow(l, -1.3));
   auto p = fit_ceff_power(L, pw);
   CHECK(std::abs(p.value("c_inf") - 1.0) < 1e-8);
   CHECK(std::abs(p.value("omega") - 1.3) < 1e-7);
}

TEST_CASE("G1 models from their own data")
{
   std::vector<double> L = {10, 12, 16, 20, 24, 32, 40, 48}, y, ylog;
   for (double l : L)
   {
      y.push_back(-2 * 0.25 * std::log(l) + 0.3 - 1.5 / l);
      double z = 1.7;
      ylog.push_back(-2 * (-5.0 / 48) * std::log(l) + 0.2 - (1 + z) / 2 * std::log(std::log(l)) +
                     0.4 / std::sqrt(std::log(l)));
   }
   auto p = fit_g1(L, y, {}, {G1Model::PowerLaw, std::nullopt});
   CHECK(std::abs(p.value("x1") - 0.25) < 1e-10);
   CHECK(std::abs(p.value("A") - 0.3) < 1e-9);
   CHECK(std::abs(p.value("B") - 1.5) < 1e-8);
   auto q = fit_g1(L, ylog, {}, {G1Model::LogCorrected, -5.0 / 48});
   CHECK(std::abs(q.value("z") - 1.7) < 1e-8);
   CHECK(std::abs(q.value("c1") - 0.4) < 1e-8);

   // noisy power-law data: the comparison must not favour the log form
   std::mt19937 rng(2);
   std::normal_distribution<double> noise(0, 0.01);
   std::vector<double> yn, sig(L.size(), 0.01);
   for (double v : y) yn.push_back(v + noise(rng));
   auto c = compare_g1(L, yn, sig, std::nullopt);
   CHECK(c.preferred == "powerlaw");
   CHECK(c.power.value("x1") == doctest::Approx(0.25).epsilon(0.2));
   bool low = false;
   for (auto const& f : c.logc.flags) low |= f.find("low-confidence") != std::string::npos;
   CHECK(low);
   // and log data with x1 fixed prefers the log form
   std::vector<double> yl;
   for (double v : ylog) yl.push_back(v + noise(rng));
   CHECK(compare_g1(L, yl, sig, -5.0 / 48).preferred == "logcorrected");
   CHECK_THROWS_AS(fit_g1({10, 12, 14}, {0, 0, 0}, {}, {}), ValidationError);
}

TEST_CASE("level tracking")
{
   std::vector<double> x, single;
   std::vector<std::vector<double>> one, two;
   for (int i = 0; i <= 20; ++i)
   {
      double t = -1 + 0.1 * i;
      x.push_back(t);
      one.push_back({std::sin(t)});
      double a = 0.5 * t, b = -0.3 * t;   // cross at t = 0
      two.push_back({std::max(a, b), std::min(a, b)});
   }
   auto t1 = level_tracking(x, one);
   REQUIRE(t1.curves.size() == 1);
   for (std::size_t i = 0; i < x.size(); ++i) CHECK(t1.curves[0][i] == one[i][0]);
   auto t2 = level_tracking(x, two);
   // the tracked curves are the two straight lines, not the sorted envelope
   for (std::size_t i = 0; i < x.size(); ++i)
   {
      CHECK(t2.curves[0][i] == doctest::Approx(-0.3 * x[i]));
      CHECK(t2.curves[1][i] == doctest::Approx(0.5 * x[i]));
   }
}

TEST_CASE("numerical derivative")
{
   std::vector<double> x, c, q;
   for (int i = 0; i < 11; ++i)
   {
      x.push_back(0.4 + 0.01 * i);
      c.push_back(3.0);
      q.push_back(x.back() * x.back());
   }
   for (double d : derivative(x, c)) CHECK(std::abs(d) < 1e-9);
   auto dq = derivative(x, q);
   for (std::size_t i = 0; i < x.size(); ++i) CHECK(dq[i] == doctest::Approx(2 * x[i]).epsilon(1e-10));
}

TEST_CASE("virial coefficients: reflection of the grid and sign at theta-ds")
{
   auto bn = named_point(PointTag::ThetaBN).weights;
   std::vector<double> grid = {-0.2, -0.1, 0.0, 0.1, 0.2}, rev = {0.2, 0.1, 0.0, -0.1, -0.2};
   auto a = virial_coefficients(bn, {4, 5, 6}, grid);
   auto b = virial_coefficients(bn, {4, 5, 6}, rev);
   for (std::size_t i = 0; i < a.a1.size(); ++i)
   {
      CHECK(a.a1[i] == doctest::Approx(b.a1[i]).epsilon(1e-10));
      CHECK(a.a2[i] == doctest::Approx(b.a2[i]).epsilon(1e-8));
   }
   auto ds = virial_coefficients(named_point(PointTag::ThetaDS).weights, {4, 6, 8}, grid);
   for (double v : ds.a2) CHECK(v < 0);
}

TEST_CASE("density sweep bookkeeping")
{
   std::vector<double> K;
   for (int i = 0; i < 9; ++i) K.push_back(0.43 + 0.004 * i);
   auto c = closed_form_couplings(PointTag::ThetaBN);
   auto d = density_sweep(c.p, c.tau, 0.0, 0.0, K, {4, 6}, 3);
   REQUIRE(d.sizes.size() == 2);
   // the L = 6 loop sector crosses the empty-state level inside the window
   CHECK(d.sizes[1].crossings.size() == 1);
   CHECK(d.sizes[1].jump > 0);
   for (auto const& s : d.sizes)
   {
      REQUIRE(s.f0.size() == K.size());
      for (std::size_t i = 0; i < K.size(); ++i)
      {
         CHECK(std::isfinite(s.density[i]));
         CHECK(s.density[i] >= -1e-9);
      }
   }
}
