#include "thetalab/error.hpp"
#include "thetalab/weights.hpp"
#include <doctest.h>
#include <cmath>
#include <numbers>

using namespace thetalab;
using std::numbers::pi;

TEST_CASE("named couplings at the integrable points")
{
   struct Want
   {
      PointTag tag;
      double p, K, tau;
   };
   // six printed decimals
   Want want[] = {{PointTag::ThetaBN, 0.275899, 0.446933, 2.630986},
                  {PointTag::Dense, 1.38704, 1.00315, 0.783227},
                  {PointTag::Dilute, 0.785695, 0.408391, 0.675577},
                  {PointTag::RegimeII, 1.17588, 15.4476, -0.0897902},
                  {PointTag::ThetaDS, 0.0, 0.5, 2.0}};
   for (auto const& w : want)
   {
      auto c = closed_form_couplings(w.tag);
      CAPTURE(point_name(w.tag));
      double tol = 5e-6 * std::max(1.0, std::abs(w.K));
      CHECK(c.p == doctest::Approx(w.p).epsilon(tol));
      CHECK(c.K == doctest::Approx(w.K).epsilon(tol));
      CHECK(c.tau == doctest::Approx(w.tau).epsilon(tol));
      CHECK(c.w == doctest::Approx(c.K * c.K * c.tau));
   }
}

TEST_CASE("zb weights reproduce the closed forms")
{
   for (auto tag : {PointTag::ThetaBN, PointTag::Dense, PointTag::Dilute, PointTag::RegimeII})
   {
      auto np = named_point(tag);
      auto c = LatticeCouplings::from_weights(np.weights);
      CAPTURE(point_name(tag));
      CHECK(std::abs(c.p - np.couplings.p) < 1e-12);
      CHECK(std::abs(c.K - np.couplings.K) < 1e-12 * std::max(1.0, c.K));
      CHECK(std::abs(c.tau - np.couplings.tau) < 1e-12);
      CHECK(np.weights(1) == 1.0);
      CHECK(np.weights(2) == doctest::Approx(np.weights(3)));
      CHECK(np.weights(4) == doctest::Approx(np.weights(5)));
      CHECK(np.weights(6) == doctest::Approx(np.weights(7)));
   }
   CHECK(named_point(PointTag::ThetaBN).weights.all_positive());
   CHECK(named_point(PointTag::Dense).weights.all_positive());
   CHECK(named_point(PointTag::Dilute).weights.all_positive());
   CHECK(closed_form_couplings(PointTag::RegimeII).tau < 0);
}

TEST_CASE("theta-ds weights")
{
   auto np = named_point(PointTag::ThetaDS);
   CHECK(np.weights.scale == 2.0);
   CHECK(np.weights(6) == 0.0);
   CHECK(np.weights(7) == 0.0);
   CHECK(np.weights.n == 0.0);
   auto c = LatticeCouplings::from_weights(np.weights);
   CHECK(c.p == 0.0);
   CHECK(c.K == 0.5);
   CHECK(c.tau == 2.0);
   CHECK(integrable_point(PointTag::ThetaDS).branch == Branch::None);
}

TEST_CASE("u = 0 gives the identity-like vertex")
{
   for (double g : {0.3, pi / 4, 1.2, 2.0})
   {
      auto v = zb_weights(CrossingParameter(g), 0.0);
      CHECK(v(1) == doctest::Approx(1.0));
      CHECK(v(2) == doctest::Approx(1.0));
      CHECK(v(8) == doctest::Approx(1.0));
      CHECK(std::abs(v(4)) < 1e-15);
      CHECK(std::abs(v(6)) < 1e-15);
      CHECK(std::abs(v(9)) < 1e-15);
   }
}

// direct evaluation of the raw weights, independent of the library's normalization path
TEST_CASE("isotropic points have rho2 = rho4 and rho8 = rho9")
{
   for (double g : {pi / 4, 3 * pi / 4})
   {
      auto [up, um] = isotropic_points(g);
      CHECK(up.real() == 0.0);
      CHECK(up.imag() == doctest::Approx(3 * g / 4 + pi / 4));
      CHECK(um.imag() == doctest::Approx(3 * g / 4 - pi / 4));
      for (auto u : {up, um})
      {
         double lz = pi / 2 - g / 2;
         std::complex<double> uz = std::complex<double>(0, 1) * u;
         double d = std::sin(2 * lz) * std::sin(3 * lz);
         auto r2 = std::sin(3 * lz - uz) / std::sin(3 * lz);
         auto r4 = std::sin(uz) / std::sin(3 * lz);
         auto r8 = std::sin(2 * lz - uz) * std::sin(3 * lz - uz) / d;
         auto r9 = -std::sin(uz) * std::sin(lz - uz) / d;
         CHECK(std::abs(std::abs(r2) - std::abs(r4)) < 1e-12);
         CHECK(std::abs(std::abs(r8) - std::abs(r9)) < 1e-12);
         auto v = zb_weights(CrossingParameter(g), u);
         CHECK(std::abs(v(2) - v(4)) < 1e-12);
         CHECK(std::abs(v(8) - v(9)) < 1e-12);
      }
   }
}

TEST_CASE("twist settings")
{
   auto t = twist_for_loop_weight(pi / 4);
   CHECK(t.phi == doctest::Approx(pi / 2));
   CHECK(std::abs(t.n_noncontractible) < 1e-15);
   t = twist_for_loop_weight(pi / 2);
   CHECK(std::abs(t.phi) < 1e-15);
   CHECK(t.n_noncontractible == doctest::Approx(2.0));
   t = twist_for_loop_weight(pi / 3);
   CHECK(t.phi == doctest::Approx(pi / 3));
   CHECK(t.n_noncontractible == doctest::Approx(1.0));
   CHECK(TwistSetting::from_weight(0.0).phi == doctest::Approx(pi / 2));
   CHECK_THROWS_AS(TwistSetting::from_weight(2.5), DomainError);
}

TEST_CASE("loop weight equals the twisted non-contractible weight")
{
   for (int i = 1; i <= 100; ++i)
   {
      double g = pi * i / 101.0;
      double n = CrossingParameter(g).loop_weight();
      CHECK(std::abs(n - twist_for_loop_weight(g).n_noncontractible) < 4e-15);
      CHECK(std::abs(n) <= 2.0);
   }
}

TEST_CASE("domain and singular errors")
{
   CHECK_THROWS_AS(CrossingParameter{0.0}, DomainError);
   CHECK_THROWS_AS(CrossingParameter{pi}, DomainError);
   // 2 lambda = pi - gamma vanishes mod pi never inside (0, pi); 3 lambda = 3pi/2 - 3gamma/2 hits pi at gamma = pi/3
   CHECK_THROWS_AS(zb_weights(CrossingParameter(pi / 3), 0.1), SingularParametrization);
   CHECK_THROWS_AS(parse_point("nowhere"), DomainError);
   CHECK(parse_point("regime2") == PointTag::RegimeII);
}
