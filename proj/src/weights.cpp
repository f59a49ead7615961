#include "thetalab/weights.hpp"
#include "thetalab/error.hpp"
#include <cmath>
#include <numbers>

namespace thetalab
{

using std::numbers::pi;

CrossingParameter::CrossingParameter(double g) : gamma(g)
{
   if (!(g > 0.0 && g < pi))
      throw DomainError("gamma must lie in (0, pi), got " + std::to_string(g));
}

double CrossingParameter::loop_weight() const
{
   return -2.0 * std::cos(2.0 * gamma);
}

bool VertexWeights::all_positive() const
{
   for (double r : rho)
      if (!(r > 0.0))
         return false;
   return true;
}

LatticeCouplings LatticeCouplings::from_weights(VertexWeights const& v)
{
   LatticeCouplings c;
   c.p = v(6) / v(2);
   c.K = v(2) / v(1);
   c.tau = v(1) * v(8) / (v(2) * v(2));
   c.w = v(8) / v(1);
   return c;
}

TwistSetting TwistSetting::from_phi(double phi)
{
   return {phi, 2.0 * std::cos(phi)};
}

TwistSetting TwistSetting::from_weight(double nt)
{
   if (std::abs(nt) > 2.0)
      throw DomainError("non-contractible weight outside [-2,2]");
   return {std::acos(nt / 2.0), nt};
}

std::array<cplx, 9> zb_weights_raw(double gamma, cplx u)
{
   double lz = pi / 2 - gamma / 2;
   double s2 = std::sin(2 * lz), s3 = std::sin(3 * lz);
   if (std::abs(s2) < 1e-14 || std::abs(s3) < 1e-14)
      throw SingularParametrization("zb weights singular at gamma = " + std::to_string(gamma));
   cplx uz = cplx(0, 1) * u;
   double d = s2 * s3;
   std::array<cplx, 9> r;
   cplx su = std::sin(uz), s3u = std::sin(3 * lz - uz);
   r[0] = 1.0 + su * s3u / d;
   r[1] = r[2] = s3u / s3;
   r[3] = r[4] = su / s3;
   r[5] = r[6] = su * s3u / d;
   r[7] = std::sin(2 * lz - uz) * s3u / d;
   r[8] = -su * std::sin(lz - uz) / d;
   return r;
}

VertexWeights zb_weights(CrossingParameter gamma, cplx u)
{
   auto raw = zb_weights_raw(gamma.gamma, u);
   raw[3] = -raw[3];
   raw[4] = -raw[4];
   double mx = 0;
   for (auto const& z : raw)
      mx = std::max(mx, std::abs(z));
   VertexWeights v;
   for (int k = 0; k < 9; ++k)
   {
      if (std::abs(raw[k].imag()) > 1e-12 * mx)
         throw DomainError("complex vertex weights are not supported by the loop transfer matrix");
      v.rho[k] = raw[k].real();
   }
   if (std::abs(v.rho[0]) < 1e-14 * mx)
      throw SingularParametrization("rho_1 vanishes, cannot normalize");
   v.scale = v.rho[0];
   for (auto& r : v.rho)
      r /= v.scale;
   // corner pairs can be flipped without changing the spectrum
   if (v.rho[1] < 0) v.rho[1] = -v.rho[1], v.rho[2] = -v.rho[2];
   if (v.rho[3] < 0) v.rho[3] = -v.rho[3], v.rho[4] = -v.rho[4];
   v.n = gamma.loop_weight();
   return v;
}

std::pair<cplx, cplx> isotropic_points(double gamma)
{
   CrossingParameter g(gamma);
   return {cplx(0, 3 * gamma / 4 + pi / 4), cplx(0, 3 * gamma / 4 - pi / 4)};
}

cplx spectral_x(double gamma, Branch b)
{
   auto [up, um] = isotropic_points(gamma);
   return std::exp(2.0 * (b == Branch::Plus ? up : um));
}

IntegrablePoint integrable_point(PointTag tag)
{
   switch (tag)
   {
      case PointTag::ThetaBN:  return {tag, pi / 4, Branch::Minus};
      case PointTag::Dense:    return {tag, pi / 4, Branch::Plus};
      case PointTag::Dilute:   return {tag, 3 * pi / 4, Branch::Plus};
      case PointTag::RegimeII: return {tag, 3 * pi / 4, Branch::Minus};
      case PointTag::ThetaDS:  return {tag, pi / 4, Branch::None};
   }
   throw DomainError("unknown point");
}

LatticeCouplings closed_form_couplings(PointTag tag)
{
   LatticeCouplings c;
   double r2 = std::sqrt(2.0);
   double s1 = std::sin(pi / 16), c1 = std::cos(pi / 16);
   double s3 = std::sin(3 * pi / 16), c3 = std::cos(3 * pi / 16);
   switch (tag)
   {
      case PointTag::ThetaBN:
         c.p = r2 * s1;
         c.K = 1.0 / (2 * c1 * (1 + std::tan(pi / 16) / r2));
         c.tau = 0.5 * (2 + r2 + std::sqrt(2 + r2));
         break;
      case PointTag::Dense:
         c.p = r2 * c1;
         c.K = 1.0 / (r2 * c1 - 2 * s1);
         c.tau = 1 + 1 / r2 - std::sqrt(0.5 + 0.5 / r2);
         break;
      case PointTag::Dilute:
         c.p = r2 * s3;
         c.K = r2 * s3 / (1 + std::cos(pi / 8));
         c.tau = 1 - 1 / r2 + std::sqrt(0.5 - 0.5 / r2);
         break;
      case PointTag::RegimeII:
         c.p = r2 * c3;
         c.K = 4 * s3 * std::sin(pi / 8) / (1 - 8 * std::sin(pi / 8) * s3 * s3);
         c.tau = -(1 - std::sqrt(0.5 + 0.5 / r2)) * c1 / c3;
         break;
      case PointTag::ThetaDS:
         c.p = 0;
         c.K = 0.5;
         c.tau = 2;
         break;
   }
   c.w = c.K * c.K * c.tau;
   return c;
}

NamedPoint named_point(PointTag tag)
{
   NamedPoint np;
   np.point = integrable_point(tag);
   np.couplings = closed_form_couplings(tag);
   if (tag == PointTag::ThetaDS)
   {
      VertexWeights v;
      v.rho = {2, 1, 1, 1, 1, 0, 0, 1, 1};
      v.scale = 2;
      for (auto& r : v.rho)
         r /= v.scale;
      v.n = 0;
      np.weights = v;
   }
   else
   {
      auto [up, um] = isotropic_points(np.point.gamma);
      np.weights = zb_weights(CrossingParameter(np.point.gamma), np.point.branch == Branch::Plus ? up : um);
   }
   return np;
}

TwistSetting twist_for_loop_weight(double gamma)
{
   CrossingParameter g(gamma);
   return TwistSetting::from_phi(pi - 2 * gamma);
}

VertexWeights weights_from_couplings(double p, double K, double tau, double n)
{
   VertexWeights v;
   v.rho = {1, K, K, K, K, p * K, p * K, tau * K * K, tau * K * K};
   v.n = n;
   return v;
}

PointTag parse_point(std::string const& s)
{
   if (s == "theta-bn") return PointTag::ThetaBN;
   if (s == "dense") return PointTag::Dense;
   if (s == "dilute") return PointTag::Dilute;
   if (s == "regime2") return PointTag::RegimeII;
   if (s == "theta-ds") return PointTag::ThetaDS;
   throw DomainError("unknown point '" + s + "'");
}

std::string point_name(PointTag t)
{
   switch (t)
   {
      case PointTag::ThetaBN: return "theta-bn";
      case PointTag::Dense: return "dense";
      case PointTag::Dilute: return "dilute";
      case PointTag::RegimeII: return "regime2";
      case PointTag::ThetaDS: return "theta-ds";
   }
   return "?";
}

} // namespace thetalab
