#pragma once
#include <array>
#include <complex>
#include <string>
#include <utility>

namespace thetalab
{

using cplx = std::complex<double>;

struct CrossingParameter
{
   double gamma;

   explicit CrossingParameter(double g);
   double loop_weight() const;   // n = -2 cos 2gamma
};

// rho[0..8] hold rho_1..rho_9.
// vertex edges: W,S incoming, N,E outgoing
//  1 empty      2 W-N   3 S-E   4 W-S   5 N-E
//  6 W-E        7 S-N   8 W-N & S-E     9 W-S & N-E
struct VertexWeights
{
   std::array<double, 9> rho{};
   double n = 0.0;
   double scale = 1.0;   // raw rho_1 divided out by the normalization

   double operator()(int k) const { return rho[k - 1]; }
   bool all_positive() const;
};

struct LatticeCouplings
{
   double p = 0.0;
   double K = 0.0;
   double tau = 0.0;
   double w = 0.0;

   static LatticeCouplings from_weights(VertexWeights const& v);
};

enum class Branch { Plus, Minus, None };

enum class PointTag { ThetaBN, Dense, Dilute, RegimeII, ThetaDS };

struct IntegrablePoint
{
   PointTag tag;
   double gamma;
   Branch branch;
};

struct TwistSetting
{
   double phi = 0.0;
   double n_noncontractible = 2.0;

   static TwistSetting from_phi(double phi);
   static TwistSetting from_weight(double nt);   // phi = arccos(nt/2)
};

struct NamedPoint
{
   IntegrablePoint point;
   VertexWeights weights;
   LatticeCouplings couplings;   // from closed forms
};

// u is the spectral value lambda; u_ZB = i lambda, lambda_ZB = pi/2 - gamma/2
VertexWeights zb_weights(CrossingParameter gamma, cplx u);

// raw weights before flip / normalization, complex in general
std::array<cplx, 9> zb_weights_raw(double gamma, cplx u);

std::pair<cplx, cplx> isotropic_points(double gamma);

cplx spectral_x(double gamma, Branch b);   // x = exp(2 lambda)

IntegrablePoint integrable_point(PointTag tag);
NamedPoint named_point(PointTag tag);
LatticeCouplings closed_form_couplings(PointTag tag);

TwistSetting twist_for_loop_weight(double gamma);

// isotropic weights from couplings with rho_1 = 1
VertexWeights weights_from_couplings(double p, double K, double tau, double n);

PointTag parse_point(std::string const& s);
std::string point_name(PointTag t);

} // namespace thetalab
