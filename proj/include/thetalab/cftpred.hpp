#pragma once
#include <complex>
#include <utility>

namespace thetalab::cft
{

using cplx = std::complex<double>;

struct ContinuumLabels
{
   int m = 0;
   int j = 0;
   int N() const;   // 2j + (3 - (-1)^m)/2
};

double c_discrete(double gamma);
double A_of_gamma(double gamma);
double ceff_continuum(double gamma, int m, int j, double L, double B);
double ceff_continuum_limit(double gamma, int m);   // L -> infinity
double watermelon(double gamma, int m);
double watermelon_dense(double gamma, int m);       // (m^2-4)/16 at gamma = pi/4
double continuum_gap(double gamma);                 // gamma/(pi-gamma) - 1/4

struct PolymerExponents
{
   double nu, gamma_exp, phi, nu_prime;
};

PolymerExponents exponents_theta_bn();
PolymerExponents exponents_theta_ds();

double central_charge_twist(double phi);
std::pair<double, double> central_charge_twist_branches(double phi);

std::pair<double, double> virial_prediction();

double coulomb_gas(double g, double e0, double e, double m);
double coulomb_gas_c(double g, double e0);

struct ThetaDSGas
{
   static constexpr double g = 2.0 / 3.0;
   static constexpr double e0 = 1.0 / 3.0;
};

std::pair<double, double> blackhole_dimension(double k, cplx j, int n, int w);   // real parts
std::pair<cplx, cplx> blackhole_dimension_complex(double k, cplx j, int n, int w);
double minisuperspace_exponent(double k, double j, int n);
double nu_of_k(double k);

cplx log_gamma(cplx z);
cplx gamma_fn(cplx z);
cplx reflection_amplitude(double p, int n);

} // namespace thetalab::cft
