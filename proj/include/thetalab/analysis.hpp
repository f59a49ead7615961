#pragma once
#include "thetalab/fit.hpp"
#include "thetalab/weights.hpp"
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace thetalab
{

struct FitReport
{
   struct Row
   {
      double x, y, fit;
   };

   std::string model;
   std::vector<std::string> names;
   std::vector<double> values, errors;
   double chi2 = 0.0;
   int dof = 0;
   double aic = 0.0;
   bool converged = false;
   std::vector<Row> residuals;
   std::vector<std::pair<double, double>> sequence;   // local estimates vs L, when relevant
   std::map<std::string, std::string> provenance;      // input name -> sha256
   std::map<std::string, double> extra;
   std::vector<std::string> flags;

   double value(std::string const& name) const;
   double error(std::string const& name) const;
   double chi2_per_dof() const { return dof > 0 ? chi2 / dof : chi2; }
};

// -log Lambda_0 / L = f_inf - pi c /(6 L^2) + d / L^4 solved through consecutive triples,
// then the c(L) sequence extrapolated with an algebraic tail
FitReport fit_central_charge(std::vector<double> const& L, std::vector<double> const& f);

// c_eff(L) = 6 L log Lambda / pi relative to f_inf
std::vector<double> effective_central_charge(std::vector<double> const& L,
                                             std::vector<double> const& lambda, double f_inf = 0.0);

struct CeffLogOptions
{
   std::optional<double> A;        // fixed amplitude, fitted when empty
   bool free_intercept = false;    // fit the L -> infinity value instead of using the closed form
   bool power_term = false;        // add d / L^2
};

// c_eff(L) = c_inf - 12 N^2 A / (B + log L)^2 [+ d/L^2]
FitReport fit_ceff_log(std::vector<double> const& L, std::vector<double> const& ceff, double gamma,
                       int m, int j, CeffLogOptions opt = {});

// c_eff(L) = c_inf + a L^-omega
FitReport fit_ceff_power(std::vector<double> const& L, std::vector<double> const& ceff);

struct VirialReport
{
   std::vector<int> L;
   std::vector<double> a1, a2;          // per L, from quadratic fits of L log Lambda_0 in n~
   fit::Extrapolation a1_inf, a2_inf;
   std::vector<double> n_tilde;
   std::vector<std::vector<double>> llog;   // [L][n~] L log Lambda_0
   FitReport report;
};

VirialReport virial_coefficients(VertexWeights const& w, std::vector<int> const& Ls,
                                 std::vector<double> const& n_tilde);

struct TrackedLevels
{
   std::vector<double> x;                       // control parameter
   std::vector<std::vector<double>> curves;     // [level][x]
   std::vector<std::vector<bool>> ambiguous;    // [level][x]
};

// match eigenvalue lists across the grid by linear continuation of each curve
TrackedLevels level_tracking(std::vector<double> const& x, std::vector<std::vector<double>> const& levels);

struct DensitySweep
{
   struct Size
   {
      int L = 0;
      std::vector<double> f0;        // -log Lambda_0 / L
      std::vector<double> density;   // -d f0 / dK
      TrackedLevels levels;          // log Lambda_i / L tracked in K
      std::vector<double> crossings; // K locations where the leading level changes identity
      double jump = 0.0;             // density discontinuity at the first crossing
      double steepness = 0.0;        // max |d density / dK| on the grid
   };

   std::vector<double> K;
   double p = 0.0, tau = 0.0, n_tilde = 0.0;
   std::vector<Size> sizes;
   std::vector<std::string> warnings;
};

DensitySweep density_sweep(double p, double tau, double n, double n_tilde, std::vector<double> const& K,
                           std::vector<int> const& Ls, int levels = 3);

// centered differences, one-sided at the ends; Richardson step when the grid is uniform
std::vector<double> derivative(std::vector<double> const& x, std::vector<double> const& y);

enum class G1Model { PowerLaw, LogCorrected };

struct G1FitOptions
{
   G1Model model = G1Model::PowerLaw;
   std::optional<double> x1;   // fixed exponent
};

// powerlaw:     -2 x1 log L + A - B/L
// logcorrected: -2 x1 log L + A - ((1+z)/2) log log L + c1/sqrt(log L)
FitReport fit_g1(std::vector<double> const& L, std::vector<double> const& logG,
                 std::vector<double> const& sigma, G1FitOptions opt);

struct G1Comparison
{
   FitReport power, logc;
   double delta_aic = 0.0;   // aic(log) - aic(power), negative favours log corrections
   std::string preferred;
};

G1Comparison compare_g1(std::vector<double> const& L, std::vector<double> const& logG,
                        std::vector<double> const& sigma, std::optional<double> x1_fixed);

} // namespace thetalab
