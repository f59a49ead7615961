#pragma once
#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace thetalab::fit
{

using Model = std::function<double(double x, Eigen::VectorXd const& p)>;

struct LsqResult
{
   Eigen::VectorXd params;
   Eigen::VectorXd errors;       // sqrt(diag cov), scaled by chi2/dof when sigmas are absent
   Eigen::MatrixXd covariance;
   double chi2 = 0.0;            // weighted sum of squared residuals
   int dof = 0;
   int iterations = 0;
   bool converged = false;
};

// y ~ model(x, p); sigma may be empty (unit weights)
LsqResult levenberg_marquardt(Model const& model, std::vector<double> const& x,
                              std::vector<double> const& y, std::vector<double> const& sigma,
                              Eigen::VectorXd p0);

// weighted linear least squares, design A (n x k)
LsqResult linear_lsq(Eigen::MatrixXd const& A, Eigen::VectorXd const& y,
                     Eigen::VectorXd const& sigma = {});

// coefficients c_0 + c_1 x + ... + c_d x^d
LsqResult polyfit(std::vector<double> const& x, std::vector<double> const& y, int degree);

// Akaike criterion from an unweighted fit: n log(RSS/n) + 2k, or chi2 + 2k with sigmas
double aic(double chi2, int n, int k, bool weighted);

struct Extrapolation
{
   double value = 0.0;
   double amplitude = 0.0;
   double omega = 0.0;
   double spread = 0.0;   // |value - last data point|
   bool converged = false;
};

// v(L) = v_inf + a L^-omega, omega fitted
Extrapolation algebraic_tail(std::vector<double> const& L, std::vector<double> const& v);

} // namespace thetalab::fit
