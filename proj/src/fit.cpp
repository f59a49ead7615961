#include "thetalab/fit.hpp"
#include "thetalab/error.hpp"
#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>
#include <cmath>
#include <limits>

namespace thetalab::fit
{

namespace
{

struct Residuals
{
   using Scalar = double;
   using InputType = Eigen::VectorXd;
   using ValueType = Eigen::VectorXd;
   using JacobianType = Eigen::MatrixXd;
   enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

   Model const* model;
   std::vector<double> const *x, *y;
   std::vector<double> w;
   int np;

   int inputs() const { return np; }
   int values() const { return int(x->size()); }

   int operator()(Eigen::VectorXd const& p, Eigen::VectorXd& r) const
   {
      for (std::size_t i = 0; i < x->size(); ++i)
         r[i] = ((*model)((*x)[i], p) - (*y)[i]) * w[i];
      return 0;
   }
};

void fill_covariance(LsqResult& res, Eigen::MatrixXd const& J, bool weighted)
{
   int k = int(res.params.size());
   Eigen::MatrixXd JtJ = J.transpose() * J;
   Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(JtJ);
   res.covariance = cod.pseudoInverse();
   if (!weighted && res.dof > 0)
      res.covariance *= res.chi2 / res.dof;
   res.errors.resize(k);
   for (int i = 0; i < k; ++i)
      res.errors[i] = std::sqrt(std::max(0.0, res.covariance(i, i)));
}

} // namespace

LsqResult levenberg_marquardt(Model const& model, std::vector<double> const& x,
                              std::vector<double> const& y, std::vector<double> const& sigma,
                              Eigen::VectorXd p0)
{
   if (x.size() != y.size()) throw ValidationError("x and y differ in length");
   if (!sigma.empty() && sigma.size() != x.size()) throw ValidationError("sigma has wrong length");
   int n = int(x.size()), k = int(p0.size());
   if (n < k) throw ValidationError("fewer data points than parameters");

   Residuals f{&model, &x, &y, std::vector<double>(n, 1.0), k};
   for (int i = 0; i < n && !sigma.empty(); ++i)
   {
      if (!(sigma[i] > 0)) throw ValidationError("sigma must be positive");
      f.w[i] = 1 / sigma[i];
   }
   Eigen::NumericalDiff<Residuals, Eigen::Central> nd(f);
   Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residuals, Eigen::Central>> lm(nd);
   lm.parameters.ftol = 1e-15;
   lm.parameters.xtol = 1e-15;
   lm.parameters.maxfev = 4000 * (k + 1);
   auto status = lm.minimize(p0);

   LsqResult res;
   res.params = p0;
   res.iterations = int(lm.iter);
   using S = Eigen::LevenbergMarquardtSpace::Status;
   res.converged = status != S::ImproperInputParameters && status != S::TooManyFunctionEvaluation &&
                   p0.allFinite();
   Eigen::VectorXd r(n);
   f(p0, r);
   res.chi2 = r.squaredNorm();
   res.dof = n - k;
   Eigen::MatrixXd J(n, k);
   nd.df(p0, J);
   fill_covariance(res, J, !sigma.empty());
   return res;
}

LsqResult linear_lsq(Eigen::MatrixXd const& A, Eigen::VectorXd const& y, Eigen::VectorXd const& sigma)
{
   if (A.rows() != y.size()) throw ValidationError("design matrix and data differ in length");
   if (A.rows() < A.cols()) throw ValidationError("fewer data points than parameters");
   Eigen::VectorXd w = Eigen::VectorXd::Ones(y.size());
   bool weighted = sigma.size() > 0;
   if (weighted)
   {
      if (sigma.size() != y.size()) throw ValidationError("sigma has wrong length");
      w = sigma.cwiseInverse();
   }
   Eigen::MatrixXd Aw = w.asDiagonal() * A;
   Eigen::VectorXd yw = w.cwiseProduct(y);
   LsqResult res;
   res.params = Aw.colPivHouseholderQr().solve(yw);
   res.chi2 = (Aw * res.params - yw).squaredNorm();
   res.dof = int(A.rows() - A.cols());
   res.converged = res.params.allFinite();
   fill_covariance(res, Aw, weighted);
   return res;
}

LsqResult polyfit(std::vector<double> const& x, std::vector<double> const& y, int degree)
{
   if (x.size() != y.size()) throw ValidationError("x and y differ in length");
   Eigen::MatrixXd A(x.size(), degree + 1);
   Eigen::VectorXd v(y.size());
   for (std::size_t i = 0; i < x.size(); ++i)
   {
      double t = 1;
      for (int d = 0; d <= degree; ++d, t *= x[i])
         A(i, d) = t;
      v[i] = y[i];
   }
   return linear_lsq(A, v);
}

double aic(double chi2, int n, int k, bool weighted)
{
   if (weighted) return chi2 + 2 * k;
   double rss = std::max(chi2, std::numeric_limits<double>::min());
   return n * std::log(rss / n) + 2 * k;
}

Extrapolation algebraic_tail(std::vector<double> const& L, std::vector<double> const& v)
{
   if (L.size() != v.size()) throw ValidationError("L and v differ in length");
   int n = int(L.size());
   if (n < 3) throw ValidationError("algebraic tail needs at least 3 points");

   Extrapolation e;
   double scale = 0;
   for (double t : v) scale = std::max(scale, std::abs(t));
   double d1 = v[n - 2] - v[n - 3], d2 = v[n - 1] - v[n - 2];
   if (std::abs(d1) <= 1e-14 * std::max(1.0, scale) && std::abs(d2) <= 1e-14 * std::max(1.0, scale))
   {
      e.value = v[n - 1];
      e.converged = true;
      return e;
   }

   // exact solve through the last three points
   double L1 = L[n - 3], L2 = L[n - 2], L3 = L[n - 1];
   double ratio = d1 / d2;
   auto g = [&](double w) {
      double a = std::pow(L1, -w), b = std::pow(L2, -w), c = std::pow(L3, -w);
      return (a - b) / (b - c) - ratio;
   };
   // exponents below omega_min make the amplitude and the limit blow up together; not trusted
   constexpr double omega_min = 0.2;
   double lo = omega_min, hi = 40;
   if (!(d1 * d2 > 0) || g(lo) * g(hi) > 0)
   {
      e.value = v[n - 1];
      e.spread = std::abs(d2);
      return e;
   }
   boost::uintmax_t iters = 200;
   auto [a, b] = boost::math::tools::toms748_solve(
       g, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
   double w = 0.5 * (a + b);
   double amp = d2 / (std::pow(L3, -w) - std::pow(L2, -w));
   double vinf = v[n - 1] - amp * std::pow(L3, -w);

   if (n > 3)
   {
      Model m = [](double x, Eigen::VectorXd const& p) { return p[0] + p[1] * std::pow(x, -p[2]); };
      Eigen::VectorXd p0(3);
      p0 << vinf, amp, w;
      auto r = levenberg_marquardt(m, L, v, {}, p0);
      if (r.converged && r.params[2] >= omega_min)
      {
         vinf = r.params[0];
         amp = r.params[1];
         w = r.params[2];
      }
   }
   e.value = vinf;
   e.amplitude = amp;
   e.omega = w;
   e.spread = std::abs(vinf - v[n - 1]);
   e.converged = std::isfinite(vinf);
   return e;
}

} // namespace thetalab::fit
