#pragma once
// Krylov-Schur (thick restarted Arnoldi) for a few eigenvalues of largest real part
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace thetalab
{

struct KrylovOptions
{
   int nev = 1;
   int ncv = 0;              // 0 = automatic
   double tol = 1e-10;
   int max_matvec = 10000;
   std::uint64_t seed = 0x5eed;
   int dense_below = 300;    // dimension below which a dense solve is used
   bool want_vectors = false;
};

template <class Scalar>
struct KrylovResult
{
   std::vector<std::complex<double>> values;   // descending real part
   std::vector<double> residuals;              // relative Ritz residuals
   Eigen::MatrixXcd vectors;                   // columns, if requested
   bool converged = false;
   int matvecs = 0;
   int restarts = 0;
};

namespace detail
{

using cd = std::complex<double>;

inline bool ritz_before(cd a, cd b)
{
   if (a.real() != b.real()) return a.real() > b.real();
   return a.imag() > b.imag();
}

// [c s; -conj(s) c] [f; g] = [r; 0]
inline void lartg(cd f, cd g, double& c, cd& s)
{
   double fa = std::abs(f), ga = std::abs(g);
   if (ga == 0) { c = 1; s = 0; return; }
   if (fa == 0) { c = 0; s = std::conj(g) / ga; return; }
   double nrm = std::hypot(fa, ga);
   c = fa / nrm;
   s = (f / fa) * std::conj(g) / nrm;
}

// swap diagonal entries k, k+1 of the complex Schur form T with vectors U
inline void schur_swap(Eigen::MatrixXcd& T, Eigen::MatrixXcd& U, int k)
{
   int n = int(T.rows());
   cd t11 = T(k, k), t22 = T(k + 1, k + 1);
   double c;
   cd s;
   lartg(T(k, k + 1), t22 - t11, c, s);
   for (int j = k + 2; j < n; ++j)
   {
      cd x = T(k, j), y = T(k + 1, j);
      T(k, j) = c * x + s * y;
      T(k + 1, j) = c * y - std::conj(s) * x;
   }
   for (int i = 0; i < k; ++i)
   {
      cd x = T(i, k), y = T(i, k + 1);
      T(i, k) = c * x + std::conj(s) * y;
      T(i, k + 1) = c * y - s * x;
   }
   T(k, k) = t22;
   T(k + 1, k + 1) = t11;
   for (int i = 0; i < n; ++i)
   {
      cd x = U(i, k), y = U(i, k + 1);
      U(i, k) = c * x + std::conj(s) * y;
      U(i, k + 1) = c * y - s * x;
   }
}

// order the first `count` diagonal entries by descending real part
inline void schur_sort(Eigen::MatrixXcd& T, Eigen::MatrixXcd& U, int count)
{
   int n = int(T.rows());
   for (int p = 0; p < count && p < n; ++p)
   {
      int best = p;
      for (int j = p + 1; j < n; ++j)
         if (ritz_before(T(j, j), T(best, best)))
            best = j;
      for (int j = best - 1; j >= p; --j)
         schur_swap(T, U, j);
   }
}

// eigenvector of the leading i+1 block of upper triangular T for T(i,i)
inline Eigen::VectorXcd triangular_eigvec(Eigen::MatrixXcd const& T, int i)
{
   Eigen::VectorXcd z = Eigen::VectorXcd::Zero(T.rows());
   z(i) = 1;
   cd lam = T(i, i);
   double scale = std::max(T.norm(), 1e-300);
   for (int r = i - 1; r >= 0; --r)
   {
      cd acc = 0;
      for (int c = r + 1; c <= i; ++c)
         acc += T(r, c) * z(c);
      cd d = T(r, r) - lam;
      if (std::abs(d) < 1e-14 * scale)
         d = 1e-14 * scale;
      z(r) = -acc / d;
   }
   return z / z.norm();
}

template <class Scalar>
inline double real_part(Scalar x) { return std::real(x); }

} // namespace detail

// apply(x, y): y = A x, both of length n.  project(v): optional in-place projector
// commuting with A (e.g. zero momentum), applied to every new vector.
template <class Scalar>
KrylovResult<Scalar> krylov_schur(std::function<void(Scalar const*, Scalar*)> const& apply, Eigen::Index n,
                                  KrylovOptions opt,
                                  std::function<void(Scalar*)> const& project = nullptr)
{
   using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
   using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
   using cd = std::complex<double>;
   constexpr bool is_real = !Eigen::NumTraits<Scalar>::IsComplex;

   KrylovResult<Scalar> res;
   int nev = std::max(1, std::min<int>(opt.nev, int(n)));

   if (n <= opt.dense_below)
   {
      Mat A(n, n);
      Vec e(n), y(n);
      for (Eigen::Index i = 0; i < n; ++i)
      {
         e.setZero();
         e(i) = 1;
         if (project) project(e.data());
         apply(e.data(), y.data());
         A.col(i) = y;
      }
      res.matvecs = int(n);
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A.template cast<cd>(), opt.want_vectors);
      std::vector<int> idx(n);
      for (int i = 0; i < n; ++i) idx[i] = i;
      std::sort(idx.begin(), idx.end(),
                [&](int a, int b) { return detail::ritz_before(es.eigenvalues()(a), es.eigenvalues()(b)); });
      if (opt.want_vectors) res.vectors.resize(n, nev);
      for (int k = 0; k < nev; ++k)
      {
         res.values.push_back(es.eigenvalues()(idx[k]));
         res.residuals.push_back(0.0);
         if (opt.want_vectors) res.vectors.col(k) = es.eigenvectors().col(idx[k]);
      }
      res.converged = true;
      return res;
   }

   int m = opt.ncv > 0 ? opt.ncv : std::max(2 * nev + 10, 24);
   m = std::min<int>(m, int(n) - 1);
   if (m <= nev + 1) m = std::min<int>(int(n) - 1, nev + 2);

   Mat V(n, m + 1);
   Mat H = Mat::Zero(m + 1, m);
   {
      std::mt19937_64 rng(opt.seed);
      std::uniform_real_distribution<double> U(-1.0, 1.0);
      Vec v0(n);
      for (Eigen::Index i = 0; i < n; ++i)
         v0(i) = Scalar(1.0 + 0.25 * U(rng));
      if (project) project(v0.data());
      V.col(0) = v0 / v0.norm();
   }

   int k = 0;
   Vec w(n), h, h2;
   for (;;)
   {
      int mcur = m;
      bool invariant = false;
      for (int j = k; j < m; ++j)
      {
         apply(V.col(j).data(), w.data());
         ++res.matvecs;
         if (project) project(w.data());
         double wn0 = w.norm();
         h = V.leftCols(j + 1).adjoint() * w;
         w.noalias() -= V.leftCols(j + 1) * h;
         h2 = V.leftCols(j + 1).adjoint() * w;
         w.noalias() -= V.leftCols(j + 1) * h2;
         h += h2;
         H.col(j).head(j + 1) = h;
         double beta = w.norm();
         if (!std::isfinite(beta))
            throw std::runtime_error("non-finite vector in Krylov iteration");
         if (beta <= 1e-13 * std::max(wn0, 1e-300))
         {
            H(j + 1, j) = 0;
            mcur = j + 1;
            invariant = true;
            break;
         }
         H(j + 1, j) = beta;
         V.col(j + 1) = w / beta;
      }

      Eigen::MatrixXcd Hm = H.topLeftCorner(mcur, mcur).template cast<cd>();
      Eigen::RowVectorXcd b = H.row(mcur).head(mcur).template cast<cd>();
      if (invariant) b.setZero();
      Eigen::ComplexSchur<Eigen::MatrixXcd> cs(Hm);
      Eigen::MatrixXcd T = cs.matrixT(), Q = cs.matrixU();
      int want = std::min(nev, mcur);
      int keep = std::min(mcur - 1, nev + (mcur - nev) / 2);
      if (keep < want) keep = want;
      detail::schur_sort(T, Q, std::min(mcur, keep + 1));

      std::vector<cd> theta(want);
      std::vector<double> resid(want);
      bool conv = true;
      for (int i = 0; i < want; ++i)
      {
         theta[i] = T(i, i);
         Eigen::VectorXcd y = Q * detail::triangular_eigvec(T, i);
         double r = std::abs((b * y).value());
         resid[i] = r / std::max(std::abs(theta[i]), 1e-300);
         if (resid[i] > opt.tol) conv = false;
      }
      bool stop = conv || invariant || res.matvecs >= opt.max_matvec;
      if (stop)
      {
         res.values = theta;
         res.residuals = resid;
         res.converged = conv || invariant;
         if (opt.want_vectors)
         {
            res.vectors.resize(n, want);
            for (int i = 0; i < want; ++i)
            {
               Eigen::VectorXcd y = Q * detail::triangular_eigvec(T, i);
               res.vectors.col(i) = V.leftCols(mcur).template cast<cd>() * y;
               res.vectors.col(i) /= res.vectors.col(i).norm();
            }
         }
         return res;
      }

      ++res.restarts;
      Mat Y;
      if constexpr (is_real)
      {
         // keep conjugate pairs together
         if (keep < mcur && std::abs(T(keep - 1, keep - 1).imag()) > 1e-12 * std::abs(T(keep - 1, keep - 1)))
         {
            int partners = 0;
            for (int i = 0; i < keep; ++i)
               if (std::abs(T(i, i) - std::conj(T(keep - 1, keep - 1))) < 1e-10 * std::abs(T(i, i)))
                  ++partners;
            if (partners == 0)
               keep = (keep + 1 < mcur) ? keep + 1 : keep - 1;
            detail::schur_sort(T, Q, std::min(mcur, keep + 1));
         }
         Eigen::MatrixXd Z(mcur, 2 * keep);
         Z << Q.leftCols(keep).real(), Q.leftCols(keep).imag();
         Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeThinU);
         Y = svd.matrixU().leftCols(keep);
      }
      else
      {
         Y = Q.leftCols(keep);
      }
      Mat Hk = Y.adjoint() * H.topLeftCorner(mcur, mcur) * Y;
      Mat bk = H.row(mcur).head(mcur) * Y;
      Mat Vk = V.leftCols(mcur) * Y;
      V.leftCols(keep) = Vk;
      V.col(keep) = V.col(mcur);
      H.setZero();
      H.topLeftCorner(keep, keep) = Hk;
      H.row(keep).head(keep) = bk;
      k = keep;
   }
}

} // namespace thetalab
