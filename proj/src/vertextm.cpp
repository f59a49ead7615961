#include "thetalab/vertextm.hpp"
#include "thetalab/error.hpp"
#include <algorithm>
#include <cmath>
#include <numbers>

namespace thetalab
{

using std::numbers::pi;

namespace
{

using Mat3 = Eigen::Matrix<cplx, 3, 3>;

cplx qint(int n, cplx Q)
{
   return (std::pow(Q, n) - std::pow(Q, -n)) / (Q - 1.0 / Q);
}

Mat9 kron(Mat3 const& A, Mat3 const& B)
{
   Mat9 K;
   for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
         for (int c = 0; c < 3; ++c)
            for (int d = 0; d < 3; ++d)
               K(3 * a + c, 3 * b + d) = A(a, b) * B(c, d);
   return K;
}

} // namespace

std::array<Mat9, 3> ik_projectors(double gamma)
{
   cplx Q = std::exp(cplx(0, gamma / 2));
   Mat3 E = Mat3::Zero(), F = Mat3::Zero(), K = Mat3::Zero(), Kh = Mat3::Zero(), Khi = Mat3::Zero();
   int ms[3] = {1, 0, -1};
   for (int a = 0; a < 3; ++a)
   {
      int m = ms[a];
      K(a, a) = std::pow(Q, 2 * m);
      Kh(a, a) = std::pow(Q, m);
      Khi(a, a) = std::pow(Q, -m);
      if (m < 1) E(a - 1, a) = std::sqrt(qint(1 - m, Q) * qint(2 + m, Q));
      if (m > -1) F(a + 1, a) = std::sqrt(qint(1 + m, Q) * qint(2 - m, Q));
   }
   Mat9 DE = kron(E, Kh) + kron(Khi, E);
   Mat9 DF = kron(F, Kh) + kron(Khi, F);
   Mat9 DK = kron(K, K);
   cplx d = Q - 1.0 / Q;
   Mat9 C = DF * DE + (Q * DK + (1.0 / Q) * DK.inverse()) / (d * d);
   cplx cj[3];
   for (int j = 0; j < 3; ++j)
      cj[j] = (std::pow(Q, 2 * j + 1) + std::pow(Q, -(2 * j + 1))) / (d * d);
   std::array<Mat9, 3> P;
   for (int s = 0; s < 3; ++s)
   {
      P[s] = Mat9::Identity();
      for (int t = 0; t < 3; ++t)
         if (t != s)
            P[s] = P[s] * (C - cj[t] * Mat9::Identity()) / (cj[s] - cj[t]);
   }
   return P;
}

IKRMatrix build_rmatrix(double gamma, cplx x)
{
   CrossingParameter g(gamma);
   cplx qq = std::exp(cplx(0, gamma / 2));
   cplx q = qq * qq;
   cplx d1 = std::pow(qq, 4) - x, d2 = std::pow(qq, 6) + x;
   if (std::abs(d1) < 1e-13 || std::abs(d2) < 1e-13 || std::abs(x) < 1e-13)
      throw SingularParametrization("IK R-matrix singular at this spectral value");
   double norm = 2 * (std::sin(gamma / 2) - std::sin(5 * gamma / 2));
   if (std::abs(norm) < 1e-13)
      throw SingularParametrization("IK normalization vanishes at this gamma");
   auto P = ik_projectors(gamma);
   Mat9 R2 = P[2] + (std::pow(qq, 4) * x - 1.0) / d1 * P[1] + (std::pow(qq, 6) * x + 1.0) / d2 * P[0];
   cplx gm = cplx(0, 1) * (q * q - x) * (q * q * q + x) / (x * std::pow(q, 2.5));
   IKRMatrix r;
   r.gamma = gamma;
   r.x = x;
   r.R = gm * R2 / norm;
   return r;
}

double ybe_residual(double gamma, cplx x, cplx y)
{
   using Mat27 = Eigen::Matrix<cplx, 27, 27>;
   auto R12 = [&](cplx z) {
      Mat9 R = build_rmatrix(gamma, z).R;
      Mat27 M = Mat27::Zero();
      for (int a = 0; a < 9; ++a)
         for (int b = 0; b < 9; ++b)
            for (int c = 0; c < 3; ++c)
               M(3 * a + c, 3 * b + c) = R(a, b);
      return M;
   };
   auto R23 = [&](cplx z) {
      Mat9 R = build_rmatrix(gamma, z).R;
      Mat27 M = Mat27::Zero();
      for (int c = 0; c < 3; ++c)
         for (int a = 0; a < 9; ++a)
            for (int b = 0; b < 9; ++b)
               M(9 * c + a, 9 * c + b) = R(a, b);
      return M;
   };
   Mat27 A = R12(x) * R23(x * y) * R12(y);
   Mat27 B = R23(y) * R12(x * y) * R23(x);
   // relative: the normalization grows without bound near sin(gamma/2) = sin(5 gamma/2)
   return (A - B).cwiseAbs().maxCoeff() / std::max(1.0, A.cwiseAbs().maxCoeff());
}

std::uint64_t magnetisation_dimension(int L, int m)
{
   std::vector<std::uint64_t> c(2 * L + 1, 0), n(2 * L + 1);
   c[L] = 1;
   for (int i = 0; i < L; ++i)
   {
      std::fill(n.begin(), n.end(), 0);
      for (int k = 0; k <= 2 * L; ++k)
         if (c[k])
            for (int d = -1; d <= 1; ++d)
               if (k + d >= 0 && k + d <= 2 * L) n[k + d] += c[k];
      std::swap(c, n);
   }
   if (m < -L || m > L) return 0;
   return c[m + L];
}

VertexTransfer::VertexTransfer(IKRMatrix const& R, int L, int m, double phi) : L_(L), m_(m), phi_(phi)
{
   if (L < 1 || L > 16)
      throw DomainError("vertex transfer matrix needs 1 <= L <= 16");
   pow3_.resize(L + 1);
   pow3_[0] = 1;
   for (int i = 0; i < L; ++i) pow3_[i + 1] = 3 * pow3_[i];
   index_.assign(pow3_[L], -1);
   for (std::uint32_t s = 0; s < pow3_[L]; ++s)
   {
      int tot = 0;
      for (std::uint32_t t = s, k = 0; k < std::uint32_t(L); ++k, t /= 3) tot += 1 - int(t % 3);
      if (tot == m)
      {
         index_[s] = std::int64_t(states_.size());
         states_.push_back(s);
      }
   }
   for (int h = 0; h < 3; ++h)
      for (int in = 0; in < 3; ++in)
         for (int out = 0; out < 3; ++out)
            for (int e = 0; e < 3; ++e)
            {
               cplx w = R.R(3 * out + e, 3 * h + in);
               if (std::abs(w) > 1e-15)
                  moves_[3 * h + in].push_back({std::uint8_t(out), std::uint8_t(e), w});
            }
}

void VertexTransfer::apply(cplx const* x, cplx* y) const
{
   std::size_t N = pow3_[L_];
   // layout [h0][h][s]
   std::vector<cplx> a(9 * N, 0.0), b(9 * N);
   for (std::size_t k = 0; k < states_.size(); ++k)
      for (int h0 = 0; h0 < 3; ++h0)
         a[(3 * h0 + h0) * N + states_[k]] = x[k];
   for (int i = 0; i < L_; ++i)
   {
      std::fill(b.begin(), b.end(), cplx(0));
      std::uint32_t p = pow3_[i];
      for (int h0 = 0; h0 < 3; ++h0)
         for (int h = 0; h < 3; ++h)
         {
            cplx const* src = &a[(3 * h0 + h) * N];
            for (std::size_t s = 0; s < N; ++s)
            {
               cplx v = src[s];
               if (v == cplx(0)) continue;
               int d = int((s / p) % 3);
               std::size_t base = s - std::size_t(d) * p;
               for (auto const& mv : moves_[3 * h + d])
                  b[(3 * h0 + mv.h) * N + base + std::size_t(mv.out) * p] += mv.w * v;
            }
         }
      std::swap(a, b);
   }
   for (std::size_t k = 0; k < states_.size(); ++k)
   {
      cplx acc = 0;
      for (int h0 = 0; h0 < 3; ++h0)
         acc += std::exp(cplx(0, phi_ * (1 - h0))) * a[(3 * h0 + h0) * N + states_[k]];
      y[k] = acc;
   }
}

Eigen::MatrixXcd VertexTransfer::dense() const
{
   std::size_t n = dim();
   Eigen::MatrixXcd T(n, n);
   std::vector<cplx> e(n, 0.0), y(n);
   for (std::size_t i = 0; i < n; ++i)
   {
      e[i] = 1;
      apply(e.data(), y.data());
      e[i] = 0;
      for (std::size_t j = 0; j < n; ++j) T(j, i) = y[j];
   }
   return T;
}

Eigenpacket transfer_spectrum(int L, int m, double phi, double gamma, cplx x, int count)
{
   VertexTransfer vt(build_rmatrix(gamma, x), L, m, phi);
   Eigenpacket ep;
   ep.L = L;
   ep.ell = m;
   ep.twist = TwistSetting::from_phi(phi);
   if (count < 0 || vt.dim() <= 400)
   {
      if (L > 8 && count < 0)
         throw ResourceError("dense vertex spectra are limited to L <= 8");
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(vt.dense(), false);
      std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + vt.dim());
      std::sort(ev.begin(), ev.end(), detail::ritz_before);
      if (count >= 0 && ev.size() > std::size_t(count)) ev.resize(count);
      ep.values = ev;
      ep.residuals.assign(ev.size(), 0.0);
      ep.converged = true;
   }
   else
   {
      KrylovOptions opt;
      opt.nev = count;
      std::function<void(cplx const*, cplx*)> A = [&](cplx const* a, cplx* b) { vt.apply(a, b); };
      auto r = krylov_schur<cplx>(A, Eigen::Index(vt.dim()), opt);
      ep.values = r.values;
      ep.residuals = r.residuals;
      ep.converged = r.converged;
      ep.matvecs = r.matvecs;
   }
   for (std::size_t j = 0; j < ep.values.size(); ++j)
      ep.labels.emplace_back(m, int(j));
   return ep;
}

Regime regime_of(double gamma, Branch b)
{
   CrossingParameter g(gamma);
   if (b == Branch::Plus) return Regime::I;
   if (b == Branch::None) throw DomainError("no spectral branch");
   if (std::abs(gamma - pi / 3) < 1e-14) return Regime::Boundary;
   return gamma < pi / 3 ? Regime::III : Regime::II;
}

char const* regime_name(Regime r)
{
   switch (r)
   {
      case Regime::I: return "I";
      case Regime::II: return "II";
      case Regime::III: return "III";
      case Regime::Boundary: return "boundary";
   }
   return "?";
}

CrosscheckResult loop_vertex_crosscheck(double gamma, Branch b, int L, int ell, double phi)
{
   auto [up, um] = isotropic_points(gamma);
   cplx u = b == Branch::Plus ? up : um;
   VertexWeights w = zb_weights(CrossingParameter(gamma), u);
   TwistSetting tw = ell == 0 ? TwistSetting::from_phi(phi) : TwistSetting::from_phi(0.0);
   RowOperator op(w, L, ell, tw);
   Eigen::MatrixXd T = op.dense() * std::pow(w.scale, L);
   Eigen::VectorXcd le = T.eigenvalues();
   auto vs = transfer_spectrum(L, ell, ell == 0 ? phi : 0.0, gamma, std::exp(2.0 * u));
   CrosscheckResult r;
   r.loop_levels = int(le.size());
   r.vertex_levels = int(vs.values.size());
   for (auto z : le)
   {
      double best = 1e300;
      for (auto v : vs.values) best = std::min(best, std::abs(z - v));
      r.max_mismatch = std::max(r.max_mismatch, best);
   }
   return r;
}

} // namespace thetalab
