#include "thetalab/looptm.hpp"
#include "thetalab/error.hpp"
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numeric>
#ifdef _OPENMP
#include <omp.h>
#endif

namespace thetalab
{

int configure_threads()
{
   static int n = [] {
      int t = 1;
#ifdef _OPENMP
      t = omp_get_max_threads();
      if (char const* e = std::getenv("THETALAB_THREADS"))
      {
         int v = std::atoi(e);
         if (v > 0) t = v;
      }
      omp_set_num_threads(t);
#endif
      return t;
   }();
   return n;
}

namespace
{

constexpr int kEmptyP = -1, kLegP = -2;

struct Frame
{
   int M;
   std::int8_t P[max_sites]{};
   std::uint8_t Q[max_sites]{};

   void decode(Code c, int m)
   {
      M = m;
      int stack[max_sites], sp = 0, closers[max_sites], nc = 0;
      for (int i = 0; i < M; ++i)
      {
         P[i] = kEmptyP;
         Q[i] = 0;
         switch (site(c, i))
         {
            case kLeg: P[i] = kLegP; break;
            case kOpen: stack[sp++] = i; break;
            case kClose:
               if (sp > 0) arc(stack[--sp], i, 0);
               else closers[nc++] = i;
               break;
            default: break;
         }
      }
      for (int k = 0; k < nc; ++k)
         arc(closers[k], stack[sp - 1 - k], 1);
   }

   void arc(int a, int b, int par)
   {
      P[a] = std::int8_t(b);
      P[b] = std::int8_t(a);
      Q[a] = Q[b] = std::uint8_t(par);
   }

   Code encode() const
   {
      Code c = 0;
      for (int i = 0; i < M; ++i)
      {
         unsigned s;
         if (P[i] == kEmptyP) s = kEmpty;
         else if (P[i] == kLegP) s = kLeg;
         else s = ((i < P[i]) != bool(Q[i])) ? kOpen : kClose;
         c |= Code(s) << (2 * i);
      }
      return c;
   }

   bool occ(int i) const { return P[i] != kEmptyP; }

   // strand at a moves to the empty position b
   void move(int a, int b)
   {
      int x = P[a];
      P[b] = std::int8_t(x);
      Q[b] = Q[a];
      if (x >= 0) P[x] = std::int8_t(b);
      P[a] = kEmptyP;
      Q[a] = 0;
   }

   // join the strands ending at a and b; returns closure kind or -1 (legs contracted)
   int join(int a, int b, int extra)
   {
      int pa = P[a], pb = P[b];
      int qa = Q[a], qb = Q[b];
      P[a] = P[b] = kEmptyP;
      Q[a] = Q[b] = 0;
      if (pa == b)
         return 1 + (qa ^ extra);
      if (pa == kLegP && pb == kLegP)
         return -1;
      if (pa == kLegP)
      {
         P[pb] = kLegP;
         Q[pb] = 0;
         return 0;
      }
      if (pb == kLegP)
      {
         P[pa] = kLegP;
         Q[pa] = 0;
         return 0;
      }
      arc(pa, pb, qa ^ qb ^ extra);
      return 0;
   }
};

struct Out
{
   Code code;
   int kind;
};

// all images of a frame under the vertex at positions (h, h+1)
int vertex_images(Code c, int M, int h, Out* out)
{
   Frame f;
   f.decode(c, M);
   bool W = f.occ(h), S = f.occ(h + 1);
   int n = 0;
   auto emit = [&](Frame const& g, int type, int cl) { out[n++] = {g.encode(), 3 * (type - 1) + cl}; };
   if (!W && !S)
   {
      emit(f, 1, 0);
      Frame g = f;
      g.arc(h, h + 1, 0);
      emit(g, 5, 0);
   }
   else if (W && !S)
   {
      emit(f, 2, 0);
      Frame g = f;
      g.move(h, h + 1);
      emit(g, 6, 0);
   }
   else if (!W && S)
   {
      emit(f, 3, 0);
      Frame g = f;
      g.move(h + 1, h);
      emit(g, 7, 0);
   }
   else
   {
      emit(f, 8, 0);
      Frame g = f;
      int cl = g.join(h, h + 1, 0);
      if (cl >= 0)
      {
         emit(g, 4, cl);
         g.arc(h, h + 1, 0);
         emit(g, 9, cl);
      }
   }
   return n;
}

// glue the last horizontal edge to the seam edge; returns false if impossible
bool seam_image(Code c, int M, Out& out)
{
   Frame f;
   f.decode(c, M);
   int H = M - 1;
   bool a = f.occ(0), b = f.occ(H);
   if (a != b) return false;
   int cl = 0;
   if (a)
   {
      cl = f.join(H, 0, 1);
      if (cl < 0) return false;
   }
   Code full = f.encode();
   out = {(full >> 2) & ((Code(1) << (2 * (M - 2))) - 1), 27 + cl};
   return true;
}

Code strip_parity(Code c, int L)
{
   // disk: rewrite as linearly matched brackets
   LinkPattern p = decode(c, L);
   std::fill(p.parity.begin(), p.parity.end(), 0);
   Code r = 0;
   for (int i = 0; i < L; ++i)
   {
      int q = p.partner[i];
      unsigned s = q == LinkPattern::empty ? kEmpty : q == LinkPattern::leg ? kLeg : (i < q ? kOpen : kClose);
      r |= Code(s) << (2 * i);
   }
   return r;
}

template <class F>
RowStructure::Step make_step(std::size_t n_src, F&& images, std::vector<Code>& out_codes, bool given_targets)
{
   RowStructure::Step st;
   Out buf[4];
   if (!given_targets)
   {
      out_codes.clear();
      out_codes.reserve(n_src * 2);
      for (std::size_t s = 0; s < n_src; ++s)
      {
         int n = images(s, buf);
         for (int k = 0; k < n; ++k)
            out_codes.push_back(buf[k].code);
      }
      std::sort(out_codes.begin(), out_codes.end());
      out_codes.erase(std::unique(out_codes.begin(), out_codes.end()), out_codes.end());
   }
   st.n_out = out_codes.size();
   std::vector<std::uint32_t> tgt;
   std::vector<std::uint8_t> knd;
   std::vector<std::uint32_t> srcs;
   tgt.reserve(n_src * 2);
   for (std::size_t s = 0; s < n_src; ++s)
   {
      int n = images(s, buf);
      for (int k = 0; k < n; ++k)
      {
         auto it = std::lower_bound(out_codes.begin(), out_codes.end(), buf[k].code);
         if (it == out_codes.end() || *it != buf[k].code)
            throw std::logic_error("row image outside the target space");
         tgt.push_back(std::uint32_t(it - out_codes.begin()));
         knd.push_back(std::uint8_t(buf[k].kind));
         srcs.push_back(std::uint32_t(s));
      }
   }
   if (tgt.size() >= (std::size_t(1) << 32))
      throw ResourceError("too many transitions for 32-bit offsets");
   st.offset.assign(st.n_out + 1, 0);
   for (auto t : tgt) ++st.offset[t + 1];
   for (std::size_t t = 0; t < st.n_out; ++t) st.offset[t + 1] += st.offset[t];
   st.src.resize(tgt.size());
   st.kind.resize(tgt.size());
   std::vector<std::uint32_t> pos(st.offset.begin(), st.offset.end() - 1);
   for (std::size_t e = 0; e < tgt.size(); ++e)
   {
      auto p = pos[tgt[e]]++;
      st.src[p] = srcs[e];
      st.kind[p] = knd[e];
   }
   return st;
}

} // namespace

std::shared_ptr<RowStructure> RowStructure::build(int L, int ell, Topology topo)
{
   if (L + 2 > max_sites)
      throw ResourceError("L too large for frame codes");
   auto rs = std::make_shared<RowStructure>();
   rs->basis = enumerate(L, ell, topo);
   if (rs->basis.empty)
      throw DomainError("empty sector L=" + std::to_string(L) + " ell=" + std::to_string(ell));
   bool disk = topo == Topology::Disk && ell == 0;
   int M = L + 2;
   std::vector<Code> prev(2 * rs->basis.size()), cur;
   Code seam_arc = Code(kOpen) | (Code(kClose) << 2);
   for (std::size_t b = 0; b < rs->basis.size(); ++b)
   {
      prev[2 * b] = rs->basis.codes[b] << 4;
      prev[2 * b + 1] = (rs->basis.codes[b] << 4) | seam_arc;
   }
   for (int i = 0; i < L; ++i)
   {
      int h = i + 1;
      auto images = [&](std::size_t s, Out* out) { return vertex_images(prev[s], M, h, out); };
      rs->steps.push_back(make_step(prev.size(), images, cur, false));
      std::swap(prev, cur);
   }
   cur = rs->basis.codes;
   auto closing = [&](std::size_t s, Out* out) {
      if (!seam_image(prev[s], M, out[0])) return 0;
      if (disk) out[0].code = strip_parity(out[0].code, L);
      return 1;
   };
   rs->steps.push_back(make_step(prev.size(), closing, cur, true));

   rs->shift.resize(rs->basis.size());
   for (std::size_t b = 0; b < rs->basis.size(); ++b)
   {
      auto j = rs->basis.index(rotate_code(rs->basis.codes[b], L, topo));
      if (j < 0) throw std::logic_error("translation leaves the sector");
      rs->shift[b] = std::uint32_t(j);
   }
   return rs;
}

std::shared_ptr<RowStructure const> RowStructure::get(int L, int ell, Topology topo)
{
   static std::mutex mu;
   static std::map<std::tuple<int, int, int>, std::weak_ptr<RowStructure const>> cache;
   std::lock_guard<std::mutex> lock(mu);
   auto key = std::make_tuple(L, ell, int(topo));
   if (auto sp = cache[key].lock())
      return sp;
   std::shared_ptr<RowStructure const> sp = build(L, ell, topo);
   cache[key] = sp;
   return sp;
}

std::size_t RowStructure::max_frame() const
{
   std::size_t m = 2 * basis.size();
   for (auto const& s : steps) m = std::max(m, s.n_out);
   return m;
}

std::size_t RowStructure::bytes() const
{
   std::size_t b = basis.codes.size() * sizeof(Code) + shift.size() * 4;
   for (auto const& s : steps)
      b += s.offset.size() * 4 + s.src.size() * 5;
   return b;
}

Topology RowOperator::natural_topology(int ell, double n, double nt)
{
   return (ell == 0 && std::abs(n - nt) > 1e-15) ? Topology::Annulus : Topology::Disk;
}

RowOperator::RowOperator(VertexWeights const& w, int L, int ell, TwistSetting twist)
   : RowOperator(w, L, ell, twist, natural_topology(ell, w.n, twist.n_noncontractible))
{
}

RowOperator::RowOperator(VertexWeights const& w, int L, int ell, TwistSetting twist, Topology topo)
   : w_(w), twist_(twist), L_(L), ell_(ell)
{
   if (topo == Topology::Disk && ell == 0 && std::abs(w.n - twist.n_noncontractible) > 1e-15)
      throw DomainError("disk patterns cannot distinguish non-contractible loops (ñ != n)");
   configure_threads();
   s_ = RowStructure::get(L, ell, topo);
   refresh_table();
}

void RowOperator::set_weights(VertexWeights const& w)
{
   if (s_->basis.topo == Topology::Disk && ell_ == 0 && std::abs(w.n - twist_.n_noncontractible) > 1e-15)
      throw DomainError("disk patterns cannot distinguish non-contractible loops (ñ != n)");
   w_ = w;
   refresh_table();
}

void RowOperator::set_twist(TwistSetting t)
{
   if (s_->basis.topo == Topology::Disk && ell_ == 0 && std::abs(w_.n - t.n_noncontractible) > 1e-15)
      throw DomainError("disk patterns cannot distinguish non-contractible loops (ñ != n)");
   twist_ = t;
   refresh_table();
}

void RowOperator::refresh_table()
{
   double cl[3] = {1.0, w_.n, twist_.n_noncontractible};
   for (int t = 1; t <= 9; ++t)
      for (int c = 0; c < 3; ++c)
         table_[3 * (t - 1) + c] = w_(t) * cl[c];
   for (int c = 0; c < 3; ++c)
      table_[27 + c] = cl[c];
}

void RowOperator::apply(double const* x, double* y) const
{
   auto const& st = *s_;
   std::size_t nb = st.basis.size();
   std::size_t mf = st.max_frame();
   if (buf_a_.size() < mf) buf_a_.resize(mf), buf_b_.resize(mf);
   double* a = buf_a_.data();
   double* b = buf_b_.data();
   for (std::size_t i = 0; i < nb; ++i)
      a[2 * i] = a[2 * i + 1] = x[i];
   double const* tab = table_.data();
   for (std::size_t k = 0; k < st.steps.size(); ++k)
   {
      auto const& s = st.steps[k];
      double* out = (k + 1 == st.steps.size()) ? y : b;
      auto const* off = s.offset.data();
      auto const* src = s.src.data();
      auto const* knd = s.kind.data();
      std::int64_t n = std::int64_t(s.n_out);
#pragma omp parallel for schedule(static)
      for (std::int64_t t = 0; t < n; ++t)
      {
         double acc = 0;
         for (auto e = off[t]; e < off[t + 1]; ++e)
            acc += tab[knd[e]] * a[src[e]];
         out[t] = acc;
      }
      std::swap(a, b);
   }
}

std::vector<double> RowOperator::apply(std::vector<double> const& x) const
{
   if (x.size() != dim())
      throw ValidationError("vector dimension " + std::to_string(x.size()) + " does not match basis " +
                            std::to_string(dim()));
   std::vector<double> y(dim());
   apply(x.data(), y.data());
   for (double v : y)
      if (!std::isfinite(v))
         throw Error("non-finite value in transfer matrix product");
   return y;
}

void RowOperator::project_zero_momentum(double* v) const
{
   auto const& sh = s_->shift;
   std::size_t n = sh.size();
   std::vector<double> acc(v, v + n), cur(v, v + n), nxt(n);
   for (int t = 1; t < L_; ++t)
   {
      for (std::size_t i = 0; i < n; ++i)
         nxt[sh[i]] = cur[i];
      std::swap(cur, nxt);
      for (std::size_t i = 0; i < n; ++i)
         acc[i] += cur[i];
   }
   for (std::size_t i = 0; i < n; ++i)
      v[i] = acc[i] / L_;
}

Eigen::MatrixXd RowOperator::dense() const
{
   std::size_t n = dim();
   Eigen::MatrixXd T(n, n);
   std::vector<double> e(n, 0.0), y(n);
   for (std::size_t i = 0; i < n; ++i)
   {
      e[i] = 1;
      apply(e.data(), y.data());
      e[i] = 0;
      for (std::size_t j = 0; j < n; ++j)
         T(j, i) = y[j];
   }
   return T;
}

namespace
{

// zero-momentum block in the basis of translation-orbit sums
Eigen::MatrixXd orbit_matrix(RowOperator const& op)
{
   auto const& sh = op.structure().shift;
   std::size_t n = sh.size();
   std::vector<int> orbit(n, -1);
   std::vector<std::size_t> rep;
   for (std::size_t i = 0; i < n; ++i)
   {
      if (orbit[i] >= 0) continue;
      int o = int(rep.size());
      rep.push_back(i);
      for (std::size_t j = i; orbit[j] < 0; j = sh[j])
         orbit[j] = o;
   }
   std::size_t no = rep.size();
   Eigen::MatrixXd R(no, no);
   std::vector<double> u(n), y(n);
   for (std::size_t o = 0; o < no; ++o)
   {
      for (std::size_t i = 0; i < n; ++i)
         u[i] = orbit[i] == int(o) ? 1.0 : 0.0;
      op.apply(u.data(), y.data());
      for (std::size_t p = 0; p < no; ++p)
         R(p, o) = y[rep[p]];
   }
   return R;
}

} // namespace

Eigenpacket leading_eigenvalues(RowOperator const& op, int k, bool zero_momentum, KrylovOptions opt)
{
   if (k < 1) throw DomainError("count must be >= 1");
   opt.nev = k;
   Eigenpacket ep;
   ep.L = op.L();
   ep.ell = op.ell();
   ep.twist = op.twist();
   if (op.dim() <= std::size_t(opt.dense_below))
   {
      Eigen::MatrixXd A = zero_momentum ? orbit_matrix(op) : op.dense();
      Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
      std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + A.rows());
      std::sort(ev.begin(), ev.end(), detail::ritz_before);
      ev.resize(std::min<std::size_t>(ev.size(), std::size_t(k)));
      ep.values = ev;
      ep.residuals.assign(ev.size(), 0.0);
      ep.converged = true;
      ep.matvecs = int(A.cols());
   }
   else
   {
      std::function<void(double const*, double*)> A = [&](double const* x, double* y) { op.apply(x, y); };
      std::function<void(double*)> P;
      if (zero_momentum)
         P = [&](double* v) { op.project_zero_momentum(v); };
      auto r = krylov_schur<double>(A, Eigen::Index(op.dim()), opt, P);
      ep.values = r.values;
      ep.residuals = r.residuals;
      ep.converged = r.converged;
      ep.matvecs = r.matvecs;
   }
   for (std::size_t j = 0; j < ep.values.size(); ++j)
      ep.labels.emplace_back(op.ell(), int(j));
   if (!ep.values.empty())
      ep.complex_leading = std::abs(ep.values[0].imag()) > 1e-10 * std::abs(ep.values[0]);
   return ep;
}

Eigenpacket leading_eigenvalues(VertexWeights const& w, int L, int ell, TwistSetting twist, int k,
                                bool zero_momentum)
{
   RowOperator op(w, L, ell, twist);
   return leading_eigenvalues(op, k, zero_momentum);
}

std::vector<FreeEnergyPoint> free_energy_series(VertexWeights const& w, int ell, TwistSetting twist,
                                                std::vector<int> const& Ls)
{
   if (!std::is_sorted(Ls.begin(), Ls.end()))
      throw DomainError("L list must be ascending");
   std::vector<FreeEnergyPoint> out;
   for (int L : Ls)
   {
      auto ep = leading_eigenvalues(w, L, ell, twist, 1);
      if (!ep.converged)
         throw Error("eigensolver did not converge at L=" + std::to_string(L));
      double lam = ep.values[0].real();
      out.push_back({L, -std::log(lam) / L, lam});
   }
   return out;
}

} // namespace thetalab
