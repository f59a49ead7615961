#include "thetalab/mcvisaw.hpp"
#include "thetalab/error.hpp"
#include "thetalab/weights.hpp"
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace thetalab::mc
{

// ---- Philox4x32-10 ----

Philox::Philox(std::uint64_t seed, std::uint32_t stream)
    : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, stream_(stream)
{
}

Philox::Counter Philox::block(Counter c, Key k)
{
   constexpr std::uint32_t M0 = 0xD2511F53, M1 = 0xCD9E8D57;
   constexpr std::uint32_t W0 = 0x9E3779B9, W1 = 0xBB67AE85;
   for (int r = 0; r < 10; ++r)
   {
      std::uint64_t p0 = std::uint64_t(M0) * c[0];
      std::uint64_t p1 = std::uint64_t(M1) * c[2];
      c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ c[3] ^ k[1],
           std::uint32_t(p0)};
      k[0] += W0;
      k[1] += W1;
   }
   return c;
}

std::uint64_t Philox::next64()
{
   if (left_ == 0)
   {
      buf_ = block({std::uint32_t(count_), std::uint32_t(count_ >> 32), stream_, 0}, key_);
      ++count_;
      left_ = 2;
   }
   int i = 2 - left_;
   --left_;
   return (std::uint64_t(buf_[2 * i + 1]) << 32) | buf_[2 * i];
}

double Philox::uniform()
{
   return double(next64() >> 11) * 0x1.0p-53;
}

std::uint32_t Philox::below(std::uint32_t n)
{
   // multiply-shift; the bias is below 2^-32
   return std::uint32_t((unsigned __int128)(next64()) * n >> 64);
}

// ---- couplings ----

Couplings theta_ds_couplings()
{
   auto c = closed_form_couplings(PointTag::ThetaDS);
   return {c.p, c.K, c.tau};
}

Couplings theta_bn_couplings()
{
   auto c = closed_form_couplings(PointTag::ThetaBN);
   return {c.p, c.K, c.tau};
}

// ---- walk ----

namespace
{
Vec const dirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

int floor_div(int a, int b)
{
   int q = a / b;
   return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

int pmod(int a, int b)
{
   int r = a % b;
   return r < 0 ? r + b : r;
}

Vec sub(Vec const& a, Vec const& b) { return {a[0] - b[0], a[1] - b[1]}; }
Vec add(Vec const& a, Vec const& b) { return {a[0] + b[0], a[1] + b[1]}; }

int dir_of(Vec const& from, Vec const& to)
{
   Vec d = sub(to, from);
   for (int k = 0; k < 4; ++k)
      if (d == dirs[k]) return k;
   return -1;
}
} // namespace

Walk::Walk(int L) : L_(L)
{
   if (L < 2) throw DomainError("torus side must be at least 2");
   if (L > 4096) throw DomainError("torus side too large");
   slots_.assign(std::size_t(L) * L, {-1, -1});
   edge_.assign(2 * std::size_t(L) * L, 0);
   U_.push_back({L / 2, L / 2});
   add_visit(site(U_[0]), 0);
}

int Walk::site(Vec const& u) const
{
   return pmod(u[0], L_) + L_ * pmod(u[1], L_);
}

Vec Walk::step(Vec u, int d)
{
   return add(u, dirs[d]);
}

int Walk::edge_id(Vec const& u, int d) const
{
   switch (d)
   {
   case 0: return 2 * site(u);
   case 1: return 2 * site(u) + 1;
   case 2: return 2 * site({u[0] - 1, u[1]});
   default: return 2 * site({u[0], u[1] - 1}) + 1;
   }
}

void Walk::add_visit(int s, int i)
{
   auto& sl = slots_[s];
   if (sl[0] < 0) sl[0] = i;
   else sl[1] = i;
}

void Walk::remove_visit(int s, int i)
{
   auto& sl = slots_[s];
   if (sl[0] == i) sl[0] = -1;
   else if (sl[1] == i) sl[1] = -1;
   if (sl[0] < 0 && sl[1] >= 0) std::swap(sl[0], sl[1]);
}

bool Walk::straight(int i) const
{
   int N = length();
   if (i <= 0 || i >= N) return false;
   return sub(U_[i + 1], U_[i]) == sub(U_[i], U_[i - 1]);
}

bool Walk::crossing_at(int s) const
{
   auto const& sl = slots_[s];
   return sl[0] >= 0 && sl[1] >= 0 && straight(sl[0]) && straight(sl[1]);
}

void Walk::recount()
{
   n_straight_ = n_double_ = 0;
   for (int i = 1; i < length(); ++i)
      n_straight_ += straight(i);
   for (std::size_t s = 0; s < slots_.size(); ++s)
      n_double_ += visit_count(int(s)) == 2;
}

double Walk::weight(Couplings const& c) const
{
   return std::pow(c.K, length()) * std::pow(c.p, n_straight_) * std::pow(c.tau, n_double_);
}

Vec Walk::displacement() const
{
   return sub(U_.back(), U_.front());
}

Vec Walk::winding() const
{
   return {floor_div(U_.back()[0], L_), floor_div(U_.back()[1], L_)};
}

int Walk::r2() const
{
   Vec d = displacement();
   return d[0] * d[0] + d[1] * d[1];
}

bool Walk::check(std::string* why) const
{
   auto fail = [&](std::string m) {
      if (why) *why = std::move(m);
      return false;
   };
   if (U_.empty() || U_[0] != Vec{L_ / 2, L_ / 2}) return fail("walk must start at the centre");
   std::vector<int> cnt(slots_.size(), 0);
   std::vector<std::uint8_t> e(edge_.size(), 0);
   for (int i = 0; i <= length(); ++i)
   {
      int s = site(U_[i]);
      if (++cnt[s] > 2) return fail("site visited more than twice");
      auto const& sl = slots_[s];
      if (sl[0] != i && sl[1] != i) return fail("visit table out of sync");
      if (i < length())
      {
         int d = dir_of(U_[i], U_[i + 1]);
         if (d < 0) return fail("non-unit step");
         int id = edge_id(U_[i], d);
         if (e[id]++) return fail("edge visited twice");
      }
   }
   for (std::size_t s = 0; s < slots_.size(); ++s)
   {
      if (visit_count(int(s)) != cnt[s]) return fail("visit count out of sync");
      if (crossing_at(int(s))) return fail("strands cross at a doubly visited site");
   }
   if (e != edge_) return fail("edge table out of sync");
   int ns = 0, nd = 0;
   for (int i = 1; i < length(); ++i)
      ns += straight(i);
   for (int c : cnt)
      nd += c == 2;
   if (ns != n_straight_ || nd != n_double_) return fail("cached counts out of sync");
   return true;
}

Walk Walk::from_path(int L, std::vector<Vec> const& pts)
{
   Walk w(L);
   if (pts.empty() || pts[0] != w.U_[0]) throw ValidationError("path must start at the centre");
   for (std::size_t i = 1; i < pts.size(); ++i)
   {
      int d = dir_of(pts[i - 1], pts[i]);
      if (d < 0) throw ValidationError("path has a non-unit step");
      int e = w.edge_id(pts[i - 1], d);
      if (w.edge_[e]) throw ValidationError("path reuses an edge");
      int s = w.site(pts[i]);
      if (w.visit_count(s) >= 2) throw ValidationError("path visits a site three times");
      w.edge_[e] = 1;
      w.U_.push_back(pts[i]);
      w.add_visit(s, int(i));
   }
   w.recount();
   for (std::size_t s = 0; s < w.slots_.size(); ++s)
      if (w.crossing_at(int(s))) throw ValidationError("path crosses itself");
   return w;
}

// ---- sampler ----

double MoveStats::rate(Move m) const
{
   auto i = std::size_t(m);
   return proposed[i] ? double(accepted[i]) / double(proposed[i]) : 0.0;
}

Sampler::Sampler(int L, Couplings c, MoveMix mix, std::uint64_t seed, std::uint32_t stream)
    : w_(L), c_(c), rng_(seed, stream)
{
   if (!(c.K >= 0 && c.p >= 0 && c.tau >= 0)) throw DomainError("couplings must be non-negative");
   double m[n_moves] = {mix.grow, mix.retract, mix.backbite, mix.special};
   double tot = 0;
   for (int i = 0; i < n_moves; ++i)
   {
      if (!(m[i] >= 0)) throw DomainError("move probabilities must be non-negative");
      tot += m[i];
   }
   if (!(tot > 0)) throw DomainError("move mix is empty");
   if (mix.grow != mix.retract) throw DomainError("grow and retract must be proposed equally often");
   double acc = 0;
   for (int i = 0; i < n_moves; ++i)
   {
      acc += m[i] / tot;
      cum_[i] = acc;
   }
   cum_[n_moves - 1] = 1.0;
}

bool Sampler::accept(double ratio)
{
   if (ratio >= 1) return true;
   if (!(ratio > 0)) return false;
   return rng_.uniform() < ratio;
}

bool Sampler::step()
{
   double u = rng_.uniform();
   int m = 0;
   while (m < n_moves - 1 && u >= cum_[m])
      ++m;
   return attempt(Move(m));
}

bool Sampler::attempt(Move m)
{
   ++stats_.proposed[std::size_t(m)];
   bool ok = false;
   switch (m)
   {
   case Move::Grow: ok = grow(); break;
   case Move::Retract: ok = retract(); break;
   case Move::Backbite: ok = backbite(); break;
   case Move::Special: ok = special(); break;
   }
   if (ok) ++stats_.accepted[std::size_t(m)];
   return ok;
}

bool Sampler::grow()
{
   auto& w = w_;
   int d = int(rng_.below(4));
   int N = w.length();
   Vec B = w.U_[N];
   Vec t = Walk::step(B, d);
   int e = w.edge_id(B, d);
   if (w.edge_[e]) return false;
   int st = w.site(t);
   int ct = w.visit_count(st);
   if (ct >= 2) return false;
   bool sN = N >= 1 && sub(t, B) == sub(B, w.U_[N - 1]);
   if (sN)
   {
      // the co-visiting strand at B must not also go straight
      auto const& sl = w.slots_[w.site(B)];
      int j = sl[0] == N ? sl[1] : sl[0];
      if (j >= 0 && w.straight(j)) return false;
   }
   double ratio = c_.K * (sN ? c_.p : 1.0) * (ct == 1 ? c_.tau : 1.0);
   if (!accept(ratio)) return false;
   w.edge_[e] = 1;
   w.U_.push_back(t);
   w.add_visit(st, N + 1);
   w.n_straight_ += sN;
   w.n_double_ += ct == 1;
   return true;
}

bool Sampler::retract()
{
   auto& w = w_;
   int d = int(rng_.below(4));
   int N = w.length();
   if (N == 0) return false;
   Vec B = w.U_[N];
   if (Walk::step(B, d) != w.U_[N - 1]) return false;
   bool sN1 = w.straight(N - 1);
   int sB = w.site(B);
   bool dbl = w.visit_count(sB) == 2;
   double fwd = c_.K * (sN1 ? c_.p : 1.0) * (dbl ? c_.tau : 1.0);
   double ratio = fwd > 0 ? 1.0 / fwd : std::numeric_limits<double>::infinity();
   if (!accept(ratio)) return false;
   int back = (d + 2) % 4;   // direction from U_{N-1} to B
   w.edge_[w.edge_id(w.U_[N - 1], back)] = 0;
   w.remove_visit(sB, N);
   w.U_.pop_back();
   w.n_straight_ -= sN1;
   w.n_double_ -= dbl;
   return true;
}

// replace positions m0..N by U[N + c - m] + shift
void Sampler::reverse_tail(int m0, Vec const& shift, int c, int N)
{
   auto& w = w_;
   scratch_.resize(std::size_t(N - m0 + 1));
   for (int m = m0; m <= N; ++m)
      scratch_[m - m0] = add(w.U_[N + c - m], shift);
   for (int m = m0; m <= N; ++m)
      w.remove_visit(w.site(w.U_[m]), m);
   for (int m = m0; m <= N; ++m)
   {
      w.U_[m] = scratch_[m - m0];
      w.add_visit(w.site(w.U_[m]), m);
   }
}

bool Sampler::backbite()
{
   auto& w = w_;
   int d = int(rng_.below(4));
   int N = w.length();
   Vec B = w.U_[N];
   Vec y = Walk::step(B, d);
   int e = w.edge_id(B, d);
   if (w.edge_[e]) return false;
   int sy = w.site(y);
   auto const& sl = w.slots_[sy];
   int m = w.visit_count(sy);
   if (m == 0) return false;
   int k = m == 1 ? sl[0] : sl[rng_.below(2)];
   // k < N since y and B are distinct sites

   Vec dv = dirs[d];
   Vec back = {-dv[0], -dv[1]};   // step from w_k to w_N in the new walk
   bool s_old = w.straight(k), s_old1 = w.straight(k + 1);
   bool s_new = k >= 1 && back == sub(w.U_[k], w.U_[k - 1]);
   bool s_new1 = k + 1 < N && sub(B, w.U_[N - 1]) == dv;

   if (s_new)
   {
      int j = sl[0] == k ? sl[1] : sl[0];
      if (j >= 0 && w.straight(j)) return false;
   }
   if (s_new1)
   {
      auto const& sb = w.slots_[w.site(B)];
      int j = sb[0] == N ? sb[1] : sb[0];
      if (j >= 0 && j != k + 1 && w.straight(j)) return false;
   }
   int ds = int(s_new) + int(s_new1) - int(s_old) - int(s_old1);
   double ratio = ds == 0 ? 1.0 : (ds > 0 ? std::pow(c_.p, ds) : std::pow(1.0 / c_.p, -ds));
   if (!accept(ratio)) return false;

   int dk = dir_of(w.U_[k], w.U_[k + 1]);
   w.edge_[w.edge_id(w.U_[k], dk)] = 0;
   w.edge_[e] = 1;
   Vec shift = sub(sub(w.U_[k], dv), B);
   reverse_tail(k + 1, shift, k + 1, N);
   w.n_straight_ += ds;
   return true;
}

bool Sampler::special()
{
   auto& w = w_;
   int N = w.length();
   if (N == 0) return false;
   Vec B = w.U_[N];
   auto const& sl = w.slots_[w.site(B)];
   int j = sl[0] == N ? sl[1] : sl[0];
   if (j < 0) return false;
   // the loop j -> N is traversed backwards and the end moves to the other side of the site
   bool s_old = w.straight(j);
   bool s_new = j >= 1 && sub(w.U_[N - 1], B) == sub(w.U_[j], w.U_[j - 1]);
   int ds = int(s_new) - int(s_old);
   double ratio = ds == 0 ? 1.0 : (ds > 0 ? c_.p : 1.0 / c_.p);
   if (!accept(ratio)) return false;
   Vec shift = sub(w.U_[j], B);
   reverse_tail(j + 1, shift, j, N);
   w.n_straight_ += ds;
   return true;
}

// ---- protocol ----

std::vector<double> G1Histogram::pooled() const
{
   std::vector<double> p;
   for (auto const& c : counts)
   {
      if (p.size() < c.size()) p.resize(c.size(), 0.0);
      for (std::size_t i = 0; i < c.size(); ++i)
         p[i] += c[i];
   }
   return p;
}

G1Histogram run_protocol(RunConfig const& rc)
{
   if (rc.L < 2) throw DomainError("torus side must be at least 2");
   if (!(rc.couplings.K > 0 && rc.couplings.tau > 0 && rc.couplings.p >= 0))
      throw DomainError("couplings must be positive (p may vanish)");
   if (rc.n_replicas < 1) throw DomainError("need at least one replica");
   if (!(rc.warmup_sweeps >= 0 && rc.measure_sweeps >= 0)) throw DomainError("sweep counts must be non-negative");

   G1Histogram h;
   h.L = rc.L;
   h.config = rc;
   int R = rc.n_replicas;
   int nbins = 2 * (rc.L / 2) * (rc.L / 2) + 1;
   h.counts.assign(R, std::vector<double>(nbins, 0.0));
   h.samples.assign(R, 0);
   h.stats.assign(R, {});
   if (rc.measure_sweeps < rc.warmup_sweeps) h.warnings.push_back("measurement shorter than warmup");

   auto L2 = std::uint64_t(rc.L) * rc.L;
   auto warm = std::uint64_t(std::llround(rc.warmup_sweeps * double(L2)));
   auto meas = std::uint64_t(std::llround(rc.measure_sweeps * double(L2)));

#pragma omp parallel for schedule(dynamic, 1)
   for (int r = 0; r < R; ++r)
   {
      Sampler s(rc.L, rc.couplings, rc.mix, rc.seed, std::uint32_t(r));
      for (std::uint64_t t = 0; t < warm; ++t)
         s.step();
      auto& c = h.counts[r];
      for (std::uint64_t t = 0; t < meas; ++t)
      {
         s.step();
         auto const& w = s.walk();
         if (w.winding() == Vec{0, 0}) c[std::size_t(w.r2())] += 1;
      }
      h.samples[r] = meas;
      h.stats[r] = s.stats();
   }

   h.mean.assign(nbins, 0.0);
   h.err.assign(nbins, 0.0);
   for (int b = 0; b < nbins; ++b)
   {
      double s1 = 0, s2 = 0;
      for (int r = 0; r < R; ++r)
      {
         double f = h.samples[r] ? h.counts[r][b] / double(h.samples[r]) : 0.0;
         s1 += f;
         s2 += f * f;
      }
      h.mean[b] = s1 / R;
      if (R > 1) h.err[b] = std::sqrt(std::max(0.0, (s2 - s1 * s1 / R) / (R - 1)) / R);
   }
   return h;
}

int multiplicity(int r2, int L)
{
   if (r2 < 0 || L < 2) return 0;
   int lo = -(L / 2), hi = L - 1 - L / 2;
   int inner = std::min(-lo, hi);
   if (r2 <= inner * inner)
   {
      // no truncation by the box: sum of two squares, 4 (d1 - d3)
      if (r2 == 0) return 1;
      int c = 0;
      for (int d = 1; d <= r2; ++d)
         if (r2 % d == 0)
         {
            if (d % 4 == 1) ++c;
            else if (d % 4 == 3) --c;
         }
      return 4 * c;
   }
   int c = 0;
   for (int dx = lo; dx <= hi; ++dx)
   {
      int rem = r2 - dx * dx;
      if (rem < 0) continue;
      int dy = int(std::lround(std::sqrt(double(rem))));
      if (dy * dy != rem) continue;
      if (dy >= lo && dy <= hi) ++c;
      if (dy != 0 && -dy >= lo && -dy <= hi) ++c;
   }
   return c;
}

std::vector<double> g1_profile(G1Histogram const& h)
{
   auto p = h.pooled();
   std::vector<double> g(p.size(), std::numeric_limits<double>::quiet_NaN());
   if (p.size() < 2 || p[1] <= 0) return g;
   double g1 = p[1] / multiplicity(1, h.L);
   for (std::size_t r = 0; r < p.size(); ++r)
   {
      int m = multiplicity(int(r), h.L);
      if (m > 0 && p[r] > 0) g[r] = p[r] / m / g1;
   }
   return g;
}

G1Value g1_at_ratio(G1Histogram const& h, double alpha)
{
   if (!(alpha > 0)) throw DomainError("alpha must be positive");
   auto p = h.pooled();
   if (p.size() < 2 || p[1] <= 0) throw MissingDataError("no samples at r^2 = 1 for the normalisation");
   double t = alpha * h.L * alpha * h.L;
   int best = -1;
   for (int r = 0; r < int(p.size()); ++r)
   {
      if (multiplicity(r, h.L) == 0) continue;
      if (best < 0 || std::abs(r - t) < std::abs(best - t)) best = r;
   }
   if (best < 0) throw MissingDataError("no realisable separation in range");
   if (p[best] <= 0)
   {
      std::ostringstream os;
      os << "empty bin r^2=" << best << "; nearest populated:";
      std::vector<int> pop;
      for (int r = 0; r < int(p.size()); ++r)
         if (p[r] > 0) pop.push_back(r);
      std::sort(pop.begin(), pop.end(), [&](int a, int b) { return std::abs(a - best) < std::abs(b - best); });
      for (std::size_t i = 0; i < std::min<std::size_t>(3, pop.size()); ++i)
         os << ' ' << pop[i];
      throw MissingDataError(os.str());
   }
   double m1 = multiplicity(1, h.L), mb = multiplicity(best, h.L);
   G1Value v;
   v.r2 = best;
   v.value = (p[best] / mb) / (p[1] / m1);
   int R = int(h.counts.size());
   if (R > 1)
   {
      double s1 = 0, s2 = 0;
      int used = 0;
      for (auto const& c : h.counts)
      {
         if (c[1] <= 0) continue;
         double x = (c[best] / mb) / (c[1] / m1);
         s1 += x;
         s2 += x * x;
         ++used;
      }
      if (used > 1) v.error = std::sqrt(std::max(0.0, (s2 - s1 * s1 / used) / (used - 1)) / used);
   }
   return v;
}

} // namespace thetalab::mc
