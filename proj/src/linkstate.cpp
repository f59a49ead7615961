#include "thetalab/linkstate.hpp"
#include "thetalab/error.hpp"
#include <algorithm>
#include <map>
#include <tuple>

namespace thetalab
{

int LinkPattern::legs() const
{
   return int(std::count(partner.begin(), partner.end(), leg));
}

void LinkPattern::add_arc(int a, int b, int par)
{
   partner[a] = b;
   partner[b] = a;
   parity[a] = parity[b] = std::uint8_t(par);
}

std::string LinkPattern::str() const
{
   std::string s;
   Code c = canonical_code(*this);
   for (int i = 0; i < size(); ++i)
      s += ".|()"[site(c, i)];
   return s;
}

Code canonical_code(LinkPattern const& p)
{
   int L = p.size();
   if (L > max_sites)
      throw ValidationError("pattern longer than " + std::to_string(max_sites) + " sites");
   Code c = 0;
   for (int i = 0; i < L; ++i)
   {
      int q = p.partner[i];
      unsigned s;
      if (q == LinkPattern::empty)
         s = kEmpty;
      else if (q == LinkPattern::leg)
         s = kLeg;
      else
      {
         if (q < 0 || q >= L || q == i || p.partner[q] != i || p.parity[q] != p.parity[i])
            throw ValidationError("inconsistent arc at site " + std::to_string(i));
         bool left = i < q;
         s = (left != bool(p.parity[i])) ? kOpen : kClose;
      }
      c |= Code(s) << (2 * i);
   }
   if (!valid_code(c, L) || decode(c, L) != p)
      throw ValidationError("pattern is not a planar annular link pattern");
   return c;
}

bool valid_code(Code c, int L)
{
   int depth = 0, unmatched_close = 0;
   bool seen_leg = false;
   for (int i = 0; i < L; ++i)
   {
      switch (site(c, i))
      {
         case kLeg:
            if (depth != 0) return false;
            seen_leg = true;
            break;
         case kOpen:
            ++depth;
            break;
         case kClose:
            if (depth > 0)
               --depth;
            else
            {
               if (seen_leg) return false;
               ++unmatched_close;
            }
            break;
         default:
            break;
      }
   }
   if (L < max_sites && (c >> (2 * L)) != 0)
      return false;
   return depth == unmatched_close;
}

LinkPattern decode(Code c, int L)
{
   LinkPattern p(L);
   int stack[max_sites], sp = 0;
   int closers[max_sites], nc = 0;
   for (int i = 0; i < L; ++i)
   {
      switch (site(c, i))
      {
         case kLeg:
            p.partner[i] = LinkPattern::leg;
            break;
         case kOpen:
            stack[sp++] = i;
            break;
         case kClose:
            if (sp > 0)
               p.add_arc(stack[--sp], i, 0);
            else
               closers[nc++] = i;
            break;
         default:
            break;
      }
   }
   if (sp != nc)
      throw ValidationError("unbalanced bracket code");
   for (int k = 0; k < nc; ++k)
      p.add_arc(closers[k], stack[sp - 1 - k], 1);
   return p;
}

Code rotate_code(Code c, int L, Topology topo)
{
   LinkPattern p = decode(c, L), q(L);
   for (int i = 0; i < L; ++i)
   {
      int j = (i + 1) % L;
      int t = p.partner[i];
      if (t < 0)
         q.partner[j] = t;
      else if (i < t)
      {
         int par = p.parity[i];
         if (t == L - 1) par ^= 1;
         if (topo == Topology::Disk && p.legs() == 0) par = 0;
         q.add_arc(j, (t + 1) % L, par);
      }
   }
   return canonical_code(q);
}

std::int64_t SectorBasis::index(Code c) const
{
   auto it = std::lower_bound(codes.begin(), codes.end(), c);
   if (it == codes.end() || *it != c)
      return -1;
   return it - codes.begin();
}

namespace
{

struct Gen
{
   int L, ell;
   bool wrap;   // unmatched closers allowed
   std::vector<Code>* out;

   void rec(int i, Code c, int depth, int unmatched, bool seen_leg, int legs)
   {
      int rem = L - i;
      int need_legs = ell - legs;
      if (need_legs > rem) return;
      if (depth > unmatched && depth - unmatched + need_legs > rem) return;
      if (unmatched > depth && unmatched - depth + need_legs > rem) return;
      if (i == L)
      {
         if (legs == ell && depth == unmatched)
            out->push_back(c);
         return;
      }
      int sh = 2 * i;
      rec(i + 1, c, depth, unmatched, seen_leg, legs);
      if (depth == 0 && legs < ell)
         rec(i + 1, c | (Code(kLeg) << sh), depth, unmatched, true, legs + 1);
      rec(i + 1, c | (Code(kOpen) << sh), depth + 1, unmatched, seen_leg, legs);
      if (depth > 0)
         rec(i + 1, c | (Code(kClose) << sh), depth - 1, unmatched, seen_leg, legs);
      else if (wrap && !seen_leg)
         rec(i + 1, c | (Code(kClose) << sh), depth, unmatched + 1, seen_leg, legs);
   }
};

} // namespace

SectorBasis enumerate(int L, int ell, Topology topo)
{
   if (L < 1)
      throw DomainError("L must be >= 1");
   if (L > max_sites)
      throw ResourceError("L too large for the 64-bit code");
   SectorBasis b;
   b.L = L;
   b.ell = ell;
   b.topo = topo;
   if (ell < 0 || ell > L)
   {
      b.empty = true;
      return b;
   }
   bool wrap = ell > 0 || topo == Topology::Annulus;
   Gen g{L, ell, wrap, &b.codes};
   g.rec(0, 0, 0, 0, false, 0);
   std::sort(b.codes.begin(), b.codes.end());
   b.empty = b.codes.empty();
   return b;
}

std::uint64_t sector_dimension(int L, int ell, Topology topo)
{
   if (ell < 0 || ell > L) return 0;
   bool wrap = ell > 0 || topo == Topology::Annulus;
   // state: (depth, unmatched closers, legs, seen_leg)
   std::map<std::tuple<int, int, int, int>, std::uint64_t> cur, nxt;
   cur[{0, 0, 0, 0}] = 1;
   for (int i = 0; i < L; ++i)
   {
      nxt.clear();
      for (auto const& [k, v] : cur)
      {
         auto [d, u, l, s] = k;
         nxt[{d, u, l, s}] += v;
         if (d == 0 && l < ell) nxt[{d, u, l + 1, 1}] += v;
         nxt[{d + 1, u, l, s}] += v;
         if (d > 0) nxt[{d - 1, u, l, s}] += v;
         else if (wrap && !s) nxt[{d, u + 1, l, s}] += v;
      }
      std::swap(cur, nxt);
   }
   std::uint64_t n = 0;
   for (auto const& [k, v] : cur)
   {
      auto [d, u, l, s] = k;
      if (d == u && l == ell) n += v;
   }
   return n;
}

std::vector<std::vector<std::uint64_t>> dimension_table(int L_max, Topology topo)
{
   if (L_max < 1)
      throw DomainError("L_max must be >= 1");
   std::vector<std::vector<std::uint64_t>> t(L_max + 1);
   for (int L = 1; L <= L_max; ++L)
      for (int ell = 0; ell <= L; ++ell)
         t[L].push_back(sector_dimension(L, ell, topo));
   return t;
}

} // namespace thetalab
