#pragma once
// exhaustive filter over {empty, leg, arc end} assignments, shared by the tests and the acceptance run
#include "thetalab/linkstate.hpp"
#include <array>
#include <functional>
#include <set>
#include <vector>

namespace thetalab::oracle
{

using Key = std::pair<std::vector<int>, std::vector<std::uint8_t>>;

// boundary points: 2s is site s, 2s+1 the gap after it (2L-1 is the seam).
// the arc (a, b), a < b, cuts off [2a, 2b] for parity 0 and the complement of (2a, 2b) for parity 1
inline bool covers(int a, int b, int par, int x)
{
   return par ? (x <= 2 * a || x >= 2 * b) : (x >= 2 * a && x <= 2 * b);
}

// all assignments {empty, leg, arc end} with a seam flag per arc, filtered by the planarity rules
inline std::set<Key> link_patterns(int L, int ell, bool disk)
{
   std::set<Key> out;
   std::vector<int> partner(L, -3);
   std::vector<std::uint8_t> parity(L, 0);
   std::function<void(int)> rec = [&](int i)
   {
      if (i == L)
      {
         int legs = 0;
         std::vector<std::array<int, 3>> arcs;
         for (int s = 0; s < L; ++s)
         {
            if (partner[s] == LinkPattern::leg) ++legs;
            if (partner[s] > s) arcs.push_back({s, partner[s], parity[s]});
         }
         if (legs != ell) return;
         if (disk && ell == 0)
            for (auto& a : arcs)
               if (a[2]) return;
         for (auto& a : arcs)
            for (int s = 0; s < L; ++s)
               if (partner[s] == LinkPattern::leg && covers(a[0], a[1], a[2], 2 * s)) return;
         for (std::size_t x = 0; x < arcs.size(); ++x)
            for (std::size_t y = x + 1; y < arcs.size(); ++y)
            {
               auto [a, b, p] = arcs[x];
               auto [c, d, q] = arcs[y];
               bool inter = (a < c && c < b && b < d) || (c < a && a < d && d < b);
               if (inter) return;
               bool sub1 = true, sub2 = true, disj = true;
               for (int s = 0; s < 2 * L; ++s)
               {
                  bool u = covers(a, b, p, s), v = covers(c, d, q, s);
                  if (u && !v) sub1 = false;
                  if (v && !u) sub2 = false;
                  if (u && v) disj = false;
               }
               if (!(sub1 || sub2 || disj)) return;
            }
         out.insert({partner, parity});
         return;
      }
      if (partner[i] != -3)
      {
         rec(i + 1);
         return;
      }
      partner[i] = LinkPattern::empty;
      rec(i + 1);
      partner[i] = LinkPattern::leg;
      rec(i + 1);
      for (int j = i + 1; j < L; ++j)
         if (partner[j] == -3)
            for (int par = 0; par < 2; ++par)
            {
               partner[i] = j, partner[j] = i;
               parity[i] = parity[j] = std::uint8_t(par);
               rec(i + 1);
               partner[j] = -3;
               parity[i] = parity[j] = 0;
            }
      partner[i] = -3;
   };
   rec(0);
   return out;
}

inline std::set<Key> library_patterns(int L, int ell, Topology t)
{
   std::set<Key> out;
   auto b = enumerate(L, ell, t);
   for (std::size_t i = 0; i < b.size(); ++i)
   {
      auto p = b.pattern(i);
      out.insert({p.partner, p.parity});
   }
   return out;
}

} // namespace thetalab::oracle
