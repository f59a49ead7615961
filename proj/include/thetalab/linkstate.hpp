#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace thetalab
{

// Disk: l=0 arcs never cross the seam (enough when ñ = n).
// Annulus: l=0 arcs carry a seam parity (needed when ñ != n).
// For l>0 the two coincide.
enum class Topology { Disk, Annulus };

using Code = std::uint64_t;

constexpr int max_sites = 32;

// 2 bits per site, site i at bits 2i..2i+1
enum SiteCode : unsigned { kEmpty = 0, kLeg = 1, kOpen = 2, kClose = 3 };

struct LinkPattern
{
   static constexpr int empty = -1;
   static constexpr int leg = -2;

   std::vector<int> partner;            // -1 empty, -2 leg, else partner site
   std::vector<std::uint8_t> parity;    // seam crossings mod 2 of the arc at this site

   LinkPattern() = default;
   explicit LinkPattern(int L) : partner(L, empty), parity(L, 0) {}

   int size() const { return int(partner.size()); }
   int legs() const;
   void add_arc(int a, int b, int par);
   bool operator==(LinkPattern const&) const = default;
   std::string str() const;
};

// throws ValidationError if malformed or not planar on the annulus
Code canonical_code(LinkPattern const& p);
LinkPattern decode(Code c, int L);

// structural check of a bracket word: legs at depth zero between the
// wrap-matched closers and openers, equal numbers of unmatched closers/openers
bool valid_code(Code c, int L);

// site-wise inspection
inline unsigned site(Code c, int i) { return unsigned(c >> (2 * i)) & 3u; }

Code rotate_code(Code c, int L, Topology topo);   // translate by one site to the right

struct SectorBasis
{
   int L = 0;
   int ell = 0;
   Topology topo = Topology::Disk;
   bool empty = false;
   std::vector<Code> codes;   // sorted

   std::size_t size() const { return codes.size(); }
   std::int64_t index(Code c) const;   // -1 if absent
   LinkPattern pattern(std::size_t i) const { return decode(codes[i], L); }
};

SectorBasis enumerate(int L, int ell, Topology topo = Topology::Disk);

// counts[L][ell] for 1 <= L <= L_max (row 0 unused)
std::vector<std::vector<std::uint64_t>> dimension_table(int L_max, Topology topo = Topology::Disk);
std::uint64_t sector_dimension(int L, int ell, Topology topo);

} // namespace thetalab
