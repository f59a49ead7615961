#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace thetalab::mc
{

// Philox4x32-10 counter-based generator; one stream per (key, stream id)
class Philox
{
 public:
   using Counter = std::array<std::uint32_t, 4>;
   using Key = std::array<std::uint32_t, 2>;

   Philox(std::uint64_t seed, std::uint32_t stream);

   static Counter block(Counter ctr, Key key);

   std::uint64_t next64();
   double uniform();                        // [0, 1), 53 bits
   std::uint32_t below(std::uint32_t n);    // [0, n)
   std::uint64_t draws() const { return count_; }

 private:
   Key key_;
   std::uint32_t stream_;
   std::uint64_t count_ = 0;   // blocks consumed
   Counter buf_{};
   int left_ = 0;
};

struct Couplings
{
   double p = 1.0;
   double K = 0.0;
   double tau = 1.0;
};

Couplings theta_ds_couplings();
Couplings theta_bn_couplings();

struct MoveMix
{
   double grow = 0.25, retract = 0.25, backbite = 0.25, special = 0.25;
};

enum class Move { Grow, Retract, Backbite, Special };
constexpr int n_moves = 4;

using Vec = std::array<int, 2>;

// Walk from the fixed end A (torus centre) to the moving end B.
// Positions carry unwrapped coordinates; sites are those modulo L.
class Walk
{
 public:
   explicit Walk(int L);

   int L() const { return L_; }
   int length() const { return int(U_.size()) - 1; }   // number of edges (monomers)
   Vec const& at(int i) const { return U_[i]; }
   std::vector<Vec> const& path() const { return U_; }
   int site(Vec const& u) const;
   int site_of(int i) const { return site(U_[i]); }
   std::array<int, 2> const& visits(int s) const { return slots_[s]; }
   int visit_count(int s) const { return (slots_[s][0] >= 0) + (slots_[s][1] >= 0); }
   bool edge_used(int e) const { return edge_[e] != 0; }

   // edge leaving unwrapped point u in direction d (0:+x 1:+y 2:-x 3:-y)
   int edge_id(Vec const& u, int d) const;
   static Vec step(Vec u, int d);

   bool straight(int i) const;   // interior position with no turn
   int n_straight() const { return n_straight_; }
   int n_double() const { return n_double_; }
   double weight(Couplings const& c) const;

   Vec displacement() const;   // B - A, unwrapped
   Vec winding() const;        // zero when B lies in the fundamental box around A
   int r2() const;

   // full consistency check against the invariants
   bool check(std::string* why = nullptr) const;

   // build from unwrapped points starting at the centre; throws when invalid
   static Walk from_path(int L, std::vector<Vec> const& pts);

 private:
   friend class Sampler;

   void add_visit(int s, int i);
   void remove_visit(int s, int i);
   bool crossing_at(int s) const;
   void recount();

   int L_;
   std::vector<Vec> U_;
   std::vector<std::array<int, 2>> slots_;
   std::vector<std::uint8_t> edge_;
   int n_straight_ = 0, n_double_ = 0;
};

struct MoveStats
{
   std::array<std::uint64_t, n_moves> proposed{}, accepted{};
   double rate(Move m) const;
};

class Sampler
{
 public:
   Sampler(int L, Couplings c, MoveMix mix, std::uint64_t seed, std::uint32_t stream);

   // one Metropolis step; returns true when accepted
   bool step();
   bool attempt(Move m);   // forced move type, for tests

   Walk const& walk() const { return w_; }
   MoveStats const& stats() const { return stats_; }
   Couplings const& couplings() const { return c_; }
   Philox& rng() { return rng_; }

   // proposal probability of a given target for the last attempted move, for detailed balance tests
   static double acceptance(double ratio) { return ratio >= 1 ? 1.0 : ratio; }

 private:
   bool grow();
   bool retract();
   bool backbite();
   bool special();
   bool accept(double ratio);
   void reverse_tail(int k, Vec const& shift, int first_src, int new_len);

   Walk w_;
   Couplings c_;
   std::array<double, n_moves> cum_{};
   Philox rng_;
   MoveStats stats_;
   std::vector<Vec> scratch_;
};

struct RunConfig
{
   int L = 10;
   Couplings couplings;
   std::uint64_t seed = 1;
   double warmup_sweeps = 500;      // units of L^2 steps
   double measure_sweeps = 1e5;
   int n_replicas = 10;
   MoveMix mix;
};

struct G1Histogram
{
   int L = 0;
   std::vector<std::vector<double>> counts;   // [replica][r2], w = 0 samples only
   std::vector<double> mean, err;             // per-bin mean / standard error of replica fractions
   std::vector<std::uint64_t> samples;        // per replica, all measurement steps
   std::vector<MoveStats> stats;
   std::vector<std::string> warnings;
   RunConfig config;

   std::vector<double> pooled() const;
};

G1Histogram run_protocol(RunConfig const& rc);

// number of (dx, dy) in the fundamental box around the centre with dx^2 + dy^2 = r2
int multiplicity(int r2, int L);

struct G1Value
{
   double value = 0.0;
   double error = 0.0;
   int r2 = 0;
};

// G1 at r = alpha L, normalised to G1(r2 = 1) = 1
G1Value g1_at_ratio(G1Histogram const& h, double alpha);

// G1(r2) / multiplicity normalised at r2 = 1; NaN where not realisable or empty
std::vector<double> g1_profile(G1Histogram const& h);

} // namespace thetalab::mc
