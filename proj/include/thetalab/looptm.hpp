#pragma once
#include "thetalab/krylov.hpp"
#include "thetalab/linkstate.hpp"
#include "thetalab/weights.hpp"
#include <memory>
#include <utility>
#include <vector>

namespace thetalab
{

// number of threads used by matvecs; reads THETALAB_THREADS once
int configure_threads();

// Transition structure of one row, independent of the weights.
// Frame positions: 0 = seam edge, 1..L = sites, L+1 = running horizontal edge.
struct RowStructure
{
   struct Step
   {
      std::size_t n_out = 0;
      std::vector<std::uint32_t> offset;   // n_out + 1, gather layout
      std::vector<std::uint32_t> src;
      std::vector<std::uint8_t> kind;
   };

   SectorBasis basis;
   std::vector<Step> steps;   // L vertex steps then the seam closing step
   std::vector<std::uint32_t> shift;   // basis permutation for translation by one site

   std::size_t max_frame() const;
   std::size_t bytes() const;

   // cached per (L, ell, topo) while in use
   static std::shared_ptr<RowStructure const> get(int L, int ell, Topology topo);
   static std::shared_ptr<RowStructure> build(int L, int ell, Topology topo);
};

// kind = 3*(type-1) + closure for vertex steps, 27 + closure for the seam step;
// closure 0 none, 1 contractible loop, 2 non-contractible loop
constexpr int n_kinds = 30;

class RowOperator
{
 public:
   RowOperator(VertexWeights const& w, int L, int ell, TwistSetting twist);
   RowOperator(VertexWeights const& w, int L, int ell, TwistSetting twist, Topology topo);

   static Topology natural_topology(int ell, double n, double nt);

   SectorBasis const& basis() const { return s_->basis; }
   std::size_t dim() const { return s_->basis.size(); }
   int L() const { return L_; }
   int ell() const { return ell_; }
   TwistSetting twist() const { return twist_; }
   VertexWeights const& weights() const { return w_; }
   Topology topology() const { return s_->basis.topo; }

   void set_weights(VertexWeights const& w);
   void set_twist(TwistSetting t);

   void apply(double const* x, double* y) const;
   std::vector<double> apply(std::vector<double> const& x) const;
   void project_zero_momentum(double* v) const;

   Eigen::MatrixXd dense() const;
   RowStructure const& structure() const { return *s_; }

 private:
   void refresh_table();

   std::shared_ptr<RowStructure const> s_;
   VertexWeights w_;
   TwistSetting twist_;
   int L_, ell_;
   std::array<double, n_kinds> table_{};
   mutable std::vector<double> buf_a_, buf_b_;
};

struct Eigenpacket
{
   int L = 0;
   int ell = 0;
   TwistSetting twist;
   std::vector<cplx> values;               // descending real part
   std::vector<double> residuals;
   std::vector<std::pair<int, int>> labels;   // (m, j)
   bool converged = false;
   bool complex_leading = false;
   int matvecs = 0;
};

Eigenpacket leading_eigenvalues(RowOperator const& op, int k, bool zero_momentum = true,
                                KrylovOptions opt = {});
Eigenpacket leading_eigenvalues(VertexWeights const& w, int L, int ell, TwistSetting twist, int k,
                                bool zero_momentum = true);

struct FreeEnergyPoint
{
   int L;
   double f;        // -log Lambda_0 / L
   double lambda;   // Lambda_0
};

std::vector<FreeEnergyPoint> free_energy_series(VertexWeights const& w, int ell, TwistSetting twist,
                                                std::vector<int> const& Ls);

} // namespace thetalab
