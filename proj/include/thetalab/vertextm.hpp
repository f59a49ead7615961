#pragma once
#include "thetalab/looptm.hpp"
#include "thetalab/weights.hpp"
#include <Eigen/Dense>
#include <array>
#include <vector>

namespace thetalab
{

using Mat9 = Eigen::Matrix<cplx, 9, 9>;

// two-site index 3a+b, local state 0:+1, 1:0, 2:-1
struct IKRMatrix
{
   double gamma = 0;
   cplx x = 1;
   Mat9 R;   // R(3N+E, 3W+S)
};

// P0, P1, P2 on two spin-1 sites for U_Q(sl2) with Q = exp(i gamma/2)
std::array<Mat9, 3> ik_projectors(double gamma);

IKRMatrix build_rmatrix(double gamma, cplx x);

// max entry of R12 R23 R12 - R23 R12 R23, relative to the largest entry of the product when that exceeds 1
double ybe_residual(double gamma, cplx x, cplx y);

std::uint64_t magnetisation_dimension(int L, int m);

class VertexTransfer
{
 public:
   VertexTransfer(IKRMatrix const& R, int L, int m, double phi);

   std::size_t dim() const { return states_.size(); }
   std::vector<std::uint32_t> const& states() const { return states_; }   // base-3 digits
   void apply(cplx const* x, cplx* y) const;
   Eigen::MatrixXcd dense() const;

 private:
   struct Entry
   {
      std::uint8_t out, h;
      cplx w;
   };
   int L_, m_;
   double phi_;
   std::vector<std::uint32_t> states_;
   std::vector<std::int64_t> index_;   // full 3^L -> sector, -1 outside
   std::vector<std::uint32_t> pow3_;
   std::array<std::vector<Entry>, 9> moves_;   // by 3h + in
};

// count < 0: full dense spectrum (L <= 8); otherwise leading eigenvalues
Eigenpacket transfer_spectrum(int L, int m, double phi, double gamma, cplx x, int count = -1);

enum class Regime { I, II, III, Boundary };

Regime regime_of(double gamma, Branch b);
char const* regime_name(Regime r);

struct CrosscheckResult
{
   double max_mismatch = 0;
   int loop_levels = 0;
   int vertex_levels = 0;
};

// every eigenvalue of the loop sector (full dense spectrum, raw ZB normalization)
// against the vertex spectrum: l=0 twisted m=0 at phi, l>0 untwisted m=l
CrosscheckResult loop_vertex_crosscheck(double gamma, Branch b, int L, int ell, double phi);

} // namespace thetalab
