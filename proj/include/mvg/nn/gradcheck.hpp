/*!
  \file gradcheck.hpp
  \brief Central finite-difference check of tape gradients
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "../random.hpp"
#include "tape.hpp"

namespace mvg::nn
{

struct gradcheck_params
{
  double eps = 1e-4;
  uint32_t max_entries_per_tensor = 24u; /* 0 = every entry */
  double zero_floor = 1e-7;              /* both norms below this count as agreement */
  /* entries whose forward and backward one-sided slopes differ by more than this
     fraction straddle a ReLU/abs kink; they are skipped (0 keeps every entry) */
  double kink_tolerance = 1e-3;
  uint64_t seed = 1u;
};

struct tensor_check
{
  std::string name;
  double analytic_norm = 0.0;
  double numeric_norm = 0.0;
  double rel_error = 0.0;
  uint32_t entries = 0u;
  uint32_t skipped = 0u;
};

struct gradcheck_report
{
  std::vector<tensor_check> tensors;
  double max_rel_error = 0.0;
  std::string worst;
  uint32_t entries = 0u;
  uint32_t skipped = 0u;
};

/*! \brief Compares analytic and numeric gradients of `loss` for every parameter in `ps`.

  Up to `max_entries_per_tensor` entries per tensor are sampled; the relative
  error of a tensor is the Euclidean norm of the difference over the larger of
  the two gradient norms on the sampled entries.  Central differences are
  meaningless across a kink of a piecewise-linear op, so such entries are
  detected from the one-sided slopes and counted instead of compared.
*/
inline gradcheck_report gradient_check( param_store& ps, std::function<tv( tape& )> const& loss, gradcheck_params const& gp = {} )
{
  ps.zero_grad();
  {
    tape t;
    auto const l = loss( t );
    t.backward( l );
  }
  auto eval = [&] {
    tape t;
    return t.scalar( loss( t ) );
  };

  double const base = eval();
  gradcheck_report rep;
  rng gen( gp.seed );
  for ( auto& p : ps.all() )
  {
    auto const n = static_cast<uint32_t>( p->value.size() );
    std::vector<uint32_t> idx;
    if ( gp.max_entries_per_tensor == 0u || n <= gp.max_entries_per_tensor )
      for ( uint32_t i = 0; i < n; ++i )
        idx.push_back( i );
    else
      idx = sample_without_replacement( gen, n, gp.max_entries_per_tensor );

    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    uint32_t skipped = 0u;
    for ( auto i : idx )
    {
      double& x = p->value.data()[i];
      double const saved = x;
      x = saved + gp.eps;
      double const up = eval();
      x = saved - gp.eps;
      double const down = eval();
      x = saved;
      double const fwd = ( up - base ) / gp.eps, bwd = ( base - down ) / gp.eps;
      if ( gp.kink_tolerance > 0.0 && std::abs( fwd - bwd ) > gp.kink_tolerance * std::max( { std::abs( fwd ), std::abs( bwd ), 1e-6 } ) )
      {
        ++skipped;
        continue;
      }
      double const num = ( up - down ) / ( 2.0 * gp.eps );
      double const ana = p->grad.data()[i];
      diff2 += ( num - ana ) * ( num - ana );
      a2 += ana * ana;
      n2 += num * num;
    }
    tensor_check tc{ p->name, std::sqrt( a2 ), std::sqrt( n2 ), 0.0, static_cast<uint32_t>( idx.size() ) - skipped, skipped };
    rep.entries += tc.entries;
    rep.skipped += skipped;
    double const denom = std::max( tc.analytic_norm, tc.numeric_norm );
    tc.rel_error = denom < gp.zero_floor ? 0.0 : std::sqrt( diff2 ) / denom;
    if ( rep.worst.empty() || tc.rel_error > rep.max_rel_error )
    {
      rep.max_rel_error = tc.rel_error;
      rep.worst = tc.name;
    }
    rep.tensors.push_back( std::move( tc ) );
  }
  return rep;
}

} // namespace mvg::nn
