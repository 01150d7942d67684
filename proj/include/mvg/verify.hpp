/*!
  \file verify.hpp
  \brief PO-by-PO functional comparison of two views of one design
*/

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"
#include "sat/cnf.hpp"
#include "simulation.hpp"

namespace mvg
{

enum class po_status
{
  equal,
  differ,
  unknown /* solver budget exhausted */
};

struct po_check
{
  uint32_t po = 0u;
  po_status status = po_status::equal;
  std::vector<bool> witness; /* PI assignment by position when status == differ */
};

struct verify_report
{
  view_kind view_a = view_kind::aig;
  view_kind view_b = view_kind::aig;
  bool exhaustive = false;
  std::vector<po_check> checks;

  bool all_equal() const noexcept
  {
    return std::all_of( checks.begin(), checks.end(), []( auto const& c ) { return c.status == po_status::equal; } );
  }
  std::vector<uint32_t> failing() const
  {
    std::vector<uint32_t> f;
    for ( auto const& c : checks )
      if ( c.status != po_status::equal )
        f.push_back( c.po );
    return f;
  }
};

struct verify_params
{
  uint32_t exhaustive_pi_limit = 12u;
  uint64_t conflict_budget = 100000u;
};

/*! \brief Compares every PO of `a` with the same-index PO of `b` (PIs tied by position). */
inline verify_report verify_views( circuit const& a, circuit const& b, verify_params const& ps = {} )
{
  if ( a.num_pis() != b.num_pis() )
    throw error( errc::pi_count_mismatch, std::to_string( a.num_pis() ) + " vs " + std::to_string( b.num_pis() ) );
  if ( a.num_pos() != b.num_pos() )
    throw error( errc::schema_violation, "views disagree on PO count" );
  verify_report rep;
  rep.view_a = a.view();
  rep.view_b = b.view();
  rep.exhaustive = a.num_pis() <= ps.exhaustive_pi_limit;

  if ( rep.exhaustive )
  {
    auto const sa = simulate_exhaustive( a ), sb = simulate_exhaustive( b );
    for ( uint32_t i = 0; i < a.num_pos(); ++i )
    {
      po_check c;
      c.po = i;
      auto const wa = sa.bits( a.pos()[i] ), wb = sb.bits( b.pos()[i] );
      for ( uint32_t w = 0; w < wa.size() && c.status == po_status::equal; ++w )
        if ( auto const d = wa[w] ^ wb[w] )
        {
          c.status = po_status::differ;
          uint32_t const pattern = w * 64u + static_cast<uint32_t>( std::countr_zero( d ) );
          for ( uint32_t k = 0; k < a.num_pis(); ++k )
            c.witness.push_back( ( pattern >> k ) & 1u );
        }
      rep.checks.push_back( std::move( c ) );
    }
    return rep;
  }

  for ( uint32_t i = 0; i < a.num_pos(); ++i )
  {
    po_check c;
    c.po = i;
    auto const r = sat::solve( sat::build_miter( a, a.pos()[i], b, b.pos()[i] ), {}, ps.conflict_budget );
    if ( r.result == sat::status::sat )
    {
      c.status = po_status::differ;
      c.witness = r.pi_assignment;
    }
    else if ( r.result == sat::status::resource_out )
      c.status = po_status::unknown;
    rep.checks.push_back( std::move( c ) );
  }
  return rep;
}

} // namespace mvg
