/*!
  \file lut_resyn.hpp
  \brief Re-expresses a LUT network in a target gate basis using NPN templates
*/

#pragma once

#include <vector>

#include "circuit.hpp"
#include "error.hpp"
#include "npn.hpp"
#include "npn4_db.hpp"

namespace mvg
{

/*! \brief Replaces each LUT, in topological order, by its class template in `target`.

  Instantiation is structurally hashed across LUTs.  Constant-fanin
  majorities are retyped to AND/OR afterwards and unused nodes are removed.
*/
inline circuit lut_resyn( circuit const& luts, view_kind target, npn4_db const& db = npn4_db::builtin() )
{
  if ( luts.view() != view_kind::lut )
    throw error( errc::illegal_gate_for_view, "lut_resyn expects a LUT network" );
  if ( target == view_kind::lut )
    throw error( errc::invalid_argument, "lut_resyn target must be a gate view" );

  circuit_builder b( target, true );
  std::vector<node_index> map( luts.size(), 0u );
  for ( auto p : luts.pis() )
    map[p] = b.create_pi();
  for ( node_index v = 0; v < luts.size(); ++v )
  {
    auto const fi = luts.fanins( v );
    switch ( luts.gate( v ) )
    {
    case gate_type::pi: break;
    case gate_type::const0: map[v] = b.create_const0(); break;
    case gate_type::const1: map[v] = b.create_const1(); break;
    case gate_type::po: b.create_po( map[fi[0]] ); break;
    case gate_type::lut4:
    {
      std::vector<node_index> ins;
      for ( auto f : fi )
        ins.push_back( map[f] );
      auto const func = extend_to_4( luts[v].truth, static_cast<uint32_t>( fi.size() ) );
      map[v] = instantiate_npn( b, db, target, func, ins );
      break;
    }
    default: throw error( errc::illegal_gate_for_view, "unexpected gate in LUT network" );
    }
  }
  auto c = b.build( luts.name() );
  if ( view_allows( target, gate_type::maj3 ) )
    c = retype_degraded_maj( c );
  return remove_dangling( c );
}

} // namespace mvg
