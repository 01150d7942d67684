/*!
  \file lut_mapping.hpp
  \brief Depth-oriented 4-LUT mapping with priority cuts
*/

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"

namespace mvg
{

struct lut_map_params
{
  uint32_t cut_size = 4u;  /* leaves per cut, at most 4 */
  uint32_t cut_limit = 8u; /* priority cuts kept per node */
};

namespace detail
{

struct cut
{
  std::array<node_index, 4> leaves{};
  uint8_t size = 0u;
  uint32_t arrival = 0u;
  float area_flow = 0.0f;

  std::span<node_index const> span() const noexcept { return { leaves.data(), size }; }

  bool dominates( cut const& o ) const noexcept
  {
    if ( size > o.size )
      return false;
    return std::includes( o.leaves.begin(), o.leaves.begin() + o.size, leaves.begin(), leaves.begin() + size );
  }

  bool operator==( cut const& o ) const noexcept
  {
    return size == o.size && std::equal( leaves.begin(), leaves.begin() + size, o.leaves.begin() );
  }
};

inline bool merge_cuts( cut const& a, cut const& b, cut& out, uint32_t k )
{
  uint32_t i = 0, j = 0, n = 0;
  while ( i < a.size || j < b.size )
  {
    node_index v;
    if ( j >= b.size || ( i < a.size && a.leaves[i] < b.leaves[j] ) )
      v = a.leaves[i++];
    else if ( i >= a.size || b.leaves[j] < a.leaves[i] )
      v = b.leaves[j++];
    else
    {
      v = a.leaves[i++];
      ++j;
    }
    if ( n == k )
      return false;
    out.leaves[n++] = v;
  }
  out.size = static_cast<uint8_t>( n );
  return true;
}

/*! \brief Function of `root` over the cut leaves (variable i = leaf i), as a 16-bit table. */
inline uint16_t cut_function( circuit const& c, node_index root, std::span<node_index const> leaves,
                              std::vector<uint16_t>& scratch, std::vector<uint32_t>& stamp, uint32_t epoch )
{
  static constexpr uint16_t proj[4] = { 0xaaaa, 0xcccc, 0xf0f0, 0xff00 };
  for ( uint32_t i = 0; i < leaves.size(); ++i )
  {
    scratch[leaves[i]] = proj[i];
    stamp[leaves[i]] = epoch;
  }
  /* iterative post-order evaluation of the cone above the leaves */
  std::vector<node_index> stack{ root };
  while ( !stack.empty() )
  {
    auto const n = stack.back();
    if ( stamp[n] == epoch )
    {
      stack.pop_back();
      continue;
    }
    bool ready = true;
    for ( auto f : c.fanins( n ) )
      if ( stamp[f] != epoch )
      {
        stack.push_back( f );
        ready = false;
      }
    if ( !ready )
      continue;
    stack.pop_back();
    auto const fi = c.fanins( n );
    uint16_t v = 0;
    switch ( c.gate( n ) )
    {
    case gate_type::const0: v = 0; break;
    case gate_type::const1: v = 0xffff; break;
    case gate_type::not_: v = static_cast<uint16_t>( ~scratch[fi[0]] ); break;
    case gate_type::and2: v = scratch[fi[0]] & scratch[fi[1]]; break;
    case gate_type::po: v = scratch[fi[0]]; break;
    default: throw error( errc::illegal_gate_for_view, "LUT mapping expects an AIG" );
    }
    scratch[n] = v;
    stamp[n] = epoch;
  }
  return scratch[root];
}

} // namespace detail

/*! \brief Covers an AIG with LUTs of at most 4 inputs, minimizing depth and then area flow.

  LUT truth tables are stored over the LUT's own fanins (bit i of the row
  index is fanin i).  Constant cones become CONST0/CONST1 nodes.
*/
inline circuit lut_map( circuit const& aig, lut_map_params const& ps = {} )
{
  using detail::cut;
  if ( aig.view() != view_kind::aig )
    throw error( errc::illegal_gate_for_view, "lut_map expects an AIG" );
  uint32_t const k = std::clamp( ps.cut_size, 1u, 4u );
  auto const n = aig.size();

  std::vector<std::vector<cut>> cuts( n );
  std::vector<uint32_t> arrival( n, 0u );
  std::vector<float> flow( n, 0.0f );
  std::vector<cut> best( n );

  auto trivial = [&]( node_index v ) {
    cut t;
    t.leaves[0] = v;
    t.size = 1u;
    t.arrival = arrival[v];
    t.area_flow = flow[v];
    return t;
  };
  auto evaluate = [&]( cut& ct ) {
    if ( ct.size == 0u )
    {
      ct.arrival = 0u;
      ct.area_flow = 0.0f;
      return;
    }
    uint32_t a = 0;
    float af = 1.0f;
    for ( auto l : ct.span() )
    {
      a = std::max( a, arrival[l] );
      af += flow[l] / static_cast<float>( std::max( 1u, aig.fanout_count( l ) ) );
    }
    ct.arrival = a + 1u;
    ct.area_flow = af;
  };
  auto better = []( cut const& a, cut const& b ) {
    if ( a.arrival != b.arrival )
      return a.arrival < b.arrival;
    if ( a.area_flow != b.area_flow )
      return a.area_flow < b.area_flow;
    if ( a.size != b.size )
      return a.size < b.size;
    return std::lexicographical_compare( a.leaves.begin(), a.leaves.begin() + a.size, b.leaves.begin(), b.leaves.begin() + b.size );
  };

  for ( node_index v = 0; v < n; ++v )
  {
    auto const g = aig.gate( v );
    if ( g == gate_type::pi )
      continue;
    if ( g == gate_type::const0 || g == gate_type::const1 )
    {
      cut empty; /* constants need no leaves */
      cuts[v] = { empty };
      best[v] = empty;
      continue;
    }
    if ( g == gate_type::po )
      continue;

    auto const fi = aig.fanins( v );
    /* candidate sets per fanin: stored cuts plus the trivial cut */
    auto options = [&]( node_index f ) {
      std::vector<cut> o = cuts[f];
      if ( aig.gate( f ) != gate_type::const0 && aig.gate( f ) != gate_type::const1 )
        o.push_back( trivial( f ) );
      return o;
    };
    std::vector<cut> cand;
    auto add = [&]( cut ct ) {
      for ( auto const& e : cand )
        if ( e.dominates( ct ) )
          return;
      std::erase_if( cand, [&]( cut const& e ) { return ct.dominates( e ); } );
      evaluate( ct );
      cand.push_back( ct );
    };
    cut fanin_cut;
    if ( fi.size() == 1u )
    {
      for ( auto const& a : options( fi[0] ) )
        add( a );
      if ( aig.gate( fi[0] ) != gate_type::const0 )
        fanin_cut = trivial( fi[0] );
    }
    else
    {
      auto const oa = options( fi[0] ), ob = options( fi[1] );
      for ( auto const& a : oa )
        for ( auto const& b : ob )
        {
          cut m;
          if ( detail::merge_cuts( a, b, m, k ) )
            add( m );
        }
      detail::merge_cuts( options( fi[0] ).back(), options( fi[1] ).back(), fanin_cut, 4u );
    }
    std::sort( cand.begin(), cand.end(), better );
    if ( cand.size() > ps.cut_limit )
      cand.resize( ps.cut_limit );
    /* the fanin cut guarantees a feasible choice even when priority pruning dropped it */
    evaluate( fanin_cut );
    if ( std::find( cand.begin(), cand.end(), fanin_cut ) == cand.end() )
    {
      if ( cand.size() == ps.cut_limit )
        cand.pop_back();
      cand.push_back( fanin_cut );
      std::sort( cand.begin(), cand.end(), better );
    }
    best[v] = cand.front();
    arrival[v] = best[v].arrival;
    flow[v] = best[v].area_flow / static_cast<float>( std::max( 1u, aig.fanout_count( v ) ) );
    cuts[v] = std::move( cand );
  }

  /* cover from the POs */
  std::vector<bool> needed( n, false );
  for ( auto po : aig.pos() )
    needed[aig.fanins( po )[0]] = true;
  for ( node_index v = n; v-- > 0; )
  {
    if ( !needed[v] )
      continue;
    auto const g = aig.gate( v );
    if ( g == gate_type::pi || g == gate_type::po )
      continue;
    for ( auto l : best[v].span() )
      needed[l] = true;
  }

  circuit_builder b( view_kind::lut );
  std::vector<node_index> map( n, UINT32_MAX );
  for ( auto p : aig.pis() )
    map[p] = b.create_pi();
  std::vector<uint16_t> scratch( n, 0u );
  std::vector<uint32_t> stamp( n, 0u );
  uint32_t epoch = 0;
  for ( node_index v = 0; v < n; ++v )
  {
    auto const g = aig.gate( v );
    if ( g == gate_type::pi )
      continue;
    if ( g == gate_type::po )
    {
      b.create_po( map[aig.fanins( v )[0]] );
      continue;
    }
    if ( !needed[v] )
      continue;
    auto const& ct = best[v];
    auto const tt = detail::cut_function( aig, v, ct.span(), scratch, stamp, ++epoch );
    if ( ct.size == 0u )
    {
      map[v] = ( tt & 1u ) ? b.create_const1_gate() : b.create_const0();
      continue;
    }
    std::vector<node_index> fis;
    for ( auto l : ct.span() )
      fis.push_back( map[l] );
    uint32_t const rows = 1u << ct.size;
    auto const local = static_cast<uint16_t>( rows == 16u ? tt : ( tt & ( ( 1u << rows ) - 1u ) ) );
    map[v] = b.create_lut( std::move( fis ), local );
  }
  return b.build( aig.name() );
}

} // namespace mvg
