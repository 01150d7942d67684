/*!
  \file hier_tokenizer.hpp
  \brief Partition of a circuit into hops, subgraphs and the graph level

  Starting from each PO (in order), unassigned nodes of its transitive fanin
  are grouped into level bands measured backward from the PO.  Band b with
  stride q and depth l covers distances [b*q, b*q + l); distances that fall
  in a gap (q > l) stay with the band before the gap, and with q < l a node
  goes to the first band that covers it.  PIs and constants count as level 1
  for banding, so a PI joins the gates directly above it.
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"

namespace mvg
{

struct hierarchy_params
{
  uint32_t l = 8u;
  uint32_t q = 8u;
  uint32_t max_nodes_per_hop = 128u;
  uint32_t max_hops_per_subgraph = 5u;
};

struct hop
{
  uint32_t po = 0u;   /* PO position that anchors the hop */
  uint32_t band = 0u;
  std::vector<node_index> nodes;
};

struct subgraph
{
  uint32_t band = 0u;
  std::vector<uint32_t> hops;
};

struct token_hierarchy
{
  hierarchy_params params;
  uint32_t num_nodes = 0u;
  std::vector<hop> hops;
  std::vector<subgraph> subgraphs;
  std::vector<int32_t> node_to_hop; /* -1 when the node reaches no PO */
  std::vector<node_index> unassigned;
};

struct token_count
{
  uint32_t hops = 0u;
  uint32_t subgraphs = 0u;
  uint32_t graph = 1u;
  uint32_t total() const noexcept { return hops + subgraphs + graph; }
  bool operator==( token_count const& ) const = default;
};

inline uint32_t band_of( uint32_t dist, hierarchy_params const& ps )
{
  if ( ps.q >= ps.l )
    return dist / ps.q;
  return dist < ps.l ? 0u : ( dist - ps.l ) / ps.q + 1u;
}

inline token_hierarchy partition( circuit const& c, hierarchy_params const& ps = {} )
{
  if ( ps.l == 0u || ps.q == 0u || ps.max_nodes_per_hop == 0u || ps.max_hops_per_subgraph == 0u )
    throw error( errc::invalid_argument, "hierarchy parameters must be positive" );
  token_hierarchy h;
  h.params = ps;
  h.num_nodes = c.size();
  h.node_to_hop.assign( c.size(), -1 );
  std::vector<bool> assigned( c.size(), false );

  for ( uint32_t pi = 0; pi < c.num_pos(); ++pi )
  {
    auto const po = c.pos()[pi];
    auto const d_po = c.level( po );
    /* unassigned transitive fanin, found by DFS that stops at assigned nodes */
    std::vector<node_index> cone, stack{ po };
    while ( !stack.empty() )
    {
      auto const n = stack.back();
      stack.pop_back();
      if ( assigned[n] )
        continue;
      assigned[n] = true;
      cone.push_back( n );
      for ( auto f : c.fanins( n ) )
        if ( !assigned[f] )
          stack.push_back( f );
    }
    std::map<uint32_t, std::vector<node_index>> bands;
    for ( auto n : cone )
    {
      uint32_t const lv = std::max( c.level( n ), 1u );
      uint32_t const dist = d_po > lv ? d_po - lv : 0u;
      bands[band_of( dist, ps )].push_back( n );
    }
    for ( auto& [b, nodes] : bands )
    {
      std::sort( nodes.begin(), nodes.end(), [&]( node_index x, node_index y ) {
        return c.level( x ) != c.level( y ) ? c.level( x ) > c.level( y ) : x < y;
      } );
      for ( std::size_t s = 0; s < nodes.size(); s += ps.max_nodes_per_hop )
      {
        hop hp{ pi, b, {} };
        auto const e = std::min( nodes.size(), s + ps.max_nodes_per_hop );
        hp.nodes.assign( nodes.begin() + static_cast<std::ptrdiff_t>( s ), nodes.begin() + static_cast<std::ptrdiff_t>( e ) );
        for ( auto n : hp.nodes )
          h.node_to_hop[n] = static_cast<int32_t>( h.hops.size() );
        h.hops.push_back( std::move( hp ) );
      }
    }
  }

  std::map<uint32_t, std::vector<uint32_t>> by_band;
  for ( uint32_t i = 0; i < h.hops.size(); ++i )
    by_band[h.hops[i].band].push_back( i );
  for ( auto const& [b, ids] : by_band )
    for ( std::size_t s = 0; s < ids.size(); s += ps.max_hops_per_subgraph )
    {
      subgraph sg{ b, {} };
      auto const e = std::min( ids.size(), s + ps.max_hops_per_subgraph );
      sg.hops.assign( ids.begin() + static_cast<std::ptrdiff_t>( s ), ids.begin() + static_cast<std::ptrdiff_t>( e ) );
      h.subgraphs.push_back( std::move( sg ) );
    }

  for ( node_index n = 0; n < c.size(); ++n )
    if ( h.node_to_hop[n] < 0 )
      h.unassigned.push_back( n );
  return h;
}

inline token_count token_counts( token_hierarchy const& h )
{
  return { static_cast<uint32_t>( h.hops.size() ), static_cast<uint32_t>( h.subgraphs.size() ), 1u };
}

/*! \brief Nodes of subgraph j (union of its hops). */
inline std::vector<node_index> subgraph_nodes( token_hierarchy const& h, uint32_t j )
{
  std::vector<node_index> out;
  for ( auto i : h.subgraphs.at( j ).hops )
    out.insert( out.end(), h.hops[i].nodes.begin(), h.hops[i].nodes.end() );
  std::sort( out.begin(), out.end() );
  return out;
}

inline std::string write_hierarchy( token_hierarchy const& h )
{
  auto join = []( auto const& v ) {
    std::string s;
    for ( std::size_t i = 0; i < v.size(); ++i )
      s += ( i ? "," : "" ) + std::to_string( v[i] );
    return s;
  };
  auto const tc = token_counts( h );
  std::string out = "HIERARCHY v1 l=" + std::to_string( h.params.l ) + " q=" + std::to_string( h.params.q ) +
                    " max_hop=" + std::to_string( h.params.max_nodes_per_hop ) + " max_sub=" +
                    std::to_string( h.params.max_hops_per_subgraph ) + " nodes=" + std::to_string( h.num_nodes ) +
                    " tokens=" + std::to_string( tc.hops ) + "," + std::to_string( tc.subgraphs ) + ",1\n";
  for ( std::size_t i = 0; i < h.hops.size(); ++i )
    out += "HOP " + std::to_string( i ) + " band=" + std::to_string( h.hops[i].band ) + " po=" + std::to_string( h.hops[i].po ) +
           " nodes=" + join( h.hops[i].nodes ) + "\n";
  std::vector<uint32_t> all;
  for ( std::size_t j = 0; j < h.subgraphs.size(); ++j )
  {
    out += "SUB " + std::to_string( j ) + " band=" + std::to_string( h.subgraphs[j].band ) + " hops=" + join( h.subgraphs[j].hops ) + "\n";
    all.push_back( static_cast<uint32_t>( j ) );
  }
  out += "GRAPH subgraphs=" + join( all ) + "\n";
  out += "UNASSIGNED nodes=" + join( h.unassigned ) + "\n";
  return out;
}

} // namespace mvg
