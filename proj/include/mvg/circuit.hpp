/*!
  \file circuit.hpp
  \brief Typed gate-level DAG shared by all circuit views

  A circuit is an immutable, topologically ordered node array.  Inversion is
  always an explicit NOT node; primary outputs are unary PO marker nodes.
*/

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "error.hpp"

namespace mvg
{

using node_index = uint32_t;

enum class gate_type : uint8_t
{
  pi,
  const0,
  const1,
  not_,
  and2,
  or2,
  xor2,
  maj3,
  lut4,
  po
};

inline constexpr std::array<gate_type, 10> all_gate_types = {
    gate_type::pi, gate_type::const0, gate_type::const1, gate_type::not_, gate_type::and2,
    gate_type::or2, gate_type::xor2, gate_type::maj3, gate_type::lut4, gate_type::po };

enum class view_kind : uint8_t
{
  aig,
  mig,
  xag,
  xmg,
  lut
};

inline constexpr std::array<view_kind, 4> gate_views = { view_kind::aig, view_kind::mig, view_kind::xag, view_kind::xmg };

constexpr std::string_view gate_name( gate_type g )
{
  switch ( g )
  {
  case gate_type::pi: return "PI";
  case gate_type::const0: return "CONST0";
  case gate_type::const1: return "CONST1";
  case gate_type::not_: return "NOT";
  case gate_type::and2: return "AND2";
  case gate_type::or2: return "OR2";
  case gate_type::xor2: return "XOR2";
  case gate_type::maj3: return "MAJ3";
  case gate_type::lut4: return "LUT4";
  case gate_type::po: return "PO";
  }
  return "?";
}

inline std::optional<gate_type> gate_from_name( std::string_view s )
{
  for ( auto g : all_gate_types )
    if ( gate_name( g ) == s )
      return g;
  return std::nullopt;
}

constexpr std::string_view view_name( view_kind v )
{
  switch ( v )
  {
  case view_kind::aig: return "AIG";
  case view_kind::mig: return "MIG";
  case view_kind::xag: return "XAG";
  case view_kind::xmg: return "XMG";
  case view_kind::lut: return "LUT";
  }
  return "?";
}

inline std::optional<view_kind> view_from_name( std::string_view s )
{
  for ( auto v : { view_kind::aig, view_kind::mig, view_kind::xag, view_kind::xmg, view_kind::lut } )
  {
    auto const n = view_name( v );
    if ( n.size() == s.size() && std::equal( n.begin(), n.end(), s.begin(), []( char a, char b ) { return a == std::toupper( static_cast<unsigned char>( b ) ); } ) )
      return v;
  }
  return std::nullopt;
}

constexpr uint32_t min_arity( gate_type g )
{
  switch ( g )
  {
  case gate_type::pi:
  case gate_type::const0:
  case gate_type::const1: return 0;
  case gate_type::not_:
  case gate_type::po:
  case gate_type::lut4: return 1;
  case gate_type::and2:
  case gate_type::or2:
  case gate_type::xor2: return 2;
  case gate_type::maj3: return 3;
  }
  return 0;
}

constexpr uint32_t max_arity( gate_type g )
{
  return g == gate_type::lut4 ? 4u : min_arity( g );
}

/*! \brief Whether `view` admits gate `g`.  PI/PO/constants are admitted everywhere. */
constexpr bool view_allows( view_kind view, gate_type g )
{
  switch ( g )
  {
  case gate_type::pi:
  case gate_type::po:
  case gate_type::const0:
  case gate_type::const1: return true;
  case gate_type::not_: return view != view_kind::lut;
  case gate_type::and2: return view != view_kind::lut;
  case gate_type::or2: return view == view_kind::mig || view == view_kind::xmg;
  case gate_type::xor2: return view == view_kind::xag || view == view_kind::xmg;
  case gate_type::maj3: return view == view_kind::mig || view == view_kind::xmg;
  case gate_type::lut4: return view == view_kind::lut;
  }
  return false;
}

/*! \brief Unvalidated gate description used as builder input. */
struct raw_gate
{
  gate_type gate;
  std::vector<node_index> fanins{};
  uint16_t truth = 0u; /* LUT4 only: low 2^k bits over k fanins */
};

struct node
{
  gate_type gate = gate_type::const0;
  uint8_t num_fanins = 0u;
  std::array<node_index, 4> fanin{};
  uint16_t truth = 0u;

  std::span<node_index const> fanins() const noexcept { return { fanin.data(), num_fanins }; }

  bool operator==( node const& other ) const noexcept
  {
    return gate == other.gate && num_fanins == other.num_fanins &&
           std::equal( fanin.begin(), fanin.begin() + num_fanins, other.fanin.begin() ) &&
           ( gate != gate_type::lut4 || truth == other.truth );
  }
};

class circuit;
circuit build_circuit( view_kind view, std::vector<raw_gate> const& gates, std::vector<node_index> const& pis,
                       std::vector<node_index> const& pos, std::string name = {} );

class circuit
{
public:
  circuit() = default;

  view_kind view() const noexcept { return view_; }
  uint32_t size() const noexcept { return static_cast<uint32_t>( nodes_.size() ); }
  node const& at( node_index n ) const { return nodes_.at( n ); }
  node const& operator[]( node_index n ) const noexcept { return nodes_[n]; }
  gate_type gate( node_index n ) const noexcept { return nodes_[n].gate; }
  std::span<node_index const> fanins( node_index n ) const noexcept { return nodes_[n].fanins(); }
  std::vector<node> const& nodes() const noexcept { return nodes_; }

  std::vector<node_index> const& pis() const noexcept { return pis_; }
  std::vector<node_index> const& pos() const noexcept { return pos_; }
  uint32_t num_pis() const noexcept { return static_cast<uint32_t>( pis_.size() ); }
  uint32_t num_pos() const noexcept { return static_cast<uint32_t>( pos_.size() ); }

  /* position of a PI node in pis(), or -1 */
  int32_t pi_position( node_index n ) const noexcept { return pi_pos_[n]; }

  uint32_t level( node_index n ) const noexcept { return levels_[n]; }
  std::vector<uint32_t> const& levels() const noexcept { return levels_; }
  uint32_t depth() const noexcept { return depth_; }

  uint32_t fanout_count( node_index n ) const noexcept { return fanout_counts_[n]; }
  std::vector<node_index> const& dangling() const noexcept { return dangling_; }

  std::string const& name() const noexcept { return name_; }
  void set_name( std::string name ) { name_ = std::move( name ); }

  /* free-form metadata (AIGER symbols and comments); carries no semantics */
  std::vector<std::string> const& annotations() const noexcept { return annotations_; }
  void set_annotations( std::vector<std::string> a ) { annotations_ = std::move( a ); }

  uint32_t num_gates() const noexcept
  {
    return static_cast<uint32_t>( std::count_if( nodes_.begin(), nodes_.end(), []( auto const& nd ) {
      return nd.gate != gate_type::pi && nd.gate != gate_type::po && nd.gate != gate_type::const0 && nd.gate != gate_type::const1;
    } ) );
  }

  /*! \brief Same view, nodes, fanins, LUT tables and PI/PO lists (names ignored). */
  bool structurally_equal( circuit const& other ) const noexcept
  {
    return view_ == other.view_ && nodes_ == other.nodes_ && pis_ == other.pis_ && pos_ == other.pos_;
  }

private:
  friend circuit build_circuit( view_kind, std::vector<raw_gate> const&, std::vector<node_index> const&,
                                std::vector<node_index> const&, std::string );

  view_kind view_ = view_kind::aig;
  std::vector<node> nodes_;
  std::vector<node_index> pis_;
  std::vector<node_index> pos_;
  std::vector<int32_t> pi_pos_;
  std::vector<uint32_t> levels_;
  std::vector<uint32_t> fanout_counts_;
  std::vector<node_index> dangling_;
  uint32_t depth_ = 0u;
  std::string name_;
  std::vector<std::string> annotations_;
};

struct level_map
{
  std::vector<uint32_t> levels;
  uint32_t depth = 0u;
};

/*! \brief Level recurrence over a topologically ordered node array.

  PIs and constants sit at level 0, every logic gate at one more than its
  deepest fanin.  PO marker nodes inherit the level of their driver so that
  the circuit depth is the deepest PO driver.
*/
inline level_map levelize( std::span<node const> nodes, std::span<node_index const> pos )
{
  level_map lm;
  lm.levels.assign( nodes.size(), 0u );
  for ( node_index i = 0; i < nodes.size(); ++i )
  {
    auto const& nd = nodes[i];
    if ( nd.num_fanins == 0u )
      continue;
    uint32_t lvl = 0u;
    for ( auto f : nd.fanins() )
      lvl = std::max( lvl, lm.levels[f] );
    lm.levels[i] = nd.gate == gate_type::po ? lvl : lvl + 1u;
  }
  for ( auto p : pos )
    lm.depth = std::max( lm.depth, lm.levels[p] );
  return lm;
}

inline level_map levelize( circuit const& c )
{
  return levelize( c.nodes(), c.pos() );
}

/*! \brief Validates, stably topologically sorts, and levelizes a gate list.

  Nodes are reordered with Kahn's algorithm using the input index as the
  priority, so an already topological input keeps its indices.
*/
inline circuit build_circuit( view_kind view, std::vector<raw_gate> const& gates, std::vector<node_index> const& pis,
                              std::vector<node_index> const& pos, std::string name )
{
  auto const n = static_cast<node_index>( gates.size() );

  for ( node_index i = 0; i < n; ++i )
  {
    auto const& g = gates[i];
    if ( !view_allows( view, g.gate ) )
      throw error( errc::illegal_gate_for_view, std::string( gate_name( g.gate ) ) + " at node " + std::to_string( i ) +
                                                    " in view " + std::string( view_name( view ) ) );
    if ( g.fanins.size() < min_arity( g.gate ) || g.fanins.size() > max_arity( g.gate ) )
      throw error( errc::arity_mismatch, std::string( gate_name( g.gate ) ) + " at node " + std::to_string( i ) + " has " +
                                             std::to_string( g.fanins.size() ) + " fanins" );
    for ( auto f : g.fanins )
    {
      if ( f >= n )
        throw error( errc::index_out_of_range, "fanin " + std::to_string( f ) + " of node " + std::to_string( i ) );
      if ( gates[f].gate == gate_type::po )
        throw error( errc::invalid_argument, "PO node " + std::to_string( f ) + " used as fanin" );
    }
    if ( g.gate == gate_type::lut4 && g.fanins.size() < 4u && ( g.truth >> ( 1u << g.fanins.size() ) ) != 0u )
      throw error( errc::invalid_argument, "LUT4 truth table at node " + std::to_string( i ) + " exceeds its fanin count" );
  }

  /* stable Kahn order: smallest ready input index first */
  std::vector<uint32_t> pending( n, 0u );
  std::vector<std::vector<node_index>> fanouts( n );
  for ( node_index i = 0; i < n; ++i )
  {
    pending[i] = static_cast<uint32_t>( gates[i].fanins.size() );
    for ( auto f : gates[i].fanins )
      fanouts[f].push_back( i );
  }
  std::priority_queue<node_index, std::vector<node_index>, std::greater<>> ready;
  for ( node_index i = 0; i < n; ++i )
    if ( pending[i] == 0u )
      ready.push( i );
  std::vector<node_index> order;
  order.reserve( n );
  while ( !ready.empty() )
  {
    auto const i = ready.top();
    ready.pop();
    order.push_back( i );
    for ( auto o : fanouts[i] )
      if ( --pending[o] == 0u )
        ready.push( o );
  }
  if ( order.size() != n )
  {
    node_index culprit = 0;
    for ( node_index i = 0; i < n; ++i )
      if ( pending[i] != 0u )
      {
        culprit = i;
        break;
      }
    throw error( errc::cycle_detected, "node " + std::to_string( culprit ) + " lies on a cycle" );
  }
  std::vector<node_index> new_index( n );
  for ( node_index k = 0; k < n; ++k )
    new_index[order[k]] = k;

  circuit c;
  c.view_ = view;
  c.name_ = std::move( name );
  c.nodes_.resize( n );
  for ( node_index k = 0; k < n; ++k )
  {
    auto const& g = gates[order[k]];
    auto& nd = c.nodes_[k];
    nd.gate = g.gate;
    nd.num_fanins = static_cast<uint8_t>( g.fanins.size() );
    for ( uint32_t j = 0; j < g.fanins.size(); ++j )
      nd.fanin[j] = new_index[g.fanins[j]];
    nd.truth = g.gate == gate_type::lut4 ? g.truth : 0u;
  }

  c.pi_pos_.assign( n, -1 );
  for ( auto p : pis )
  {
    if ( p >= n )
      throw error( errc::index_out_of_range, "PI index " + std::to_string( p ) );
    auto const k = new_index[p];
    if ( c.nodes_[k].gate != gate_type::pi || c.pi_pos_[k] != -1 )
      throw error( errc::invalid_argument, "PI list entry " + std::to_string( p ) + " is not a unique PI node" );
    c.pi_pos_[k] = static_cast<int32_t>( c.pis_.size() );
    c.pis_.push_back( k );
  }
  std::vector<bool> is_listed_po( n, false );
  for ( auto p : pos )
  {
    if ( p >= n )
      throw error( errc::index_out_of_range, "PO index " + std::to_string( p ) );
    auto const k = new_index[p];
    if ( c.nodes_[k].gate != gate_type::po || is_listed_po[k] )
      throw error( errc::invalid_argument, "PO list entry " + std::to_string( p ) + " is not a unique PO node" );
    is_listed_po[k] = true;
    c.pos_.push_back( k );
  }
  for ( node_index k = 0; k < n; ++k )
  {
    if ( c.nodes_[k].gate == gate_type::pi && c.pi_pos_[k] == -1 )
      throw error( errc::invalid_argument, "PI node " + std::to_string( order[k] ) + " missing from PI list" );
    if ( c.nodes_[k].gate == gate_type::po && !is_listed_po[k] )
      throw error( errc::invalid_argument, "PO node " + std::to_string( order[k] ) + " missing from PO list" );
  }

  auto lm = levelize( c.nodes_, c.pos_ );
  c.levels_ = std::move( lm.levels );
  c.depth_ = lm.depth;

  c.fanout_counts_.assign( n, 0u );
  for ( auto const& nd : c.nodes_ )
    for ( auto f : nd.fanins() )
      ++c.fanout_counts_[f];
  for ( node_index k = 0; k < n; ++k )
    if ( c.nodes_[k].gate != gate_type::po && c.fanout_counts_[k] == 0u )
      c.dangling_.push_back( k );
  return c;
}

/*! \brief Raw gate list of an existing circuit (for rebuilding). */
inline std::vector<raw_gate> to_raw_gates( circuit const& c )
{
  std::vector<raw_gate> gates;
  gates.reserve( c.size() );
  for ( auto const& nd : c.nodes() )
    gates.push_back( raw_gate{ nd.gate, { nd.fanins().begin(), nd.fanins().end() }, nd.truth } );
  return gates;
}

/*! \brief Nodes reachable backward from `root` within `depth_limit` edges (sorted). */
inline std::vector<node_index> fanin_cone( circuit const& c, node_index root, std::optional<uint32_t> depth_limit = std::nullopt )
{
  if ( root >= c.size() )
    throw error( errc::index_out_of_range, "cone root " + std::to_string( root ) );
  std::vector<uint32_t> dist( c.size(), UINT32_MAX );
  std::vector<node_index> frontier{ root };
  dist[root] = 0u;
  std::vector<node_index> cone{ root };
  uint32_t d = 0u;
  while ( !frontier.empty() && ( !depth_limit || d < *depth_limit ) )
  {
    std::vector<node_index> next;
    for ( auto n : frontier )
      for ( auto f : c.fanins( n ) )
        if ( dist[f] == UINT32_MAX )
        {
          dist[f] = d + 1u;
          next.push_back( f );
          cone.push_back( f );
        }
    frontier = std::move( next );
    ++d;
  }
  std::sort( cone.begin(), cone.end() );
  return cone;
}

/*! \brief Transitive fanin of a node set as a membership mask. */
inline std::vector<bool> transitive_fanin_mask( circuit const& c, std::span<node_index const> roots )
{
  std::vector<bool> mark( c.size(), false );
  for ( auto r : roots )
    mark[r] = true;
  for ( node_index i = c.size(); i-- > 0u; )
    if ( mark[i] )
      for ( auto f : c.fanins( i ) )
        mark[f] = true;
  return mark;
}

/*! \brief PI positions (indices into pis()) in the transitive fanin of `n`, ascending. */
inline std::vector<uint32_t> structural_support( circuit const& c, node_index n )
{
  node_index const roots[] = { n };
  auto const mark = transitive_fanin_mask( c, roots );
  std::vector<uint32_t> support;
  for ( uint32_t i = 0; i < c.num_pis(); ++i )
    if ( mark[c.pis()[i]] )
      support.push_back( i );
  return support;
}

/*! \brief Constant value of a node if it is CONST0, CONST1, or NOT(CONST0). */
inline std::optional<bool> constant_value( circuit const& c, node_index n )
{
  switch ( c.gate( n ) )
  {
  case gate_type::const0: return false;
  case gate_type::const1: return true;
  case gate_type::not_:
    if ( c.gate( c.fanins( n )[0] ) == gate_type::const0 )
      return true;
    if ( c.gate( c.fanins( n )[0] ) == gate_type::const1 )
      return false;
    return std::nullopt;
  default: return std::nullopt;
  }
}

/*! \brief Rewrites MAJ3 gates with a constant fanin into AND2 (constant 0) or OR2 (constant 1).

  Node indices are preserved; the constant node may become dangling.
*/
inline circuit retype_degraded_maj( circuit const& c )
{
  if ( !view_allows( c.view(), gate_type::maj3 ) )
    throw error( errc::invalid_argument, "view " + std::string( view_name( c.view() ) ) + " has no MAJ3 gates" );
  auto gates = to_raw_gates( c );
  for ( node_index i = 0; i < c.size(); ++i )
  {
    if ( gates[i].gate != gate_type::maj3 )
      continue;
    auto const fis = c.fanins( i );
    for ( uint32_t j = 0; j < 3u; ++j )
    {
      auto const cv = constant_value( c, fis[j] );
      if ( !cv )
        continue;
      std::vector<node_index> rest;
      for ( uint32_t t = 0; t < 3u; ++t )
        if ( t != j )
          rest.push_back( fis[t] );
      gates[i] = raw_gate{ *cv ? gate_type::or2 : gate_type::and2, rest };
      break;
    }
  }
  auto out = build_circuit( c.view(), gates, c.pis(), c.pos(), c.name() );
  out.set_annotations( c.annotations() );
  return out;
}

/*! \brief Incremental circuit construction in topological order.

  With structural hashing enabled, duplicate gates (commutative fanins
  compared as multisets) are merged and NOT(NOT(x)) folds to x.
*/
class circuit_builder
{
public:
  explicit circuit_builder( view_kind view, bool strash = false ) : view_( view ), strash_( strash ) {}

  node_index create_pi()
  {
    auto const n = push( raw_gate{ gate_type::pi } );
    pis_.push_back( n );
    return n;
  }

  node_index create_const0()
  {
    if ( !const0_ )
      const0_ = push( raw_gate{ gate_type::const0 } );
    return *const0_;
  }

  /* canonical constant 1 is NOT(CONST0) */
  node_index create_const1() { return create_not( create_const0() ); }

  /* explicit CONST1 node (used by LUT networks, which have no NOT gate) */
  node_index create_const1_gate()
  {
    if ( !const1_ )
      const1_ = push( raw_gate{ gate_type::const1 } );
    return *const1_;
  }

  node_index create_not( node_index a )
  {
    if ( strash_ && gates_[a].gate == gate_type::not_ )
      return gates_[a].fanins[0];
    return hashed( gate_type::not_, { a } );
  }

  node_index create_and( node_index a, node_index b ) { return hashed( gate_type::and2, { a, b } ); }
  node_index create_or( node_index a, node_index b ) { return hashed( gate_type::or2, { a, b } ); }
  node_index create_xor( node_index a, node_index b ) { return hashed( gate_type::xor2, { a, b } ); }
  node_index create_maj( node_index a, node_index b, node_index c ) { return hashed( gate_type::maj3, { a, b, c } ); }

  node_index create_lut( std::vector<node_index> fanins, uint16_t truth )
  {
    return push( raw_gate{ gate_type::lut4, std::move( fanins ), truth } );
  }

  node_index create_gate( gate_type g, std::vector<node_index> fanins )
  {
    return hashed( g, std::move( fanins ) );
  }

  node_index create_po( node_index a )
  {
    auto const n = push( raw_gate{ gate_type::po, { a } } );
    pos_.push_back( n );
    return n;
  }

  gate_type gate( node_index n ) const { return gates_.at( n ).gate; }
  std::vector<node_index> const& fanins( node_index n ) const { return gates_.at( n ).fanins; }
  uint32_t size() const noexcept { return static_cast<uint32_t>( gates_.size() ); }
  std::vector<node_index> const& pis() const noexcept { return pis_; }

  circuit build( std::string name = {} ) const { return build_circuit( view_, gates_, pis_, pos_, std::move( name ) ); }

private:
  node_index push( raw_gate g )
  {
    gates_.push_back( std::move( g ) );
    return static_cast<node_index>( gates_.size() - 1u );
  }

  node_index hashed( gate_type g, std::vector<node_index> fanins )
  {
    if ( !strash_ )
      return push( raw_gate{ g, std::move( fanins ) } );
    uint64_t key = static_cast<uint64_t>( g ) * 0x9e3779b97f4a7c15ull;
    auto sorted = fanins;
    std::sort( sorted.begin(), sorted.end() );
    for ( auto f : sorted )
      key = ( key ^ f ) * 0x100000001b3ull + 0x7f4a7c15ull;
    auto [lo, hi] = table_.equal_range( key );
    for ( auto it = lo; it != hi; ++it )
    {
      auto const& cand = gates_[it->second];
      if ( cand.gate != g )
        continue;
      auto cs = cand.fanins;
      std::sort( cs.begin(), cs.end() );
      if ( cs == sorted )
        return it->second;
    }
    auto const n = push( raw_gate{ g, std::move( fanins ) } );
    table_.emplace( key, n );
    return n;
  }

  view_kind view_;
  bool strash_;
  std::vector<raw_gate> gates_;
  std::vector<node_index> pis_;
  std::vector<node_index> pos_;
  std::optional<node_index> const0_;
  std::optional<node_index> const1_;
  std::unordered_multimap<uint64_t, node_index> table_;
};

/*! \brief Copy of `c` restricted to nodes reachable from POs, plus all PIs. */
inline circuit remove_dangling( circuit const& c )
{
  auto const keep = transitive_fanin_mask( c, c.pos() );
  std::vector<node_index> remap( c.size(), UINT32_MAX );
  std::vector<raw_gate> gates;
  for ( node_index i = 0; i < c.size(); ++i )
  {
    if ( !keep[i] && c.gate( i ) != gate_type::pi )
      continue;
    raw_gate g{ c.gate( i ), {}, c[i].truth };
    for ( auto f : c.fanins( i ) )
      g.fanins.push_back( remap[f] );
    remap[i] = static_cast<node_index>( gates.size() );
    gates.push_back( std::move( g ) );
  }
  std::vector<node_index> pis, pos;
  for ( auto p : c.pis() )
    pis.push_back( remap[p] );
  for ( auto p : c.pos() )
    pos.push_back( remap[p] );
  return build_circuit( c.view(), gates, pis, pos, c.name() );
}

} // namespace mvg
