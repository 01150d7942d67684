/*!
  \file npn4_db.hpp
  \brief Gate-level templates for every NPN class of 4-input functions

  One template per (view, class representative).  A template is a small
  circuit with PIs 0..3, CONST0 at node 4 and a single PO, stored as an MVNL
  block.  Templates come from exact synthesis with up to 6 steps; classes
  that need more are built by Shannon expansion on the top support variable.
*/

#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"
#include "exact_synthesis.hpp"
#include "mvnl.hpp"
#include "npn.hpp"
#include "simulation.hpp"

#ifndef MVG_DATA_DIR
#define MVG_DATA_DIR "data"
#endif

namespace mvg
{

inline constexpr std::array<view_kind, 4> template_views = { view_kind::aig, view_kind::mig, view_kind::xag, view_kind::xmg };

struct npn_template
{
  circuit net;
  uint32_t steps = 0u;
  bool shannon = false;
};

/*! \brief 16-bit table of a template's PO over its four inputs. */
inline uint16_t template_function( circuit const& t )
{
  auto const s = simulate_exhaustive( t );
  auto const po = t.pos().at( 0 );
  uint64_t const w = s.bits( po )[0];
  /* fewer than 4 PIs would shrink the table; templates always keep 4 */
  return static_cast<uint16_t>( w & 0xffffu );
}

namespace detail
{

inline circuit_builder template_builder( view_kind v, std::vector<node_index>& inputs )
{
  circuit_builder b( v, true );
  inputs.clear();
  for ( int i = 0; i < 4; ++i )
    inputs.push_back( b.create_pi() );
  b.create_const0();
  return b;
}

inline node_index emit_mux( circuit_builder& b, view_kind v, node_index sel, node_index hi, node_index lo )
{
  switch ( v )
  {
  case view_kind::xag:
  case view_kind::xmg:
  {
    auto const d = b.create_xor( lo, hi );
    auto const g = v == view_kind::xag ? b.create_and( sel, d ) : b.create_maj( sel, d, b.create_const0() );
    return b.create_xor( lo, g );
  }
  case view_kind::mig:
  {
    auto const zero = b.create_const0();
    auto const t1 = b.create_maj( sel, hi, zero );
    auto const t0 = b.create_maj( b.create_not( sel ), lo, zero );
    return b.create_maj( t1, t0, b.create_not( zero ) );
  }
  default:
  {
    auto const t1 = b.create_and( sel, hi );
    auto const t0 = b.create_and( b.create_not( sel ), lo );
    return b.create_not( b.create_and( b.create_not( t1 ), b.create_not( t0 ) ) );
  }
  }
}

inline node_index emit_function( circuit_builder& b, view_kind v, uint16_t func, std::vector<node_index> const& in,
                                 uint32_t max_steps, uint64_t budget, uint32_t& steps, bool& shannon )
{
  auto r = exact_synthesis( func, 4u, v, max_steps, budget );
  if ( r.best )
  {
    steps += static_cast<uint32_t>( r.best->steps.size() );
    return emit_chain( b, *r.best, in );
  }
  shannon = true;
  uint32_t top = 0;
  for ( uint32_t i = 0; i < 4u; ++i )
  {
    bool depends = false;
    for ( uint32_t x = 0; x < 16u; ++x )
      depends |= ( ( func >> x ) & 1u ) != ( ( func >> ( x ^ ( 1u << i ) ) ) & 1u );
    if ( depends )
      top = i;
  }
  uint16_t c0 = 0, c1 = 0;
  for ( uint32_t x = 0; x < 16u; ++x )
  {
    uint32_t const x0 = x & ~( 1u << top ), x1 = x | ( 1u << top );
    if ( ( func >> x0 ) & 1u )
      c0 |= static_cast<uint16_t>( 1u << x );
    if ( ( func >> x1 ) & 1u )
      c1 |= static_cast<uint16_t>( 1u << x );
  }
  auto const lo = emit_function( b, v, c0, in, max_steps, budget, steps, shannon );
  auto const hi = emit_function( b, v, c1, in, max_steps, budget, steps, shannon );
  steps += 3u;
  return emit_mux( b, v, in[top], hi, lo );
}

} // namespace detail

/*! \brief Builds the template of `func` in view `v` from scratch. */
inline npn_template synthesize_template( view_kind v, uint16_t func, uint32_t max_steps = 6u, uint64_t budget = 200000u )
{
  std::vector<node_index> in;
  auto b = detail::template_builder( v, in );
  npn_template t;
  auto const out = detail::emit_function( b, v, func, in, max_steps, budget, t.steps, t.shannon );
  b.create_po( out );
  t.net = b.build();
  return t;
}

class npn4_db
{
public:
  npn4_db() = default;

  /*! \brief Parses a database text and self-checks every template by exhaustive simulation. */
  static npn4_db parse( std::string_view text )
  {
    npn4_db db;
    std::istringstream in{ std::string( text ) };
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while ( std::getline( in, line ) )
    {
      ++line_no;
      if ( line.empty() || line[0] == '#' )
        continue;
      if ( !header )
      {
        if ( !line.starts_with( "NPN4DB v1" ) )
          throw error( errc::bad_header, "template database header" );
        header = true;
        continue;
      }
      std::istringstream ls( line );
      std::string tag, view, hex, steps, kind;
      ls >> tag >> view >> hex >> steps >> kind;
      auto const vk = view_from_name( view );
      if ( tag != "CLASS" || !vk || !steps.starts_with( "steps=" ) )
        throw error( errc::bad_token, "line " + std::to_string( line_no ) + ": expected CLASS <view> <hex> steps=<n>" );
      auto const func = static_cast<uint16_t>( std::stoul( hex, nullptr, 16 ) );
      std::string block;
      while ( std::getline( in, line ) && line != "END" )
      {
        ++line_no;
        block += line + '\n';
      }
      ++line_no;
      npn_template t{ parse_mvnl( block ), static_cast<uint32_t>( std::stoul( steps.substr( 6 ) ) ), kind == "shannon" };
      if ( t.net.num_pis() != 4u || t.net.num_pos() != 1u || template_function( t.net ) != func )
        throw error( errc::schema_violation, "template " + std::string( view ) + " " + hex + " does not realize its class" );
      db.templates_[key( *vk, func )] = std::move( t );
    }
    if ( !header )
      throw error( errc::bad_header, "empty template database" );
    return db;
  }

  static npn4_db load( std::string const& path )
  {
    std::ifstream f( path, std::ios::binary );
    if ( !f )
      throw error( errc::invalid_argument, "cannot open template database " + path );
    std::stringstream ss;
    ss << f.rdbuf();
    return parse( ss.str() );
  }

  /*! \brief Process-wide database loaded from the data directory. */
  static npn4_db const& builtin()
  {
    static npn4_db const db = load( std::string( MVG_DATA_DIR ) + "/npn4_db.txt" );
    return db;
  }

  std::string serialize() const
  {
    std::string out = "# 4-input NPN class templates, one MVNL block per (view, class representative)\nNPN4DB v1 " +
                      std::to_string( templates_.size() ) + "\n";
    for ( auto const& [k, t] : templates_ )
    {
      char hex[8];
      std::snprintf( hex, sizeof( hex ), "%04x", static_cast<unsigned>( k & 0xffffu ) );
      out += "CLASS " + std::string( view_name( static_cast<view_kind>( k >> 16u ) ) ) + " " + hex + " steps=" +
             std::to_string( t.steps ) + ( t.shannon ? " shannon" : " exact" ) + "\n";
      out += write_mvnl( t.net );
      out += "END\n";
    }
    return out;
  }

  void insert( view_kind v, uint16_t func, npn_template t ) { templates_[key( v, func )] = std::move( t ); }

  npn_template const* find( view_kind v, uint16_t representative ) const
  {
    auto it = templates_.find( key( v, representative ) );
    return it == templates_.end() ? nullptr : &it->second;
  }

  npn_template const& at( view_kind v, uint16_t representative ) const
  {
    if ( auto const* t = find( v, representative ) )
      return *t;
    char hex[8];
    std::snprintf( hex, sizeof( hex ), "%04x", static_cast<unsigned>( representative ) );
    throw error( errc::missing_template, std::string( view_name( v ) ) + " class " + hex );
  }

  std::size_t size() const noexcept { return templates_.size(); }
  std::size_t size( view_kind v ) const
  {
    std::size_t n = 0;
    for ( auto const& [k, t] : templates_ )
      n += ( k >> 16u ) == static_cast<uint32_t>( v );
    return n;
  }

private:
  static uint32_t key( view_kind v, uint16_t f ) { return ( static_cast<uint32_t>( v ) << 16u ) | f; }

  std::map<uint32_t, npn_template> templates_;
};

/*! \brief Instantiates the template realizing `func` over `fanins` (at most 4; missing inputs read CONST0).

  Signals carry a pending complement that is pushed through XOR, through MAJ
  by self-duality and through AND/OR by De Morgan when the dual gate exists,
  so NOT nodes appear only where a gate input really needs one.
*/
inline node_index instantiate_npn( circuit_builder& b, npn4_db const& db, view_kind v, uint16_t func,
                                   std::vector<node_index> const& fanins )
{
  auto const& cls = npn4_classes::instance();
  auto const rep = cls.representative( func );
  auto const& tr = cls.transform_of( func );
  auto const& tpl = db.at( v, rep ).net;

  struct signal
  {
    node_index node;
    bool neg;
  };
  auto plain = [&]( node_index x, bool neg ) {
    if ( b.gate( x ) == gate_type::not_ )
      return signal{ b.fanins( x )[0], !neg };
    return signal{ x, neg };
  };
  auto materialize = [&]( signal s ) { return s.neg ? b.create_not( s.node ) : s.node; };

  /* f(x) = out ^ c(y), y_i = x_{perm[i]} ^ neg_i : template input i reads fanin perm[i] */
  std::vector<signal> map( tpl.size(), signal{ 0u, false } );
  signal result{ 0u, false };
  for ( node_index n = 0; n < tpl.size(); ++n )
  {
    auto const fi = tpl.fanins( n );
    auto const g = tpl.gate( n );
    switch ( g )
    {
    case gate_type::pi:
    {
      auto const i = static_cast<uint32_t>( tpl.pi_position( n ) );
      auto const src = tr.perm[i];
      map[n] = plain( src < fanins.size() ? fanins[src] : b.create_const0(), ( tr.neg >> i ) & 1u );
      break;
    }
    case gate_type::const0: map[n] = { b.create_const0(), false }; break;
    case gate_type::const1: map[n] = { b.create_const0(), true }; break;
    case gate_type::not_: map[n] = { map[fi[0]].node, !map[fi[0]].neg }; break;
    case gate_type::po: result = map[fi[0]]; break;
    case gate_type::xor2:
    {
      auto const x = map[fi[0]], y = map[fi[1]];
      map[n] = { b.create_xor( x.node, y.node ), x.neg != y.neg };
      break;
    }
    case gate_type::maj3:
    {
      std::array<signal, 3> in{ map[fi[0]], map[fi[1]], map[fi[2]] };
      bool const flip = int( in[0].neg ) + in[1].neg + in[2].neg >= 2;
      std::vector<node_index> ins;
      for ( auto s : in )
        ins.push_back( materialize( { s.node, s.neg != flip } ) );
      map[n] = { b.create_maj( ins[0], ins[1], ins[2] ), flip };
      break;
    }
    case gate_type::and2:
    case gate_type::or2:
    {
      auto const x = map[fi[0]], y = map[fi[1]];
      auto const dual = g == gate_type::and2 ? gate_type::or2 : gate_type::and2;
      if ( x.neg && y.neg && view_allows( v, dual ) )
        map[n] = { b.create_gate( dual, { x.node, y.node } ), true };
      else
        map[n] = { b.create_gate( g, { materialize( x ), materialize( y ) } ), false };
      break;
    }
    default: throw error( errc::illegal_gate_for_view, "unexpected gate in template" );
    }
  }
  result.neg = result.neg != tr.out;
  return materialize( result );
}

} // namespace mvg
