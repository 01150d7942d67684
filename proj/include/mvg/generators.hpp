/*!
  \file generators.hpp
  \brief Random circuit generators and small fixed fixtures
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "aiger.hpp"
#include "circuit.hpp"
#include "random.hpp"

namespace mvg
{

struct random_aig_params
{
  uint32_t num_pis = 8u;
  uint32_t num_ands = 100u;
  uint32_t max_pos = 8u;
  /* probability of drawing a fanin from the not-yet-used pool */
  double prefer_unused = 0.6;
  double complement = 0.5;
};

/*! \brief Random combinational AIG built through the AIGER literal model.

  Sinks beyond `max_pos` are merged by extra AND gates, so every gate lies
  in some PO cone.  The result goes through canonical AIGER
  materialization, hence write/parse round trips are exact.
*/
inline aiger_model random_aig_model( rng& gen, random_aig_params const& p )
{
  aiger_model m;
  uint32_t const n_in = std::max( p.num_pis, 2u );
  for ( uint32_t i = 0; i < n_in; ++i )
    m.inputs.push_back( 2u * ( i + 1u ) );

  std::vector<uint32_t> unused; /* variables without fanout */
  for ( uint32_t i = 1; i <= n_in; ++i )
    unused.push_back( i );
  uint32_t next_var = n_in + 1u;

  auto take = [&]( uint32_t exclude ) -> uint32_t {
    uint32_t v = 0;
    for ( int tries = 0; tries < 8; ++tries )
    {
      if ( !unused.empty() && gen.coin( p.prefer_unused ) )
        v = unused[gen.below( unused.size() )];
      else
        v = 1u + static_cast<uint32_t>( gen.below( next_var - 1u ) );
      if ( v != exclude )
        break;
    }
    if ( v == exclude )
      v = exclude == 1u ? 2u : exclude - 1u;
    auto it = std::find( unused.begin(), unused.end(), v );
    if ( it != unused.end() )
      unused.erase( it );
    return 2u * v + ( gen.coin( p.complement ) ? 1u : 0u );
  };

  auto add_and = [&]( uint32_t a, uint32_t b ) {
    uint32_t const lhs = 2u * next_var++;
    m.ands.push_back( { lhs, std::max( a, b ), std::min( a, b ) } );
    unused.push_back( lhs >> 1u );
  };

  for ( uint32_t k = 0; k < p.num_ands; ++k )
  {
    auto const a = take( 0u );
    auto const b = take( a >> 1u );
    add_and( a, b );
  }

  /* sinks: unused gate variables (PIs without fanout simply stay unused) */
  std::vector<uint32_t> sinks;
  for ( auto v : unused )
    if ( v > n_in )
      sinks.push_back( v );
  std::sort( sinks.begin(), sinks.end() );
  uint32_t const cap = std::max( p.max_pos, 1u );
  while ( sinks.size() > cap )
  {
    auto const a = 2u * sinks[0] + ( gen.coin( p.complement ) ? 1u : 0u );
    auto const b = 2u * sinks[1] + ( gen.coin( p.complement ) ? 1u : 0u );
    sinks.erase( sinks.begin(), sinks.begin() + 2 );
    uint32_t const lhs = 2u * next_var++;
    m.ands.push_back( { lhs, std::max( a, b ), std::min( a, b ) } );
    sinks.push_back( lhs >> 1u );
  }
  if ( sinks.empty() )
    sinks.push_back( next_var - 1u );
  for ( auto v : sinks )
    m.outputs.push_back( 2u * v + ( gen.coin( p.complement ) ? 1u : 0u ) );
  m.max_var = next_var - 1u;
  return m;
}

inline circuit random_aig( rng& gen, random_aig_params const& p, std::string name = {} )
{
  return circuit_from_aiger( random_aig_model( gen, p ), std::move( name ) );
}

/*! \brief Random circuit of any view using the view's full gate set. */
inline circuit random_circuit( rng& gen, view_kind view, uint32_t num_pis, uint32_t num_gates, uint32_t num_pos,
                               std::string name = {} )
{
  std::vector<gate_type> kinds;
  for ( auto g : { gate_type::not_, gate_type::and2, gate_type::or2, gate_type::xor2, gate_type::maj3, gate_type::lut4 } )
    if ( view_allows( view, g ) )
      kinds.push_back( g );

  circuit_builder b( view );
  std::vector<node_index> pool;
  for ( uint32_t i = 0; i < std::max( num_pis, 1u ); ++i )
    pool.push_back( b.create_pi() );
  if ( gen.coin( 0.3 ) )
    pool.push_back( view == view_kind::lut ? b.create_const1_gate() : b.create_const0() );

  for ( uint32_t k = 0; k < num_gates; ++k )
  {
    auto const g = kinds[gen.below( kinds.size() )];
    uint32_t arity = g == gate_type::lut4 ? 1u + static_cast<uint32_t>( gen.below( 4 ) ) : max_arity( g );
    std::vector<node_index> fis;
    for ( uint32_t j = 0; j < arity; ++j )
      fis.push_back( pool[gen.below( pool.size() )] );
    if ( g == gate_type::lut4 )
      pool.push_back( b.create_lut( fis, static_cast<uint16_t>( gen.next() & ( ( 1u << ( 1u << arity ) ) - 1u ) ) ) );
    else
      pool.push_back( b.create_gate( g, fis ) );
  }
  for ( uint32_t i = 0; i < std::max( num_pos, 1u ); ++i )
    b.create_po( pool[pool.size() - 1u - gen.below( std::min<std::size_t>( pool.size(), 4u * num_pos + 1u ) )] );
  return b.build( std::move( name ) );
}

/*! \brief AIG XOR from three ANDs and NOTs. */
inline node_index create_aig_xor( circuit_builder& b, node_index x, node_index y )
{
  auto const t1 = b.create_and( x, b.create_not( y ) );
  auto const t2 = b.create_and( b.create_not( x ), y );
  return b.create_not( b.create_and( b.create_not( t1 ), b.create_not( t2 ) ) );
}

/*! \brief Ripple-carry adder AIG with 2*bits PIs (a0 b0 a1 b1 ...) and bits+1 POs. */
inline circuit make_adder_aig( uint32_t bits )
{
  circuit_builder b( view_kind::aig, true );
  std::vector<node_index> a, c;
  for ( uint32_t i = 0; i < bits; ++i )
  {
    a.push_back( b.create_pi() );
    c.push_back( b.create_pi() );
  }
  std::vector<node_index> sum;
  node_index carry = 0;
  bool has_carry = false;
  for ( uint32_t i = 0; i < bits; ++i )
  {
    auto const p = create_aig_xor( b, a[i], c[i] );
    auto const g = b.create_and( a[i], c[i] );
    if ( !has_carry )
    {
      sum.push_back( p );
      carry = g;
      has_carry = true;
      continue;
    }
    sum.push_back( create_aig_xor( b, p, carry ) );
    auto const pc = b.create_and( p, carry );
    carry = b.create_not( b.create_and( b.create_not( g ), b.create_not( pc ) ) );
  }
  for ( auto s : sum )
    b.create_po( s );
  b.create_po( carry );
  return b.build( "adder" + std::to_string( bits ) );
}

/*! \brief PI followed by `n` NOT gates and one PO. */
inline circuit make_not_chain( uint32_t n )
{
  circuit_builder b( view_kind::aig );
  auto x = b.create_pi();
  for ( uint32_t i = 0; i < n; ++i )
    x = b.create_not( x );
  b.create_po( x );
  return b.build( "not_chain" + std::to_string( n ) );
}

/*! \brief Balanced AND tree over `n` PIs (n a power of two). */
inline circuit make_and_tree( uint32_t n )
{
  circuit_builder b( view_kind::aig );
  std::vector<node_index> layer;
  for ( uint32_t i = 0; i < n; ++i )
    layer.push_back( b.create_pi() );
  while ( layer.size() > 1u )
  {
    std::vector<node_index> next;
    for ( std::size_t i = 0; i + 1u < layer.size(); i += 2u )
      next.push_back( b.create_and( layer[i], layer[i + 1u] ) );
    if ( layer.size() % 2u )
      next.push_back( layer.back() );
    layer = std::move( next );
  }
  b.create_po( layer[0] );
  return b.build( "and_tree" + std::to_string( n ) );
}

/*! \brief Three-input demo: AIG with AND(a,b) and a second cone; MIG with the degraded MAJ(a,b,0).

  The MIG keeps its constant-fanin majority untouched, so labeling can pair
  the AIG AND node with a MAJ node whose third input is CONST0.
*/
struct degraded_maj_demo
{
  circuit aig;
  circuit mig;
  node_index aig_and;
  node_index mig_maj;
};

inline degraded_maj_demo make_degraded_maj_demo()
{
  degraded_maj_demo d;
  {
    circuit_builder b( view_kind::aig );
    auto const a = b.create_pi(), x = b.create_pi(), c = b.create_pi();
    d.aig_and = b.create_and( a, x );
    auto const t = b.create_and( d.aig_and, c );
    b.create_po( d.aig_and );
    b.create_po( b.create_not( t ) );
    d.aig = b.build( "degraded_maj_demo" );
  }
  {
    circuit_builder b( view_kind::mig );
    auto const a = b.create_pi(), x = b.create_pi(), c = b.create_pi();
    auto const zero = b.create_const0();
    d.mig_maj = b.create_maj( a, x, zero );
    auto const t = b.create_maj( d.mig_maj, c, zero );
    b.create_po( d.mig_maj );
    b.create_po( b.create_not( t ) );
    d.mig = b.build( "degraded_maj_demo" );
  }
  return d;
}

} // namespace mvg
