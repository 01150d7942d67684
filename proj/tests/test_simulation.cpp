#include <gtest/gtest.h>

#include <cmath>

#include <mvg/generators.hpp>
#include <mvg/simulation.hpp>

using namespace mvg;

namespace
{

/* reference evaluation of one node under a full PI assignment, row by row */
std::vector<bool> eval_row( circuit const& c, uint64_t row )
{
  std::vector<bool> v( c.size() );
  for ( node_index n = 0; n < c.size(); ++n )
  {
    auto const f = c.fanins( n );
    switch ( c.gate( n ) )
    {
    case gate_type::pi: v[n] = ( row >> c.pi_position( n ) ) & 1u; break;
    case gate_type::const0: v[n] = false; break;
    case gate_type::const1: v[n] = true; break;
    case gate_type::not_: v[n] = !v[f[0]]; break;
    case gate_type::po: v[n] = v[f[0]]; break;
    case gate_type::and2: v[n] = v[f[0]] && v[f[1]]; break;
    case gate_type::or2: v[n] = v[f[0]] || v[f[1]]; break;
    case gate_type::xor2: v[n] = v[f[0]] != v[f[1]]; break;
    case gate_type::maj3: v[n] = ( v[f[0]] + v[f[1]] + v[f[2]] ) >= 2; break;
    case gate_type::lut4:
    {
      uint32_t idx = 0;
      for ( uint32_t j = 0; j < f.size(); ++j )
        idx |= uint32_t( v[f[j]] ) << j;
      v[n] = ( c[n].truth >> idx ) & 1u;
      break;
    }
    }
  }
  return v;
}

circuit maj_circuit()
{
  circuit_builder b( view_kind::mig );
  auto a = b.create_pi(), x = b.create_pi(), y = b.create_pi();
  b.create_po( b.create_maj( a, x, y ) );
  return b.build();
}

} // namespace

TEST( simulation, gate_semantics_against_row_evaluation )
{
  rng gen( 31 );
  for ( auto v : { view_kind::aig, view_kind::mig, view_kind::xag, view_kind::xmg, view_kind::lut } )
    for ( int i = 0; i < 10; ++i )
    {
      auto c = random_circuit( gen, v, 1u + gen.below( 8 ), 50, 3 );
      auto const s = simulate_exhaustive( c );
      for ( uint64_t row = 0; row < s.n_patterns; ++row )
      {
        auto const ref = eval_row( c, row );
        for ( node_index n = 0; n < c.size(); ++n )
          ASSERT_EQ( s.bit( n, static_cast<uint32_t>( row ) ), ref[n] );
      }
    }
}

TEST( simulation, degraded_maj_matches_and )
{
  auto d = make_degraded_maj_demo();
  auto const sa = simulate( d.aig, 1024, 5 );
  auto const sm = simulate( d.mig, 1024, 5 );
  EXPECT_TRUE( std::ranges::equal( sa.bits( d.aig_and ), sm.bits( d.mig_maj ) ) );
}

TEST( simulation, xor_self_is_zero )
{
  circuit_builder b( view_kind::xag );
  auto a = b.create_pi();
  auto x = b.create_xor( a, a );
  b.create_po( x );
  auto const s = simulate( b.build(), 128, 1 );
  for ( auto w : s.bits( x ) )
    EXPECT_EQ( w, 0u );
}

TEST( simulation, exhaustive_and_probabilities )
{
  circuit_builder b( view_kind::xag );
  auto a = b.create_pi(), x = b.create_pi();
  auto g = b.create_and( a, x );
  auto h = b.create_xor( a, x );
  b.create_po( g );
  b.create_po( h );
  auto c = b.build();
  auto const s = simulate_exhaustive( c );
  EXPECT_EQ( s.n_patterns, 4u );
  EXPECT_EQ( s.bits( g )[0], 0x8u );
  auto const p = signal_probability( s );
  EXPECT_DOUBLE_EQ( p[g], 0.25 );
  EXPECT_DOUBLE_EQ( p[h], 0.5 );
}

TEST( simulation, spp_binomial_bound )
{
  circuit_builder b( view_kind::aig );
  auto a = b.create_pi(), x = b.create_pi(), y = b.create_pi();
  auto g = b.create_and( b.create_and( a, x ), y );
  b.create_po( g );
  auto const s = simulate( b.build(), 15040, 2024 );
  auto const p = signal_probability( s );
  double const sigma = std::sqrt( 0.125 * 0.875 / 15000.0 );
  EXPECT_LT( std::abs( p[g] - 0.125 ), 3.0 * sigma );
}

TEST( simulation, determinism_and_stimulus_sharing )
{
  rng gen( 4 );
  auto c = random_circuit( gen, view_kind::xmg, 8, 100, 4 );
  auto const s1 = simulate( c, 512, 99 ), s2 = simulate( c, 512, 99 ), s3 = simulate( c, 512, 100 );
  EXPECT_EQ( s1.words, s2.words );
  EXPECT_EQ( s1.stimulus_id, s2.stimulus_id );
  EXPECT_NE( s1.stimulus_id, s3.stimulus_id );
  /* PI words depend only on (seed, PI position, word) */
  auto const pats = random_pi_patterns( 8, 512, 99 );
  for ( uint32_t i = 0; i < 8; ++i )
    EXPECT_TRUE( std::ranges::equal( s1.bits( c.pis()[i] ), pats[i] ) );
  EXPECT_THROW( simulate( c, 100, 1 ), error );
}

TEST( truth_table, exhaustive )
{
  circuit_builder b( view_kind::aig );
  auto a = b.create_pi();
  auto n = b.create_not( a );
  b.create_po( n );
  auto c = b.build();
  auto t = exhaustive_truth_table( c, n );
  EXPECT_EQ( t.num_vars, 1u );
  EXPECT_EQ( t.words[0], 0b01u );

  auto m = maj_circuit();
  EXPECT_EQ( exhaustive_truth_table( m, 3 ).words[0], 0b11101000u );
  EXPECT_THROW( exhaustive_truth_table( make_and_tree( 32 ), make_and_tree( 32 ).pos()[0] ), error );
  try
  {
    auto big = make_and_tree( 32 );
    exhaustive_truth_table( big, big.pos()[0] );
  }
  catch ( error const& e )
  {
    EXPECT_EQ( e.code(), errc::support_too_large );
  }
}

TEST( truth_table, support_restriction )
{
  /* node depending on PIs 1 and 3 of 4: table is over 2 variables in PI order */
  circuit_builder b( view_kind::aig );
  std::vector<node_index> p;
  for ( int i = 0; i < 4; ++i )
    p.push_back( b.create_pi() );
  auto g = b.create_and( p[3], b.create_not( p[1] ) );
  b.create_po( g );
  auto t = exhaustive_truth_table( b.build(), g );
  EXPECT_EQ( t.num_vars, 2u );
  EXPECT_EQ( t.words[0], 0b0100u );
}

TEST( truth_table, distance )
{
  auto m = maj_circuit();
  auto t = exhaustive_truth_table( m, 3 );
  EXPECT_DOUBLE_EQ( truth_table_distance( t, t ), 0.0 );
  EXPECT_DOUBLE_EQ( truth_table_distance( t, ~t ), 1.0 );

  circuit_builder b( view_kind::mig );
  auto a = b.create_pi(), x = b.create_pi();
  auto g = b.create_and( a, x ), h = b.create_or( a, x );
  b.create_po( g );
  b.create_po( h );
  auto c = b.build();
  EXPECT_DOUBLE_EQ( truth_table_distance( exhaustive_truth_table( c, g ), exhaustive_truth_table( c, h ) ), 0.5 );
  EXPECT_THROW( truth_table_distance( t, exhaustive_truth_table( c, g ) ), error );
}

TEST( fingerprint, polarity_and_collisions )
{
  circuit_builder b( view_kind::mig );
  auto a = b.create_pi(), x = b.create_pi();
  auto g = b.create_and( a, x ), h = b.create_or( a, x ), ng = b.create_not( g );
  b.create_po( g );
  b.create_po( h );
  b.create_po( ng );
  auto c = b.build();
  auto const s = simulate( c, 64, 1 );
  auto const fg = fingerprint( s, g ), fh = fingerprint( s, h ), fn = fingerprint( s, ng );
  EXPECT_EQ( fg.canonical, fn.canonical );
  EXPECT_NE( fg.complemented, fn.complemented );
  EXPECT_NE( fg.hash, fn.hash );
  EXPECT_NE( fg.canonical, fh.canonical );
  EXPECT_EQ( fingerprint( simulate( c, 64, 1 ), g ).hash, fg.hash );
}

TEST( simulation, agrees_with_truth_tables_small_support )
{
  rng gen( 8 );
  for ( int i = 0; i < 20; ++i )
  {
    auto c = random_circuit( gen, view_kind::xmg, 1u + gen.below( 10 ), 60, 4 );
    auto const s = simulate_exhaustive( c );
    for ( node_index n = 0; n < c.size(); ++n )
    {
      auto const t = exhaustive_truth_table( c, n );
      auto const sup = structural_support( c, n );
      for ( uint32_t row = 0; row < s.n_patterns; ++row )
      {
        uint64_t idx = 0;
        for ( uint32_t j = 0; j < sup.size(); ++j )
          idx |= uint64_t( ( row >> sup[j] ) & 1u ) << j;
        ASSERT_EQ( s.bit( n, row ), t.bit( idx ) );
      }
    }
  }
}
