#include <gtest/gtest.h>

#include <mvg/generators.hpp>
#include <mvg/sat/cnf.hpp>
#include <mvg/simulation.hpp>

using namespace mvg;
using namespace mvg::sat;

namespace
{

cnf pigeonhole( uint32_t pigeons, uint32_t holes )
{
  cnf f;
  auto x = [&]( uint32_t p, uint32_t h ) { return static_cast<int32_t>( p * holes + h + 1u ); };
  f.n_vars = pigeons * holes;
  for ( uint32_t p = 0; p < pigeons; ++p )
  {
    std::vector<int32_t> c;
    for ( uint32_t h = 0; h < holes; ++h )
      c.push_back( x( p, h ) );
    f.add_clause( c );
  }
  for ( uint32_t h = 0; h < holes; ++h )
    for ( uint32_t p = 0; p < pigeons; ++p )
      for ( uint32_t q = p + 1u; q < pigeons; ++q )
        f.add_clause( { -x( p, h ), -x( q, h ) } );
  return f;
}

bool brute_force( cnf const& f )
{
  for ( uint64_t a = 0; a < ( uint64_t( 1 ) << f.n_vars ); ++a )
  {
    std::vector<bool> m( f.n_vars + 1u );
    for ( uint32_t v = 1; v <= f.n_vars; ++v )
      m[v] = ( a >> ( v - 1u ) ) & 1u;
    if ( satisfies( f, m ) )
      return true;
  }
  return false;
}

} // namespace

TEST( solver, trivial )
{
  solver s;
  auto x = s.new_var(), y = s.new_var();
  s.add_clause( { make_lit( x ) } );
  EXPECT_FALSE( s.add_clause( { make_lit( x, true ) } ) );
  EXPECT_EQ( s.solve(), status::unsat );

  solver t;
  x = t.new_var();
  y = t.new_var();
  t.add_clause( { make_lit( x ), make_lit( y ) } );
  t.add_clause( { make_lit( x, true ) } );
  ASSERT_EQ( t.solve(), status::sat );
  EXPECT_TRUE( t.model_value( y ) );
  EXPECT_FALSE( t.model_value( x ) );
}

TEST( solver, pigeonhole )
{
  EXPECT_EQ( solve( pigeonhole( 4, 3 ) ).result, status::unsat );
  EXPECT_EQ( solve( pigeonhole( 5, 4 ) ).result, status::unsat );
  EXPECT_EQ( solve( pigeonhole( 4, 4 ) ).result, status::sat );
}

TEST( solver, budget_and_assumptions )
{
  EXPECT_EQ( solve( pigeonhole( 8, 7 ), {}, 10 ).result, status::resource_out );

  solver s;
  auto a = s.new_var(), b = s.new_var();
  s.add_clause( { make_lit( a, true ), make_lit( b ) } );
  EXPECT_EQ( s.solve( { make_lit( a ), make_lit( b, true ) } ), status::unsat );
  EXPECT_TRUE( s.okay() );
  EXPECT_EQ( s.solve( { make_lit( a ) } ), status::sat );
  EXPECT_TRUE( s.model_value( b ) );
}

TEST( solver, random_3cnf_against_brute_force )
{
  rng gen( 77 );
  for ( int i = 0; i < 200; ++i )
  {
    cnf f;
    f.n_vars = 3u + gen.below( 12 );
    uint32_t const m = static_cast<uint32_t>( f.n_vars * ( 3.0 + gen.uniform() * 2.5 ) );
    for ( uint32_t k = 0; k < m; ++k )
    {
      std::vector<int32_t> c;
      for ( int j = 0; j < 3; ++j )
      {
        int32_t const v = 1 + static_cast<int32_t>( gen.below( f.n_vars ) );
        c.push_back( gen.coin() ? v : -v );
      }
      f.add_clause( c );
    }
    auto const r = solve( f );
    EXPECT_EQ( r.result == status::sat, brute_force( f ) );
    if ( r.result == status::sat )
    {
      EXPECT_TRUE( satisfies( f, r.model ) );
    }
  }
}

TEST( cnf, gate_encodings )
{
  circuit_builder b( view_kind::xmg );
  auto a = b.create_pi(), x = b.create_pi(), y = b.create_pi();
  auto n = b.create_not( a );
  auto g = b.create_and( a, x );
  auto m = b.create_maj( a, x, y );
  b.create_po( n );
  b.create_po( g );
  b.create_po( m );
  auto c = b.build();
  node_index rn[] = { n };
  EXPECT_EQ( tseitin_encode( c, rn ).clauses.size(), 2u );
  node_index rg[] = { g };
  EXPECT_EQ( tseitin_encode( c, rg ).clauses.size(), 3u );
  node_index rm[] = { m };
  auto f = tseitin_encode( c, rm );
  ASSERT_EQ( f.clauses.size(), 6u );
  /* every input row: CNF satisfiable exactly with output = majority bit */
  for ( uint32_t row = 0; row < 8; ++row )
    for ( int out = 0; out < 2; ++out )
    {
      std::vector<bool> model( f.n_vars + 1u );
      for ( uint32_t i = 0; i < 3; ++i )
        model[static_cast<uint32_t>( f.pi_vars[i] )] = ( row >> i ) & 1u;
      model[static_cast<uint32_t>( f.var_map[m] )] = out;
      EXPECT_EQ( satisfies( f, model ), bool( out ) == bool( ( 0xE8u >> row ) & 1u ) );
    }
}

TEST( cnf, miters )
{
  circuit_builder b( view_kind::mig );
  auto a = b.create_pi(), x = b.create_pi();
  auto g = b.create_and( a, x ), h = b.create_or( a, x );
  b.create_po( g );
  b.create_po( h );
  auto c = b.build();
  EXPECT_EQ( solve( build_miter( c, g, c, g ) ).result, status::unsat );
  auto r = solve( build_miter( c, g, c, h ) );
  ASSERT_EQ( r.result, status::sat );
  EXPECT_NE( r.pi_assignment[0], r.pi_assignment[1] );

  auto d = make_degraded_maj_demo();
  EXPECT_EQ( solve( build_miter( d.mig, d.mig_maj, d.aig, d.aig_and ) ).result, status::unsat );

  EXPECT_THROW( build_miter( c, g, make_and_tree( 4 ), 4 ), error );
  EXPECT_NE( to_dimacs( build_miter( c, g, c, h ) ).find( "p cnf" ), std::string::npos );
}

TEST( cnf, miter_agrees_with_truth_tables )
{
  rng gen( 12 );
  for ( int i = 0; i < 10; ++i )
  {
    auto c = random_circuit( gen, view_kind::xmg, 1u + gen.below( 6 ), 30, 3 );
    auto const s = simulate_exhaustive( c );
    for ( node_index u = 0; u < c.size(); u += 3 )
      for ( node_index v = u; v < c.size(); v += 5 )
      {
        bool const equal = std::ranges::equal( s.bits( u ), s.bits( v ) );
        auto const r = solve( build_miter( c, u, c, v ) );
        EXPECT_EQ( r.result == status::unsat, equal );
      }
  }
}
