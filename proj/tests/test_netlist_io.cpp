#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <mvg/aiger.hpp>
#include <mvg/generators.hpp>
#include <mvg/mvnl.hpp>
#include <mvg/simulation.hpp>

using namespace mvg;

namespace
{

errc parse_error( std::string const& text )
{
  try
  {
    parse_aiger( text );
  }
  catch ( error const& e )
  {
    return e.code();
  }
  ADD_FAILURE() << "no error for: " << text;
  return errc::invalid_argument;
}

std::string slurp( std::string const& path )
{
  std::ifstream in( path, std::ios::binary );
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST( aiger, buffer )
{
  auto c = parse_aiger( "aag 1 1 0 1 0\n2\n2\n" );
  EXPECT_EQ( c.num_pis(), 1u );
  EXPECT_EQ( c.num_pos(), 1u );
  EXPECT_EQ( c.num_gates(), 0u );
}

TEST( aiger, single_and )
{
  auto c = parse_aiger( "aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n" );
  EXPECT_EQ( c.num_gates(), 1u );
  EXPECT_EQ( c.depth(), 1u );
  auto const s = simulate_exhaustive( c );
  EXPECT_EQ( s.bits( c.pos()[0] )[0] & 0xf, 0x8u );
}

TEST( aiger, complemented_edges_and_constants )
{
  /* out0 = !(a & !b), out1 = constant 1 */
  auto c = parse_aiger( "aag 3 2 0 2 1\n2\n4\n7\n1\n6 5 2\n" );
  EXPECT_EQ( c.num_pos(), 2u );
  auto const s = simulate_exhaustive( c );
  EXPECT_EQ( s.bits( c.pos()[0] )[0] & 0xf, 0xdu );
  EXPECT_EQ( s.bits( c.pos()[1] )[0] & 0xf, 0xfu );
  auto const drv = c.fanins( c.pos()[1] )[0];
  EXPECT_EQ( c.gate( drv ), gate_type::not_ );
  EXPECT_EQ( c.gate( c.fanins( drv )[0] ), gate_type::const0 );
}

TEST( aiger, errors )
{
  EXPECT_EQ( parse_error( "aag 1 1 1 1 0\n2\n4 2\n2\n" ), errc::latches_unsupported );
  EXPECT_EQ( parse_error( "abc 1 1 0 1 0\n2\n2\n" ), errc::bad_header );
  EXPECT_EQ( parse_error( "" ), errc::bad_header );
  EXPECT_EQ( parse_error( "aag 3 2 0 1 1\n2\n4\n6\n" ), errc::truncated_file );
  EXPECT_EQ( parse_error( "aig 3 2 0 1 1\n6\n\x02" ), errc::truncated_file );
  EXPECT_EQ( parse_error( "aag 2 2 0 1 1\n2\n4\n6\n6 2 4\n" ), errc::bad_header );
}

TEST( aiger, symbols_preserved )
{
  auto c = parse_aiger( "aag 3 2 0 1 1\n2\n4\n6\n6 2 4\ni0 a\ni1 b\no0 y\nc\nhello\n" );
  ASSERT_EQ( c.annotations().size(), 5u );
  EXPECT_EQ( c.annotations()[0], "i0 a" );
  EXPECT_EQ( write_aiger( parse_aiger( write_aiger( c ) ) ), write_aiger( c ) );
}

TEST( aiger, ascii_binary_and_round_trip )
{
  rng gen( 21 );
  for ( int i = 0; i < 100; ++i )
  {
    random_aig_params p;
    p.num_pis = 2u + gen.below( 10 );
    p.num_ands = 1u + gen.below( 300 );
    p.max_pos = 1u + gen.below( 8 );
    auto c = random_aig( gen, p );
    auto const ascii = write_aiger( c, false );
    auto const bin = write_aiger( c, true );
    auto ca = parse_aiger( ascii );
    auto cb = parse_aiger( bin );
    EXPECT_TRUE( ca.structurally_equal( c ) );
    EXPECT_TRUE( cb.structurally_equal( ca ) );
    EXPECT_EQ( write_aiger( cb, true ), bin );
  }
}

TEST( mvnl, round_trip_all_views )
{
  rng gen( 22 );
  for ( auto v : { view_kind::aig, view_kind::mig, view_kind::xag, view_kind::xmg, view_kind::lut } )
    for ( int i = 0; i < 40; ++i )
    {
      auto c = random_circuit( gen, v, 1u + gen.below( 12 ), gen.below( 400 ), 1u + gen.below( 6 ) );
      auto const text = write_mvnl( c );
      auto back = parse_mvnl( text );
      EXPECT_TRUE( back.structurally_equal( c ) );
      EXPECT_EQ( write_mvnl( back ), text );
    }
}

TEST( mvnl, degraded_maj_demo_round_trip )
{
  auto d = make_degraded_maj_demo();
  auto const t = write_mvnl( d.mig );
  EXPECT_EQ( write_mvnl( parse_mvnl( t ) ), t );
}

TEST( mvnl, golden_xmg )
{
  auto const text = slurp( std::string( MVG_DATA_DIR ) + "/golden/xmg_small.mvnl" );
  auto c = parse_mvnl( text );
  EXPECT_EQ( c.view(), view_kind::xmg );
  EXPECT_EQ( write_mvnl( c ), text );
  auto const s = simulate_exhaustive( c );
  EXPECT_EQ( s.bits( 7 )[0] & 0xff, 0x96u );
  EXPECT_EQ( s.bits( 8 )[0] & 0xff, 0x17u );
}

TEST( mvnl, errors )
{
  auto code = []( std::string const& t ) {
    try
    {
      parse_mvnl( t );
    }
    catch ( error const& e )
    {
      return std::pair{ e.code(), std::string( e.what() ) };
    }
    return std::pair{ errc::invalid_argument, std::string() };
  };
  auto [c1, m1] = code( "MVNL v1 MIG 5 2 1\nPIS: 0 1\nPOS: 4\n0 PI\n1 PI\n2 CONST0\n3 MAJ3 0 1\n4 PO 3\n" );
  EXPECT_EQ( c1, errc::bad_token );
  EXPECT_NE( m1.find( "ArityMismatch" ), std::string::npos );
  EXPECT_EQ( code( "MVNL v1 AIG 3 1 1\nPIS: 0\nPOS: 2\n0 PI\n1 NOT 7\n2 PO 1\n" ).first, errc::index_out_of_range );
  EXPECT_EQ( code( "MVNL v1 AIG 3 1 1\nPIS: 0\nPOS: 2\n0 PI\n1 FOO 0\n2 PO 1\n" ).first, errc::bad_token );
  EXPECT_EQ( code( "MVNL v2 AIG 3 1 1\n" ).first, errc::bad_token );
}
