#include <gtest/gtest.h>

#include <functional>

#include <mvg/equivalence.hpp>
#include <mvg/exact_synthesis.hpp>
#include <mvg/generators.hpp>
#include <mvg/lut_mapping.hpp>
#include <mvg/lut_resyn.hpp>
#include <mvg/npn.hpp>
#include <mvg/npn4_db.hpp>
#include <mvg/simulation.hpp>
#include <mvg/verify.hpp>

using namespace mvg;

namespace
{

uint16_t po_function( circuit const& c, uint32_t po = 0 )
{
  auto const s = simulate_exhaustive( c );
  uint16_t f = 0;
  for ( uint32_t p = 0; p < ( 1u << c.num_pis() ); ++p )
    if ( s.bit( c.pos()[po], p ) )
      f |= uint16_t( 1u << p );
  return extend_to_4( f, c.num_pis() );
}

std::size_t count_gate( circuit const& c, gate_type g )
{
  std::size_t n = 0;
  for ( node_index i = 0; i < c.size(); ++i )
    n += c.gate( i ) == g;
  return n;
}

circuit single_gate_aig( uint32_t pis, std::function<node_index( circuit_builder&, std::vector<node_index> const& )> f )
{
  circuit_builder b( view_kind::aig );
  std::vector<node_index> in;
  for ( uint32_t i = 0; i < pis; ++i )
    in.push_back( b.create_pi() );
  b.create_po( f( b, in ) );
  return b.build();
}

} // namespace

TEST( npn, class_count_and_representatives )
{
  auto const& cls = npn4_classes::instance();
  EXPECT_EQ( cls.representatives().size(), 222u );
  for ( auto r : cls.representatives() )
    EXPECT_EQ( cls.representative( r ), r );
  EXPECT_EQ( cls.representative( 0xffff ), 0x0000 );
  EXPECT_EQ( cls.representative( 0x8000 ), cls.representative( 0x0001 ) );
}

TEST( npn, transform_reaches_representative )
{
  auto const& cls = npn4_classes::instance();
  for ( uint32_t f = 0; f < 65536u; f += 7u )
  {
    auto const t = cls.transform_of( uint16_t( f ) );
    EXPECT_EQ( apply_npn( uint16_t( f ), t ), cls.representative( uint16_t( f ) ) );
  }
}

TEST( npn, inverse_undoes_transform )
{
  rng gen( 5 );
  auto const& all = npn_transforms();
  EXPECT_EQ( all.size(), 768u );
  for ( int i = 0; i < 2000; ++i )
  {
    auto const f = static_cast<uint16_t>( gen.below( 65536 ) );
    auto const& t = all[gen.below( 768 )];
    EXPECT_EQ( apply_npn( apply_npn( f, t ), npn4_classes::inverse( t ) ), f );
  }
}

TEST( npn, extend_to_4 )
{
  EXPECT_EQ( extend_to_4( 0x8, 2 ), 0x8888 );
  EXPECT_EQ( extend_to_4( 0x1, 0 ), 0xffff );
  EXPECT_EQ( extend_to_4( 0x0, 0 ), 0x0000 );
  EXPECT_EQ( extend_to_4( 0xe8, 3 ), 0xe8e8 );
  EXPECT_EQ( extend_to_4( 0x2, 1 ), 0xaaaa );
}

TEST( exact_synthesis, small_functions_are_minimal )
{
  /* AND over two inputs: one step in every basis */
  for ( auto v : template_views )
  {
    auto r = exact_synthesis( 0x8888, 4, v, 4, 0 );
    ASSERT_TRUE( r.best );
    EXPECT_EQ( r.best->steps.size(), 1u ) << view_name( v );
    EXPECT_EQ( simulate_chain( *r.best ), 0x8888 );
  }
  /* XOR: three AND steps, one XOR step */
  auto aig = exact_synthesis( 0x6666, 4, view_kind::aig, 4, 0 );
  ASSERT_TRUE( aig.best );
  EXPECT_EQ( aig.best->steps.size(), 3u );
  auto xag = exact_synthesis( 0x6666, 4, view_kind::xag, 4, 0 );
  ASSERT_TRUE( xag.best );
  EXPECT_EQ( xag.best->steps.size(), 1u );
  /* 3-input majority: one MAJ, four ANDs */
  auto mig = exact_synthesis( 0xe8e8, 4, view_kind::mig, 4, 0 );
  ASSERT_TRUE( mig.best );
  EXPECT_EQ( mig.best->steps.size(), 1u );
  auto amaj = exact_synthesis( 0xe8e8, 4, view_kind::aig, 5, 0 );
  ASSERT_TRUE( amaj.best );
  EXPECT_EQ( amaj.best->steps.size(), 4u );
}

TEST( npn4_db, builtin_is_complete )
{
  auto const& db = npn4_db::builtin();
  auto const& cls = npn4_classes::instance();
  EXPECT_EQ( db.size(), 4u * 222u );
  for ( auto v : template_views )
  {
    EXPECT_EQ( db.size( v ), 222u );
    for ( auto r : cls.representatives() )
    {
      auto const& t = db.at( v, r );
      EXPECT_EQ( t.net.view(), v );
      EXPECT_EQ( template_function( t.net ), r );
    }
  }
  EXPECT_THROW( npn4_db{}.at( view_kind::aig, 0 ), error );
}

TEST( npn4_db, serialize_round_trip_and_corruption )
{
  npn4_db db;
  for ( uint16_t f : { uint16_t( 0x0000 ), uint16_t( 0x8000 ), uint16_t( 0x6996 ) } )
    db.insert( view_kind::xmg, npn4_classes::instance().representative( f ),
               synthesize_template( view_kind::xmg, npn4_classes::instance().representative( f ) ) );
  auto const text = db.serialize();
  auto const back = npn4_db::parse( text );
  EXPECT_EQ( back.serialize(), text );

  /* claim a different function for the first block */
  auto bad = text;
  auto const pos = bad.find( "CLASS XMG 0000" );
  ASSERT_NE( pos, std::string::npos );
  bad.replace( pos, 14, "CLASS XMG 0001" );
  try
  {
    (void)npn4_db::parse( bad );
    FAIL();
  }
  catch ( error const& e )
  {
    EXPECT_EQ( e.code(), errc::schema_violation );
  }
  EXPECT_THROW( (void)npn4_db::parse( "NOPE\n" ), error );
}

TEST( npn4_db, instantiation_realizes_every_function )
{
  auto const& db = npn4_db::builtin();
  rng gen( 17 );
  for ( auto v : template_views )
    for ( int i = 0; i < 150; ++i )
    {
      auto const f = static_cast<uint16_t>( gen.below( 65536 ) );
      circuit_builder b( v );
      std::vector<node_index> in;
      for ( int k = 0; k < 4; ++k )
        in.push_back( b.create_pi() );
      b.create_po( instantiate_npn( b, db, v, f, in ) );
      auto const c = b.build();
      EXPECT_EQ( po_function( c ), f ) << view_name( v ) << " " << f;
    }
}

TEST( lut_mapping, single_gate_examples )
{
  auto and2 = single_gate_aig( 2, []( auto& b, auto const& in ) { return b.create_and( in[0], in[1] ); } );
  auto m = lut_map( and2 );
  ASSERT_EQ( count_gate( m, gate_type::lut4 ), 1u );
  for ( node_index n = 0; n < m.size(); ++n )
    if ( m.gate( n ) == gate_type::lut4 )
    {
      EXPECT_EQ( m[n].truth & 0xf, 0x8 );
    }

  auto and4 = single_gate_aig( 4, []( auto& b, auto const& in ) {
    return b.create_and( b.create_and( in[0], in[1] ), b.create_and( in[2], in[3] ) );
  } );
  auto m4 = lut_map( and4 );
  ASSERT_EQ( count_gate( m4, gate_type::lut4 ), 1u );
  for ( node_index n = 0; n < m4.size(); ++n )
    if ( m4.gate( n ) == gate_type::lut4 )
    {
      EXPECT_EQ( m4[n].truth, 0x8000 );
    }

  auto inv = single_gate_aig( 1, []( auto& b, auto const& in ) { return b.create_not( in[0] ); } );
  auto mi = lut_map( inv );
  ASSERT_EQ( count_gate( mi, gate_type::lut4 ), 1u );
  for ( node_index n = 0; n < mi.size(); ++n )
    if ( mi.gate( n ) == gate_type::lut4 )
    {
      EXPECT_EQ( mi[n].truth & 0x3, 0x1 );
    }
}

TEST( lut_mapping, constant_outputs )
{
  circuit_builder b( view_kind::aig );
  b.create_pi();
  auto const z = b.create_const0();
  b.create_po( z );
  b.create_po( b.create_not( z ) );
  auto const m = lut_map( b.build() );
  EXPECT_EQ( m.view(), view_kind::lut );
  EXPECT_EQ( po_function( m, 0 ), 0x0000 );
  EXPECT_EQ( po_function( m, 1 ), 0xffff );
}

TEST( lut_mapping, preserves_function_and_respects_cut_size )
{
  rng gen( 23 );
  for ( int i = 0; i < 40; ++i )
  {
    auto const aig = random_aig( gen, { .num_pis = 3u + uint32_t( gen.below( 8 ) ), .num_ands = 20u + uint32_t( gen.below( 150 ) ) } );
    auto const m = lut_map( aig );
    for ( node_index n = 0; n < m.size(); ++n )
      EXPECT_LE( m.fanins( n ).size(), 4u );
    auto const rep = verify_views( aig, m );
    EXPECT_TRUE( rep.all_equal() );
  }
}

TEST( lut_resyn, basis_examples )
{
  auto xor2 = single_gate_aig( 2, []( auto& b, auto const& in ) { return create_aig_xor( b, in[0], in[1] ); } );
  auto const luts = lut_map( xor2 );
  for ( auto v : { view_kind::xag, view_kind::xmg } )
  {
    auto const c = lut_resyn( luts, v );
    EXPECT_EQ( c.num_gates(), 1u ) << view_name( v );
    EXPECT_EQ( count_gate( c, gate_type::xor2 ), 1u );
    EXPECT_EQ( po_function( c ), po_function( xor2 ) );
  }

  auto and2 = single_gate_aig( 2, []( auto& b, auto const& in ) { return b.create_and( in[0], in[1] ); } );
  for ( auto v : template_views )
  {
    auto const c = lut_resyn( lut_map( and2 ), v );
    EXPECT_EQ( c.num_gates(), 1u ) << view_name( v );
    EXPECT_EQ( count_gate( c, gate_type::and2 ), 1u ) << view_name( v );
  }

  circuit_builder b( view_kind::lut );
  auto const x = b.create_pi(), y = b.create_pi(), z = b.create_pi();
  b.create_po( b.create_lut( { x, y, z }, 0xe8 ) );
  auto const maj_luts = b.build();
  auto const mig = lut_resyn( maj_luts, view_kind::mig );
  EXPECT_EQ( mig.num_gates(), 1u );
  EXPECT_EQ( count_gate( mig, gate_type::maj3 ), 1u );
  EXPECT_EQ( po_function( mig ), 0xe8e8 );

  EXPECT_THROW( lut_resyn( xor2, view_kind::mig ), error );
  EXPECT_THROW( lut_resyn( luts, view_kind::lut ), error );
}

TEST( lut_resyn, every_view_preserves_function )
{
  rng gen( 29 );
  for ( int i = 0; i < 30; ++i )
  {
    auto const aig = random_aig( gen, { .num_pis = 4u + uint32_t( gen.below( 9 ) ), .num_ands = 50u + uint32_t( gen.below( 300 ) ) } );
    auto const luts = lut_map( aig );
    for ( auto v : { view_kind::mig, view_kind::xag, view_kind::xmg } )
    {
      auto const c = lut_resyn( luts, v );
      EXPECT_EQ( c.view(), v );
      for ( auto d : c.dangling() )
        EXPECT_EQ( c.gate( d ), gate_type::pi );
      for ( node_index n = 0; n < c.size(); ++n )
        EXPECT_TRUE( view_allows( v, c.gate( n ) ) );
      EXPECT_TRUE( verify_views( aig, c ).all_equal() ) << view_name( v );
    }
  }
}

TEST( lut_resyn, no_constant_majorities_remain )
{
  rng gen( 31 );
  for ( int i = 0; i < 10; ++i )
  {
    auto const aig = random_aig( gen, { .num_pis = 6, .num_ands = 120 } );
    auto const c = lut_resyn( lut_map( aig ), view_kind::mig );
    for ( node_index n = 0; n < c.size(); ++n )
      if ( c.gate( n ) == gate_type::maj3 )
        for ( auto f : c.fanins( n ) )
        {
          EXPECT_NE( c.gate( f ), gate_type::const0 );
          EXPECT_NE( c.gate( f ), gate_type::const1 );
        }
  }
}

TEST( verify, detects_negated_output_with_witness )
{
  auto const good = make_adder_aig( 3 );
  /* rebuild the same adder with its top PO complemented */
  circuit_builder b( view_kind::aig );
  std::vector<node_index> map( good.size() );
  for ( node_index n = 0; n < good.size(); ++n )
  {
    auto const f = good.fanins( n );
    switch ( good.gate( n ) )
    {
    case gate_type::pi: map[n] = b.create_pi(); break;
    case gate_type::const0: map[n] = b.create_const0(); break;
    case gate_type::not_: map[n] = b.create_not( map[f[0]] ); break;
    case gate_type::and2: map[n] = b.create_and( map[f[0]], map[f[1]] ); break;
    case gate_type::po:
      map[n] = b.create_po( n == good.pos().back() ? b.create_not( map[f[0]] ) : map[f[0]] );
      break;
    default: FAIL();
    }
  }
  auto const bad = b.build();
  for ( uint32_t limit : { 12u, 0u } )
  {
    auto const rep = verify_views( good, bad, { .exhaustive_pi_limit = limit } );
    EXPECT_EQ( rep.exhaustive, limit != 0u );
    EXPECT_FALSE( rep.all_equal() );
    ASSERT_EQ( rep.failing(), std::vector<uint32_t>{ good.num_pos() - 1u } );
    auto const& w = rep.checks.back().witness;
    ASSERT_EQ( w.size(), good.num_pis() );
    auto const va = detail::evaluate_assignment( good, w ), vb = detail::evaluate_assignment( bad, w );
    EXPECT_NE( va[good.pos().back()], vb[bad.pos().back()] );
  }
}

TEST( verify, shape_errors )
{
  auto const a = make_adder_aig( 2 ), b = make_adder_aig( 3 );
  try
  {
    (void)verify_views( a, b );
    FAIL();
  }
  catch ( error const& e )
  {
    EXPECT_EQ( e.code(), errc::pi_count_mismatch );
  }
}
