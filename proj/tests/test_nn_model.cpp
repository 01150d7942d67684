#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <mvg/generators.hpp>
#include <mvg/nn/gradcheck.hpp>
#include <mvg/nn/training.hpp>
#include <mvg/pipeline.hpp>

using namespace mvg;
using namespace mvg::nn;

namespace
{

sample small_sample( uint64_t seed, uint32_t pis = 4, uint32_t ands = 14 )
{
  rng gen( seed );
  auto const aig = random_aig( gen, { .num_pis = pis, .num_ands = ands, .max_pos = 3 }, "s" + std::to_string( seed ) );
  auto r = build_record( aig, { .pattern_count = 256, .spp_patterns = 1024, .seed = seed } );
  label_record( r, {}, {} );
  return make_sample( r );
}

model_config small_config()
{
  model_config m;
  m.d = 8;
  m.heads = 8;
  m.ffn = 16;
  m.update_hidden = 8;
  m.readout_hidden = 8;
  return m;
}

circuit and_pair( bool swapped )
{
  circuit_builder b( view_kind::aig, false );
  auto const x = b.create_pi(), y = b.create_pi();
  auto const n = b.create_not( x );
  b.create_po( swapped ? b.create_and( y, n ) : b.create_and( n, y ) );
  return b.build();
}

double max_abs( mat const& m ) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

} // namespace

TEST( nn_model, pi_rows_follow_the_initialization_contract )
{
  mixgate_model m( small_config() );
  auto const c = make_adder_aig( 3 );
  tape t;
  auto const e = m.encode( t, c );
  auto const& hs = t.value( e.hs );
  auto const& hf = t.value( e.hf );
  std::set<std::vector<double>> rows;
  for ( auto p : c.pis() )
  {
    EXPECT_DOUBLE_EQ( hs.row( p ).sum(), 1.0 );
    EXPECT_DOUBLE_EQ( hs.row( p ).maxCoeff(), 1.0 );
    std::vector<double> r;
    for ( Eigen::Index j = 0; j < hs.cols(); ++j )
      r.push_back( hs( p, j ) );
    rows.insert( r );
    EXPECT_EQ( hf.row( p ), hf.row( c.pis()[0] ) );
  }
  EXPECT_EQ( rows.size(), c.num_pis() );
  EXPECT_TRUE( hs.allFinite() && hf.allFinite() );

  auto const two_hot = pi_structural_rows( 12, 8 );
  for ( int i = 0; i < 12; ++i )
    for ( int j = i + 1; j < 12; ++j )
      EXPECT_NE( two_hot.row( i ), two_hot.row( j ) );
  EXPECT_THROW( pi_structural_rows( 37, 8 ), error );
}

TEST( nn_model, fanin_order_does_not_matter )
{
  mixgate_model m( small_config() );
  auto const a = and_pair( false ), b = and_pair( true );
  tape t;
  auto const ea = m.encode( t, a ), eb = m.encode( t, b );
  auto const ga = a.fanins( a.pos()[0] )[0], gb = b.fanins( b.pos()[0] )[0];
  EXPECT_LT( ( t.value( ea.hs ).row( ga ) - t.value( eb.hs ).row( gb ) ).cwiseAbs().maxCoeff(), 1e-12 );
  EXPECT_LT( ( t.value( ea.hf ).row( ga ) - t.value( eb.hf ).row( gb ) ).cwiseAbs().maxCoeff(), 1e-12 );
}

TEST( nn_model, unary_gate_ignores_attention_scores )
{
  mixgate_model m( small_config() );
  auto const c = make_not_chain( 4 );
  tape t0;
  auto const before = t0.value( m.encode( t0, c ).hf );
  for ( auto const* name : { "enc.AIG.NOT.s.k.w", "enc.AIG.NOT.s.q.w", "enc.AIG.NOT.f.k.w", "enc.AIG.NOT.f.q.w" } )
    m.params()[name].value.setRandom();
  tape t1;
  EXPECT_EQ( t1.value( m.encode( t1, c ).hf ), before );
}

TEST( nn_model, lut_view_has_no_encoder )
{
  mixgate_model m( small_config() );
  auto const luts = lut_map( make_adder_aig( 2 ) );
  tape t;
  try
  {
    (void)m.encode( t, luts );
    FAIL();
  }
  catch ( error const& e )
  {
    EXPECT_EQ( e.code(), errc::unknown_gate_type );
  }
}

TEST( nn_model, token_counts_match_hierarchy )
{
  mixgate_model m( small_config() );
  auto const s = small_sample( 3, 6, 40 );
  for ( auto const& [v, c] : s.views )
  {
    tape t;
    auto const e = m.encode( t, c );
    auto const h = s.hierarchies.find( v );
    auto const tok = m.view_tokens( t, v, e, h == s.hierarchies.end() ? nullptr : &h->second );
    auto const want = v == view_kind::aig ? c.size() : token_counts( h->second ).total();
    EXPECT_EQ( t.value( tok ).rows(), want ) << view_name( v );
    EXPECT_EQ( t.value( tok ).cols(), 8 );
  }
}

TEST( nn_model, fusion_mixes_and_zeroed_fusion_is_identity )
{
  mixgate_model m( small_config() );
  auto const s = small_sample( 5 );
  auto tokens_of = [&]( tape& t, view_embedding const* aig_override ) {
    std::map<view_kind, tv> tok;
    for ( auto const& [v, c] : s.views )
    {
      auto const e = v == view_kind::aig && aig_override ? *aig_override : m.encode( t, c );
      auto const h = s.hierarchies.find( v );
      tok[v] = m.view_tokens( t, v, e, h == s.hierarchies.end() ? nullptr : &h->second );
    }
    return tok;
  };

  /* masking one AIG node changes its refined token */
  tape t;
  auto const e = m.encode( t, s.aig() );
  auto const probe = s.aig().fanins( s.aig().pos()[0] )[0];
  auto const masked = m.apply_mask( t, e, { probe } );
  auto const r0 = m.fuse( t, tokens_of( t, &e ) ), r1 = m.fuse( t, tokens_of( t, &masked ) );
  EXPECT_GT( max_abs( t.value( r0.at( view_kind::aig ) ).row( probe ) - t.value( r1.at( view_kind::aig ) ).row( probe ) ), 1e-9 );
  for ( auto const& [v, x] : r0 )
    EXPECT_EQ( t.value( x ).rows(), t.value( tokens_of( t, &e ).at( v ) ).rows() );

  for ( auto const& l : m.fuse_layers() )
    for ( auto* p : l.output_params() )
      p->value.setZero();
  tape t2;
  auto const tok = tokens_of( t2, nullptr );
  auto const out = m.fuse( t2, tok );
  for ( auto const& [v, x] : tok )
  {
    mat want = t2.value( x );
    want.rowwise() += m.params()["fuse.tag." + std::string( view_name( v ) )].value.row( 0 );
    EXPECT_LT( max_abs( t2.value( out.at( v ) ) - want ), 1e-12 );
  }
}

TEST( nn_model, mask_contract )
{
  rng gen( 9 );
  auto const c = random_aig( gen, { .num_pis = 6, .num_ands = 80 } );
  mat hs = mat::Random( c.size(), 8 ), hf = mat::Random( c.size(), 8 ), hm = mat::Constant( 1, 8, 7.0 );

  auto const id = mask_cones( hs, hf, c, 0.0, 2, hm, 1 );
  EXPECT_TRUE( id.mask.empty() );
  EXPECT_EQ( id.hf, hf );

  for ( uint64_t seed = 0; seed < 50; ++seed )
  {
    auto const r = mask_cones( hs, hf, c, 0.1, 2, hm, seed );
    EXPECT_EQ( r.hs, hs );
    std::set<node_index> const ms( r.mask.begin(), r.mask.end() );
    EXPECT_FALSE( ms.empty() );
    for ( node_index n = 0; n < c.size(); ++n )
      if ( ms.contains( n ) )
        EXPECT_EQ( r.hf.row( n ), hm.row( 0 ) );
      else
        EXPECT_EQ( r.hf.row( n ), hf.row( n ) );
  }

  /* one anchor: the mask is exactly one depth-limited cone */
  bool saw_pi = false;
  double const one = 0.5 / c.size();
  for ( uint64_t seed = 0; seed < 200; ++seed )
  {
    auto const ms = mask_set( c, one, 2, seed );
    bool matched = false;
    for ( node_index a = 0; a < c.size() && !matched; ++a )
    {
      auto cone = fanin_cone( c, a, 2 );
      std::sort( cone.begin(), cone.end() );
      matched = cone == ms;
    }
    EXPECT_TRUE( matched );
    if ( ms.size() == 1u && c.gate( ms[0] ) == gate_type::pi )
      saw_pi = true;
  }
  EXPECT_TRUE( saw_pi );
  EXPECT_THROW( mask_set( c, 1.5, 2, 0 ), error );
}

TEST( nn_losses, spp_examples )
{
  tape t;
  auto const p = t.constant( ( mat( 3, 1 ) << 0.1, 0.5, 0.9 ).finished() );
  EXPECT_DOUBLE_EQ( t.scalar( loss_spp( t, p, { 0.1, 0.5, 0.9 } ) ), 0.0 );
  auto const half = t.constant( mat::Constant( 2, 1, 0.5 ) );
  EXPECT_DOUBLE_EQ( t.scalar( loss_spp( t, half, { 0.0, 1.0 } ) ), 0.5 );
  EXPECT_THROW( loss_spp( t, half, { 0.0 } ), error );
}

TEST( nn_losses, ttdp_examples )
{
  tape t;
  auto const dt = t.constant( ( mat( 2, 1 ) << 0.2, 0.8 ).finished() );
  EXPECT_NEAR( t.scalar( loss_ttdp_distances( t, dt, { 0.0, 1.0 } ) ), 0.0, 1e-9 );
  try
  {
    (void)loss_ttdp_distances( t, dt, { 0.5, 0.5 } );
    FAIL();
  }
  catch ( error const& e )
  {
    EXPECT_EQ( e.code(), errc::degenerate_pair_set );
  }
  /* matching order gives zero; reversed order gives the maximum mismatch of 2 */
  auto const rev = t.constant( ( mat( 2, 1 ) << 0.8, 0.2 ).finished() );
  EXPECT_NEAR( t.scalar( loss_ttdp_distances( t, rev, { 0.0, 1.0 } ) ), 2.0, 1e-9 );

  /* (Z, Z) has table distance 0 and (Z, not Z) has 1 */
  circuit_builder b( view_kind::aig, false );
  auto const x = b.create_pi(), y = b.create_pi();
  auto const z = b.create_and( x, y );
  auto const nz = b.create_not( z );
  b.create_po( nz );
  auto const s = simulate_exhaustive( b.build() );
  EXPECT_DOUBLE_EQ( truth_table_distance( s, z, z ), 0.0 );
  EXPECT_DOUBLE_EQ( truth_table_distance( s, z, nz ), 1.0 );
}

TEST( nn_losses, align_and_mcm_examples )
{
  tape t;
  mat a = mat::Zero( 2, 8 ), b = mat::Zero( 2, 8 );
  a( 0, 0 ) = 1.0;
  a( 0, 1 ) = -1.0;
  auto const ta = t.constant( a ), tb = t.constant( b );
  EXPECT_DOUBLE_EQ( t.scalar( loss_align( t, ta, tb, { { 0, 0 } } ) ), 2.0 / 8.0 );
  EXPECT_DOUBLE_EQ( t.scalar( loss_align( t, tb, ta, { { 0, 0 } } ) ), 2.0 / 8.0 );
  EXPECT_DOUBLE_EQ( t.scalar( loss_align( t, ta, ta, { { 0, 0 }, { 1, 1 } } ) ), 0.0 );
  EXPECT_DOUBLE_EQ( t.scalar( loss_align( t, ta, tb, {} ) ), 0.0 );

  EXPECT_DOUBLE_EQ( t.scalar( loss_mcm( t, ta, ta ) ), 0.0 );
  auto const none = t.constant( mat( 0, 8 ) );
  EXPECT_DOUBLE_EQ( t.scalar( loss_mcm( t, none, none ) ), 0.0 );
  EXPECT_THROW( loss_mcm( t, ta, t.constant( mat::Zero( 3, 8 ) ) ), error );
}

TEST( nn_losses, contrastive_examples )
{
  tape t;
  mat a( 1, 2 ), b( 2, 2 );
  a << 1, 0;
  b << 0, 1, 0, -1; /* positive and negative both orthogonal to the anchor */
  EXPECT_NEAR( t.scalar( loss_contrastive( t, t.constant( a ), t.constant( b ), { { 0, 0 } }, { { 1 } }, 0.5 ) ), std::log( 2.0 ), 1e-12 );
  b << 1, 0, -1, 0;
  double const sharp = t.scalar( loss_contrastive( t, t.constant( a ), t.constant( b ), { { 0, 0 } }, { { 1 } }, 0.01 ) );
  EXPECT_LT( sharp, 1e-60 );
  EXPECT_THROW( loss_contrastive( t, t.constant( a ), t.constant( b ), { { 0, 0 } }, { { 1 } }, 0.0 ), error );
  EXPECT_THROW( loss_contrastive( t, t.constant( a ), t.constant( b ), { { 0, 0 } }, { {} }, 0.5 ), error );
}

TEST( nn_training, stage_gating )
{
  curriculum_config cc;
  cc.w_ttdp = 5.0;
  cc.w_mcm = 7.0;
  auto const s1 = stage_weights( cc, 1, variant::mask_align );
  EXPECT_EQ( s1.ttdp, 0.0 );
  EXPECT_EQ( s1.mcm, 0.0 );
  EXPECT_EQ( s1.align, 1.0 );
  EXPECT_EQ( stage_weights( cc, 2, variant::mask_align ).ttdp, 5.0 );
  EXPECT_EQ( stage_weights( cc, 2, variant::mask_align ).mcm, 0.0 );
  EXPECT_EQ( stage_weights( cc, 3, variant::mask_align ).mcm, 7.0 );
  EXPECT_EQ( stage_weights( cc, 3, variant::baseline ).mcm, 0.0 );
  EXPECT_EQ( stage_weights( cc, 3, variant::baseline ).align, 0.0 );
  EXPECT_EQ( stage_weights( cc, 3, variant::mask ).align, 0.0 );
  EXPECT_EQ( stage_weights( cc, 3, variant::align ).mcm, 0.0 );
  EXPECT_EQ( stage_weights( cc, 0, variant::mask_align ).align, 0.0 );
  EXPECT_THROW( stage_weights( cc, 4, variant::baseline ), error );
  EXPECT_EQ( parse_variant( "mask-align" ), variant::mask_align );
  EXPECT_THROW( parse_variant( "both" ), error );
}

TEST( nn_training, zero_weights_give_zero_gradients )
{
  train_config cfg;
  cfg.model = small_config();
  mixgate_model m( cfg.model );
  auto const s = small_sample( 11 );
  m.params().zero_grad();
  tape t;
  loss_values lv;
  objective_options o;
  o.compute_all = true;
  auto const l = sample_objective( t, m, s, cfg, o, lv );
  t.backward( l );
  EXPECT_EQ( lv.composite, 0.0 );
  EXPECT_FALSE( std::isnan( lv.spp ) );
  for ( auto const& p : m.params().all() )
    EXPECT_EQ( max_abs( p->grad ), 0.0 ) << p->name;
}

TEST( nn_training, gradients_match_finite_differences )
{
  std::vector<sample> const batch{ small_sample( 21 ), small_sample( 22 ) };
  train_config cfg;
  cfg.model = small_config();
  cfg.ttdp_pairs = 16;
  cfg.curriculum.mask_ratio = 0.1;
  mixgate_model m( cfg.model );

  struct named
  {
    char const* name;
    loss_weights w;
    align_objective obj;
  };
  std::vector<named> const cases{ { "spp", { 1, 0, 0, 0 }, align_objective::l1 },      { "align", { 0, 1, 0, 0 }, align_objective::l1 },
                                  { "ttdp", { 0, 0, 1, 0 }, align_objective::l1 },     { "mcm", { 0, 0, 0, 1 }, align_objective::l1 },
                                  { "infonce", { 0, 1, 0, 0 }, align_objective::infonce }, { "composite", { 1, 1, 1, 1 }, align_objective::l1 } };
  for ( auto const& c : cases )
  {
    auto run_cfg = cfg;
    run_cfg.objective = c.obj;
    /* the reconstruction target is detached, so finite differences must see it frozen too */
    std::vector<std::optional<mat>> targets( batch.size() );
    auto loss = [&]( tape& t ) {
      std::vector<tv> parts;
      for ( std::size_t i = 0; i < batch.size(); ++i )
      {
        loss_values lv;
        objective_options o;
        o.weights = c.w;
        o.dropout = true;
        o.seed = 100 + i;
        o.mcm_target = &targets[i];
        parts.push_back( sample_objective( t, m, batch[i], run_cfg, o, lv ) );
      }
      return t.scale( t.sum( t.concat_rows( parts ) ), 0.5 );
    };
    auto const rep = gradient_check( m.params(), loss, { .eps = 1e-4, .max_entries_per_tensor = 3 } );
    EXPECT_LT( rep.max_rel_error, 1e-3 ) << c.name << " worst tensor " << rep.worst;
    EXPECT_LT( rep.skipped * 10u, rep.entries ) << c.name << ": too many entries near kinks";
  }
}

TEST( nn_training, training_is_deterministic_and_checkpoints_round_trip )
{
  std::vector<sample> const data{ small_sample( 31 ), small_sample( 32 ), small_sample( 33 ) };
  train_config cfg;
  cfg.model = small_config();
  cfg.batch = 2;
  cfg.curriculum.epochs = { 1, 1, 1, 1 };
  cfg.curriculum.mask_ratio = 0.1;
  std::vector<std::string> log1, log2;
  trainer a( cfg ), b( cfg );
  a.run( data, [&]( std::string const& l ) { log1.push_back( l ); } );
  b.run( data, [&]( std::string const& l ) { log2.push_back( l ); } );
  EXPECT_EQ( log1, log2 );
  ASSERT_EQ( log1.size(), 8u );
  auto const first = nlohmann::json::parse( log1.front() );
  EXPECT_EQ( first["stage"], 0 );
  EXPECT_TRUE( first["align"].is_null() );
  auto const last = nlohmann::json::parse( log1.back() );
  EXPECT_EQ( last["stage"], 3 );
  EXPECT_FALSE( last["mcm"].is_null() );

  std::stringstream ss;
  save_checkpoint( ss, a.model() );
  auto const blob = ss.str();
  EXPECT_EQ( blob.substr( 0, 8 ), "MVGCKPT1" );
  std::istringstream in( blob );
  auto const back = load_checkpoint( in );
  for ( auto const& p : a.model().params().all() )
    EXPECT_EQ( back.params()[p->name].value, p->value ) << p->name;

  std::istringstream cut( blob.substr( 0, blob.size() / 2 ) );
  try
  {
    (void)load_checkpoint( cut );
    FAIL();
  }
  catch ( error const& e )
  {
    EXPECT_EQ( e.code(), errc::truncated_file );
  }
  std::istringstream bad( "NOTACKPT" );
  EXPECT_THROW( load_checkpoint( bad ), error );
}

TEST( nn_training, non_finite_loss_aborts_the_step )
{
  std::vector<sample> const data{ small_sample( 41 ) };
  train_config cfg;
  cfg.model = small_config();
  trainer tr( cfg );
  tr.model().params()["spp.3.b"].value( 0, 0 ) = std::numeric_limits<double>::quiet_NaN();
  auto const before = tr.model().params()["spp.1.w"].value;
  try
  {
    (void)tr.step( { &data[0] }, 1, { 1, 0, 0, 0 } );
    FAIL();
  }
  catch ( error const& e )
  {
    EXPECT_EQ( e.code(), errc::non_finite_loss );
  }
  EXPECT_EQ( tr.model().params()["spp.1.w"].value, before );
}

TEST( nn_regression, seed_one_goldens )
{
  std::ifstream in( std::string( MVG_DATA_DIR ) + "/golden/nn_seed1.json" );
  ASSERT_TRUE( in.good() );
  auto const g = nlohmann::json::parse( in );

  param_store ps;
  rng gen( 1 );
  auto const pool = cls_pool::make( ps, gen, "p", 8, 8, 2, 16 );
  tape t;
  mat row( 1, 8 );
  for ( int j = 0; j < 8; ++j )
    row( 0, j ) = 0.25 * j - 1.0;
  auto const out = t.value( pool( t, t.constant( row ) ) );
  ASSERT_EQ( g["pool_cls_seed1"].size(), 8u );
  for ( int j = 0; j < 8; ++j )
    EXPECT_NEAR( out( 0, j ), g["pool_cls_seed1"][j].get<double>(), 1e-9 );

  train_config cfg;
  cfg.model = small_config();
  cfg.curriculum.mask_ratio = 0.1;
  mixgate_model m( cfg.model );
  tape t2;
  loss_values lv;
  objective_options o;
  o.compute_all = true;
  o.seed = 1;
  (void)sample_objective( t2, m, small_sample( 21 ), cfg, o, lv );
  EXPECT_NEAR( lv.mcm, g["mcm_init_seed1"].get<double>(), 1e-9 );
}
