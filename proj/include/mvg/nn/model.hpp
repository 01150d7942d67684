/*!
  \file model.hpp
  \brief Multiview circuit model: per-view attention encoders, tokenization, fusion and readouts

  Each view is encoded level by level.  A node's structural embedding
  attends over its fanins' structural embeddings with a learned per-gate
  query; its functional embedding attends over the fanins' concatenated
  [hf, hs] rows with the node's new hs as query.  The AIG is tokenized flat
  (one token per node); the other views are pooled into hop, subgraph and
  graph tokens.  All token sequences, tagged by view, pass through a shared
  fusion transformer.
*/

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "../circuit.hpp"
#include "../error.hpp"
#include "../hier_tokenizer.hpp"
#include "../random.hpp"
#include "layers.hpp"
#include "tape.hpp"

namespace mvg::nn
{

struct model_config
{
  uint32_t d = 32u;
  uint32_t heads = 8u;
  uint32_t pool_layers = 2u;
  uint32_t fuse_layers = 2u;
  uint32_t ffn = 128u;
  uint32_t update_hidden = 32u;
  uint32_t readout_hidden = 32u;
  double readout_dropout = 0.2;
  hierarchy_params hierarchy{};
  std::vector<view_kind> views{ view_kind::aig, view_kind::mig, view_kind::xag, view_kind::xmg };
  uint64_t seed = 1u;
};

/*! \brief Gate types that carry an aggregator in the encoder of view `v`. */
inline std::vector<gate_type> encoder_gates( view_kind v )
{
  std::vector<gate_type> out;
  for ( auto g : { gate_type::not_, gate_type::and2, gate_type::or2, gate_type::xor2, gate_type::maj3 } )
    if ( view_allows( v, g ) )
      out.push_back( g );
  return out;
}

/*! \brief Distinct 0/1 rows for PIs: one-hot for the first d, then two-hot over index pairs. */
inline mat pi_structural_rows( uint32_t num_pis, uint32_t d )
{
  uint64_t const capacity = d + uint64_t( d ) * ( d - 1u ) / 2u;
  if ( num_pis > capacity )
    throw error( errc::invalid_argument, std::to_string( num_pis ) + " PIs exceed the structural code capacity at d=" + std::to_string( d ) );
  mat m = mat::Zero( num_pis, d );
  uint32_t i = 0;
  for ( ; i < std::min( num_pis, d ); ++i )
    m( i, i ) = 1.0;
  for ( uint32_t a = 0; a < d && i < num_pis; ++a )
    for ( uint32_t b = a + 1u; b < d && i < num_pis; ++b, ++i )
    {
      m( i, a ) = 1.0;
      m( i, b ) = 1.0;
    }
  return m;
}

struct view_embedding
{
  tv hs; /* n x d */
  tv hf; /* n x d */
};

struct forward_result
{
  std::map<view_kind, view_embedding> enc;
  std::map<view_kind, tv> tokens;  /* pre-fusion token sequences */
  std::map<view_kind, tv> refined; /* post-fusion, same row counts */
};

/*! \brief Nodes hit by masking: the depth-limited fanin cones of ceil(ratio * n) seeded anchors. */
inline std::vector<node_index> mask_set( circuit const& c, double ratio, uint32_t cone_depth, uint64_t seed )
{
  if ( ratio < 0.0 || ratio > 1.0 )
    throw error( errc::invalid_argument, "mask ratio outside [0,1]" );
  auto const k = static_cast<uint32_t>( std::ceil( ratio * c.size() - 1e-9 ) );
  if ( k == 0u )
    return {};
  rng gen( seed );
  std::vector<bool> hit( c.size(), false );
  for ( auto a : sample_without_replacement( gen, c.size(), k ) )
    for ( auto n : fanin_cone( c, a, cone_depth ) )
      hit[n] = true;
  std::vector<node_index> out;
  for ( node_index n = 0; n < c.size(); ++n )
    if ( hit[n] )
      out.push_back( n );
  return out;
}

struct masked_state
{
  mat hs;
  mat hf;
  std::vector<node_index> mask;
};

/*! \brief Replaces the functional rows of the masked cones by `hm`; structural rows are kept. */
inline masked_state mask_cones( mat const& hs, mat const& hf, circuit const& c, double ratio, uint32_t cone_depth,
                                mat const& hm, uint64_t seed )
{
  if ( hs.rows() != c.size() || hf.rows() != c.size() || hm.rows() != 1 || hm.cols() != hf.cols() )
    throw error( errc::width_mismatch, "embedding state does not match the circuit" );
  masked_state m{ hs, hf, mask_set( c, ratio, cone_depth, seed ) };
  for ( auto n : m.mask )
    m.hf.row( n ) = hm.row( 0 );
  return m;
}

class mixgate_model
{
  struct aggregator
  {
    parameter* seed = nullptr; /* structural query seed, 1 x d */
    linear sq, sk, sv;         /* d -> d */
    linear fq;                 /* d -> d, applied to the new hs */
    linear fk, fv;             /* 2d -> d over [hf, hs] */
  };

  struct view_encoder
  {
    std::map<gate_type, aggregator> agg;
    linear us1, us2, uf1, uf2; /* residual tanh update MLPs */
    layer_norm_params ns, nf; /* keep per-level updates at unit scale */
    linear proj;               /* [hs, hf] -> token, 2d -> d */
  };

public:
  explicit mixgate_model( model_config cfg ) : cfg_( std::move( cfg ) )
  {
    auto const d = cfg_.d;
    rng gen( derive_seed( cfg_.seed, "model-init" ) );
    pi_hf_ = &store_.add( "enc.pi_hf", mat::Constant( 1, d, 0.5 ) );
    const_hs_ = &store_.add( "enc.const.hs", init_dense( gen, 1, d, 0.5 ) );
    const_hf_ = &store_.add( "enc.const.hf", init_dense( gen, 1, d, 0.5 ) );
    for ( auto v : cfg_.views )
    {
      auto const vn = "enc." + std::string( view_name( v ) );
      view_encoder e;
      for ( auto g : encoder_gates( v ) )
      {
        auto const gn = vn + "." + std::string( gate_name( g ) );
        aggregator a;
        a.seed = &store_.add( gn + ".s.seed", init_dense( gen, 1, d, 1.0 ) );
        a.sq = linear::make( store_, gen, gn + ".s.q", d, d, false );
        a.sk = linear::make( store_, gen, gn + ".s.k", d, d, false );
        a.sv = { &store_.add( gn + ".s.v.w", init_near_identity( gen, d, d, 0.4 / std::sqrt( double( d ) ) ) ), nullptr };
        a.fq = linear::make( store_, gen, gn + ".f.q", d, d, false );
        a.fk = linear::make( store_, gen, gn + ".f.k", 2u * d, d, false );
        a.fv = { &store_.add( gn + ".f.v.w", init_near_identity( gen, 2u * d, d, 0.4 / std::sqrt( double( d ) ) ) ), nullptr };
        e.agg.emplace( g, a );
      }
      e.us1 = linear::make( store_, gen, vn + ".upd_s.1", d, cfg_.update_hidden );
      e.us2 = linear::make( store_, gen, vn + ".upd_s.2", cfg_.update_hidden, d );
      e.uf1 = linear::make( store_, gen, vn + ".upd_f.1", d, cfg_.update_hidden );
      e.uf2 = linear::make( store_, gen, vn + ".upd_f.2", cfg_.update_hidden, d );
      for ( auto* p : { e.us2.w, e.uf2.w } )
        p->value *= 0.5;
      e.ns = layer_norm_params::make( store_, vn + ".norm_s", d );
      e.nf = layer_norm_params::make( store_, vn + ".norm_f", d );
      e.proj = linear::make( store_, gen, "tok." + std::string( view_name( v ) ) + ".proj", 2u * d, d );
      encoders_.emplace( v, std::move( e ) );
      tags_.emplace( v, &store_.add( "fuse.tag." + std::string( view_name( v ) ), init_dense( gen, 1, d, 0.1 ) ) );
    }
    pool_hop_ = cls_pool::make( store_, gen, "pool.hop", d, cfg_.heads, cfg_.pool_layers, cfg_.ffn );
    pool_sub_ = cls_pool::make( store_, gen, "pool.sub", d, cfg_.heads, cfg_.pool_layers, cfg_.ffn );
    pool_graph_ = cls_pool::make( store_, gen, "pool.graph", d, cfg_.heads, cfg_.pool_layers, cfg_.ffn );
    for ( uint32_t i = 0; i < cfg_.fuse_layers; ++i )
      fuse_.push_back( transformer_layer::make( store_, gen, "fuse." + std::to_string( i ), d, cfg_.heads, cfg_.ffn ) );
    readout_[0] = linear::make( store_, gen, "spp.1", d, cfg_.readout_hidden );
    readout_[1] = linear::make( store_, gen, "spp.2", cfg_.readout_hidden, cfg_.readout_hidden );
    readout_[2] = linear::make( store_, gen, "spp.3", cfg_.readout_hidden, 1u );
    mask_token_ = &store_.add( "mcm.mask_token", init_dense( gen, 1, d, 0.5 ) );
    decoder_ = linear::make( store_, gen, "mcm.decoder", d, d );
  }

  model_config const& config() const noexcept { return cfg_; }
  param_store& params() noexcept { return store_; }
  param_store const& params() const noexcept { return store_; }
  parameter& mask_token() noexcept { return *mask_token_; }
  std::vector<transformer_layer> const& fuse_layers() const noexcept { return fuse_; }

  /*! \brief Level-ordered structural and functional sweep over one view. */
  view_embedding encode( tape& t, circuit const& c ) const
  {
    auto const it = encoders_.find( c.view() );
    if ( it == encoders_.end() )
      throw error( errc::unknown_gate_type, "model has no encoder for view " + std::string( view_name( c.view() ) ) );
    auto const& enc = it->second;
    auto const d = cfg_.d;
    double const inv_sqrt_d = 1.0 / std::sqrt( static_cast<double>( d ) );

    std::vector<std::pair<tv, uint32_t>> hs_at( c.size() ), hf_at( c.size() );
    if ( c.num_pis() )
    {
      auto const pi_hs = t.constant( pi_structural_rows( c.num_pis(), d ) );
      auto const pi_hf = t.repeat_rows( t.param( *pi_hf_ ), c.num_pis() );
      for ( uint32_t i = 0; i < c.num_pis(); ++i )
      {
        hs_at[c.pis()[i]] = { pi_hs, i };
        hf_at[c.pis()[i]] = { pi_hf, i };
      }
    }
    tv const chs = t.param( *const_hs_ ), chf = t.param( *const_hf_ );

    /* group gates by (level, type); constants are sources */
    std::map<std::pair<uint32_t, gate_type>, std::vector<node_index>> groups;
    for ( node_index n = 0; n < c.size(); ++n )
    {
      switch ( c.gate( n ) )
      {
      case gate_type::pi:
      case gate_type::po: break;
      case gate_type::const0:
      case gate_type::const1:
        hs_at[n] = { chs, 0u };
        hf_at[n] = { chf, 0u };
        break;
      default:
        if ( !enc.agg.contains( c.gate( n ) ) )
          throw error( errc::unknown_gate_type, std::string( gate_name( c.gate( n ) ) ) + " in " + std::string( view_name( c.view() ) ) + " encoder" );
        groups[{ c.level( n ), c.gate( n ) }].push_back( n );
      }
    }

    for ( auto const& [key, nodes] : groups )
    {
      auto const& ag = enc.agg.at( key.second );
      auto const arity = static_cast<uint32_t>( c.fanins( nodes[0] ).size() );
      std::vector<tv> hs_in, hf_in;
      for ( uint32_t j = 0; j < arity; ++j )
      {
        std::vector<std::pair<tv, uint32_t>> s, f;
        for ( auto n : nodes )
        {
          s.push_back( hs_at[c.fanins( n )[j]] );
          f.push_back( hf_at[c.fanins( n )[j]] );
        }
        hs_in.push_back( t.gather_from( std::move( s ), d ) );
        hf_in.push_back( t.gather_from( std::move( f ), d ) );
      }

      /* structural: query from the per-gate seed */
      tv hs_agg;
      if ( arity == 1u )
        hs_agg = ag.sv( t, hs_in[0] );
      else
      {
        auto const q = t.transpose( ag.sq( t, t.param( *ag.seed ) ) ); /* d x 1 */
        std::vector<tv> scores, values;
        for ( uint32_t j = 0; j < arity; ++j )
        {
          scores.push_back( t.scale( t.matmul( ag.sk( t, hs_in[j] ), q ), inv_sqrt_d ) );
          values.push_back( ag.sv( t, hs_in[j] ) );
        }
        hs_agg = weighted_sum( t, t.softmax_rows( t.concat_cols( scores ) ), values );
      }
      auto const hs_new = enc.ns( t, t.add( hs_agg, enc.us2( t, t.tanh( enc.us1( t, hs_agg ) ) ) ) );

      /* functional: query from the node's new structural row, keys over [hf, hs] */
      std::vector<tv> xin;
      for ( uint32_t j = 0; j < arity; ++j )
        xin.push_back( t.concat_cols( { hf_in[j], hs_in[j] } ) );
      tv hf_agg;
      if ( arity == 1u )
        hf_agg = ag.fv( t, xin[0] );
      else
      {
        auto const q = ag.fq( t, hs_new );
        std::vector<tv> scores, values;
        for ( uint32_t j = 0; j < arity; ++j )
        {
          scores.push_back( t.scale( t.row_sum( t.cmul( ag.fk( t, xin[j] ), q ) ), inv_sqrt_d ) );
          values.push_back( ag.fv( t, xin[j] ) );
        }
        hf_agg = weighted_sum( t, t.softmax_rows( t.concat_cols( scores ) ), values );
      }
      auto const hf_new = enc.nf( t, t.add( hf_agg, enc.uf2( t, t.tanh( enc.uf1( t, hf_agg ) ) ) ) );

      for ( uint32_t r = 0; r < nodes.size(); ++r )
      {
        hs_at[nodes[r]] = { hs_new, r };
        hf_at[nodes[r]] = { hf_new, r };
      }
    }

    for ( auto p : c.pos() )
    {
      hs_at[p] = hs_at[c.fanins( p )[0]];
      hf_at[p] = hf_at[c.fanins( p )[0]];
    }
    return { t.gather_from( hs_at, d ), t.gather_from( hf_at, d ) };
  }

  /*! \brief Projected node rows [hs, hf] -> d. */
  tv node_rows( tape& t, view_kind v, view_embedding const& e ) const
  {
    return encoders_.at( v ).proj( t, t.concat_cols( { e.hs, e.hf } ) );
  }

  /*! \brief Hop tokens, then subgraph tokens, then the graph token. */
  tv hierarchical_tokens( tape& t, tv rows, token_hierarchy const& h ) const
  {
    std::vector<tv> hops, subs;
    for ( auto const& hp : h.hops )
      hops.push_back( pool_hop_( t, t.gather_rows( rows, std::vector<uint32_t>( hp.nodes.begin(), hp.nodes.end() ) ) ) );
    for ( auto const& sg : h.subgraphs )
    {
      std::vector<tv> members;
      for ( auto i : sg.hops )
        members.push_back( hops[i] );
      subs.push_back( pool_sub_( t, t.concat_rows( members ) ) );
    }
    if ( subs.empty() )
      throw error( errc::empty_input, "hierarchy without subgraphs" );
    auto const graph = pool_graph_( t, t.concat_rows( subs ) );
    std::vector<tv> all = hops;
    all.insert( all.end(), subs.begin(), subs.end() );
    all.push_back( graph );
    return t.concat_rows( all );
  }

  /*! \brief Adds view tags, runs the fusion layers over the joint sequence and splits it back. */
  std::map<view_kind, tv> fuse( tape& t, std::map<view_kind, tv> const& tokens ) const
  {
    std::vector<tv> parts;
    std::vector<std::pair<view_kind, uint32_t>> spans;
    for ( auto const& [v, tok] : tokens )
    {
      if ( t.value( tok ).cols() != cfg_.d )
        throw error( errc::width_mismatch, "token width differs from model width" );
      parts.push_back( t.add_row( tok, t.param( *tags_.at( v ) ) ) );
      spans.emplace_back( v, static_cast<uint32_t>( t.value( tok ).rows() ) );
    }
    auto x = t.concat_rows( parts );
    for ( auto const& l : fuse_ )
      x = l( t, x );
    std::map<view_kind, tv> out;
    uint32_t off = 0;
    for ( auto const& [v, n] : spans )
    {
      out[v] = t.slice_rows( x, off, n );
      off += n;
    }
    return out;
  }

  /*! \brief Token sequence of one view from its (possibly masked) embedding. */
  tv view_tokens( tape& t, view_kind v, view_embedding const& e, token_hierarchy const* h ) const
  {
    auto const rows = node_rows( t, v, e );
    if ( v == view_kind::aig )
      return rows;
    if ( !h )
      throw error( errc::invalid_argument, "hierarchical view without hierarchy" );
    return hierarchical_tokens( t, rows, *h );
  }

  /*! \brief Sigmoid-bounded readout, n x 1; `keep` masks (one per hidden layer) enable dropout. */
  tv predict_spp( tape& t, tv tokens, std::array<mat, 2> const* keep = nullptr ) const
  {
    auto h = t.relu( readout_[0]( t, tokens ) );
    if ( keep )
      h = t.dropout( h, ( *keep )[0], cfg_.readout_dropout );
    h = t.relu( readout_[1]( t, h ) );
    if ( keep )
      h = t.dropout( h, ( *keep )[1], cfg_.readout_dropout );
    return t.sigmoid( readout_[2]( t, h ) );
  }

  std::array<mat, 2> dropout_masks( rng& gen, Eigen::Index rows ) const
  {
    std::array<mat, 2> k;
    for ( auto& m : k )
    {
      m.resize( rows, cfg_.readout_hidden );
      for ( Eigen::Index i = 0; i < m.size(); ++i )
        m.data()[i] = gen.uniform() >= cfg_.readout_dropout ? 1.0 : 0.0;
    }
    return k;
  }

  tv decode_masked( tape& t, tv refined_rows ) const { return decoder_( t, refined_rows ); }

  /*! \brief Masked copy of an embedding: HF rows in `mask` replaced by the mask token. */
  view_embedding apply_mask( tape& t, view_embedding const& e, std::vector<node_index> const& mask ) const
  {
    if ( mask.empty() )
      return e;
    return { e.hs, t.replace_rows( e.hf, std::vector<uint32_t>( mask.begin(), mask.end() ), t.param( *mask_token_ ) ) };
  }

private:
  static tv weighted_sum( tape& t, tv alpha, std::vector<tv> const& values )
  {
    tv acc = t.mul_rows( values[0], t.slice_cols( alpha, 0u, 1u ) );
    for ( uint32_t j = 1; j < values.size(); ++j )
      acc = t.add( acc, t.mul_rows( values[j], t.slice_cols( alpha, j, 1u ) ) );
    return acc;
  }

  model_config cfg_;
  param_store store_;
  parameter* pi_hf_ = nullptr;
  parameter* const_hs_ = nullptr;
  parameter* const_hf_ = nullptr;
  std::map<view_kind, view_encoder> encoders_;
  std::map<view_kind, parameter*> tags_;
  cls_pool pool_hop_, pool_sub_, pool_graph_;
  std::vector<transformer_layer> fuse_;
  std::array<linear, 3> readout_;
  parameter* mask_token_ = nullptr;
  linear decoder_;
};

} // namespace mvg::nn
