/*!
  \file layers.hpp
  \brief Linear maps, multi-head self-attention, pre-LN transformer layers and CLS pooling
*/

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "../error.hpp"
#include "../random.hpp"
#include "tape.hpp"

namespace mvg::nn
{

/*! \brief Gaussian matrix scaled by 1/sqrt(fan_in). */
inline mat init_dense( rng& gen, Eigen::Index rows, Eigen::Index cols, double gain = 1.0 )
{
  mat m( rows, cols );
  double const s = gain / std::sqrt( static_cast<double>( rows ) );
  for ( Eigen::Index i = 0; i < m.size(); ++i )
    m.data()[i] = gen.normal() * s;
  return m;
}

/*! \brief Identity (padded with zeros when not square) plus Gaussian noise. */
inline mat init_near_identity( rng& gen, Eigen::Index rows, Eigen::Index cols, double noise )
{
  mat m = mat::Zero( rows, cols );
  for ( Eigen::Index i = 0; i < std::min( rows, cols ); ++i )
    m( i, i ) = 1.0;
  for ( Eigen::Index i = 0; i < m.size(); ++i )
    m.data()[i] += gen.normal() * noise;
  return m;
}

struct linear
{
  parameter* w = nullptr;
  parameter* b = nullptr;

  static linear make( param_store& ps, rng& gen, std::string const& name, uint32_t in, uint32_t out, bool bias = true )
  {
    linear l;
    l.w = &ps.add( name + ".w", init_dense( gen, in, out ) );
    if ( bias )
      l.b = &ps.add( name + ".b", mat::Zero( 1, out ) );
    return l;
  }

  tv operator()( tape& t, tv x ) const
  {
    auto y = t.matmul( x, t.param( *w ) );
    return b ? t.add_row( y, t.param( *b ) ) : y;
  }
};

struct layer_norm_params
{
  parameter* gain = nullptr;
  parameter* bias = nullptr;

  static layer_norm_params make( param_store& ps, std::string const& name, uint32_t d )
  {
    return { &ps.add( name + ".g", mat::Ones( 1, d ) ), &ps.add( name + ".b", mat::Zero( 1, d ) ) };
  }

  tv operator()( tape& t, tv x ) const { return t.layer_norm( x, t.param( *gain ), t.param( *bias ) ); }
};

struct attention
{
  linear q, k, v, o;
  uint32_t heads = 1u;

  static attention make( param_store& ps, rng& gen, std::string const& name, uint32_t d, uint32_t heads )
  {
    if ( heads == 0u || d % heads != 0u )
      throw error( errc::width_mismatch, "embedding width " + std::to_string( d ) + " not divisible by " + std::to_string( heads ) + " heads" );
    attention a;
    a.q = linear::make( ps, gen, name + ".q", d, d, false );
    a.k = linear::make( ps, gen, name + ".k", d, d, false );
    a.v = linear::make( ps, gen, name + ".v", d, d, false );
    a.o = linear::make( ps, gen, name + ".o", d, d );
    a.heads = heads;
    return a;
  }

  tv operator()( tape& t, tv x ) const
  {
    auto const d = static_cast<uint32_t>( t.value( x ).cols() );
    auto const dh = d / heads;
    double const scale = 1.0 / std::sqrt( static_cast<double>( dh ) );
    auto const Q = q( t, x ), K = k( t, x ), V = v( t, x );
    std::vector<tv> outs;
    for ( uint32_t h = 0; h < heads; ++h )
    {
      auto const qh = t.slice_cols( Q, h * dh, dh ), kh = t.slice_cols( K, h * dh, dh ), vh = t.slice_cols( V, h * dh, dh );
      auto const a = t.softmax_rows( t.scale( t.matmul( qh, t.transpose( kh ) ), scale ) );
      outs.push_back( t.matmul( a, vh ) );
    }
    return o( t, heads == 1u ? outs[0] : t.concat_cols( outs ) );
  }
};

/*! \brief x + attn(LN(x)), then + FFN(LN(.)). */
struct transformer_layer
{
  layer_norm_params ln1, ln2;
  attention attn;
  linear ff1, ff2;

  static transformer_layer make( param_store& ps, rng& gen, std::string const& name, uint32_t d, uint32_t heads, uint32_t ffn )
  {
    transformer_layer l;
    l.ln1 = layer_norm_params::make( ps, name + ".ln1", d );
    l.attn = attention::make( ps, gen, name + ".attn", d, heads );
    l.ln2 = layer_norm_params::make( ps, name + ".ln2", d );
    l.ff1 = linear::make( ps, gen, name + ".ff1", d, ffn );
    l.ff2 = linear::make( ps, gen, name + ".ff2", ffn, d );
    return l;
  }

  tv operator()( tape& t, tv x ) const
  {
    auto const x1 = t.add( x, attn( t, ln1( t, x ) ) );
    return t.add( x1, ff2( t, t.relu( ff1( t, ln2( t, x1 ) ) ) ) );
  }

  /* sublayer output maps; zeroing them makes the layer the identity */
  std::vector<parameter*> output_params() const { return { attn.o.w, attn.o.b, ff2.w, ff2.b }; }
};

/*! \brief Prepends a learned CLS row, runs the layers and returns the CLS output row. */
struct cls_pool
{
  parameter* cls = nullptr;
  std::vector<transformer_layer> layers;

  static cls_pool make( param_store& ps, rng& gen, std::string const& name, uint32_t d, uint32_t heads, uint32_t num_layers, uint32_t ffn )
  {
    cls_pool p;
    mat c( 1, d );
    for ( Eigen::Index i = 0; i < c.size(); ++i )
      c.data()[i] = gen.normal() * 0.5;
    p.cls = &ps.add( name + ".cls", std::move( c ) );
    for ( uint32_t i = 0; i < num_layers; ++i )
      p.layers.push_back( transformer_layer::make( ps, gen, name + "." + std::to_string( i ), d, heads, ffn ) );
    return p;
  }

  tv operator()( tape& t, tv rows ) const
  {
    if ( t.value( rows ).rows() == 0 )
      throw error( errc::empty_input, "pooling over zero rows" );
    auto x = t.concat_rows( { t.param( *cls ), rows } );
    for ( auto const& l : layers )
      x = l( t, x );
    return t.slice_rows( x, 0u, 1u );
  }
};

} // namespace mvg::nn
