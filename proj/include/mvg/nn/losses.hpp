/*!
  \file losses.hpp
  \brief Training objectives over tape values
*/

#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "../error.hpp"
#include "tape.hpp"

namespace mvg::nn
{

/*! \brief Mean absolute error of an n x 1 prediction against per-row targets. */
inline tv loss_spp( tape& t, tv pred, std::vector<double> const& truth )
{
  auto const& p = t.value( pred );
  if ( p.cols() != 1 || static_cast<std::size_t>( p.rows() ) != truth.size() )
    throw error( errc::length_mismatch, "prediction rows " + std::to_string( p.rows() ) + " vs " + std::to_string( truth.size() ) + " targets" );
  if ( truth.empty() )
    throw error( errc::empty_input, "no probability targets" );
  mat y( truth.size(), 1 );
  for ( std::size_t i = 0; i < truth.size(); ++i )
    y( i, 0 ) = truth[i];
  return t.mean( t.abs( t.sub( pred, t.constant( std::move( y ) ) ) ) );
}

/*! \brief Standardizes a column to zero mean and unit variance; returns false when its spread is negligible. */
inline bool zero_norm( std::vector<double>& x, double min_std = 1e-8 )
{
  if ( x.empty() )
    return false;
  double mu = 0.0;
  for ( auto v : x )
    mu += v;
  mu /= x.size();
  double var = 0.0;
  for ( auto v : x )
    var += ( v - mu ) * ( v - mu );
  double const sd = std::sqrt( var / x.size() );
  if ( sd < min_std )
    return false;
  for ( auto& v : x )
    v = ( v - mu ) / sd;
  return true;
}

/*! \brief Cosine distances 1 - cos(a_i, b_i), k x 1. */
inline tv cosine_distance_rows( tape& t, tv a, tv b, double eps = 1e-8 )
{
  auto const dot = t.row_sum( t.cmul( a, b ) );
  auto const na = t.sqrt( t.add_scalar( t.row_sum( t.square( a ) ), eps ) );
  auto const nb = t.sqrt( t.add_scalar( t.row_sum( t.square( b ) ), eps ) );
  return t.add_scalar( t.scale( t.cdiv( dot, t.cmul( na, nb ) ), -1.0 ), 1.0 );
}

/*! \brief MAE between the standardized token distances `dt` (k x 1) and standardized table distances.

  A constant column makes the standardization undefined and raises
  DegeneratePairSet so the caller can resample.
*/
inline tv loss_ttdp_distances( tape& t, tv dt, std::vector<double> table_dist )
{
  auto const k = t.value( dt ).rows();
  if ( t.value( dt ).cols() != 1 || static_cast<std::size_t>( k ) != table_dist.size() )
    throw error( errc::length_mismatch, "pair and distance counts differ" );
  if ( k < 2 )
    throw error( errc::degenerate_pair_set, "fewer than two pairs" );
  if ( !zero_norm( table_dist ) )
    throw error( errc::degenerate_pair_set, "truth-table distances are constant over the pair set" );
  auto const mu = t.mean( dt );
  auto const centered = t.sub( dt, t.broadcast( mu, k, 1 ) );
  auto const sd = t.sqrt( t.add_scalar( t.mean( t.square( centered ) ), 1e-12 ) );
  if ( t.scalar( sd ) < 1e-6 )
    throw error( errc::degenerate_pair_set, "token distances are constant over the pair set" );
  auto const zt = t.cdiv( centered, t.broadcast( sd, k, 1 ) );
  mat y( k, 1 );
  for ( Eigen::Index i = 0; i < k; ++i )
    y( i, 0 ) = table_dist[i];
  return t.mean( t.abs( t.sub( zt, t.constant( std::move( y ) ) ) ) );
}

/*! \brief Truth-table distance regression on token rows: `table_dist[k]` belongs to `pairs[k]`. */
inline tv loss_ttdp( tape& t, tv tokens, std::vector<std::pair<uint32_t, uint32_t>> const& pairs, std::vector<double> table_dist )
{
  if ( pairs.size() != table_dist.size() )
    throw error( errc::length_mismatch, "pair and distance counts differ" );
  if ( pairs.size() < 2u )
    throw error( errc::degenerate_pair_set, "fewer than two pairs" );
  std::vector<uint32_t> ia, ib;
  for ( auto [a, b] : pairs )
  {
    ia.push_back( a );
    ib.push_back( b );
  }
  return loss_ttdp_distances( t, cosine_distance_rows( t, t.gather_rows( tokens, ia ), t.gather_rows( tokens, ib ) ), std::move( table_dist ) );
}

/*! \brief Mean L1 distance (averaged over width and pairs) between paired rows of two embeddings.

  An empty pair set yields a constant zero; callers report it.
*/
inline tv loss_align( tape& t, tv hf_a, tv hf_b, std::vector<std::pair<uint32_t, uint32_t>> const& pairs )
{
  if ( pairs.empty() )
    return t.constant( mat::Zero( 1, 1 ) );
  std::vector<uint32_t> ia, ib;
  for ( auto [a, b] : pairs )
  {
    ia.push_back( a );
    ib.push_back( b );
  }
  return t.mean( t.abs( t.sub( t.gather_rows( hf_a, ia ), t.gather_rows( hf_b, ib ) ) ) );
}

/*! \brief Mean absolute reconstruction error over masked rows and width; zero when nothing is masked. */
inline tv loss_mcm( tape& t, tv decoded, tv target )
{
  if ( t.value( decoded ).rows() != t.value( target ).rows() || t.value( decoded ).cols() != t.value( target ).cols() )
    throw error( errc::width_mismatch, "reconstruction and target shapes differ" );
  if ( t.value( decoded ).rows() == 0 )
    return t.constant( mat::Zero( 1, 1 ) );
  return t.mean( t.abs( t.sub( decoded, t.detach( target ) ) ) );
}

/*! \brief InfoNCE over cosine similarities, summed over anchors.

  Anchor k pairs row `pos[k].first` of `a` with row `pos[k].second` of `b`;
  `negatives[k]` lists rows of `b` used as its negatives.
*/
inline tv loss_contrastive( tape& t, tv a, tv b, std::vector<std::pair<uint32_t, uint32_t>> const& pos,
                            std::vector<std::vector<uint32_t>> const& negatives, double tau )
{
  if ( pos.size() != negatives.size() )
    throw error( errc::length_mismatch, "one negative list per anchor is required" );
  if ( pos.empty() )
    throw error( errc::empty_input, "no anchors" );
  if ( !( tau > 0.0 ) )
    throw error( errc::invalid_argument, "temperature must be positive" );
  std::vector<tv> terms;
  for ( std::size_t k = 0; k < pos.size(); ++k )
  {
    if ( negatives[k].empty() )
      throw error( errc::invalid_argument, "anchor without negatives" );
    std::vector<uint32_t> cand{ pos[k].second };
    cand.insert( cand.end(), negatives[k].begin(), negatives[k].end() );
    auto const anchor = t.gather_rows( a, std::vector<uint32_t>( cand.size(), pos[k].first ) );
    auto const others = t.gather_rows( b, cand );
    /* similarity = 1 - distance, as a 1 x (1+K) logit row */
    auto const sim = t.transpose( t.scale( t.add_scalar( t.scale( cosine_distance_rows( t, anchor, others ), -1.0 ), 1.0 ), 1.0 / tau ) );
    auto const lse = t.logsumexp_rows( sim );
    terms.push_back( t.sub( lse, t.slice_cols( sim, 0u, 1u ) ) );
  }
  return t.sum( t.concat_rows( terms ) );
}

} // namespace mvg::nn
