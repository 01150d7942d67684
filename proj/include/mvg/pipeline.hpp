/*!
  \file pipeline.hpp
  \brief AIG to multiview dataset record: conversion, verification, ground truth and labels
*/

#pragma once

#include <map>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "equivalence.hpp"
#include "lut_mapping.hpp"
#include "lut_resyn.hpp"
#include "random.hpp"
#include "record.hpp"
#include "simulation.hpp"
#include "verify.hpp"

namespace mvg
{

inline std::vector<view_kind> const& default_targets()
{
  static std::vector<view_kind> const t{ view_kind::mig, view_kind::xag, view_kind::xmg };
  return t;
}

/*! \brief lut_map followed by lut_resyn into each target view. */
inline std::map<view_kind, circuit> convert_views( circuit const& aig, std::vector<view_kind> const& targets,
                                                   npn4_db const& db = npn4_db::builtin(), lut_map_params const& mp = {} )
{
  auto const luts = lut_map( aig, mp );
  std::map<view_kind, circuit> out;
  for ( auto t : targets )
  {
    auto c = lut_resyn( luts, t, db );
    c.set_name( aig.name() );
    out.emplace( t, std::move( c ) );
  }
  return out;
}

struct record_params
{
  std::vector<view_kind> targets = default_targets();
  uint32_t pattern_count = 4096u;
  uint32_t spp_patterns = 15040u;
  uint64_t seed = 1u;
};

/*! \brief Record with all views, signal-probability ground truth and fingerprints (no labels yet). */
inline dataset_record build_record( circuit const& aig, record_params const& ps, npn4_db const& db = npn4_db::builtin() )
{
  dataset_record r;
  r.name = aig.name();
  r.views.emplace( view_kind::aig, aig );
  for ( auto& [v, c] : convert_views( aig, ps.targets, db ) )
    r.views.emplace( v, std::move( c ) );
  r.meta.pattern_count = ps.pattern_count;
  r.meta.spp_patterns = ps.spp_patterns;
  r.meta.seed = ps.seed;
  for ( auto const& [v, c] : r.views )
  {
    auto const spp = signal_probability( simulate( c, ps.spp_patterns, derive_seed( ps.seed, "spp" ) ) );
    auto& dst = r.spp_truth[v];
    for ( auto p : spp )
      dst.push_back( quantize9( p ) );
    auto const s = simulate( c, ps.pattern_count, derive_seed( ps.seed, "label" ) );
    auto& fps = r.tt_fingerprints[v];
    for ( node_index n = 0; n < c.size(); ++n )
      fps.push_back( fingerprint( s, n ).hash );
  }
  return r;
}

/*! \brief Computes AIG-first cross-view pairs for `views` (all non-AIG views when empty). */
inline void label_record( dataset_record& r, std::vector<view_kind> views, label_params ps )
{
  auto const& aig = r.view( view_kind::aig );
  if ( views.empty() )
    for ( auto const& [v, c] : r.views )
      if ( v != view_kind::aig )
        views.push_back( v );
  std::vector<circuit const*> others;
  for ( auto v : views )
    if ( v != view_kind::aig )
      others.push_back( &r.view( v ) );
  ps.n_patterns = r.meta.pattern_count ? r.meta.pattern_count : ps.n_patterns;
  ps.seed = derive_seed( r.meta.seed, "label" );
  auto res = label_views( aig, others, ps );
  r.equiv_pairs = std::move( res.pairs );
  r.meta.label_stats = res.stats;
  r.meta.labeled = true;
}

/*! \brief Verifies every non-AIG view of a record against its AIG. */
inline std::vector<verify_report> verify_record( dataset_record const& r, verify_params const& ps = {} )
{
  if ( r.views.size() < 2u )
    throw error( errc::schema_violation, "verification needs at least two views" );
  std::vector<verify_report> out;
  auto const& aig = r.view( view_kind::aig );
  for ( auto const& [v, c] : r.views )
    if ( v != view_kind::aig )
      out.push_back( verify_views( aig, c, ps ) );
  return out;
}

} // namespace mvg
