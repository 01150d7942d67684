/*!
  \file record.hpp
  \brief One-line JSON serialization of dataset records
*/

#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "circuit.hpp"
#include "equivalence.hpp"
#include "error.hpp"
#include "mvnl.hpp"

namespace mvg
{

struct record_meta
{
  uint32_t pattern_count = 0u; /* labeling / fingerprint patterns */
  uint32_t spp_patterns = 0u;
  uint64_t seed = 0u;
  bool labeled = false;
  equiv_stats label_stats;
};

struct dataset_record
{
  std::string name;
  std::map<view_kind, circuit> views;
  std::vector<equiv_pair> equiv_pairs;
  std::map<view_kind, std::vector<double>> spp_truth;
  std::map<view_kind, std::vector<uint64_t>> tt_fingerprints;
  record_meta meta;

  circuit const& view( view_kind v ) const
  {
    auto it = views.find( v );
    if ( it == views.end() )
      throw error( errc::schema_violation, "record '" + name + "' has no " + std::string( view_name( v ) ) + " view" );
    return it->second;
  }
};

/*! \brief Rounds to the nearest double printed with 9 significant digits. */
inline double quantize9( double x )
{
  char buf[32];
  std::snprintf( buf, sizeof( buf ), "%.9g", x );
  return std::strtod( buf, nullptr );
}

inline void validate_record( dataset_record const& r )
{
  auto fail = [&]( std::string const& why ) { throw error( errc::schema_violation, "record '" + r.name + "': " + why ); };
  if ( !r.views.contains( view_kind::aig ) )
    fail( "AIG view is required" );
  auto const& aig = r.views.at( view_kind::aig );
  for ( auto const& [v, c] : r.views )
  {
    if ( v == view_kind::lut )
      fail( "LUT networks are not record views" );
    if ( c.view() != v )
      fail( "view tag mismatch" );
    if ( c.num_pis() != aig.num_pis() || c.num_pos() != aig.num_pos() )
      fail( std::string( view_name( v ) ) + " PI/PO counts differ from the AIG" );
  }
  for ( auto const& p : r.equiv_pairs )
  {
    auto ia = r.views.find( p.view_a ), ib = r.views.find( p.view_b );
    if ( ia == r.views.end() || ib == r.views.end() )
      fail( "pair references a missing view" );
    if ( p.node_a >= ia->second.size() || p.node_b >= ib->second.size() )
      fail( "pair references a missing node" );
  }
  for ( auto const& [v, probs] : r.spp_truth )
  {
    auto it = r.views.find( v );
    if ( it == r.views.end() || probs.size() != it->second.size() )
      fail( "signal probabilities do not match a view" );
    for ( auto p : probs )
      if ( !( p >= 0.0 && p <= 1.0 ) )
        fail( "signal probability outside [0,1]" );
  }
  for ( auto const& [v, fps] : r.tt_fingerprints )
  {
    auto it = r.views.find( v );
    if ( it == r.views.end() || fps.size() != it->second.size() )
      fail( "fingerprints do not match a view" );
  }
}

namespace detail
{

inline nlohmann::json stats_json( equiv_stats const& s )
{
  return { { "candidates_filtered", s.candidates_filtered },
           { "dropped_resourceout", s.dropped_resourceout },
           { "refinements", s.refinements },
           { "sat_calls", s.sat_calls },
           { "sat_count", s.sat_count },
           { "unsat_count", s.unsat_count } };
}

inline std::string hex64( uint64_t x )
{
  char buf[24];
  std::snprintf( buf, sizeof( buf ), "%016llx", static_cast<unsigned long long>( x ) );
  return buf;
}

} // namespace detail

/*! \brief Serializes a record as one line of JSON with sorted keys and no trailing newline. */
inline std::string write_record( dataset_record const& r )
{
  validate_record( r );
  nlohmann::json j;
  j["name"] = r.name;
  auto& views = j["views"] = nlohmann::json::object();
  for ( auto const& [v, c] : r.views )
    views[std::string( view_name( v ) )] = write_mvnl( c );
  auto& pairs = j["equiv_pairs"] = nlohmann::json::array();
  for ( auto const& p : r.equiv_pairs )
  {
    nlohmann::json e = { std::string( view_name( p.view_a ) ), p.node_a, std::string( view_name( p.view_b ) ), p.node_b };
    if ( p.complement )
      e.push_back( "complement" );
    pairs.push_back( std::move( e ) );
  }
  auto& spp = j["spp_truth"] = nlohmann::json::object();
  for ( auto const& [v, probs] : r.spp_truth )
  {
    auto& a = spp[std::string( view_name( v ) )] = nlohmann::json::array();
    for ( auto p : probs )
      a.push_back( quantize9( p ) );
  }
  auto& fps = j["tt_fingerprints"] = nlohmann::json::object();
  for ( auto const& [v, f] : r.tt_fingerprints )
  {
    auto& a = fps[std::string( view_name( v ) )] = nlohmann::json::array();
    for ( auto x : f )
      a.push_back( detail::hex64( x ) );
  }
  j["meta"] = { { "pattern_count", r.meta.pattern_count },
                { "spp_patterns", r.meta.spp_patterns },
                { "seed", r.meta.seed },
                { "labeled", r.meta.labeled },
                { "label_stats", detail::stats_json( r.meta.label_stats ) } };
  return j.dump();
}

inline dataset_record read_record( std::string_view text )
{
  dataset_record r;
  auto fail = [&]( std::string const& why ) -> void { throw error( errc::schema_violation, why ); };
  nlohmann::json j;
  try
  {
    j = nlohmann::json::parse( text );
  }
  catch ( nlohmann::json::exception const& e )
  {
    fail( std::string( "malformed record: " ) + e.what() );
  }
  try
  {
    r.name = j.at( "name" ).get<std::string>();
    auto view_of = [&]( std::string const& s ) {
      auto v = view_from_name( s );
      if ( !v )
        fail( "unknown view '" + s + "'" );
      return *v;
    };
    for ( auto const& [k, text_v] : j.at( "views" ).items() )
    {
      auto const v = view_of( k );
      try
      {
        r.views.emplace( v, parse_mvnl( text_v.get<std::string>(), r.name ) );
      }
      catch ( error const& e )
      {
        fail( std::string( "view " ) + k + ": " + e.what() );
      }
    }
    for ( auto const& e : j.at( "equiv_pairs" ) )
    {
      if ( !e.is_array() || e.size() < 4u || e.size() > 5u )
        fail( "pair must have 4 or 5 fields" );
      equiv_pair p{ view_of( e[0].get<std::string>() ), e[1].get<node_index>(), view_of( e[2].get<std::string>() ),
                    e[3].get<node_index>(), false };
      if ( e.size() == 5u )
      {
        if ( e[4] != "complement" )
          fail( "unknown pair polarity" );
        p.complement = true;
      }
      r.equiv_pairs.push_back( p );
    }
    for ( auto const& [k, a] : j.at( "spp_truth" ).items() )
      r.spp_truth[view_of( k )] = a.get<std::vector<double>>();
    for ( auto const& [k, a] : j.at( "tt_fingerprints" ).items() )
    {
      auto& out = r.tt_fingerprints[view_of( k )];
      for ( auto const& h : a )
        out.push_back( std::stoull( h.get<std::string>(), nullptr, 16 ) );
    }
    auto const& m = j.at( "meta" );
    r.meta.pattern_count = m.at( "pattern_count" ).get<uint32_t>();
    r.meta.spp_patterns = m.at( "spp_patterns" ).get<uint32_t>();
    r.meta.seed = m.at( "seed" ).get<uint64_t>();
    r.meta.labeled = m.at( "labeled" ).get<bool>();
    auto const& s = m.at( "label_stats" );
    r.meta.label_stats.candidates_filtered = s.at( "candidates_filtered" ).get<uint64_t>();
    r.meta.label_stats.dropped_resourceout = s.at( "dropped_resourceout" ).get<uint64_t>();
    r.meta.label_stats.refinements = s.at( "refinements" ).get<uint64_t>();
    r.meta.label_stats.sat_calls = s.at( "sat_calls" ).get<uint64_t>();
    r.meta.label_stats.sat_count = s.at( "sat_count" ).get<uint64_t>();
    r.meta.label_stats.unsat_count = s.at( "unsat_count" ).get<uint64_t>();
  }
  catch ( nlohmann::json::exception const& e )
  {
    fail( std::string( "record field: " ) + e.what() );
  }
  catch ( std::invalid_argument const& )
  {
    fail( "bad fingerprint" );
  }
  validate_record( r );
  return r;
}

} // namespace mvg
