/*!
  \file mvnl.hpp
  \brief Multiview netlist text format (MVNL v1)

  \verbatim
  MVNL v1 <view> <n_nodes> <n_pis> <n_pos>
  PIS: <pi node indices in PI order>
  POS: <po node indices in PO order>
  <idx> <GATE> <fanin idx...> [tt=<4 hex digits>] [# comment]
  \endverbatim

  One node per line.  Only LUT4 lines carry `tt=`.  Text after `#` is ignored.
*/

#pragma once

#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"

namespace mvg
{

inline std::string write_mvnl( circuit const& c )
{
  std::string out = "MVNL v1 " + std::string( view_name( c.view() ) ) + " " + std::to_string( c.size() ) + " " +
                    std::to_string( c.num_pis() ) + " " + std::to_string( c.num_pos() ) + "\nPIS:";
  for ( auto p : c.pis() )
    out += " " + std::to_string( p );
  out += "\nPOS:";
  for ( auto p : c.pos() )
    out += " " + std::to_string( p );
  out += "\n";
  for ( node_index n = 0; n < c.size(); ++n )
  {
    out += std::to_string( n );
    out += ' ';
    out += gate_name( c.gate( n ) );
    for ( auto f : c.fanins( n ) )
      out += " " + std::to_string( f );
    if ( c.gate( n ) == gate_type::lut4 )
    {
      char buf[16];
      std::snprintf( buf, sizeof( buf ), " tt=%04x", static_cast<unsigned>( c[n].truth ) );
      out += buf;
    }
    out += '\n';
  }
  return out;
}

namespace detail
{

inline std::vector<std::string_view> tokens_of( std::string_view line )
{
  if ( auto const hash = line.find( '#' ); hash != std::string_view::npos )
    line = line.substr( 0, hash );
  std::vector<std::string_view> toks;
  std::size_t i = 0u;
  while ( i < line.size() )
  {
    while ( i < line.size() && ( line[i] == ' ' || line[i] == '\t' || line[i] == '\r' ) )
      ++i;
    auto const start = i;
    while ( i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' )
      ++i;
    if ( i > start )
      toks.push_back( line.substr( start, i - start ) );
  }
  return toks;
}

inline uint32_t parse_u32( std::string_view tok, std::size_t line_no, int base = 10 )
{
  uint32_t v = 0u;
  auto const [ptr, ec] = std::from_chars( tok.data(), tok.data() + tok.size(), v, base );
  if ( ec != std::errc{} || ptr != tok.data() + tok.size() )
    throw error( errc::bad_token, "line " + std::to_string( line_no ) + ": '" + std::string( tok ) + "' is not a number" );
  return v;
}

} // namespace detail

inline circuit parse_mvnl( std::string_view text, std::string name = {} )
{
  std::vector<std::vector<std::string_view>> lines;
  std::vector<std::size_t> line_nos;
  std::size_t pos = 0u, line_no = 0u;
  while ( pos <= text.size() )
  {
    auto const end = text.find( '\n', pos );
    auto const l = end == std::string_view::npos ? text.substr( pos ) : text.substr( pos, end - pos );
    ++line_no;
    auto toks = detail::tokens_of( l );
    if ( !toks.empty() )
    {
      lines.push_back( std::move( toks ) );
      line_nos.push_back( line_no );
    }
    if ( end == std::string_view::npos )
      break;
    pos = end + 1u;
  }
  if ( lines.empty() )
    throw error( errc::bad_token, "empty MVNL text" );
  auto const& hdr = lines[0];
  if ( hdr.size() != 6u || hdr[0] != "MVNL" || hdr[1] != "v1" )
    throw error( errc::bad_token, "line " + std::to_string( line_nos[0] ) + ": expected 'MVNL v1 <view> <n> <pis> <pos>'" );
  auto const view = view_from_name( hdr[2] );
  if ( !view )
    throw error( errc::bad_token, "unknown view '" + std::string( hdr[2] ) + "'" );
  auto const n = detail::parse_u32( hdr[3], line_nos[0] );
  auto const n_pis = detail::parse_u32( hdr[4], line_nos[0] );
  auto const n_pos = detail::parse_u32( hdr[5], line_nos[0] );

  std::vector<node_index> pis, pos_list;
  std::vector<raw_gate> gates( n, raw_gate{ gate_type::const0 } );
  std::vector<bool> seen( n, false );
  bool have_pis = false, have_pos = false;
  auto check_index = [&]( uint32_t idx, std::size_t ln ) {
    if ( idx >= n )
      throw error( errc::index_out_of_range, "line " + std::to_string( ln ) + ": index " + std::to_string( idx ) );
  };

  for ( std::size_t k = 1; k < lines.size(); ++k )
  {
    auto const& t = lines[k];
    auto const ln = line_nos[k];
    if ( t[0] == "PIS:" || t[0] == "POS:" )
    {
      auto& dst = t[0] == "PIS:" ? pis : pos_list;
      ( t[0] == "PIS:" ? have_pis : have_pos ) = true;
      for ( std::size_t j = 1; j < t.size(); ++j )
      {
        auto const idx = detail::parse_u32( t[j], ln );
        check_index( idx, ln );
        dst.push_back( idx );
      }
      continue;
    }
    if ( t.size() < 2u )
      throw error( errc::bad_token, "line " + std::to_string( ln ) + ": expected '<idx> <GATE> ...'" );
    auto const idx = detail::parse_u32( t[0], ln );
    check_index( idx, ln );
    if ( seen[idx] )
      throw error( errc::bad_token, "line " + std::to_string( ln ) + ": node " + std::to_string( idx ) + " defined twice" );
    seen[idx] = true;
    auto const g = gate_from_name( t[1] );
    if ( !g )
      throw error( errc::bad_token, "line " + std::to_string( ln ) + ": unknown gate '" + std::string( t[1] ) + "'" );
    raw_gate rg{ *g };
    bool have_tt = false;
    for ( std::size_t j = 2; j < t.size(); ++j )
    {
      if ( t[j].starts_with( "tt=" ) )
      {
        if ( *g != gate_type::lut4 || have_tt || t[j].size() != 7u )
          throw error( errc::bad_token, "line " + std::to_string( ln ) + ": unexpected '" + std::string( t[j] ) + "'" );
        rg.truth = static_cast<uint16_t>( detail::parse_u32( t[j].substr( 3 ), ln, 16 ) );
        have_tt = true;
        continue;
      }
      if ( have_tt )
        throw error( errc::bad_token, "line " + std::to_string( ln ) + ": fanin after tt=" );
      auto const f = detail::parse_u32( t[j], ln );
      check_index( f, ln );
      rg.fanins.push_back( f );
    }
    if ( rg.fanins.size() < min_arity( *g ) || rg.fanins.size() > max_arity( *g ) )
      throw error( errc::bad_token, "line " + std::to_string( ln ) + ": ArityMismatch: " + std::string( t[1] ) + " with " +
                                        std::to_string( rg.fanins.size() ) + " fanins" );
    if ( *g == gate_type::lut4 && !have_tt )
      throw error( errc::bad_token, "line " + std::to_string( ln ) + ": LUT4 without tt=" );
    gates[idx] = std::move( rg );
  }
  if ( !have_pis || !have_pos )
    throw error( errc::bad_token, "missing PIS:/POS: line" );
  for ( uint32_t i = 0; i < n; ++i )
    if ( !seen[i] )
      throw error( errc::bad_token, "node " + std::to_string( i ) + " is not defined" );
  if ( pis.size() != n_pis || pos_list.size() != n_pos )
    throw error( errc::bad_token, "PI/PO counts disagree with header" );
  try
  {
    return build_circuit( *view, gates, pis, pos_list, std::move( name ) );
  }
  catch ( error const& e )
  {
    if ( e.code() == errc::index_out_of_range )
      throw;
    throw error( errc::bad_token, e.what() );
  }
}

} // namespace mvg
