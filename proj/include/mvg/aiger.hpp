/*!
  \file aiger.hpp
  \brief AIGER reader/writer (combinational subset of format 1.9)

  Both the ASCII (`aag`) and binary (`aig`) encodings are supported.
  Complemented literals are materialized as explicit NOT nodes: one NOT per
  variable, created at first use.  The resulting node order is canonical:
  PIs in input order, then for every AND (in topological order) the NOT or
  constant nodes it needs followed by the AND itself, then the output
  drivers and PO markers.  AND fanins are ordered by descending literal, as
  the binary encoding requires.
*/

#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"

namespace mvg
{

/*! \brief Literal-level view of a combinational AIGER file. */
struct aiger_model
{
  uint32_t max_var = 0u;
  std::vector<uint32_t> inputs;                /* literals (even) */
  std::vector<uint32_t> outputs;               /* literals */
  std::vector<std::array<uint32_t, 3>> ands;   /* lhs, rhs0, rhs1 */
  std::vector<std::string> trailer;            /* symbol table and comment lines, verbatim */
};

namespace detail
{

class aiger_reader
{
public:
  explicit aiger_reader( std::string_view bytes ) : s_( bytes ) {}

  bool at_end() const noexcept { return pos_ >= s_.size(); }

  std::string_view line()
  {
    if ( at_end() )
      throw error( errc::truncated_file, "unexpected end of file" );
    auto const end = s_.find( '\n', pos_ );
    std::string_view l = end == std::string_view::npos ? s_.substr( pos_ ) : s_.substr( pos_, end - pos_ );
    pos_ = end == std::string_view::npos ? s_.size() : end + 1u;
    if ( !l.empty() && l.back() == '\r' )
      l.remove_suffix( 1u );
    return l;
  }

  uint32_t varint()
  {
    uint32_t x = 0u;
    uint32_t shift = 0u;
    while ( true )
    {
      if ( at_end() )
        throw error( errc::truncated_file, "unexpected end of binary AND section" );
      auto const ch = static_cast<unsigned char>( s_[pos_++] );
      if ( shift > 28u )
        throw error( errc::bad_token, "varint overflow" );
      x |= static_cast<uint32_t>( ch & 0x7fu ) << shift;
      if ( ( ch & 0x80u ) == 0u )
        return x;
      shift += 7u;
    }
  }

private:
  std::string_view s_;
  std::size_t pos_ = 0u;
};

inline std::vector<uint32_t> split_numbers( std::string_view l, errc code, std::string_view what )
{
  std::vector<uint32_t> out;
  std::size_t i = 0u;
  while ( i < l.size() )
  {
    while ( i < l.size() && l[i] == ' ' )
      ++i;
    if ( i >= l.size() )
      break;
    uint32_t v = 0u;
    auto const [ptr, ec] = std::from_chars( l.data() + i, l.data() + l.size(), v );
    if ( ec != std::errc{} || ( ptr != l.data() + l.size() && *ptr != ' ' ) )
      throw error( code, std::string( what ) + ": '" + std::string( l ) + "'" );
    i = static_cast<std::size_t>( ptr - l.data() );
    out.push_back( v );
  }
  return out;
}

inline void put_varint( std::string& out, uint32_t x )
{
  while ( x & ~0x7fu )
  {
    out.push_back( static_cast<char>( ( x & 0x7fu ) | 0x80u ) );
    x >>= 7u;
  }
  out.push_back( static_cast<char>( x ) );
}

} // namespace detail

/*! \brief Reads the literal structure of an AIGER file. */
inline aiger_model parse_aiger_model( std::string_view bytes )
{
  detail::aiger_reader rd( bytes );
  if ( rd.at_end() )
    throw error( errc::bad_header, "empty file" );
  auto const header = rd.line();
  bool binary;
  if ( header.starts_with( "aag " ) )
    binary = false;
  else if ( header.starts_with( "aig " ) )
    binary = true;
  else
    throw error( errc::bad_header, "missing 'aag'/'aig' magic" );
  auto const h = detail::split_numbers( header.substr( 4 ), errc::bad_header, "malformed header" );
  if ( h.size() < 5u || h.size() > 9u )
    throw error( errc::bad_header, "header needs M I L O A" );
  uint32_t const M = h[0], I = h[1], L = h[2], O = h[3], A = h[4];
  if ( L != 0u )
    throw error( errc::latches_unsupported, std::to_string( L ) + " latches" );
  for ( std::size_t k = 5; k < h.size(); ++k )
    if ( h[k] != 0u )
      throw error( errc::latches_unsupported, "bad/constraint/justice/fairness sections are sequential" );
  if ( static_cast<uint64_t>( I ) + A > M || ( binary && I + A != M ) )
    throw error( errc::bad_header, "M does not cover I + A" );

  aiger_model m;
  m.max_var = M;
  auto check_lit = [&]( uint32_t lit ) {
    if ( ( lit >> 1u ) > M )
      throw error( errc::bad_token, "literal " + std::to_string( lit ) + " exceeds M" );
  };

  if ( binary )
  {
    for ( uint32_t i = 0; i < I; ++i )
      m.inputs.push_back( 2u * ( i + 1u ) );
  }
  else
  {
    for ( uint32_t i = 0; i < I; ++i )
    {
      auto const v = detail::split_numbers( rd.line(), errc::bad_token, "input line" );
      if ( v.size() != 1u || v[0] < 2u || ( v[0] & 1u ) )
        throw error( errc::bad_token, "input literal must be a positive even number" );
      check_lit( v[0] );
      m.inputs.push_back( v[0] );
    }
  }
  for ( uint32_t i = 0; i < O; ++i )
  {
    auto const v = detail::split_numbers( rd.line(), errc::bad_token, "output line" );
    if ( v.size() != 1u )
      throw error( errc::bad_token, "output line needs one literal" );
    check_lit( v[0] );
    m.outputs.push_back( v[0] );
  }
  for ( uint32_t i = 0; i < A; ++i )
  {
    if ( binary )
    {
      uint32_t const lhs = 2u * ( I + i + 1u );
      auto const d0 = rd.varint();
      auto const d1 = rd.varint();
      if ( d0 > lhs || d1 > lhs - d0 )
        throw error( errc::bad_token, "binary AND delta underflow" );
      m.ands.push_back( { lhs, lhs - d0, lhs - d0 - d1 } );
    }
    else
    {
      auto const v = detail::split_numbers( rd.line(), errc::bad_token, "AND line" );
      if ( v.size() != 3u || ( v[0] & 1u ) || v[0] < 2u )
        throw error( errc::bad_token, "AND line needs an even lhs and two literals" );
      for ( auto x : v )
        check_lit( x );
      m.ands.push_back( { v[0], v[1], v[2] } );
    }
  }
  while ( !rd.at_end() )
  {
    auto const l = rd.line();
    if ( l.empty() && rd.at_end() )
      break;
    m.trailer.emplace_back( l );
  }
  return m;
}

/*! \brief Canonical materialization of an AIGER literal structure into an AIG circuit. */
inline circuit circuit_from_aiger( aiger_model const& m, std::string name = {} )
{
  constexpr uint32_t undefined = UINT32_MAX;
  std::vector<uint32_t> and_of_var( m.max_var + 1u, undefined );
  std::vector<bool> is_input( m.max_var + 1u, false );
  for ( auto lit : m.inputs )
  {
    if ( is_input[lit >> 1u] )
      throw error( errc::bad_token, "input variable defined twice" );
    is_input[lit >> 1u] = true;
  }
  for ( uint32_t i = 0; i < m.ands.size(); ++i )
  {
    auto const v = m.ands[i][0] >> 1u;
    if ( is_input[v] || and_of_var[v] != undefined )
      throw error( errc::bad_token, "variable " + std::to_string( v ) + " defined twice" );
    and_of_var[v] = i;
  }

  circuit_builder b( view_kind::aig );
  std::vector<node_index> pos_node( m.max_var + 1u, UINT32_MAX );
  std::vector<node_index> neg_node( m.max_var + 1u, UINT32_MAX );
  for ( auto lit : m.inputs )
    pos_node[lit >> 1u] = b.create_pi();

  auto literal_node = [&]( uint32_t lit ) -> node_index {
    auto const v = lit >> 1u;
    if ( v == 0u )
      pos_node[0] = b.create_const0();
    if ( pos_node[v] == UINT32_MAX )
      throw error( errc::bad_token, "literal " + std::to_string( lit ) + " references an undefined variable" );
    if ( ( lit & 1u ) == 0u )
      return pos_node[v];
    if ( neg_node[v] == UINT32_MAX )
      neg_node[v] = b.create_not( pos_node[v] );
    return neg_node[v];
  };

  /* topological materialization in file order (iterative DFS) */
  std::vector<uint8_t> state( m.ands.size(), 0u );
  for ( uint32_t root = 0; root < m.ands.size(); ++root )
  {
    if ( state[root] == 2u )
      continue;
    std::vector<uint32_t> stack{ root };
    while ( !stack.empty() )
    {
      auto const i = stack.back();
      if ( state[i] == 2u )
      {
        stack.pop_back();
        continue;
      }
      state[i] = 1u;
      bool ready = true;
      for ( int k = 1; k <= 2; ++k )
      {
        auto const v = m.ands[i][k] >> 1u;
        if ( v == 0u || is_input[v] )
          continue;
        auto const a = and_of_var[v];
        if ( a == undefined )
          throw error( errc::bad_token, "literal " + std::to_string( m.ands[i][k] ) + " references an undefined variable" );
        if ( state[a] == 1u )
          throw error( errc::cycle_detected, "AND definitions are cyclic at variable " + std::to_string( v ) );
        if ( state[a] == 0u )
        {
          stack.push_back( a );
          ready = false;
        }
      }
      if ( !ready )
        continue;
      auto const hi = std::max( m.ands[i][1], m.ands[i][2] );
      auto const lo = std::min( m.ands[i][1], m.ands[i][2] );
      auto const f0 = literal_node( hi );
      auto const f1 = literal_node( lo );
      pos_node[m.ands[i][0] >> 1u] = b.create_and( f0, f1 );
      state[i] = 2u;
      stack.pop_back();
    }
  }
  for ( auto lit : m.outputs )
    b.create_po( literal_node( lit ) );
  auto c = b.build( std::move( name ) );
  c.set_annotations( m.trailer );
  return c;
}

/*! \brief Parses `aag` or `aig` bytes into an AIG circuit. */
inline circuit parse_aiger( std::string_view bytes, std::string name = {} )
{
  return circuit_from_aiger( parse_aiger_model( bytes ), std::move( name ) );
}

/*! \brief Literal structure of an AIG circuit (NOT nodes fold into complemented literals). */
inline aiger_model aiger_from_circuit( circuit const& c )
{
  if ( c.view() != view_kind::aig )
    throw error( errc::illegal_gate_for_view, "AIGER export needs an AIG view" );
  aiger_model m;
  std::vector<uint32_t> lit( c.size(), 0u );
  uint32_t const I = c.num_pis();
  for ( uint32_t k = 0; k < I; ++k )
  {
    lit[c.pis()[k]] = 2u * ( k + 1u );
    m.inputs.push_back( 2u * ( k + 1u ) );
  }
  uint32_t next_var = I + 1u;
  for ( node_index n = 0; n < c.size(); ++n )
  {
    auto const fis = c.fanins( n );
    switch ( c.gate( n ) )
    {
    case gate_type::pi: break;
    case gate_type::const0: lit[n] = 0u; break;
    case gate_type::const1: lit[n] = 1u; break;
    case gate_type::not_: lit[n] = lit[fis[0]] ^ 1u; break;
    case gate_type::and2:
    {
      lit[n] = 2u * next_var++;
      auto const a = lit[fis[0]], b = lit[fis[1]];
      m.ands.push_back( { lit[n], std::max( a, b ), std::min( a, b ) } );
      break;
    }
    case gate_type::po: lit[n] = lit[fis[0]]; break;
    default: throw error( errc::illegal_gate_for_view, "unexpected gate in AIG" );
    }
  }
  for ( auto p : c.pos() )
    m.outputs.push_back( lit[p] );
  m.max_var = next_var - 1u;
  m.trailer = c.annotations();
  return m;
}

inline std::string write_aiger_model( aiger_model const& m, bool binary )
{
  std::string out;
  out += binary ? "aig " : "aag ";
  out += std::to_string( m.max_var ) + " " + std::to_string( m.inputs.size() ) + " 0 " +
         std::to_string( m.outputs.size() ) + " " + std::to_string( m.ands.size() ) + "\n";
  if ( !binary )
    for ( auto lit : m.inputs )
      out += std::to_string( lit ) + "\n";
  for ( auto lit : m.outputs )
    out += std::to_string( lit ) + "\n";
  for ( auto const& a : m.ands )
  {
    if ( binary )
    {
      detail::put_varint( out, a[0] - a[1] );
      detail::put_varint( out, a[1] - a[2] );
    }
    else
      out += std::to_string( a[0] ) + " " + std::to_string( a[1] ) + " " + std::to_string( a[2] ) + "\n";
  }
  for ( auto const& l : m.trailer )
    out += l + "\n";
  return out;
}

/*! \brief Serializes an AIG circuit as `aag` (ASCII) or `aig` (binary). */
inline std::string write_aiger( circuit const& c, bool binary = false )
{
  return write_aiger_model( aiger_from_circuit( c ), binary );
}

} // namespace mvg
