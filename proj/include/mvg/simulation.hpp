/*!
  \file simulation.hpp
  \brief Bit-parallel simulation, signal probabilities, truth tables

  Patterns are packed 64 per word.  Pattern p lives in word p / 64 at bit
  p % 64.  PI stimuli come from a counter-based generator keyed by
  (seed, PI position, word index), so two circuits with the same PI count see
  the same stimuli regardless of their node order.
*/

#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"
#include "random.hpp"

namespace mvg
{

using pattern_words = std::vector<uint64_t>;

/*! \brief Per-node simulation vectors of one circuit. */
struct sim_state
{
  uint32_t n_patterns = 0u;
  uint32_t n_words = 0u;
  uint64_t rng_seed = 0u;
  uint64_t stimulus_id = 0u; /* equal ids <=> identical PI stimuli */
  std::vector<uint64_t> words; /* node-major, n_words per node */

  std::span<uint64_t const> bits( node_index n ) const noexcept { return { words.data() + std::size_t( n ) * n_words, n_words }; }
  uint32_t num_nodes() const noexcept { return n_words ? static_cast<uint32_t>( words.size() / n_words ) : 0u; }
  bool bit( node_index n, uint32_t p ) const noexcept { return ( bits( n )[p >> 6u] >> ( p & 63u ) ) & 1u; }
};

constexpr uint64_t tail_mask( uint32_t n_patterns ) noexcept
{
  auto const r = n_patterns & 63u;
  return r == 0u ? ~uint64_t( 0 ) : ( ( uint64_t( 1 ) << r ) - 1u );
}

/*! \brief Random PI stimuli: one word vector per PI position. */
inline std::vector<pattern_words> random_pi_patterns( uint32_t num_pis, uint32_t n_patterns, uint64_t seed )
{
  uint32_t const n_words = ( n_patterns + 63u ) / 64u;
  std::vector<pattern_words> pats( num_pis, pattern_words( n_words ) );
  for ( uint32_t i = 0; i < num_pis; ++i )
  {
    for ( uint32_t w = 0; w < n_words; ++w )
      pats[i][w] = counter_word( seed, i, w );
    if ( n_words )
      pats[i].back() &= tail_mask( n_patterns );
  }
  return pats;
}

/*! \brief All 2^k assignments of k PIs; pattern p sets PI i to bit i of p. */
inline std::vector<pattern_words> exhaustive_pi_patterns( uint32_t num_pis )
{
  if ( num_pis > 24u )
    throw error( errc::support_too_large, std::to_string( num_pis ) + " PIs for exhaustive patterns" );
  uint64_t const n = uint64_t( 1 ) << num_pis;
  uint32_t const n_words = static_cast<uint32_t>( ( n + 63u ) / 64u );
  static constexpr uint64_t base[6] = { 0xaaaaaaaaaaaaaaaaull, 0xccccccccccccccccull, 0xf0f0f0f0f0f0f0f0ull,
                                        0xff00ff00ff00ff00ull, 0xffff0000ffff0000ull, 0xffffffff00000000ull };
  std::vector<pattern_words> pats( num_pis, pattern_words( n_words ) );
  for ( uint32_t i = 0; i < num_pis; ++i )
  {
    for ( uint32_t w = 0; w < n_words; ++w )
      pats[i][w] = i < 6u ? base[i] : ( ( ( w >> ( i - 6u ) ) & 1u ) ? ~uint64_t( 0 ) : 0u );
    pats[i].back() &= tail_mask( static_cast<uint32_t>( n ) );
  }
  return pats;
}

namespace detail
{

inline void eval_node( circuit const& c, node_index n, sim_state& s, std::span<pattern_words const> pi_pats )
{
  auto const nw = s.n_words;
  uint64_t* out = s.words.data() + std::size_t( n ) * nw;
  auto in = [&]( uint32_t j ) { return s.words.data() + std::size_t( c.fanins( n )[j] ) * nw; };
  switch ( c.gate( n ) )
  {
  case gate_type::pi:
  {
    auto const& p = pi_pats[static_cast<uint32_t>( c.pi_position( n ) )];
    for ( uint32_t w = 0; w < nw; ++w )
      out[w] = p[w];
    break;
  }
  case gate_type::const0:
    for ( uint32_t w = 0; w < nw; ++w )
      out[w] = 0u;
    break;
  case gate_type::const1:
    for ( uint32_t w = 0; w < nw; ++w )
      out[w] = ~uint64_t( 0 );
    break;
  case gate_type::po:
  {
    auto const a = in( 0 );
    for ( uint32_t w = 0; w < nw; ++w )
      out[w] = a[w];
    break;
  }
  case gate_type::not_:
  {
    auto const a = in( 0 );
    for ( uint32_t w = 0; w < nw; ++w )
      out[w] = ~a[w];
    break;
  }
  case gate_type::and2:
  {
    auto const a = in( 0 ), b = in( 1 );
    for ( uint32_t w = 0; w < nw; ++w )
      out[w] = a[w] & b[w];
    break;
  }
  case gate_type::or2:
  {
    auto const a = in( 0 ), b = in( 1 );
    for ( uint32_t w = 0; w < nw; ++w )
      out[w] = a[w] | b[w];
    break;
  }
  case gate_type::xor2:
  {
    auto const a = in( 0 ), b = in( 1 );
    for ( uint32_t w = 0; w < nw; ++w )
      out[w] = a[w] ^ b[w];
    break;
  }
  case gate_type::maj3:
  {
    auto const a = in( 0 ), b = in( 1 ), d = in( 2 );
    for ( uint32_t w = 0; w < nw; ++w )
      out[w] = ( a[w] & b[w] ) | ( b[w] & d[w] ) | ( a[w] & d[w] );
    break;
  }
  case gate_type::lut4:
  {
    auto const k = c[n].num_fanins;
    auto const tt = c[n].truth;
    for ( uint32_t w = 0; w < nw; ++w )
    {
      uint64_t acc = 0u;
      for ( uint32_t m = 0; m < ( 1u << k ); ++m )
      {
        if ( ( ( tt >> m ) & 1u ) == 0u )
          continue;
        uint64_t term = ~uint64_t( 0 );
        for ( uint32_t j = 0; j < k; ++j )
          term &= ( ( m >> j ) & 1u ) ? in( j )[w] : ~in( j )[w];
        acc |= term;
      }
      out[w] = acc;
    }
    break;
  }
  }
  if ( nw )
    out[nw - 1u] &= tail_mask( s.n_patterns );
}

} // namespace detail

/*! \brief Simulates every node on explicit PI stimuli (one word vector per PI position). */
inline sim_state simulate_patterns( circuit const& c, std::span<pattern_words const> pi_pats, uint32_t n_patterns,
                                    uint64_t stimulus_id = 0u )
{
  if ( pi_pats.size() != c.num_pis() )
    throw error( errc::pi_count_mismatch, "stimulus has " + std::to_string( pi_pats.size() ) + " PIs, circuit " +
                                              std::to_string( c.num_pis() ) );
  sim_state s;
  s.n_patterns = n_patterns;
  s.n_words = ( n_patterns + 63u ) / 64u;
  s.stimulus_id = stimulus_id;
  for ( auto const& p : pi_pats )
    if ( p.size() != s.n_words )
      throw error( errc::length_mismatch, "PI stimulus word count" );
  s.words.assign( std::size_t( c.size() ) * s.n_words, 0u );
  for ( node_index n = 0; n < c.size(); ++n )
    detail::eval_node( c, n, s, pi_pats );
  return s;
}

/*! \brief Random simulation with `n_patterns` (a multiple of 64) keyed by `seed`. */
inline sim_state simulate( circuit const& c, uint32_t n_patterns, uint64_t seed )
{
  if ( n_patterns == 0u || n_patterns % 64u != 0u )
    throw error( errc::invalid_argument, "pattern count must be a positive multiple of 64" );
  auto const pats = random_pi_patterns( c.num_pis(), n_patterns, seed );
  auto s = simulate_patterns( c, pats, n_patterns, hash_combine( hash_combine( seed, n_patterns ), 0x5157u ) );
  s.rng_seed = seed;
  return s;
}

/*! \brief Simulation over all 2^#PI assignments. */
inline sim_state simulate_exhaustive( circuit const& c )
{
  auto const pats = exhaustive_pi_patterns( c.num_pis() );
  auto const n = uint32_t( 1 ) << c.num_pis();
  return simulate_patterns( c, pats, n, hash_combine( 0xe7a05ull, n ) );
}

/*! \brief Fraction of patterns on which each node is 1. */
inline std::vector<double> signal_probability( sim_state const& s )
{
  std::vector<double> p( s.num_nodes() );
  for ( node_index n = 0; n < p.size(); ++n )
  {
    uint64_t ones = 0u;
    for ( auto w : s.bits( n ) )
      ones += static_cast<uint64_t>( std::popcount( w ) );
    p[n] = static_cast<double>( ones ) / static_cast<double>( s.n_patterns );
  }
  return p;
}

/*! \brief Complete truth table of a function over k ordered variables. */
struct truth_table
{
  uint32_t num_vars = 0u;
  std::vector<uint64_t> words;

  uint64_t length() const noexcept { return uint64_t( 1 ) << num_vars; }
  bool bit( uint64_t p ) const noexcept { return ( words[p >> 6u] >> ( p & 63u ) ) & 1u; }
  bool operator==( truth_table const& ) const = default;
};

inline truth_table operator~( truth_table t )
{
  for ( auto& w : t.words )
    w = ~w;
  t.words.back() &= tail_mask( static_cast<uint32_t>( t.length() ) );
  return t;
}

/*! \brief Truth table of `n` over its structural PI support (ordered as in pis()).

  Throws SupportTooLarge above 16 support variables.
*/
inline truth_table exhaustive_truth_table( circuit const& c, node_index n )
{
  if ( n >= c.size() )
    throw error( errc::index_out_of_range, "node " + std::to_string( n ) );
  auto const support = structural_support( c, n );
  if ( support.size() > 16u )
    throw error( errc::support_too_large, std::to_string( support.size() ) + " support PIs" );
  auto const k = static_cast<uint32_t>( support.size() );
  auto const ex = exhaustive_pi_patterns( k );
  uint32_t const len = uint32_t( 1 ) << k;
  uint32_t const nw = ( len + 63u ) / 64u;
  std::vector<pattern_words> pats( c.num_pis(), pattern_words( nw, 0u ) );
  for ( uint32_t j = 0; j < k; ++j )
    pats[support[j]] = ex[j];

  node_index const roots[] = { n };
  auto const cone = transitive_fanin_mask( c, roots );
  sim_state s;
  s.n_patterns = len;
  s.n_words = nw;
  s.words.assign( std::size_t( n + 1u ) * nw, 0u );
  for ( node_index i = 0; i <= n; ++i )
    if ( cone[i] )
      detail::eval_node( c, i, s, pats );
  auto const b = s.bits( n );
  return truth_table{ k, { b.begin(), b.end() } };
}

/*! \brief Normalized Hamming distance between two equal-length bit vectors. */
inline double truth_table_distance( std::span<uint64_t const> a, std::span<uint64_t const> b, uint64_t length )
{
  if ( a.size() != b.size() || a.size() != ( length + 63u ) / 64u )
    throw error( errc::length_mismatch, "bit vectors of different lengths" );
  if ( length == 0u )
    return 0.0;
  uint64_t diff = 0u;
  for ( std::size_t w = 0; w < a.size(); ++w )
  {
    auto x = a[w] ^ b[w];
    if ( w + 1u == a.size() )
      x &= tail_mask( static_cast<uint32_t>( length ) );
    diff += static_cast<uint64_t>( std::popcount( x ) );
  }
  return static_cast<double>( diff ) / static_cast<double>( length );
}

inline double truth_table_distance( truth_table const& a, truth_table const& b )
{
  if ( a.num_vars != b.num_vars )
    throw error( errc::length_mismatch, "truth tables over " + std::to_string( a.num_vars ) + " and " +
                                            std::to_string( b.num_vars ) + " variables" );
  return truth_table_distance( a.words, b.words, a.length() );
}

/*! \brief Sampled-row distance between two nodes of one simulation. */
inline double truth_table_distance( sim_state const& s, node_index a, node_index b )
{
  return truth_table_distance( s.bits( a ), s.bits( b ), s.n_patterns );
}

struct node_fingerprint
{
  uint64_t hash = 0u;      /* hash of the bit vector itself */
  uint64_t canonical = 0u; /* hash of min(bits, ~bits) */
  bool complemented = false; /* true when ~bits was the minimum */
};

inline uint64_t hash_words( std::span<uint64_t const> words, uint32_t n_patterns )
{
  uint64_t h = splitmix64( 0x6d76676670ull ^ n_patterns );
  for ( auto w : words )
    h = hash_combine( h, w );
  return h;
}

/*! \brief Stable 64-bit hash of a node's pattern vector plus its complement-canonical variant. */
inline node_fingerprint fingerprint( sim_state const& s, node_index n )
{
  auto const b = s.bits( n );
  node_fingerprint fp;
  fp.hash = hash_words( b, s.n_patterns );
  std::vector<uint64_t> neg( b.begin(), b.end() );
  for ( auto& w : neg )
    w = ~w;
  if ( !neg.empty() )
    neg.back() &= tail_mask( s.n_patterns );
  fp.complemented = std::lexicographical_compare( neg.begin(), neg.end(), b.begin(), b.end() );
  fp.canonical = fp.complemented ? hash_words( neg, s.n_patterns ) : fp.hash;
  return fp;
}

} // namespace mvg
