/*!
  \file random.hpp
  \brief Counter-based and seeded random helpers

  Everything random in mvg is derived from a single 64-bit seed.  Stream
  generators are keyed (seed, label, index) so that results do not depend on
  the order in which consumers ask for numbers.
*/

#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace mvg
{

constexpr uint64_t splitmix64( uint64_t x ) noexcept
{
  x += 0x9e3779b97f4a7c15ull;
  x = ( x ^ ( x >> 30 ) ) * 0xbf58476d1ce4e5b9ull;
  x = ( x ^ ( x >> 27 ) ) * 0x94d049bb133111ebull;
  return x ^ ( x >> 31 );
}

constexpr uint64_t hash_combine( uint64_t h, uint64_t v ) noexcept
{
  return splitmix64( h ^ splitmix64( v + 0x632be59bd9b4e019ull ) );
}

constexpr uint64_t hash_string( std::string_view s ) noexcept
{
  uint64_t h = 0xcbf29ce484222325ull;
  for ( char c : s )
  {
    h ^= static_cast<unsigned char>( c );
    h *= 0x100000001b3ull;
  }
  return h;
}

/*! \brief Sub-seed for a named component and index. */
constexpr uint64_t derive_seed( uint64_t seed, std::string_view label, uint64_t index = 0 ) noexcept
{
  return hash_combine( hash_combine( seed, hash_string( label ) ), index );
}

/*! \brief Counter-based word generator keyed by (seed, a, b). */
constexpr uint64_t counter_word( uint64_t seed, uint64_t a, uint64_t b ) noexcept
{
  return splitmix64( hash_combine( hash_combine( seed, a ), b ) );
}

/*! \brief Small sequential generator (splitmix64 stream). */
class rng
{
public:
  explicit rng( uint64_t seed = 0 ) : state_( seed ) {}

  uint64_t next() noexcept
  {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = ( z ^ ( z >> 30 ) ) * 0xbf58476d1ce4e5b9ull;
    z = ( z ^ ( z >> 27 ) ) * 0x94d049bb133111ebull;
    return z ^ ( z >> 31 );
  }

  /* uniform in [0, n) */
  uint64_t below( uint64_t n ) noexcept
  {
    if ( n <= 1u )
      return 0u;
    uint64_t const limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do
    {
      x = next();
    } while ( x >= limit );
    return x % n;
  }

  /* uniform in [lo, hi] */
  int64_t range( int64_t lo, int64_t hi ) noexcept
  {
    return lo + static_cast<int64_t>( below( static_cast<uint64_t>( hi - lo ) + 1u ) );
  }

  /* uniform in [0, 1) with 53 random bits */
  double uniform() noexcept { return static_cast<double>( next() >> 11 ) * 0x1.0p-53; }

  bool coin( double p = 0.5 ) noexcept { return uniform() < p; }

  /* standard normal via Box-Muller */
  double normal() noexcept
  {
    double u1 = uniform();
    while ( u1 <= 0.0 )
      u1 = uniform();
    double const u2 = uniform();
    return std::sqrt( -2.0 * std::log( u1 ) ) * std::cos( 6.283185307179586 * u2 );
  }

  template<class T>
  void shuffle( std::vector<T>& v ) noexcept
  {
    for ( auto i = v.size(); i > 1u; --i )
    {
      auto const j = below( i );
      std::swap( v[i - 1], v[j] );
    }
  }

private:
  uint64_t state_;
};

/*! \brief k distinct indices from [0, n), in sampling order. */
inline std::vector<uint32_t> sample_without_replacement( rng& gen, uint32_t n, uint32_t k )
{
  std::vector<uint32_t> pool( n );
  for ( uint32_t i = 0; i < n; ++i )
    pool[i] = i;
  if ( k > n )
    k = n;
  for ( uint32_t i = 0; i < k; ++i )
  {
    auto const j = i + static_cast<uint32_t>( gen.below( n - i ) );
    std::swap( pool[i], pool[j] );
  }
  pool.resize( k );
  return pool;
}

} // namespace mvg
