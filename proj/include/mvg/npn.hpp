/*!
  \file npn.hpp
  \brief NPN classification of 4-input functions

  A transform T = (perm, neg, out) relates a function f to its class
  representative c by  f(x) = out ^ c(y),  y_i = x_{perm[i]} ^ neg_i.
  The representative of a class is its numerically smallest member.
*/

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

namespace mvg
{

struct npn_transform
{
  std::array<uint8_t, 4> perm{ 0, 1, 2, 3 };
  uint8_t neg = 0u;
  bool out = false;
};

/*! \brief Extends a k-input table (k <= 4) to 16 bits; the extra inputs are vacuous. */
inline uint16_t extend_to_4( uint16_t tt, uint32_t k )
{
  if ( k == 0u )
    return ( tt & 1u ) ? 0xffffu : 0u;
  uint32_t t = tt & ( ( 1u << ( 1u << k ) ) - 1u );
  for ( uint32_t w = 1u << k; w < 16u; w <<= 1u )
    t |= t << w;
  return static_cast<uint16_t>( t );
}

/*! \brief The function g with  f(x) = T.out ^ g(y),  y_i = x_{perm[i]} ^ neg_i. */
inline uint16_t apply_npn( uint16_t f, npn_transform const& t )
{
  uint16_t g = 0u;
  for ( uint32_t y = 0; y < 16u; ++y )
  {
    uint32_t x = 0u;
    for ( uint32_t i = 0; i < 4u; ++i )
      x |= ( ( ( y >> i ) ^ ( t.neg >> i ) ) & 1u ) << t.perm[i];
    if ( ( ( f >> x ) & 1u ) ^ ( t.out ? 1u : 0u ) )
      g |= static_cast<uint16_t>( 1u << y );
  }
  return g;
}

/*! \brief All 768 transforms in a fixed order. */
inline std::vector<npn_transform> const& npn_transforms()
{
  static auto const all = [] {
    std::vector<npn_transform> v;
    std::array<uint8_t, 4> p{ 0, 1, 2, 3 };
    do
    {
      for ( uint8_t n = 0; n < 16u; ++n )
        for ( bool o : { false, true } )
          v.push_back( npn_transform{ p, n, o } );
    } while ( std::next_permutation( p.begin(), p.end() ) );
    return v;
  }();
  return all;
}

/*! \brief Representative and class index for every 4-input function. */
class npn4_classes
{
public:
  npn4_classes() : rep_( 1u << 16u ), class_of_( 1u << 16u, UINT32_MAX ), to_rep_( 1u << 16u )
  {
    for ( uint32_t f = 0; f < ( 1u << 16u ); ++f )
    {
      if ( class_of_[f] != UINT32_MAX )
        continue;
      auto const cls = static_cast<uint32_t>( reps_.size() );
      reps_.push_back( static_cast<uint16_t>( f ) );
      for ( auto const& t : npn_transforms() )
      {
        auto const g = apply_npn( static_cast<uint16_t>( f ), t );
        if ( class_of_[g] == UINT32_MAX )
        {
          class_of_[g] = cls;
          rep_[g] = static_cast<uint16_t>( f );
          to_rep_[g] = inverse( t );
        }
      }
    }
  }

  static npn4_classes const& instance()
  {
    static npn4_classes const db;
    return db;
  }

  uint16_t representative( uint16_t f ) const noexcept { return rep_[f]; }
  uint32_t class_index( uint16_t f ) const noexcept { return class_of_[f]; }
  std::vector<uint16_t> const& representatives() const noexcept { return reps_; }

  /*! \brief A transform T with apply_npn(f, T) == representative(f). */
  npn_transform const& transform_of( uint16_t f ) const noexcept { return to_rep_[f]; }

  /*! \brief The transform U with apply_npn(apply_npn(f, t), U) == f. */
  static npn_transform inverse( npn_transform const& t ) noexcept
  {
    npn_transform u;
    u.out = t.out;
    for ( uint8_t i = 0; i < 4u; ++i )
      u.perm[t.perm[i]] = i;
    for ( uint8_t j = 0; j < 4u; ++j )
      if ( ( t.neg >> u.perm[j] ) & 1u )
        u.neg |= static_cast<uint8_t>( 1u << j );
    return u;
  }

private:
  std::vector<uint16_t> rep_;
  std::vector<uint32_t> class_of_;
  std::vector<uint16_t> reps_;
  std::vector<npn_transform> to_rep_;
};

} // namespace mvg
