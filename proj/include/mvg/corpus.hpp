/*!
  \file corpus.hpp
  \brief Seeded circuit corpora: the fixed demo set and random toy training sets
*/

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "generators.hpp"
#include "random.hpp"

namespace mvg
{

struct corpus_params
{
  uint32_t count = 200u;
  uint32_t min_pis = 4u, max_pis = 8u;
  uint32_t min_ands = 15u, max_ands = 59u;
  uint32_t max_pos = 4u;
  uint64_t seed = 1u;
};

inline std::string corpus_name( std::string_view prefix, uint32_t i )
{
  char buf[16];
  std::snprintf( buf, sizeof( buf ), "_%04u", i );
  return std::string( prefix ) + buf;
}

/*! \brief `count` random AIGs; circuit i depends only on (seed, i). */
inline std::vector<circuit> random_corpus( corpus_params const& p, std::string_view prefix = "toy" )
{
  if ( p.min_pis > p.max_pis || p.min_ands > p.max_ands )
    throw error( errc::invalid_argument, "corpus ranges are empty" );
  std::vector<circuit> out;
  out.reserve( p.count );
  for ( uint32_t i = 0; i < p.count; ++i )
  {
    rng gen( derive_seed( p.seed, "corpus", i ) );
    random_aig_params ap;
    ap.num_pis = p.min_pis + static_cast<uint32_t>( gen.below( p.max_pis - p.min_pis + 1u ) );
    ap.num_ands = p.min_ands + static_cast<uint32_t>( gen.below( p.max_ands - p.min_ands + 1u ) );
    ap.max_pos = p.max_pos;
    out.push_back( random_aig( gen, ap, corpus_name( prefix, i ) ) );
  }
  return out;
}

/*! \brief Fixed demo set: arithmetic and structural fixtures plus random AIGs up to about 1,500 nodes. */
inline std::vector<circuit> demo_corpus()
{
  std::vector<circuit> out;
  auto add = [&]( circuit c, std::string name ) {
    c.set_name( std::move( name ) );
    out.push_back( std::move( c ) );
  };
  add( make_adder_aig( 3 ), "adder3" );
  add( make_adder_aig( 8 ), "adder8" );
  add( make_not_chain( 16 ), "not16" );
  add( make_and_tree( 16 ), "and16" );
  add( make_degraded_maj_demo().aig, "maj_demo" );
  struct spec
  {
    uint32_t pis, ands, pos;
  };
  spec const sizes[] = { { 6, 60, 4 }, { 8, 150, 6 }, { 10, 300, 8 }, { 12, 600, 8 }, { 12, 900, 8 }, { 16, 1200, 8 }, { 24, 1400, 12 } };
  uint32_t i = 0;
  for ( auto const& s : sizes )
  {
    rng gen( derive_seed( 2024u, "demo", i ) );
    add( random_aig( gen, { .num_pis = s.pis, .num_ands = s.ands, .max_pos = s.pos } ), corpus_name( "rand", i ) );
    ++i;
  }
  return out;
}

} // namespace mvg
