/*!
  \file equivalence.hpp
  \brief Cross-view equivalent-node labeling by simulation and SAT sweeping

  Nodes of two views are bucketed by a complement-canonical simulation
  fingerprint.  Each bucket gets its own incremental solver; members are
  proven against the representatives of already-proven groups whose current
  signatures still agree.  A satisfying assignment becomes a new simulation
  pattern for both views, which separates the pair and every other node it
  distinguishes.  Pairs are read off the proven groups.
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "circuit.hpp"
#include "error.hpp"
#include "random.hpp"
#include "sat/cnf.hpp"
#include "simulation.hpp"

namespace mvg
{

struct equiv_pair
{
  view_kind view_a = view_kind::aig;
  node_index node_a = 0u;
  view_kind view_b = view_kind::aig;
  node_index node_b = 0u;
  bool complement = false;

  auto key() const noexcept { return std::tuple{ view_a, node_a, view_b, node_b, complement }; }
  bool operator==( equiv_pair const& o ) const noexcept { return key() == o.key(); }
  bool operator<( equiv_pair const& o ) const noexcept { return key() < o.key(); }
};

struct equiv_stats
{
  uint64_t candidates_filtered = 0u; /* cross-view pairs sharing a fingerprint bucket */
  uint64_t sat_calls = 0u;
  uint64_t unsat_count = 0u;
  uint64_t sat_count = 0u;
  uint64_t dropped_resourceout = 0u;
  uint64_t refinements = 0u; /* witness patterns appended */

  equiv_stats& operator+=( equiv_stats const& o )
  {
    candidates_filtered += o.candidates_filtered;
    sat_calls += o.sat_calls;
    unsat_count += o.unsat_count;
    sat_count += o.sat_count;
    dropped_resourceout += o.dropped_resourceout;
    refinements += o.refinements;
    return *this;
  }
};

struct equivalence_pair_set
{
  std::vector<equiv_pair> pairs;
  equiv_stats stats;
};

struct label_params
{
  uint32_t n_patterns = 4096u;
  uint64_t seed = 1u;
  uint64_t conflict_budget = 100000u; /* 0 = unlimited */
  uint32_t pair_cap = 64u;            /* pairs emitted per bucket, 0 = unlimited */
  bool include_complement = false;
  bool support_pruning = false;
};

struct candidate_member
{
  uint8_t side; /* 0 = first view, 1 = second */
  node_index node;
  bool complemented;
};

struct candidate_bucket
{
  uint64_t key;
  std::vector<candidate_member> members;
};

/*! \brief Buckets the non-PO nodes of two simulated views by canonical fingerprint. */
inline std::vector<candidate_bucket> find_candidates( circuit const& a, sim_state const& sa, circuit const& b, sim_state const& sb )
{
  if ( sa.stimulus_id != sb.stimulus_id || sa.n_patterns != sb.n_patterns )
    throw error( errc::stimulus_mismatch, "views were simulated with different stimuli" );
  if ( a.num_pis() != b.num_pis() )
    throw error( errc::pi_count_mismatch, "views have different PI counts" );
  std::map<uint64_t, std::vector<candidate_member>> by_key;
  auto add = [&]( circuit const& c, sim_state const& s, uint8_t side ) {
    for ( node_index n = 0; n < c.size(); ++n )
    {
      if ( c.gate( n ) == gate_type::po )
        continue;
      auto const fp = fingerprint( s, n );
      by_key[fp.canonical].push_back( { side, n, fp.complemented } );
    }
  };
  add( a, sa, 0u );
  add( b, sb, 1u );
  std::vector<candidate_bucket> out;
  for ( auto& [k, m] : by_key )
  {
    bool has0 = false, has1 = false;
    for ( auto const& x : m )
      ( x.side ? has1 : has0 ) = true;
    if ( has0 && has1 )
      out.push_back( { k, std::move( m ) } );
  }
  return out;
}

namespace detail
{

/* scalar evaluation of one PI assignment */
inline std::vector<bool> evaluate_assignment( circuit const& c, std::vector<bool> const& pis )
{
  std::vector<bool> v( c.size() );
  for ( node_index n = 0; n < c.size(); ++n )
  {
    auto const f = c.fanins( n );
    switch ( c.gate( n ) )
    {
    case gate_type::pi: v[n] = pis[static_cast<uint32_t>( c.pi_position( n ) )]; break;
    case gate_type::const0: v[n] = false; break;
    case gate_type::const1: v[n] = true; break;
    case gate_type::not_: v[n] = !v[f[0]]; break;
    case gate_type::po: v[n] = v[f[0]]; break;
    case gate_type::and2: v[n] = v[f[0]] && v[f[1]]; break;
    case gate_type::or2: v[n] = v[f[0]] || v[f[1]]; break;
    case gate_type::xor2: v[n] = v[f[0]] != v[f[1]]; break;
    case gate_type::maj3: v[n] = ( int( v[f[0]] ) + v[f[1]] + v[f[2]] ) >= 2; break;
    case gate_type::lut4:
    {
      uint32_t idx = 0;
      for ( uint32_t j = 0; j < f.size(); ++j )
        idx |= uint32_t( v[f[j]] ) << j;
      v[n] = ( c[n].truth >> idx ) & 1u;
      break;
    }
    }
  }
  return v;
}

class sweeper
{
public:
  sweeper( circuit const& a, sim_state const& sa, circuit const& b, sim_state const& sb, label_params const& ps )
      : c_{ &a, &b }, s_{ &sa, &sb }, ps_( ps ), extra_{ {}, {} }
  {
  }

  equivalence_pair_set run()
  {
    equivalence_pair_set res;
    auto buckets = find_candidates( *c_[0], *s_[0], *c_[1], *s_[1] );
    for ( auto const& bk : buckets )
    {
      uint64_t n0[2] = { 0, 0 }, n1[2] = { 0, 0 };
      for ( auto const& m : bk.members )
        ( m.side ? n1 : n0 )[m.complemented]++;
      stats_.candidates_filtered += n0[0] * n1[0] + n0[1] * n1[1];
      if ( ps_.include_complement )
        stats_.candidates_filtered += n0[0] * n1[1] + n0[1] * n1[0];
    }
    for ( uint32_t bi = 0; bi < buckets.size(); ++bi )
      sweep_bucket( buckets[bi], bi, res.pairs );
    std::sort( res.pairs.begin(), res.pairs.end() );
    res.pairs.erase( std::unique( res.pairs.begin(), res.pairs.end() ), res.pairs.end() );
    res.stats = stats_;
    return res;
  }

private:
  struct group
  {
    candidate_member rep;
    std::vector<std::pair<candidate_member, bool>> members; /* member, complemented relative to rep */
  };

  /* signatures agree under relative polarity `rel` on base and refined patterns */
  bool signatures_agree( candidate_member const& x, candidate_member const& y, bool rel ) const
  {
    auto const bx = s_[x.side]->bits( x.node ), by = s_[y.side]->bits( y.node );
    uint64_t const flip = rel ? ~uint64_t( 0 ) : 0u;
    auto const nw = bx.size();
    for ( std::size_t w = 0; w < nw; ++w )
    {
      uint64_t const mask = w + 1u == nw ? tail_mask( s_[0]->n_patterns ) : ~uint64_t( 0 );
      if ( ( ( bx[w] ^ by[w] ^ flip ) & mask ) != 0u )
        return false;
    }
    for ( std::size_t col = 0; col < extra_[0].size(); ++col )
    {
      uint64_t const mask = col + 1u == extra_[0].size() && ( n_extra_ % 64u ) ? ( ( uint64_t( 1 ) << ( n_extra_ % 64u ) ) - 1u ) : ~uint64_t( 0 );
      if ( ( ( extra_[x.side][col][x.node] ^ extra_[y.side][col][y.node] ^ flip ) & mask ) != 0u )
        return false;
    }
    return true;
  }

  void add_witness( std::vector<bool> const& pis )
  {
    auto const col = n_extra_ / 64u, bit = n_extra_ % 64u;
    for ( int side = 0; side < 2; ++side )
    {
      if ( col == extra_[side].size() )
        extra_[side].emplace_back( c_[side]->size(), 0u );
      auto const v = evaluate_assignment( *c_[side], pis );
      for ( node_index n = 0; n < c_[side]->size(); ++n )
        if ( v[n] )
          extra_[side][col][n] |= uint64_t( 1 ) << bit;
    }
    ++n_extra_;
    ++stats_.refinements;
  }

  void sweep_bucket( candidate_bucket const& bk, uint32_t bucket_index, std::vector<equiv_pair>& out )
  {
    sat::solver slv;
    sat::solver_sink sink{ slv };
    std::vector<int32_t> pi_vars( c_[0]->num_pis(), 0 );
    sat::cone_encoder<sat::solver_sink> enc0( sink, *c_[0], pi_vars ), enc1( sink, *c_[1], pi_vars );
    auto encode = [&]( candidate_member const& m ) { return m.side ? enc1.encode( m.node ) : enc0.encode( m.node ); };

    std::vector<group> groups;
    for ( auto const& m : bk.members )
    {
      bool joined = false;
      for ( auto& g : groups )
      {
        bool const rel = m.complemented != g.rep.complemented;
        if ( rel && !ps_.include_complement )
          continue;
        if ( !signatures_agree( m, g.rep, rel ) )
          continue;
        if ( ps_.support_pruning &&
             structural_support( *c_[m.side], m.node ) != structural_support( *c_[g.rep.side], g.rep.node ) )
          continue;
        auto const vm = encode( m ), vr = encode( g.rep );
        auto const x = sink.new_var();
        sat::encode_xor( sink, x, vm, vr );
        /* equal: the XOR can never be 1; complement: never 0 */
        sat::lit const assume = sat::to_solver_lit( rel ? -x : x );
        ++stats_.sat_calls;
        auto const st = slv.solve( { assume }, ps_.conflict_budget );
        if ( st == sat::status::unsat )
        {
          ++stats_.unsat_count;
          g.members.push_back( { m, rel } );
          joined = true;
          break;
        }
        if ( st == sat::status::resource_out )
        {
          ++stats_.dropped_resourceout;
          continue;
        }
        ++stats_.sat_count;
        std::vector<bool> w( c_[0]->num_pis(), false );
        for ( uint32_t i = 0; i < pi_vars.size(); ++i )
          if ( pi_vars[i] )
            w[i] = slv.model_value( static_cast<sat::var>( pi_vars[i] - 1 ) );
        add_witness( w );
      }
      if ( !joined )
        groups.push_back( group{ m, { { m, false } } } );
    }

    std::vector<equiv_pair> pairs;
    for ( auto const& g : groups )
      for ( auto const& [x, rx] : g.members )
        for ( auto const& [y, ry] : g.members )
        {
          if ( x.side != 0u || y.side != 1u )
            continue;
          bool const comp = rx != ry;
          if ( comp && !ps_.include_complement )
            continue;
          pairs.push_back( { c_[0]->view(), x.node, c_[1]->view(), y.node, comp } );
        }
    std::sort( pairs.begin(), pairs.end() );
    if ( ps_.pair_cap != 0u && pairs.size() > ps_.pair_cap )
    {
      rng gen( derive_seed( ps_.seed, "pair-cap", bucket_index ) );
      auto idx = sample_without_replacement( gen, static_cast<uint32_t>( pairs.size() ), ps_.pair_cap );
      std::sort( idx.begin(), idx.end() );
      std::vector<equiv_pair> kept;
      for ( auto i : idx )
        kept.push_back( pairs[i] );
      pairs = std::move( kept );
    }
    out.insert( out.end(), pairs.begin(), pairs.end() );
  }

  circuit const* c_[2];
  sim_state const* s_[2];
  label_params ps_;
  std::vector<std::vector<uint64_t>> extra_[2]; /* [column][node] */
  uint32_t n_extra_ = 0u;
  equiv_stats stats_;
};

} // namespace detail

/*! \brief SAT-certified cross-view pairs between two simulated views (first view listed first). */
inline equivalence_pair_set sat_sweep( circuit const& a, sim_state const& sa, circuit const& b, sim_state const& sb,
                                       label_params const& ps = {} )
{
  return detail::sweeper( a, sa, b, sb, ps ).run();
}

/*! \brief Labels the first circuit (the AIG) against each other view with shared stimuli. */
inline equivalence_pair_set label_views( circuit const& aig, std::vector<circuit const*> const& others, label_params const& ps = {} )
{
  equivalence_pair_set res;
  auto const sa = simulate( aig, ps.n_patterns, ps.seed );
  for ( auto const* o : others )
  {
    auto const so = simulate( *o, ps.n_patterns, ps.seed );
    auto part = sat_sweep( aig, sa, *o, so, ps );
    res.pairs.insert( res.pairs.end(), part.pairs.begin(), part.pairs.end() );
    res.stats += part.stats;
  }
  std::sort( res.pairs.begin(), res.pairs.end() );
  return res;
}

} // namespace mvg
