/*!
  \file exact_synthesis.hpp
  \brief SAT-based exact synthesis of small functions in a gate basis

  Single-selection-variable encoding over normal gate functions.  Binary
  bases pick two distinct earlier signals; ternary bases pick three, with
  constant 0 available as an extra signal, so that MAJ(a, b, 0) realizes the
  AND case and the complemented constant the OR case.
*/

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "circuit.hpp"
#include "sat/solver.hpp"

namespace mvg
{

enum class op_kind : uint8_t
{
  and_,  /* AND with input complement mask */
  or_,   /* OR of two inputs */
  xor_,  /* XOR of two selected fanins (mask picks the pair for ternary ops) */
  maj    /* MAJ with input complement mask */
};

struct basis_op
{
  op_kind kind;
  uint8_t mask;
  uint8_t truth; /* over the op's fanins, row index m = a | b << 1 | c << 2 */
};

struct exact_basis
{
  view_kind view;
  uint32_t arity;
  std::vector<basis_op> ops;
};

inline exact_basis basis_for( view_kind v )
{
  auto truth_of = []( uint32_t arity, auto&& fn ) {
    uint8_t t = 0u;
    for ( uint32_t m = 0; m < ( 1u << arity ); ++m )
      if ( fn( m & 1u, ( m >> 1u ) & 1u, ( m >> 2u ) & 1u ) )
        t |= static_cast<uint8_t>( 1u << m );
    return t;
  };
  exact_basis b{ v, 2u, {} };
  if ( v == view_kind::aig || v == view_kind::xag )
  {
    for ( uint8_t mask : { 0, 1, 2 } )
      b.ops.push_back( { op_kind::and_, mask, truth_of( 2, [&]( uint32_t a, uint32_t x, uint32_t ) {
                           return ( a ^ ( mask & 1u ) ) & ( x ^ ( mask >> 1u ) );
                         } ) } );
    b.ops.push_back( { op_kind::or_, 0, 0xe } );
    if ( v == view_kind::xag )
      b.ops.push_back( { op_kind::xor_, 0, 0x6 } );
    return b;
  }
  b.arity = 3u;
  for ( uint8_t mask : { 0, 1, 2, 4 } )
    b.ops.push_back( { op_kind::maj, mask, truth_of( 3, [&]( uint32_t a, uint32_t x, uint32_t c ) {
                         return ( ( a ^ ( mask & 1u ) ) + ( x ^ ( ( mask >> 1u ) & 1u ) ) + ( c ^ ( mask >> 2u ) ) ) >= 2u;
                       } ) } );
  if ( v == view_kind::xmg )
    for ( uint8_t pair : { 3, 5, 6 } )
      b.ops.push_back( { op_kind::xor_, pair, truth_of( 3, [&]( uint32_t a, uint32_t x, uint32_t c ) {
                           uint32_t r = 0u;
                           if ( pair & 1u )
                             r ^= a;
                           if ( pair & 2u )
                             r ^= x;
                           if ( pair & 4u )
                             r ^= c;
                           return r;
                         } ) } );
  return b;
}

/*! \brief A synthesized chain.  Signals: inputs 0..n-1, then (ternary bases) constant 0, then steps. */
struct chain
{
  struct step
  {
    uint32_t op; /* index into basis ops */
    std::array<uint32_t, 3> fanins{};
  };

  view_kind view = view_kind::aig;
  uint32_t num_inputs = 0u;
  bool has_const = false;
  std::vector<step> steps;
  uint32_t output = 0u; /* signal index */
  bool output_negated = false;
  bool output_constant = false; /* output is constant 0 (before negation) */

  uint32_t first_step_signal() const noexcept { return num_inputs + ( has_const ? 1u : 0u ); }
};

/*! \brief Evaluates a chain over all 2^n input rows. */
inline uint32_t simulate_chain( chain const& ch )
{
  auto const basis = basis_for( ch.view );
  uint32_t const rows = 1u << ch.num_inputs;
  uint32_t const full = rows == 32u ? UINT32_MAX : ( ( 1u << rows ) - 1u );
  std::vector<uint32_t> sig;
  for ( uint32_t i = 0; i < ch.num_inputs; ++i )
  {
    uint32_t t = 0u;
    for ( uint32_t r = 0; r < rows; ++r )
      if ( ( r >> i ) & 1u )
        t |= 1u << r;
    sig.push_back( t );
  }
  if ( ch.has_const )
    sig.push_back( 0u );
  for ( auto const& s : ch.steps )
  {
    auto const& op = basis.ops[s.op];
    uint32_t t = 0u;
    for ( uint32_t r = 0; r < rows; ++r )
    {
      uint32_t m = 0u;
      for ( uint32_t j = 0; j < basis.arity; ++j )
        m |= ( ( sig[s.fanins[j]] >> r ) & 1u ) << j;
      if ( ( op.truth >> m ) & 1u )
        t |= 1u << r;
    }
    sig.push_back( t );
  }
  uint32_t out = ch.output_constant ? 0u : sig[ch.output];
  return ( ch.output_negated ? ~out : out ) & full;
}

namespace detail
{

inline void for_each_tuple( uint32_t n, uint32_t arity, auto&& fn )
{
  if ( arity == 2u )
  {
    for ( uint32_t k = 1; k < n; ++k )
      for ( uint32_t j = 0; j < k; ++j )
        fn( std::array<uint32_t, 3>{ j, k, 0u } );
    return;
  }
  for ( uint32_t l = 2; l < n; ++l )
    for ( uint32_t k = 1; k < l; ++k )
      for ( uint32_t j = 0; j < k; ++j )
        fn( std::array<uint32_t, 3>{ j, k, l } );
}

} // namespace detail

/*! \brief Trivial realizations (constant or single literal), or nullopt. */
inline std::optional<chain> trivial_chain( uint32_t func, uint32_t n, view_kind view )
{
  auto const basis = basis_for( view );
  uint32_t const rows = 1u << n;
  uint32_t const full = rows == 32u ? UINT32_MAX : ( ( 1u << rows ) - 1u );
  func &= full;
  chain ch;
  ch.view = view;
  ch.num_inputs = n;
  ch.has_const = basis.arity == 3u;
  if ( func == 0u || func == full )
  {
    ch.output_constant = true;
    ch.output_negated = func == full;
    return ch;
  }
  for ( uint32_t i = 0; i < n; ++i )
  {
    uint32_t t = 0u;
    for ( uint32_t r = 0; r < rows; ++r )
      if ( ( r >> i ) & 1u )
        t |= 1u << r;
    if ( func == t || func == ( ~t & full ) )
    {
      ch.output = i;
      ch.output_negated = func != t;
      return ch;
    }
  }
  return std::nullopt;
}

/*! \brief Finds a chain with exactly `r` steps, or nullopt (unsat or out of budget). */
inline std::optional<chain> synthesize_with_steps( uint32_t func, uint32_t n, view_kind view, uint32_t r,
                                                   uint64_t conflict_budget, bool* budget_hit = nullptr )
{
  using namespace sat;
  auto const basis = basis_for( view );
  uint32_t const rows = 1u << n;
  uint32_t const full = rows == 32u ? UINT32_MAX : ( ( 1u << rows ) - 1u );
  func &= full;
  bool const negated = func & 1u;
  uint32_t const target = negated ? ( ~func & full ) : func;
  uint32_t const base = n + ( basis.arity == 3u ? 1u : 0u );
  uint32_t const ar = basis.arity;
  uint32_t const nm = 1u << ar;

  solver s;
  /* x[i][t] for t = 1..rows-1 */
  std::vector<std::vector<var>> x( r, std::vector<var>( rows, 0u ) );
  for ( auto& row : x )
    for ( uint32_t t = 1; t < rows; ++t )
      row[t] = s.new_var();
  std::vector<std::vector<var>> f( r, std::vector<var>( nm, 0u ) );
  for ( auto& fi : f )
    for ( uint32_t m = 1; m < nm; ++m )
      fi[m] = s.new_var();
  struct sel
  {
    std::array<uint32_t, 3> t;
    var v;
  };
  std::vector<std::vector<sel>> sels( r );

  /* value of a non-step signal at row t */
  auto fixed_value = [&]( uint32_t sig, uint32_t t ) -> bool { return sig < n ? ( ( t >> sig ) & 1u ) : false; };

  for ( uint32_t i = 0; i < r; ++i )
  {
    detail::for_each_tuple( base + i, ar, [&]( std::array<uint32_t, 3> tup ) { sels[i].push_back( { tup, s.new_var() } ); } );
    std::vector<lit> one;
    for ( auto const& sl : sels[i] )
      one.push_back( make_lit( sl.v ) );
    s.add_clause( one );
    for ( std::size_t a = 0; a < sels[i].size(); ++a )
      for ( std::size_t b = a + 1; b < sels[i].size(); ++b )
        s.add_clause( { make_lit( sels[i][a].v, true ), make_lit( sels[i][b].v, true ) } );

    for ( auto const& sl : sels[i] )
      for ( uint32_t t = 1; t < rows; ++t )
        for ( uint32_t m = 0; m < nm; ++m )
        {
          /* sel ∧ (fanins at row t match m) → x_i,t == f_i,m */
          std::vector<lit> ante{ make_lit( sl.v, true ) };
          bool impossible = false;
          for ( uint32_t j = 0; j < ar && !impossible; ++j )
          {
            auto const sig = sl.t[j];
            bool const want = ( m >> j ) & 1u;
            if ( sig < base )
            {
              if ( fixed_value( sig, t ) != want )
                impossible = true;
            }
            else
              ante.push_back( make_lit( x[sig - base][t], want ) );
          }
          if ( impossible )
            continue;
          if ( m == 0u )
          {
            auto c = ante;
            c.push_back( make_lit( x[i][t], true ) );
            s.add_clause( c );
            continue;
          }
          auto c1 = ante, c2 = ante;
          c1.push_back( make_lit( x[i][t], true ) );
          c1.push_back( make_lit( f[i][m] ) );
          c2.push_back( make_lit( x[i][t] ) );
          c2.push_back( make_lit( f[i][m], true ) );
          s.add_clause( c1 );
          s.add_clause( c2 );
        }

    /* restrict the gate function to the basis */
    for ( uint32_t code = 0; code < ( 1u << nm ); code += 2u )
    {
      bool allowed = false;
      for ( auto const& op : basis.ops )
        allowed |= op.truth == code;
      if ( allowed )
        continue;
      std::vector<lit> block;
      for ( uint32_t m = 1; m < nm; ++m )
        block.push_back( make_lit( f[i][m], ( code >> m ) & 1u ) );
      s.add_clause( block );
    }
  }

  /* output */
  for ( uint32_t t = 1; t < rows; ++t )
    s.add_clause( { make_lit( x[r - 1u][t], !( ( target >> t ) & 1u ) ) } );

  /* every step but the last feeds a later step */
  for ( uint32_t i = 0; i + 1u < r; ++i )
  {
    std::vector<lit> used;
    for ( uint32_t k = i + 1u; k < r; ++k )
      for ( auto const& sl : sels[k] )
        for ( uint32_t j = 0; j < ar; ++j )
          if ( sl.t[j] == base + i )
            used.push_back( make_lit( sl.v ) );
    s.add_clause( used );
  }

  /* colex order of independent consecutive steps */
  auto colex_less = []( std::array<uint32_t, 3> const& a, std::array<uint32_t, 3> const& b, uint32_t ar_ ) {
    for ( uint32_t j = ar_; j-- > 0; )
      if ( a[j] != b[j] )
        return a[j] < b[j];
    return false;
  };
  for ( uint32_t i = 0; i + 1u < r; ++i )
    for ( auto const& a : sels[i] )
      for ( auto const& b : sels[i + 1u] )
      {
        bool uses = false;
        for ( uint32_t j = 0; j < ar; ++j )
          uses |= b.t[j] == base + i;
        if ( !uses && colex_less( b.t, a.t, ar ) )
          s.add_clause( { make_lit( a.v, true ), make_lit( b.v, true ) } );
      }

  auto const st = s.solve( {}, conflict_budget );
  if ( budget_hit )
    *budget_hit = st == status::resource_out;
  if ( st != status::sat )
    return std::nullopt;

  chain ch;
  ch.view = view;
  ch.num_inputs = n;
  ch.has_const = ar == 3u;
  for ( uint32_t i = 0; i < r; ++i )
  {
    chain::step stp{};
    for ( auto const& sl : sels[i] )
      if ( s.model_value( sl.v ) )
        stp.fanins = sl.t;
    uint32_t code = 0u;
    for ( uint32_t m = 1; m < nm; ++m )
      if ( s.model_value( f[i][m] ) )
        code |= 1u << m;
    for ( uint32_t k = 0; k < basis.ops.size(); ++k )
      if ( basis.ops[k].truth == code )
        stp.op = k;
    ch.steps.push_back( stp );
  }
  ch.output = base + r - 1u;
  ch.output_negated = negated;
  return ch;
}

struct exact_result
{
  std::optional<chain> best;
  bool proven_minimal = false;
};

/*! \brief Smallest chain with at most `max_steps` steps. */
inline exact_result exact_synthesis( uint32_t func, uint32_t n, view_kind view, uint32_t max_steps, uint64_t conflict_budget )
{
  exact_result res;
  if ( auto t = trivial_chain( func, n, view ) )
  {
    res.best = t;
    res.proven_minimal = true;
    return res;
  }
  bool all_proven = true;
  for ( uint32_t r = 1; r <= max_steps; ++r )
  {
    bool hit = false;
    if ( auto c = synthesize_with_steps( func, n, view, r, conflict_budget, &hit ) )
    {
      res.best = c;
      res.proven_minimal = all_proven;
      return res;
    }
    all_proven &= !hit;
  }
  return res;
}

/*! \brief Emits a chain into a builder; `inputs` are the nodes driving chain inputs. */
inline node_index emit_chain( circuit_builder& b, chain const& ch, std::vector<node_index> const& inputs )
{
  auto const basis = basis_for( ch.view );
  std::vector<node_index> sig( inputs.begin(), inputs.begin() + ch.num_inputs );
  if ( ch.has_const )
    sig.push_back( b.create_const0() );
  auto lit_of = [&]( uint32_t s, bool neg ) { return neg ? b.create_not( sig[s] ) : sig[s]; };
  for ( auto const& st : ch.steps )
  {
    auto const& op = basis.ops[st.op];
    auto const& fi = st.fanins;
    node_index n = 0;
    switch ( op.kind )
    {
    case op_kind::and_: n = b.create_and( lit_of( fi[0], op.mask & 1u ), lit_of( fi[1], op.mask & 2u ) ); break;
    case op_kind::or_:
      n = b.create_not( b.create_and( b.create_not( sig[fi[0]] ), b.create_not( sig[fi[1]] ) ) );
      break;
    case op_kind::xor_:
      if ( basis.arity == 2u )
        n = b.create_xor( sig[fi[0]], sig[fi[1]] );
      else
      {
        std::vector<node_index> pr;
        for ( uint32_t j = 0; j < 3u; ++j )
          if ( ( op.mask >> j ) & 1u )
            pr.push_back( sig[fi[j]] );
        n = b.create_xor( pr[0], pr[1] );
      }
      break;
    case op_kind::maj:
      n = b.create_maj( lit_of( fi[0], op.mask & 1u ), lit_of( fi[1], op.mask & 2u ), lit_of( fi[2], op.mask & 4u ) );
      break;
    }
    sig.push_back( n );
  }
  node_index out = ch.output_constant ? b.create_const0() : sig[ch.output];
  return ch.output_negated ? b.create_not( out ) : out;
}

} // namespace mvg
