/*!
  \file cnf.hpp
  \brief Tseitin encoding of circuits, miters, and DIMACS export
*/

#pragma once

#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "../circuit.hpp"
#include "../error.hpp"
#include "solver.hpp"

namespace mvg::sat
{

/*! \brief CNF over DIMACS-style literals (variables 1..n_vars, negative = negated). */
struct cnf
{
  uint32_t n_vars = 0u;
  std::vector<std::vector<int32_t>> clauses;
  std::vector<int32_t> var_map;  /* circuit node -> variable (0 = not encoded) */
  std::vector<int32_t> var_map_b; /* second circuit of a miter */
  std::vector<int32_t> pi_vars;  /* shared PI variables by PI position */
  int32_t output_var = 0;        /* miter output variable */

  int32_t new_var() { return static_cast<int32_t>( ++n_vars ); }
  void add_clause( std::vector<int32_t> c ) { clauses.push_back( std::move( c ) ); }
};

/*! \brief Sink adapter that writes straight into a solver. */
struct solver_sink
{
  solver& s;

  int32_t new_var() { return static_cast<int32_t>( s.new_var() ) + 1; }
  void add_clause( std::vector<int32_t> const& c )
  {
    std::vector<lit> ls;
    ls.reserve( c.size() );
    for ( auto x : c )
      ls.push_back( make_lit( static_cast<var>( std::abs( x ) - 1 ), x < 0 ) );
    s.add_clause( ls );
  }
};

inline lit to_solver_lit( int32_t x ) noexcept { return make_lit( static_cast<var>( std::abs( x ) - 1 ), x < 0 ); }

/*! \brief Adds the defining clauses of node `n` given fanin variables. */
template<class Sink>
void encode_gate( Sink& sink, circuit const& c, node_index n, int32_t o, std::span<int32_t const> in )
{
  switch ( c.gate( n ) )
  {
  case gate_type::pi: break;
  case gate_type::const0: sink.add_clause( { -o } ); break;
  case gate_type::const1: sink.add_clause( { o } ); break;
  case gate_type::po:
    sink.add_clause( { -o, in[0] } );
    sink.add_clause( { o, -in[0] } );
    break;
  case gate_type::not_:
    sink.add_clause( { o, in[0] } );
    sink.add_clause( { -o, -in[0] } );
    break;
  case gate_type::and2:
    sink.add_clause( { -o, in[0] } );
    sink.add_clause( { -o, in[1] } );
    sink.add_clause( { o, -in[0], -in[1] } );
    break;
  case gate_type::or2:
    sink.add_clause( { o, -in[0] } );
    sink.add_clause( { o, -in[1] } );
    sink.add_clause( { -o, in[0], in[1] } );
    break;
  case gate_type::xor2:
    sink.add_clause( { -o, in[0], in[1] } );
    sink.add_clause( { -o, -in[0], -in[1] } );
    sink.add_clause( { o, -in[0], in[1] } );
    sink.add_clause( { o, in[0], -in[1] } );
    break;
  case gate_type::maj3:
    sink.add_clause( { -in[0], -in[1], o } );
    sink.add_clause( { -in[0], -in[2], o } );
    sink.add_clause( { -in[1], -in[2], o } );
    sink.add_clause( { in[0], in[1], -o } );
    sink.add_clause( { in[0], in[2], -o } );
    sink.add_clause( { in[1], in[2], -o } );
    break;
  case gate_type::lut4:
  {
    auto const k = c[n].num_fanins;
    for ( uint32_t m = 0; m < ( 1u << k ); ++m )
    {
      std::vector<int32_t> cl;
      for ( uint32_t j = 0; j < k; ++j )
        cl.push_back( ( ( m >> j ) & 1u ) ? -in[j] : in[j] );
      cl.push_back( ( ( c[n].truth >> m ) & 1u ) ? o : -o );
      sink.add_clause( std::move( cl ) );
    }
    break;
  }
  }
}

/*! \brief Lazily encodes transitive fanin cones of one circuit into a sink.

  PI variables are taken from (and registered into) a shared vector indexed
  by PI position, which is how two circuits are tied together in a miter.
*/
template<class Sink>
class cone_encoder
{
public:
  cone_encoder( Sink& sink, circuit const& c, std::vector<int32_t>& pi_vars )
      : sink_( sink ), c_( c ), pi_vars_( pi_vars ), var_map_( c.size(), 0 )
  {
    if ( pi_vars_.size() < c.num_pis() )
      pi_vars_.resize( c.num_pis(), 0 );
  }

  int32_t encode( node_index root )
  {
    if ( var_map_[root] )
      return var_map_[root];
    std::vector<node_index> stack{ root };
    while ( !stack.empty() )
    {
      auto const n = stack.back();
      if ( var_map_[n] )
      {
        stack.pop_back();
        continue;
      }
      bool ready = true;
      for ( auto f : c_.fanins( n ) )
        if ( !var_map_[f] )
        {
          stack.push_back( f );
          ready = false;
        }
      if ( !ready )
        continue;
      stack.pop_back();
      if ( c_.gate( n ) == gate_type::pi )
      {
        auto& pv = pi_vars_[static_cast<uint32_t>( c_.pi_position( n ) )];
        if ( !pv )
          pv = sink_.new_var();
        var_map_[n] = pv;
        continue;
      }
      int32_t in[4];
      auto const fis = c_.fanins( n );
      for ( uint32_t j = 0; j < fis.size(); ++j )
        in[j] = var_map_[fis[j]];
      auto const o = sink_.new_var();
      var_map_[n] = o;
      encode_gate( sink_, c_, n, o, std::span<int32_t const>( in, fis.size() ) );
    }
    return var_map_[root];
  }

  std::vector<int32_t> const& var_map() const noexcept { return var_map_; }

private:
  Sink& sink_;
  circuit const& c_;
  std::vector<int32_t>& pi_vars_;
  std::vector<int32_t> var_map_;
};

/*! \brief Tseitin CNF of the transitive fanin of `roots`. */
inline cnf tseitin_encode( circuit const& c, std::span<node_index const> roots )
{
  cnf f;
  std::vector<int32_t> pis;
  cone_encoder<cnf> enc( f, c, pis );
  for ( auto r : roots )
  {
    if ( r >= c.size() )
      throw error( errc::index_out_of_range, "root " + std::to_string( r ) );
    enc.encode( r );
  }
  f.var_map = enc.var_map();
  f.pi_vars = pis;
  return f;
}

/*! \brief Adds o <-> (a xor b). */
template<class Sink>
void encode_xor( Sink& sink, int32_t o, int32_t a, int32_t b )
{
  sink.add_clause( { -o, a, b } );
  sink.add_clause( { -o, -a, -b } );
  sink.add_clause( { o, -a, b } );
  sink.add_clause( { o, a, -b } );
}

/*! \brief CNF asserting node_a (of circ_a) differs from node_b (of circ_b) with tied PIs. */
inline cnf build_miter( circuit const& circ_a, node_index node_a, circuit const& circ_b, node_index node_b )
{
  if ( circ_a.num_pis() != circ_b.num_pis() )
    throw error( errc::pi_count_mismatch, std::to_string( circ_a.num_pis() ) + " vs " + std::to_string( circ_b.num_pis() ) + " PIs" );
  if ( node_a >= circ_a.size() || node_b >= circ_b.size() )
    throw error( errc::index_out_of_range, "miter node" );
  cnf f;
  std::vector<int32_t> pis( circ_a.num_pis(), 0 );
  cone_encoder<cnf> ea( f, circ_a, pis );
  auto const va = ea.encode( node_a );
  cone_encoder<cnf> eb( f, circ_b, pis );
  auto const vb = eb.encode( node_b );
  f.output_var = f.new_var();
  encode_xor( f, f.output_var, va, vb );
  f.add_clause( { f.output_var } );
  f.var_map = ea.var_map();
  f.var_map_b = eb.var_map();
  f.pi_vars = pis;
  return f;
}

struct sat_result
{
  status result = status::unsat;
  std::vector<bool> model;           /* by DIMACS variable (index 0 unused) */
  std::vector<bool> pi_assignment;   /* by PI position, when PI variables are known */
  uint64_t conflicts = 0u;
};

/*! \brief Solves a CNF; `conflict_budget` 0 means unlimited. */
inline sat_result solve( cnf const& f, std::span<int32_t const> assumptions = {}, uint64_t conflict_budget = 0u )
{
  solver s;
  for ( uint32_t i = 0; i < f.n_vars; ++i )
    s.new_var();
  for ( auto const& c : f.clauses )
  {
    std::vector<lit> ls;
    for ( auto x : c )
      ls.push_back( to_solver_lit( x ) );
    s.add_clause( ls );
  }
  std::vector<lit> as;
  for ( auto a : assumptions )
    as.push_back( to_solver_lit( a ) );
  sat_result r;
  r.result = s.solve( as, conflict_budget );
  r.conflicts = s.stats().conflicts;
  if ( r.result == status::sat )
  {
    r.model.assign( f.n_vars + 1u, false );
    for ( uint32_t v = 1; v <= f.n_vars; ++v )
      r.model[v] = s.model_value( v - 1u );
    for ( auto pv : f.pi_vars )
      r.pi_assignment.push_back( pv ? r.model[static_cast<uint32_t>( pv )] : false );
  }
  return r;
}

/*! \brief Whether `model` (indexed by DIMACS variable) satisfies every clause. */
inline bool satisfies( cnf const& f, std::vector<bool> const& model )
{
  for ( auto const& c : f.clauses )
  {
    bool sat = false;
    for ( auto x : c )
      if ( model[static_cast<uint32_t>( std::abs( x ) )] == ( x > 0 ) )
      {
        sat = true;
        break;
      }
    if ( !sat )
      return false;
  }
  return true;
}

inline std::string to_dimacs( cnf const& f )
{
  std::string out = "p cnf " + std::to_string( f.n_vars ) + " " + std::to_string( f.clauses.size() ) + "\n";
  for ( auto const& c : f.clauses )
  {
    for ( auto x : c )
      out += std::to_string( x ) + " ";
    out += "0\n";
  }
  return out;
}

} // namespace mvg::sat
