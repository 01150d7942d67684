/*!
  \file solver.hpp
  \brief Conflict-driven clause-learning SAT solver

  Two-watched-literal propagation, first-UIP learning with local clause
  minimization, VSIDS branching with phase saving, geometric restarts and
  activity-based learnt clause reduction.  Supports incremental clause
  addition and solving under assumptions with a conflict budget.
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace mvg::sat
{

using var = uint32_t;
using lit = uint32_t; /* 2 * var + negated */

constexpr lit make_lit( var v, bool negated = false ) noexcept { return 2u * v + ( negated ? 1u : 0u ); }
constexpr lit negate( lit l ) noexcept { return l ^ 1u; }
constexpr var var_of( lit l ) noexcept { return l >> 1u; }
constexpr bool is_negated( lit l ) noexcept { return l & 1u; }

enum class status
{
  sat,
  unsat,
  resource_out
};

struct solver_stats
{
  uint64_t conflicts = 0u;
  uint64_t decisions = 0u;
  uint64_t propagations = 0u;
  uint64_t restarts = 0u;
  uint64_t learnts = 0u;
};

class solver
{
  static constexpr uint8_t l_false = 0u, l_true = 1u, l_undef = 2u;
  static constexpr uint32_t no_reason = UINT32_MAX;

  struct clause
  {
    std::vector<lit> lits;
    double activity = 0.0;
    bool learnt = false;
    bool deleted = false;
  };

  struct watcher
  {
    uint32_t cref;
    lit blocker;
  };

public:
  var new_var()
  {
    var const v = static_cast<var>( assigns_.size() );
    assigns_.push_back( l_undef );
    level_.push_back( 0u );
    reason_.push_back( no_reason );
    activity_.push_back( 0.0 );
    phase_.push_back( l_false );
    seen_.push_back( 0u );
    model_.push_back( false );
    heap_index_.push_back( -1 );
    watches_.emplace_back();
    watches_.emplace_back();
    heap_insert( v );
    return v;
  }

  uint32_t num_vars() const noexcept { return static_cast<uint32_t>( assigns_.size() ); }
  bool okay() const noexcept { return ok_; }
  solver_stats const& stats() const noexcept { return stats_; }

  /*! \brief Adds a permanent clause; returns false once the formula is unsatisfiable at level 0. */
  bool add_clause( std::span<lit const> input )
  {
    if ( !ok_ )
      return false;
    cancel_until( 0u );
    std::vector<lit> ls( input.begin(), input.end() );
    std::sort( ls.begin(), ls.end() );
    std::vector<lit> out;
    for ( std::size_t i = 0; i < ls.size(); ++i )
    {
      if ( i > 0u && ls[i] == ls[i - 1] )
        continue;
      if ( i > 0u && ls[i] == negate( ls[i - 1] ) )
        return true; /* tautology */
      auto const val = value( ls[i] );
      if ( val == l_true )
        return true;
      if ( val == l_false )
        continue;
      out.push_back( ls[i] );
    }
    if ( out.empty() )
      return ok_ = false;
    if ( out.size() == 1u )
    {
      enqueue( out[0], no_reason );
      if ( propagate() != no_reason )
        ok_ = false;
      return ok_;
    }
    auto const cref = static_cast<uint32_t>( clauses_.size() );
    clauses_.push_back( clause{ std::move( out ), 0.0, false, false } );
    attach( cref );
    ++num_original_;
    return true;
  }

  bool add_clause( std::initializer_list<lit> ls ) { return add_clause( std::span<lit const>( ls.begin(), ls.size() ) ); }

  /*! \brief Solves under `assumptions`; `conflict_budget` 0 means unlimited. */
  status solve( std::span<lit const> assumptions = {}, uint64_t conflict_budget = 0u )
  {
    model_.assign( num_vars(), false );
    if ( !ok_ )
      return status::unsat;
    assumptions_.assign( assumptions.begin(), assumptions.end() );
    cancel_until( 0u );
    if ( propagate() != no_reason )
    {
      ok_ = false;
      return status::unsat;
    }
    uint64_t const start = stats_.conflicts;
    double restart_limit = 100.0;
    if ( max_learnts_ == 0.0 )
      max_learnts_ = std::max( 2000.0, num_original_ / 3.0 );
    while ( true )
    {
      auto const st = search( static_cast<uint64_t>( restart_limit ), start, conflict_budget );
      if ( st != l_undef )
      {
        auto const result = st == l_true ? status::sat : status::unsat;
        if ( result == status::sat )
          for ( var v = 0; v < num_vars(); ++v )
            model_[v] = assigns_[v] == l_true;
        cancel_until( 0u );
        return result;
      }
      if ( conflict_budget != 0u && stats_.conflicts - start >= conflict_budget )
      {
        cancel_until( 0u );
        return status::resource_out;
      }
      restart_limit *= 1.5;
      ++stats_.restarts;
    }
  }

  status solve( std::initializer_list<lit> assumptions, uint64_t conflict_budget = 0u )
  {
    return solve( std::span<lit const>( assumptions.begin(), assumptions.size() ), conflict_budget );
  }

  /* assignment of the last satisfying model */
  bool model_value( var v ) const noexcept { return model_[v]; }
  std::vector<bool> const& model() const noexcept { return model_; }

private:
  uint8_t value( lit l ) const noexcept
  {
    auto const a = assigns_[var_of( l )];
    return a == l_undef ? l_undef : static_cast<uint8_t>( a ^ ( l & 1u ) );
  }

  uint32_t decision_level() const noexcept { return static_cast<uint32_t>( trail_lim_.size() ); }

  void attach( uint32_t cref )
  {
    auto const& c = clauses_[cref].lits;
    watches_[negate( c[0] )].push_back( { cref, c[1] } );
    watches_[negate( c[1] )].push_back( { cref, c[0] } );
  }

  void enqueue( lit p, uint32_t reason )
  {
    auto const v = var_of( p );
    assigns_[v] = is_negated( p ) ? l_false : l_true;
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back( p );
  }

  uint32_t propagate()
  {
    uint32_t confl = no_reason;
    while ( qhead_ < trail_.size() )
    {
      lit const p = trail_[qhead_++];
      lit const false_lit = negate( p );
      auto& ws = watches_[p];
      std::size_t i = 0u, j = 0u;
      ++stats_.propagations;
      while ( i < ws.size() )
      {
        auto const w = ws[i];
        if ( value( w.blocker ) == l_true )
        {
          ws[j++] = ws[i++];
          continue;
        }
        auto& c = clauses_[w.cref].lits;
        if ( c[0] == false_lit )
          std::swap( c[0], c[1] );
        ++i;
        lit const first = c[0];
        if ( first != w.blocker && value( first ) == l_true )
        {
          ws[j++] = { w.cref, first };
          continue;
        }
        bool moved = false;
        for ( std::size_t k = 2; k < c.size(); ++k )
        {
          if ( value( c[k] ) != l_false )
          {
            std::swap( c[1], c[k] );
            watches_[negate( c[1] )].push_back( { w.cref, first } );
            moved = true;
            break;
          }
        }
        if ( moved )
          continue;
        ws[j++] = { w.cref, first };
        if ( value( first ) == l_false )
        {
          confl = w.cref;
          qhead_ = static_cast<uint32_t>( trail_.size() );
          while ( i < ws.size() )
            ws[j++] = ws[i++];
        }
        else
          enqueue( first, w.cref );
      }
      ws.resize( j );
      if ( confl != no_reason )
        break;
    }
    return confl;
  }

  void cancel_until( uint32_t lvl )
  {
    if ( decision_level() <= lvl )
      return;
    for ( auto k = trail_.size(); k-- > trail_lim_[lvl]; )
    {
      auto const v = var_of( trail_[k] );
      phase_[v] = assigns_[v];
      assigns_[v] = l_undef;
      reason_[v] = no_reason;
      if ( heap_index_[v] < 0 )
        heap_insert( v );
    }
    trail_.resize( trail_lim_[lvl] );
    trail_lim_.resize( lvl );
    qhead_ = static_cast<uint32_t>( trail_.size() );
  }

  void bump_var( var v )
  {
    if ( ( activity_[v] += var_inc_ ) > 1e100 )
    {
      for ( auto& a : activity_ )
        a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    if ( heap_index_[v] >= 0 )
      heap_up( static_cast<uint32_t>( heap_index_[v] ) );
  }

  void bump_clause( clause& c )
  {
    if ( ( c.activity += cla_inc_ ) > 1e20 )
    {
      for ( auto& cl : clauses_ )
        if ( cl.learnt )
          cl.activity *= 1e-20;
      cla_inc_ *= 1e-20;
    }
  }

  void analyze( uint32_t confl, std::vector<lit>& learnt, uint32_t& bt_level )
  {
    learnt.clear();
    learnt.push_back( 0u );
    int path = 0;
    lit p = 0u;
    bool have_p = false;
    auto index = trail_.size();
    do
    {
      auto& c = clauses_[confl];
      if ( c.learnt )
        bump_clause( c );
      for ( std::size_t j = have_p ? 1u : 0u; j < c.lits.size(); ++j )
      {
        lit const q = c.lits[j];
        var const v = var_of( q );
        if ( !seen_[v] && level_[v] > 0u )
        {
          bump_var( v );
          seen_[v] = 1u;
          if ( level_[v] >= decision_level() )
            ++path;
          else
            learnt.push_back( q );
        }
      }
      while ( !seen_[var_of( trail_[--index] )] )
        ;
      p = trail_[index];
      have_p = true;
      confl = reason_[var_of( p )];
      seen_[var_of( p )] = 0u;
      --path;
    } while ( path > 0 );
    learnt[0] = negate( p );

    /* local minimization: drop literals implied by other learnt literals */
    analyze_clear_ = learnt;
    std::size_t keep = 1u;
    for ( std::size_t i = 1; i < learnt.size(); ++i )
    {
      auto const r = reason_[var_of( learnt[i] )];
      bool redundant = r != no_reason;
      if ( redundant )
        for ( std::size_t k = 1; k < clauses_[r].lits.size(); ++k )
        {
          auto const u = var_of( clauses_[r].lits[k] );
          if ( !seen_[u] && level_[u] > 0u )
          {
            redundant = false;
            break;
          }
        }
      if ( !redundant )
        learnt[keep++] = learnt[i];
    }
    learnt.resize( keep );
    for ( auto l : analyze_clear_ )
      seen_[var_of( l )] = 0u;

    bt_level = 0u;
    if ( learnt.size() > 1u )
    {
      std::size_t max_i = 1u;
      for ( std::size_t i = 2; i < learnt.size(); ++i )
        if ( level_[var_of( learnt[i] )] > level_[var_of( learnt[max_i] )] )
          max_i = i;
      std::swap( learnt[1], learnt[max_i] );
      bt_level = level_[var_of( learnt[1] )];
    }
  }

  bool locked( uint32_t cref ) const
  {
    auto const& c = clauses_[cref].lits;
    auto const v = var_of( c[0] );
    return reason_[v] == cref && value( c[0] ) == l_true;
  }

  void reduce_db()
  {
    std::vector<uint32_t> learnts;
    for ( uint32_t i = 0; i < clauses_.size(); ++i )
      if ( clauses_[i].learnt && !clauses_[i].deleted )
        learnts.push_back( i );
    std::sort( learnts.begin(), learnts.end(), [&]( auto a, auto b ) {
      return clauses_[a].activity < clauses_[b].activity || ( clauses_[a].activity == clauses_[b].activity && a < b );
    } );
    for ( std::size_t k = 0; k < learnts.size() / 2u; ++k )
    {
      auto& c = clauses_[learnts[k]];
      if ( c.lits.size() > 2u && !locked( learnts[k] ) )
      {
        c.deleted = true;
        c.lits.clear();
        c.lits.shrink_to_fit();
        --num_learnts_;
      }
    }
    for ( auto& w : watches_ )
      w.clear();
    for ( uint32_t i = 0; i < clauses_.size(); ++i )
      if ( !clauses_[i].deleted )
        attach( i );
  }

  uint8_t search( uint64_t nof_conflicts, uint64_t start, uint64_t budget )
  {
    uint64_t local = 0u;
    std::vector<lit> learnt;
    while ( true )
    {
      auto const confl = propagate();
      if ( confl != no_reason )
      {
        ++stats_.conflicts;
        ++local;
        if ( decision_level() == 0u )
        {
          ok_ = false;
          return l_false;
        }
        uint32_t bt = 0u;
        analyze( confl, learnt, bt );
        cancel_until( bt );
        if ( learnt.size() == 1u )
          enqueue( learnt[0], no_reason );
        else
        {
          auto const cref = static_cast<uint32_t>( clauses_.size() );
          clauses_.push_back( clause{ learnt, 0.0, true, false } );
          attach( cref );
          bump_clause( clauses_[cref] );
          enqueue( learnt[0], cref );
          ++num_learnts_;
          ++stats_.learnts;
        }
        var_inc_ /= 0.95;
        cla_inc_ /= 0.999;
        continue;
      }
      if ( budget != 0u && stats_.conflicts - start >= budget )
        return l_undef;
      if ( local >= nof_conflicts )
      {
        cancel_until( 0u );
        return l_undef;
      }
      if ( static_cast<double>( num_learnts_ ) - static_cast<double>( trail_.size() ) >= max_learnts_ )
      {
        reduce_db();
        max_learnts_ *= 1.1;
      }
      lit next = 0u;
      bool have_next = false;
      while ( decision_level() < assumptions_.size() )
      {
        lit const a = assumptions_[decision_level()];
        if ( value( a ) == l_true )
          trail_lim_.push_back( static_cast<uint32_t>( trail_.size() ) );
        else if ( value( a ) == l_false )
          return l_false;
        else
        {
          next = a;
          have_next = true;
          break;
        }
      }
      if ( !have_next )
      {
        while ( true )
        {
          if ( heap_.empty() )
            return l_true;
          var const v = heap_pop();
          if ( assigns_[v] == l_undef )
          {
            next = make_lit( v, phase_[v] != l_true );
            break;
          }
        }
        ++stats_.decisions;
      }
      trail_lim_.push_back( static_cast<uint32_t>( trail_.size() ) );
      enqueue( next, no_reason );
    }
  }

  /* binary max-heap on activity */
  bool heap_less( var a, var b ) const noexcept { return activity_[a] > activity_[b] || ( activity_[a] == activity_[b] && a < b ); }

  void heap_insert( var v )
  {
    heap_index_[v] = static_cast<int32_t>( heap_.size() );
    heap_.push_back( v );
    heap_up( static_cast<uint32_t>( heap_.size() - 1u ) );
  }

  void heap_up( uint32_t i )
  {
    var const v = heap_[i];
    while ( i > 0u )
    {
      auto const parent = ( i - 1u ) / 2u;
      if ( !heap_less( v, heap_[parent] ) )
        break;
      heap_[i] = heap_[parent];
      heap_index_[heap_[i]] = static_cast<int32_t>( i );
      i = parent;
    }
    heap_[i] = v;
    heap_index_[v] = static_cast<int32_t>( i );
  }

  void heap_down( uint32_t i )
  {
    var const v = heap_[i];
    auto const n = static_cast<uint32_t>( heap_.size() );
    while ( true )
    {
      auto child = 2u * i + 1u;
      if ( child >= n )
        break;
      if ( child + 1u < n && heap_less( heap_[child + 1u], heap_[child] ) )
        ++child;
      if ( !heap_less( heap_[child], v ) )
        break;
      heap_[i] = heap_[child];
      heap_index_[heap_[i]] = static_cast<int32_t>( i );
      i = child;
    }
    heap_[i] = v;
    heap_index_[v] = static_cast<int32_t>( i );
  }

  var heap_pop()
  {
    var const top = heap_[0];
    heap_index_[top] = -1;
    heap_[0] = heap_.back();
    heap_.pop_back();
    if ( !heap_.empty() )
    {
      heap_index_[heap_[0]] = 0;
      heap_down( 0u );
    }
    return top;
  }

  std::vector<clause> clauses_;
  std::vector<std::vector<watcher>> watches_;
  std::vector<uint8_t> assigns_;
  std::vector<uint32_t> level_;
  std::vector<uint32_t> reason_;
  std::vector<double> activity_;
  std::vector<uint8_t> phase_;
  std::vector<uint8_t> seen_;
  std::vector<bool> model_;
  std::vector<int32_t> heap_index_;
  std::vector<var> heap_;
  std::vector<lit> trail_;
  std::vector<uint32_t> trail_lim_;
  std::vector<lit> assumptions_;
  std::vector<lit> analyze_clear_;
  uint32_t qhead_ = 0u;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;
  double max_learnts_ = 0.0;
  uint64_t num_learnts_ = 0u;
  uint64_t num_original_ = 0u;
  bool ok_ = true;
  solver_stats stats_;
};

} // namespace mvg::sat
