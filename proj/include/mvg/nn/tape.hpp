/*!
  \file tape.hpp
  \brief Reverse-mode differentiation over dense double matrices

  Every operation appends a node holding its value and a closure that pushes
  the node's gradient to its inputs.  Nodes that depend on no parameter skip
  the backward pass.
*/

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "../error.hpp"

namespace mvg::nn
{

using mat = Eigen::MatrixXd;

struct parameter
{
  std::string name;
  mat value;
  mat grad;
  mat m; /* Adam moments */
  mat v;
};

/*! \brief Named parameters in insertion order. */
class param_store
{
public:
  parameter& add( std::string name, mat init )
  {
    if ( index_.contains( name ) )
      throw error( errc::invalid_argument, "duplicate parameter " + name );
    auto p = std::make_unique<parameter>();
    p->name = name;
    p->grad = mat::Zero( init.rows(), init.cols() );
    p->m = p->grad;
    p->v = p->grad;
    p->value = std::move( init );
    index_[name] = params_.size();
    params_.push_back( std::move( p ) );
    return *params_.back();
  }

  parameter& operator[]( std::string const& name )
  {
    auto it = index_.find( name );
    if ( it == index_.end() )
      throw error( errc::invalid_argument, "unknown parameter " + name );
    return *params_[it->second];
  }
  parameter const& operator[]( std::string const& name ) const { return const_cast<param_store&>( *this )[name]; }
  bool contains( std::string const& name ) const { return index_.contains( name ); }

  std::vector<std::unique_ptr<parameter>>& all() noexcept { return params_; }
  std::vector<std::unique_ptr<parameter>> const& all() const noexcept { return params_; }

  void zero_grad()
  {
    for ( auto& p : params_ )
      p->grad.setZero();
  }

  std::size_t num_scalars() const
  {
    std::size_t n = 0;
    for ( auto const& p : params_ )
      n += static_cast<std::size_t>( p->value.size() );
    return n;
  }

private:
  std::vector<std::unique_ptr<parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

struct tv
{
  uint32_t id = UINT32_MAX;
};

class tape
{
  struct node
  {
    mat value;
    mat grad;
    bool needs = false;
    parameter* param = nullptr;
    std::function<void()> back;
  };

public:
  mat const& value( tv x ) const { return nodes_[x.id].value; }
  double scalar( tv x ) const { return nodes_[x.id].value( 0, 0 ); }
  std::size_t size() const noexcept { return nodes_.size(); }

  tv constant( mat v ) { return push( std::move( v ), false ); }

  tv param( parameter& p )
  {
    auto it = param_nodes_.find( &p );
    if ( it != param_nodes_.end() )
      return it->second;
    auto x = push( p.value, true );
    nodes_[x.id].param = &p;
    param_nodes_[&p] = x;
    return x;
  }

  /*! \brief Backpropagates d(root)/d(.) and accumulates into parameter gradients. */
  void backward( tv root, double seed = 1.0 )
  {
    auto& r = nodes_[root.id];
    if ( !r.needs )
      return;
    grad_of( root ) = mat::Constant( r.value.rows(), r.value.cols(), seed );
    for ( uint32_t i = root.id + 1u; i-- > 0; )
    {
      auto& n = nodes_[i];
      if ( !n.needs || n.grad.size() == 0 )
        continue;
      if ( n.back )
        n.back();
      if ( n.param )
        n.param->grad += n.grad;
    }
  }

  /* ---- arithmetic ---- */

  tv matmul( tv a, tv b )
  {
    auto y = push( value( a ) * value( b ), needs( a, b ) );
    set_back( y, [this, a, b, y] {
      auto const& g = grad( y );
      if ( needs( a ) )
        grad_of( a ).noalias() += g * value( b ).transpose();
      if ( needs( b ) )
        grad_of( b ).noalias() += value( a ).transpose() * g;
    } );
    return y;
  }

  tv add( tv a, tv b )
  {
    check_same( a, b, "add" );
    auto y = push( value( a ) + value( b ), needs( a, b ) );
    set_back( y, [this, a, b, y] {
      if ( needs( a ) )
        grad_of( a ) += grad( y );
      if ( needs( b ) )
        grad_of( b ) += grad( y );
    } );
    return y;
  }

  tv sub( tv a, tv b )
  {
    check_same( a, b, "sub" );
    auto y = push( value( a ) - value( b ), needs( a, b ) );
    set_back( y, [this, a, b, y] {
      if ( needs( a ) )
        grad_of( a ) += grad( y );
      if ( needs( b ) )
        grad_of( b ) -= grad( y );
    } );
    return y;
  }

  tv cmul( tv a, tv b )
  {
    check_same( a, b, "cmul" );
    auto y = push( value( a ).cwiseProduct( value( b ) ), needs( a, b ) );
    set_back( y, [this, a, b, y] {
      if ( needs( a ) )
        grad_of( a ) += grad( y ).cwiseProduct( value( b ) );
      if ( needs( b ) )
        grad_of( b ) += grad( y ).cwiseProduct( value( a ) );
    } );
    return y;
  }

  tv cdiv( tv a, tv b )
  {
    check_same( a, b, "cdiv" );
    auto y = push( value( a ).cwiseQuotient( value( b ) ), needs( a, b ) );
    set_back( y, [this, a, b, y] {
      if ( needs( a ) )
        grad_of( a ) += grad( y ).cwiseQuotient( value( b ) );
      if ( needs( b ) )
        grad_of( b ) -= grad( y ).cwiseProduct( value( y ) ).cwiseQuotient( value( b ) );
    } );
    return y;
  }

  tv scale( tv a, double s )
  {
    auto y = push( value( a ) * s, needs( a ) );
    set_back( y, [this, a, y, s] { grad_of( a ) += grad( y ) * s; } );
    return y;
  }

  tv add_scalar( tv a, double s )
  {
    auto y = push( ( value( a ).array() + s ).matrix(), needs( a ) );
    set_back( y, [this, a, y] { grad_of( a ) += grad( y ); } );
    return y;
  }

  /*! \brief Repeats a 1 x c row r times. */
  tv repeat_rows( tv row, uint32_t r )
  {
    auto const& v = value( row );
    if ( v.rows() != 1 )
      throw error( errc::width_mismatch, "repeat_rows expects a row" );
    auto y = push( v.replicate( r, 1 ), needs( row ) );
    set_back( y, [this, row, y] { grad_of( row ) += grad( y ).colwise().sum(); } );
    return y;
  }

  /*! \brief Fills an r x c matrix with a 1 x 1 value. */
  tv broadcast( tv s, uint32_t r, uint32_t c )
  {
    auto y = push( mat::Constant( r, c, value( s )( 0, 0 ) ), needs( s ) );
    set_back( y, [this, s, y] { grad_of( s )( 0, 0 ) += grad( y ).sum(); } );
    return y;
  }

  /*! \brief Scales row i of a (m x c) by s(i) (m x 1). */
  tv mul_rows( tv a, tv s )
  {
    auto const& av = value( a );
    auto const& sv = value( s );
    if ( sv.rows() != av.rows() || sv.cols() != 1 )
      throw error( errc::width_mismatch, "mul_rows" );
    auto y = push( sv.asDiagonal() * av, needs( a, s ) );
    set_back( y, [this, a, s, y] {
      auto const& g = grad( y );
      if ( needs( a ) )
        grad_of( a ) += value( s ).asDiagonal() * g;
      if ( needs( s ) )
        grad_of( s ) += g.cwiseProduct( value( a ) ).rowwise().sum();
    } );
    return y;
  }

  tv add_row( tv a, tv row ) { return add( a, repeat_rows( row, static_cast<uint32_t>( value( a ).rows() ) ) ); }

  tv transpose( tv a )
  {
    auto y = push( value( a ).transpose(), needs( a ) );
    set_back( y, [this, a, y] { grad_of( a ) += grad( y ).transpose(); } );
    return y;
  }

  /* ---- elementwise nonlinearities ---- */

  tv relu( tv a )
  {
    auto y = push( value( a ).cwiseMax( 0.0 ), needs( a ) );
    set_back( y, [this, a, y] { grad_of( a ) += ( value( a ).array() > 0.0 ).cast<double>().matrix().cwiseProduct( grad( y ) ); } );
    return y;
  }

  tv sigmoid( tv a )
  {
    auto y = push( ( 1.0 / ( 1.0 + ( -value( a ).array() ).exp() ) ).matrix(), needs( a ) );
    set_back( y, [this, a, y] {
      auto const& s = value( y ).array();
      grad_of( a ) += ( grad( y ).array() * s * ( 1.0 - s ) ).matrix();
    } );
    return y;
  }

  tv tanh( tv a )
  {
    auto y = push( value( a ).array().tanh().matrix(), needs( a ) );
    set_back( y, [this, a, y] {
      auto const& h = value( y ).array();
      grad_of( a ) += ( grad( y ).array() * ( 1.0 - h * h ) ).matrix();
    } );
    return y;
  }

  tv abs( tv a )
  {
    auto y = push( value( a ).cwiseAbs(), needs( a ) );
    set_back( y, [this, a, y] { grad_of( a ) += ( value( a ).array().sign() * grad( y ).array() ).matrix(); } );
    return y;
  }

  tv square( tv a ) { return cmul( a, a ); }

  tv sqrt( tv a )
  {
    auto y = push( value( a ).cwiseSqrt(), needs( a ) );
    set_back( y, [this, a, y] { grad_of( a ) += ( grad( y ).array() / ( 2.0 * value( y ).array() ) ).matrix(); } );
    return y;
  }

  /*! \brief Inverted dropout with a fixed keep mask (entries 0 or 1). */
  tv dropout( tv a, mat const& keep, double p )
  {
    double const s = p < 1.0 ? 1.0 / ( 1.0 - p ) : 0.0;
    mat k = keep * s;
    auto y = push( value( a ).cwiseProduct( k ), needs( a ) );
    set_back( y, [this, a, y, k = std::move( k )] { grad_of( a ) += grad( y ).cwiseProduct( k ); } );
    return y;
  }

  /* ---- reductions ---- */

  tv sum( tv a )
  {
    auto y = push( mat::Constant( 1, 1, value( a ).sum() ), needs( a ) );
    set_back( y, [this, a, y] { grad_of( a ).array() += grad( y )( 0, 0 ); } );
    return y;
  }

  tv mean( tv a )
  {
    auto const n = static_cast<double>( value( a ).size() );
    return scale( sum( a ), n > 0 ? 1.0 / n : 0.0 );
  }

  tv row_sum( tv a )
  {
    auto y = push( value( a ).rowwise().sum(), needs( a ) );
    set_back( y, [this, a, y] { grad_of( a ) += grad( y ).replicate( 1, value( a ).cols() ); } );
    return y;
  }

  /*! \brief Per-row log(sum(exp(.))), m x 1. */
  tv logsumexp_rows( tv a )
  {
    auto const& v = value( a );
    Eigen::VectorXd mx = v.rowwise().maxCoeff();
    mat e = ( v.colwise() - mx ).array().exp().matrix();
    Eigen::VectorXd s = e.rowwise().sum();
    mat out = ( s.array().log() + mx.array() ).matrix();
    mat soft = s.cwiseInverse().asDiagonal() * e;
    auto y = push( std::move( out ), needs( a ) );
    set_back( y, [this, a, y, soft = std::move( soft )] { grad_of( a ) += grad( y ).col( 0 ).asDiagonal() * soft; } );
    return y;
  }

  tv softmax_rows( tv a )
  {
    auto const& v = value( a );
    Eigen::VectorXd mx = v.rowwise().maxCoeff();
    mat e = ( v.colwise() - mx ).array().exp().matrix();
    Eigen::VectorXd s = e.rowwise().sum();
    auto y = push( s.cwiseInverse().asDiagonal() * e, needs( a ) );
    set_back( y, [this, a, y] {
      auto const& p = value( y );
      auto const& g = grad( y );
      Eigen::VectorXd dot = p.cwiseProduct( g ).rowwise().sum();
      grad_of( a ) += p.cwiseProduct( g - dot.replicate( 1, g.cols() ) );
    } );
    return y;
  }

  /*! \brief Row-wise layer normalization with gain and bias rows. */
  tv layer_norm( tv a, tv gain, tv bias, double eps = 1e-5 )
  {
    auto const& v = value( a );
    auto const c = static_cast<double>( v.cols() );
    Eigen::VectorXd mu = v.rowwise().mean();
    mat xc = v.colwise() - mu;
    Eigen::VectorXd inv = ( xc.array().square().rowwise().sum() / c + eps ).rsqrt().matrix();
    mat xhat = inv.asDiagonal() * xc;
    mat out = ( xhat.array().rowwise() * value( gain ).row( 0 ).array() ).matrix();
    out.rowwise() += value( bias ).row( 0 );
    auto y = push( std::move( out ), needs( a ) || needs( gain ) || needs( bias ) );
    set_back( y, [this, a, gain, bias, y, xhat = std::move( xhat ), inv = std::move( inv )] {
      auto const& g = grad( y );
      if ( needs( gain ) )
        grad_of( gain ) += g.cwiseProduct( xhat ).colwise().sum();
      if ( needs( bias ) )
        grad_of( bias ) += g.colwise().sum();
      if ( needs( a ) )
      {
        mat gx = ( g.array().rowwise() * value( gain ).row( 0 ).array() ).matrix();
        Eigen::VectorXd m1 = gx.rowwise().mean();
        Eigen::VectorXd m2 = gx.cwiseProduct( xhat ).rowwise().mean();
        mat d = gx;
        d.colwise() -= m1;
        d -= m2.asDiagonal() * xhat;
        grad_of( a ) += inv.asDiagonal() * d;
      }
    } );
    return y;
  }

  /* ---- structure ---- */

  tv concat_cols( std::span<tv const> parts )
  {
    auto const r = value( parts[0] ).rows();
    Eigen::Index c = 0;
    bool nd = false;
    for ( auto p : parts )
    {
      if ( value( p ).rows() != r )
        throw error( errc::width_mismatch, "concat_cols row mismatch" );
      c += value( p ).cols();
      nd |= needs( p );
    }
    mat out( r, c );
    Eigen::Index off = 0;
    for ( auto p : parts )
    {
      out.middleCols( off, value( p ).cols() ) = value( p );
      off += value( p ).cols();
    }
    std::vector<tv> ps( parts.begin(), parts.end() );
    auto y = push( std::move( out ), nd );
    set_back( y, [this, ps, y] {
      Eigen::Index o = 0;
      for ( auto p : ps )
      {
        auto const w = value( p ).cols();
        if ( needs( p ) )
          grad_of( p ) += grad( y ).middleCols( o, w );
        o += w;
      }
    } );
    return y;
  }
  tv concat_cols( std::initializer_list<tv> parts ) { return concat_cols( std::span<tv const>( parts.begin(), parts.size() ) ); }

  tv concat_rows( std::span<tv const> parts )
  {
    auto const c = value( parts[0] ).cols();
    Eigen::Index r = 0;
    bool nd = false;
    for ( auto p : parts )
    {
      if ( value( p ).cols() != c )
        throw error( errc::width_mismatch, "concat_rows column mismatch" );
      r += value( p ).rows();
      nd |= needs( p );
    }
    mat out( r, c );
    Eigen::Index off = 0;
    for ( auto p : parts )
    {
      out.middleRows( off, value( p ).rows() ) = value( p );
      off += value( p ).rows();
    }
    std::vector<tv> ps( parts.begin(), parts.end() );
    auto y = push( std::move( out ), nd );
    set_back( y, [this, ps, y] {
      Eigen::Index o = 0;
      for ( auto p : ps )
      {
        auto const h = value( p ).rows();
        if ( needs( p ) )
          grad_of( p ) += grad( y ).middleRows( o, h );
        o += h;
      }
    } );
    return y;
  }
  tv concat_rows( std::initializer_list<tv> parts ) { return concat_rows( std::span<tv const>( parts.begin(), parts.size() ) ); }

  tv slice_cols( tv a, uint32_t start, uint32_t n )
  {
    auto y = push( value( a ).middleCols( start, n ), needs( a ) );
    set_back( y, [this, a, y, start, n] { grad_of( a ).middleCols( start, n ) += grad( y ); } );
    return y;
  }

  tv slice_rows( tv a, uint32_t start, uint32_t n )
  {
    auto y = push( value( a ).middleRows( start, n ), needs( a ) );
    set_back( y, [this, a, y, start, n] { grad_of( a ).middleRows( start, n ) += grad( y ); } );
    return y;
  }

  tv gather_rows( tv a, std::vector<uint32_t> idx )
  {
    auto const& v = value( a );
    mat out( static_cast<Eigen::Index>( idx.size() ), v.cols() );
    for ( std::size_t i = 0; i < idx.size(); ++i )
      out.row( static_cast<Eigen::Index>( i ) ) = v.row( idx[i] );
    auto y = push( std::move( out ), needs( a ) );
    set_back( y, [this, a, y, idx = std::move( idx )] {
      auto& ga = grad_of( a );
      auto const& g = grad( y );
      for ( std::size_t i = 0; i < idx.size(); ++i )
        ga.row( idx[i] ) += g.row( static_cast<Eigen::Index>( i ) );
    } );
    return y;
  }

  /*! \brief Rows taken from several sources: row i is row src[i].second of tape value src[i].first. */
  tv gather_from( std::vector<std::pair<tv, uint32_t>> src, Eigen::Index cols )
  {
    mat out( static_cast<Eigen::Index>( src.size() ), cols );
    bool nd = false;
    for ( std::size_t i = 0; i < src.size(); ++i )
    {
      out.row( static_cast<Eigen::Index>( i ) ) = value( src[i].first ).row( src[i].second );
      nd |= needs( src[i].first );
    }
    auto y = push( std::move( out ), nd );
    set_back( y, [this, y, src = std::move( src )] {
      auto const& g = grad( y );
      for ( std::size_t i = 0; i < src.size(); ++i )
        if ( needs( src[i].first ) )
          grad_of( src[i].first ).row( src[i].second ) += g.row( static_cast<Eigen::Index>( i ) );
    } );
    return y;
  }

  /*! \brief Copy of `a` with the listed rows replaced by the 1 x c `row`. */
  tv replace_rows( tv a, std::vector<uint32_t> rows, tv row )
  {
    mat out = value( a );
    for ( auto r : rows )
      out.row( r ) = value( row ).row( 0 );
    auto y = push( std::move( out ), needs( a ) || needs( row ) );
    set_back( y, [this, a, row, y, rows = std::move( rows )] {
      mat g = grad( y );
      if ( needs( row ) )
        for ( auto r : rows )
          grad_of( row ) += g.row( r );
      if ( needs( a ) )
      {
        for ( auto r : rows )
          g.row( r ).setZero();
        grad_of( a ) += g;
      }
    } );
    return y;
  }

  /*! \brief Value copy that blocks gradients. */
  tv detach( tv a ) { return constant( value( a ) ); }

private:
  tv push( mat v, bool nd )
  {
    nodes_.push_back( node{ std::move( v ), mat(), nd, nullptr, {} } );
    return tv{ static_cast<uint32_t>( nodes_.size() - 1u ) };
  }

  template<class F>
  void set_back( tv y, F&& f )
  {
    if ( nodes_[y.id].needs )
      nodes_[y.id].back = std::forward<F>( f );
  }

  bool needs( tv a ) const { return nodes_[a.id].needs; }
  bool needs( tv a, tv b ) const { return nodes_[a.id].needs || nodes_[b.id].needs; }

  mat const& grad( tv a ) const { return nodes_[a.id].grad; }
  mat& grad_of( tv a )
  {
    auto& n = nodes_[a.id];
    if ( n.grad.size() == 0 )
      n.grad = mat::Zero( n.value.rows(), n.value.cols() );
    return n.grad;
  }

  void check_same( tv a, tv b, char const* what ) const
  {
    if ( value( a ).rows() != value( b ).rows() || value( a ).cols() != value( b ).cols() )
      throw error( errc::width_mismatch, std::string( what ) + ": shape mismatch" );
  }

  std::vector<node> nodes_;
  std::map<parameter const*, tv> param_nodes_;
};

} // namespace mvg::nn
