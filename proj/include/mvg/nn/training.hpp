/*!
  \file training.hpp
  \brief Training samples, staged objectives, Adam updates, evaluation and checkpoints
*/

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../error.hpp"
#include "../hier_tokenizer.hpp"
#include "../random.hpp"
#include "../record.hpp"
#include "../simulation.hpp"
#include "losses.hpp"
#include "model.hpp"

namespace mvg::nn
{

/*! \brief Everything the objectives need about one circuit. */
struct sample
{
  std::string name;
  std::map<view_kind, circuit> views;
  std::map<view_kind, token_hierarchy> hierarchies; /* non-AIG views */
  std::vector<double> spp;                          /* AIG node probabilities */
  std::map<view_kind, std::vector<std::pair<uint32_t, uint32_t>>> aligned; /* AIG node -> view node */
  sim_state tables;                                 /* AIG truth tables (exhaustive up to 12 PIs) */

  circuit const& aig() const { return views.at( view_kind::aig ); }
};

inline sample make_sample( dataset_record const& r, hierarchy_params const& hp = {}, uint32_t table_patterns = 4096u )
{
  sample s;
  s.name = r.name;
  s.views = r.views;
  auto const& aig = r.view( view_kind::aig );
  for ( auto const& [v, c] : s.views )
    if ( v != view_kind::aig )
      s.hierarchies.emplace( v, partition( c, hp ) );
  auto const spp = r.spp_truth.find( view_kind::aig );
  if ( spp == r.spp_truth.end() || spp->second.size() != aig.size() )
    throw error( errc::schema_violation, "record '" + r.name + "' lacks AIG probability targets" );
  s.spp = spp->second;
  for ( auto const& p : r.equiv_pairs )
    if ( !p.complement && p.view_a == view_kind::aig && p.view_b != view_kind::aig )
      s.aligned[p.view_b].emplace_back( p.node_a, p.node_b );
  s.tables = aig.num_pis() <= 12u ? simulate_exhaustive( aig ) : simulate( aig, table_patterns, derive_seed( r.meta.seed, "ttdp" ) );
  return s;
}

enum class variant
{
  baseline,
  mask,
  align,
  mask_align
};

inline std::string_view variant_name( variant v )
{
  switch ( v )
  {
  case variant::baseline: return "baseline";
  case variant::mask: return "mask";
  case variant::align: return "align";
  case variant::mask_align: return "mask-align";
  }
  return "?";
}

inline variant parse_variant( std::string_view s )
{
  for ( auto v : { variant::baseline, variant::mask, variant::align, variant::mask_align } )
    if ( variant_name( v ) == s )
      return v;
  throw error( errc::invalid_argument, "unknown variant '" + std::string( s ) + "'" );
}

enum class align_objective
{
  l1,
  infonce
};

struct loss_weights
{
  double spp = 0.0, align = 0.0, ttdp = 0.0, mcm = 0.0;
  bool any() const noexcept { return spp != 0.0 || align != 0.0 || ttdp != 0.0 || mcm != 0.0; }
};

struct curriculum_config
{
  double w_spp = 1.0, w_align = 1.0, w_ttdp = 1.0, w_mcm = 1.0;
  double mask_ratio = 0.03;
  uint32_t mask_cone_depth = 2u;
  std::array<uint32_t, 4> epochs{ 0u, 8u, 8u, 8u }; /* stage 0 (SPP-only warmup) through stage 3 */
};

/*! \brief Active weights of `stage` under `var`: 0 = spp, 1 = +align, 2 = +ttdp, 3 = +mcm. */
inline loss_weights stage_weights( curriculum_config const& cc, uint32_t stage, variant var )
{
  if ( stage > 3u )
    throw error( errc::invalid_argument, "stage " + std::to_string( stage ) + " out of range" );
  loss_weights w;
  w.spp = cc.w_spp;
  if ( stage >= 1u && ( var == variant::align || var == variant::mask_align ) )
    w.align = cc.w_align;
  if ( stage >= 2u )
    w.ttdp = cc.w_ttdp;
  if ( stage >= 3u && ( var == variant::mask || var == variant::mask_align ) )
    w.mcm = cc.w_mcm;
  return w;
}

struct train_config
{
  model_config model{};
  curriculum_config curriculum{};
  variant var = variant::mask_align;
  bool staged = true; /* false: all stage epochs are spent on the stage-3 objective */
  uint32_t batch = 4u;
  double lr = 2e-3;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  uint32_t ttdp_pairs = 64u;
  uint32_t align_pairs = 256u; /* per view and circuit, per step */
  align_objective objective = align_objective::l1;
  double tau = 0.1;
  uint32_t negatives = 8u;
  uint64_t seed = 1u;
};

inline nlohmann::json config_json( train_config const& c )
{
  auto const& m = c.model;
  nlohmann::json views = nlohmann::json::array();
  for ( auto v : m.views )
    views.push_back( std::string( view_name( v ) ) );
  auto const& cc = c.curriculum;
  return {
      { "model",
        { { "d", m.d }, { "heads", m.heads }, { "pool_layers", m.pool_layers }, { "fuse_layers", m.fuse_layers }, { "ffn", m.ffn },
          { "update_hidden", m.update_hidden }, { "readout_hidden", m.readout_hidden }, { "readout_dropout", m.readout_dropout },
          { "hier_l", m.hierarchy.l }, { "hier_q", m.hierarchy.q }, { "max_nodes_per_hop", m.hierarchy.max_nodes_per_hop },
          { "max_hops_per_subgraph", m.hierarchy.max_hops_per_subgraph }, { "views", views }, { "seed", m.seed } } },
      { "curriculum",
        { { "w_spp", cc.w_spp }, { "w_align", cc.w_align }, { "w_ttdp", cc.w_ttdp }, { "w_mcm", cc.w_mcm }, { "mask_ratio", cc.mask_ratio },
          { "mask_cone_depth", cc.mask_cone_depth }, { "epochs", cc.epochs } } },
      { "variant", std::string( variant_name( c.var ) ) },
      { "staged", c.staged },
      { "batch", c.batch },
      { "lr", c.lr },
      { "beta1", c.beta1 },
      { "beta2", c.beta2 },
      { "adam_eps", c.adam_eps },
      { "ttdp_pairs", c.ttdp_pairs },
      { "align_pairs", c.align_pairs },
      { "objective", c.objective == align_objective::l1 ? "l1" : "infonce" },
      { "tau", c.tau },
      { "negatives", c.negatives },
      { "seed", c.seed } };
}

inline model_config model_config_from_json( nlohmann::json const& j )
{
  model_config m;
  m.d = j.at( "d" );
  m.heads = j.at( "heads" );
  m.pool_layers = j.at( "pool_layers" );
  m.fuse_layers = j.at( "fuse_layers" );
  m.ffn = j.at( "ffn" );
  m.update_hidden = j.at( "update_hidden" );
  m.readout_hidden = j.at( "readout_hidden" );
  m.readout_dropout = j.at( "readout_dropout" );
  m.hierarchy.l = j.at( "hier_l" );
  m.hierarchy.q = j.at( "hier_q" );
  m.hierarchy.max_nodes_per_hop = j.at( "max_nodes_per_hop" );
  m.hierarchy.max_hops_per_subgraph = j.at( "max_hops_per_subgraph" );
  m.views.clear();
  for ( auto const& v : j.at( "views" ) )
  {
    auto const vk = view_from_name( v.get<std::string>() );
    if ( !vk )
      throw error( errc::schema_violation, "unknown view in model config" );
    m.views.push_back( *vk );
  }
  m.seed = j.at( "seed" );
  return m;
}

/*! \brief Loss values of one forward pass; absent terms are NaN. */
struct loss_values
{
  double composite = 0.0;
  double spp = std::numeric_limits<double>::quiet_NaN();
  double align = std::numeric_limits<double>::quiet_NaN();
  double ttdp = std::numeric_limits<double>::quiet_NaN();
  double mcm = std::numeric_limits<double>::quiet_NaN();
};

struct objective_options
{
  loss_weights weights;
  bool compute_all = false; /* evaluate inactive terms too (without adding them) */
  bool dropout = false;
  uint64_t seed = 0u; /* per-step randomness: dropout, pair sampling, masking */
  /* reconstruction targets: reused when `mcm_target` holds a value, recorded into it otherwise */
  std::optional<mat>* mcm_target = nullptr;
};

namespace detail
{

inline std::vector<uint32_t> non_po_nodes( circuit const& c )
{
  std::vector<uint32_t> out;
  for ( node_index n = 0; n < c.size(); ++n )
    if ( c.gate( n ) != gate_type::po )
      out.push_back( n );
  return out;
}

} // namespace detail

/*! \brief Builds the weighted objective of one sample on `t`; returns the composite node (1 x 1). */
inline tv sample_objective( tape& t, mixgate_model const& model, sample const& s, train_config const& cfg, objective_options const& o,
                            loss_values& out )
{
  auto const& w = o.weights;
  auto const& aig = s.aig();
  forward_result fr;
  for ( auto v : model.config().views )
  {
    auto const it = s.views.find( v );
    if ( it == s.views.end() )
      continue;
    fr.enc[v] = model.encode( t, it->second );
    auto const h = s.hierarchies.find( v );
    fr.tokens[v] = model.view_tokens( t, v, fr.enc[v], h == s.hierarchies.end() ? nullptr : &h->second );
  }
  if ( !fr.enc.contains( view_kind::aig ) )
    throw error( errc::schema_violation, "sample '" + s.name + "' has no AIG view" );
  fr.refined = model.fuse( t, fr.tokens );

  std::vector<tv> terms;
  auto add_term = [&]( double weight, tv l, double& slot ) {
    slot = t.scalar( l );
    if ( weight != 0.0 )
      terms.push_back( t.scale( l, weight ) );
  };

  if ( w.spp != 0.0 || o.compute_all )
  {
    rng gen( derive_seed( o.seed, "dropout" ) );
    std::optional<std::array<mat, 2>> keep;
    if ( o.dropout )
      keep = model.dropout_masks( gen, aig.size() );
    add_term( w.spp, loss_spp( t, model.predict_spp( t, fr.refined[view_kind::aig], keep ? &*keep : nullptr ), s.spp ), out.spp );
  }

  if ( w.align != 0.0 || o.compute_all )
  {
    rng gen( derive_seed( o.seed, "align" ) );
    std::vector<tv> parts;
    for ( auto const& [v, pairs] : s.aligned )
    {
      if ( !fr.enc.contains( v ) || pairs.empty() )
        continue;
      std::vector<std::pair<uint32_t, uint32_t>> sub;
      if ( cfg.align_pairs == 0u || pairs.size() <= cfg.align_pairs )
        sub = pairs;
      else
        for ( auto i : sample_without_replacement( gen, static_cast<uint32_t>( pairs.size() ), cfg.align_pairs ) )
          sub.push_back( pairs[i] );
      if ( cfg.objective == align_objective::l1 )
        parts.push_back( loss_align( t, fr.enc[view_kind::aig].hf, fr.enc[v].hf, sub ) );
      else
      {
        auto const nb = static_cast<uint32_t>( s.views.at( v ).size() );
        std::vector<std::vector<uint32_t>> negs( sub.size() );
        for ( std::size_t k = 0; k < sub.size(); ++k )
          for ( uint32_t j = 0; j < cfg.negatives; ++j )
          {
            auto x = static_cast<uint32_t>( gen.below( nb ) );
            if ( x == sub[k].second )
              x = ( x + 1u ) % nb;
            negs[k].push_back( x );
          }
        parts.push_back( t.scale( loss_contrastive( t, fr.enc[view_kind::aig].hf, fr.enc[v].hf, sub, negs, cfg.tau ),
                                  1.0 / static_cast<double>( sub.size() ) ) );
      }
    }
    if ( !parts.empty() )
      add_term( w.align, t.scale( t.sum( t.concat_rows( parts ) ), 1.0 / static_cast<double>( parts.size() ) ), out.align );
  }

  if ( w.ttdp != 0.0 || o.compute_all )
  {
    auto const nodes = detail::non_po_nodes( aig );
    rng gen( derive_seed( o.seed, "ttdp" ) );
    for ( int attempt = 0; attempt < 8 && nodes.size() >= 2u; ++attempt )
    {
      std::vector<std::pair<uint32_t, uint32_t>> pairs;
      std::vector<double> dist;
      for ( uint32_t k = 0; k < cfg.ttdp_pairs; ++k )
      {
        auto const a = nodes[gen.below( nodes.size() )];
        auto b = nodes[gen.below( nodes.size() )];
        pairs.emplace_back( a, b );
        dist.push_back( truth_table_distance( s.tables, a, b ) );
      }
      try
      {
        add_term( w.ttdp, loss_ttdp( t, fr.refined[view_kind::aig], pairs, dist ), out.ttdp );
        break;
      }
      catch ( error const& e )
      {
        if ( e.code() != errc::degenerate_pair_set )
          throw;
      }
    }
  }

  if ( ( w.mcm != 0.0 || o.compute_all ) && cfg.curriculum.mask_ratio > 0.0 )
  {
    auto const mask = mask_set( aig, cfg.curriculum.mask_ratio, cfg.curriculum.mask_cone_depth, derive_seed( o.seed, "mask" ) );
    if ( mask.empty() )
      add_term( w.mcm, t.constant( mat::Zero( 1, 1 ) ), out.mcm );
    else
    {
      auto masked_tokens = fr.tokens;
      masked_tokens[view_kind::aig] = model.view_tokens( t, view_kind::aig, model.apply_mask( t, fr.enc[view_kind::aig], mask ), nullptr );
      auto const refined = model.fuse( t, masked_tokens );
      std::vector<uint32_t> const rows( mask.begin(), mask.end() );
      auto const decoded = model.decode_masked( t, t.gather_rows( refined.at( view_kind::aig ), rows ) );
      auto target = t.gather_rows( fr.tokens[view_kind::aig], rows );
      if ( o.mcm_target )
      {
        if ( o.mcm_target->has_value() )
          target = t.constant( **o.mcm_target );
        else
          *o.mcm_target = t.value( target );
      }
      add_term( w.mcm, loss_mcm( t, decoded, target ), out.mcm );
    }
  }

  tv total = terms.empty() ? t.constant( mat::Zero( 1, 1 ) ) : t.sum( t.concat_rows( terms ) );
  out.composite = t.scalar( total );
  return total;
}

struct step_record
{
  uint32_t stage = 0u;
  uint32_t epoch = 0u;
  uint64_t step = 0u;
  loss_values loss;
};

inline std::string step_json( step_record const& r )
{
  auto num = []( double x ) { return std::isnan( x ) ? nlohmann::json( nullptr ) : nlohmann::json( x ); };
  nlohmann::json j{ { "stage", r.stage },
                    { "epoch", r.epoch },
                    { "step", r.step },
                    { "loss", r.loss.composite },
                    { "spp", num( r.loss.spp ) },
                    { "align", num( r.loss.align ) },
                    { "ttdp", num( r.loss.ttdp ) },
                    { "mcm", num( r.loss.mcm ) } };
  return j.dump();
}

struct eval_metrics
{
  double spp = 0.0, ttdp = 0.0, mcm = 0.0, align = 0.0;
  double pair_l1 = 0.0;   /* mean per-width L1 between aligned HF rows */
  double random_l1 = 0.0; /* same, over random cross-view node pairs */
  uint64_t pairs = 0u;
};

class trainer
{
public:
  explicit trainer( train_config cfg ) : cfg_( std::move( cfg ) ), model_( cfg_.model ) {}

  mixgate_model& model() noexcept { return model_; }
  mixgate_model const& model() const noexcept { return model_; }
  train_config const& config() const noexcept { return cfg_; }
  uint64_t steps() const noexcept { return step_; }

  /*! \brief One Adam step on a batch; throws NonFiniteLoss before touching parameters. */
  loss_values step( std::vector<sample const*> const& batch, uint32_t stage, loss_weights const& w )
  {
    auto& ps = model_.params();
    ps.zero_grad();
    loss_values mean;
    std::array<double, 4> acc{}, cnt{};
    for ( std::size_t i = 0; i < batch.size(); ++i )
    {
      tape t;
      loss_values lv;
      objective_options o;
      o.weights = w;
      o.dropout = true;
      o.seed = derive_seed( derive_seed( cfg_.seed, "step", step_ ), "sample", i );
      auto const l = sample_objective( t, model_, *batch[i], cfg_, o, lv );
      if ( !std::isfinite( lv.composite ) )
        throw error( errc::non_finite_loss, "stage " + std::to_string( stage ) + " step " + std::to_string( step_ ) + " sample '" +
                                                batch[i]->name + "': loss=" + std::to_string( lv.composite ) + " spp=" + std::to_string( lv.spp ) +
                                                " align=" + std::to_string( lv.align ) + " ttdp=" + std::to_string( lv.ttdp ) +
                                                " mcm=" + std::to_string( lv.mcm ) );
      t.backward( l, 1.0 / static_cast<double>( batch.size() ) );
      mean.composite += lv.composite / batch.size();
      std::array<double, 4> const vals{ lv.spp, lv.align, lv.ttdp, lv.mcm };
      for ( int k = 0; k < 4; ++k )
        if ( !std::isnan( vals[k] ) )
        {
          acc[k] += vals[k];
          cnt[k] += 1.0;
        }
    }
    std::array<double*, 4> slots{ &mean.spp, &mean.align, &mean.ttdp, &mean.mcm };
    for ( int k = 0; k < 4; ++k )
      if ( cnt[k] > 0.0 )
        *slots[k] = acc[k] / cnt[k];
    adam_update();
    ++step_;
    return mean;
  }

  /*! \brief Runs the configured stages; `log` receives one JSON line per step. */
  void run( std::vector<sample> const& data, std::function<void( std::string const& )> const& log = {} )
  {
    if ( data.empty() )
      throw error( errc::empty_input, "training corpus is empty" );
    auto const& cc = cfg_.curriculum;
    std::vector<std::pair<uint32_t, uint32_t>> plan; /* (stage, epochs) */
    if ( cc.epochs[0] )
      plan.emplace_back( 0u, cc.epochs[0] );
    if ( cfg_.staged )
    {
      for ( uint32_t s = 1; s <= 3u; ++s )
        if ( cc.epochs[s] )
          plan.emplace_back( s, cc.epochs[s] );
    }
    else
      plan.emplace_back( 3u, cc.epochs[1] + cc.epochs[2] + cc.epochs[3] );

    for ( auto [stage, epochs] : plan )
    {
      auto const w = stage_weights( cc, stage, cfg_.var );
      for ( uint32_t e = 0; e < epochs; ++e )
      {
        std::vector<uint32_t> order( data.size() );
        for ( uint32_t i = 0; i < order.size(); ++i )
          order[i] = i;
        rng gen( derive_seed( derive_seed( cfg_.seed, "shuffle", stage ), "epoch", e ) );
        gen.shuffle( order );
        for ( std::size_t b = 0; b < order.size(); b += std::max( cfg_.batch, 1u ) )
        {
          std::vector<sample const*> batch;
          for ( std::size_t i = b; i < std::min( order.size(), b + std::max( cfg_.batch, 1u ) ); ++i )
            batch.push_back( &data[order[i]] );
          step_record r{ stage, e, step_, step( batch, stage, w ) };
          if ( log )
            log( step_json( r ) );
        }
      }
    }
  }

  /*! \brief Dropout-free losses on every objective plus the alignment distance statistics. */
  eval_metrics evaluate( std::vector<sample> const& data ) const
  {
    eval_metrics m;
    if ( data.empty() )
      return m;
    std::array<double*, 4> slots{ &m.spp, &m.align, &m.ttdp, &m.mcm };
    std::array<double, 4> cnt{};
    double pair_sum = 0.0, rand_sum = 0.0;
    rng gen( derive_seed( cfg_.seed, "eval-random-pairs" ) );
    for ( std::size_t i = 0; i < data.size(); ++i )
    {
      tape t;
      loss_values lv;
      objective_options o;
      o.weights = { 1.0, 0.0, 0.0, 0.0 };
      o.compute_all = true;
      o.seed = derive_seed( cfg_.seed, "eval", i );
      (void)sample_objective( t, model_, data[i], cfg_, o, lv );
      std::array<double, 4> const vals{ lv.spp, lv.align, lv.ttdp, lv.mcm };
      for ( int k = 0; k < 4; ++k )
        if ( !std::isnan( vals[k] ) )
        {
          *slots[k] += vals[k];
          cnt[k] += 1.0;
        }

      tape te;
      auto const ha = te.value( model_.encode( te, data[i].aig() ).hf );
      auto const a_nodes = detail::non_po_nodes( data[i].aig() );
      for ( auto const& [v, pairs] : data[i].aligned )
      {
        auto const hb = te.value( model_.encode( te, data[i].views.at( v ) ).hf );
        auto const b_nodes = detail::non_po_nodes( data[i].views.at( v ) );
        for ( auto [a, b] : pairs )
        {
          pair_sum += ( ha.row( a ) - hb.row( b ) ).cwiseAbs().mean();
          auto const ra = a_nodes[gen.below( a_nodes.size() )], rb = b_nodes[gen.below( b_nodes.size() )];
          rand_sum += ( ha.row( ra ) - hb.row( rb ) ).cwiseAbs().mean();
          ++m.pairs;
        }
      }
    }
    for ( int k = 0; k < 4; ++k )
      *slots[k] = cnt[k] > 0.0 ? *slots[k] / cnt[k] : std::numeric_limits<double>::quiet_NaN();
    if ( m.pairs )
    {
      m.pair_l1 = pair_sum / m.pairs;
      m.random_l1 = rand_sum / m.pairs;
    }
    return m;
  }

private:
  void adam_update()
  {
    double const t = static_cast<double>( step_ + 1u );
    double const c1 = 1.0 - std::pow( cfg_.beta1, t ), c2 = 1.0 - std::pow( cfg_.beta2, t );
    for ( auto& p : model_.params().all() )
    {
      p->m = cfg_.beta1 * p->m + ( 1.0 - cfg_.beta1 ) * p->grad;
      p->v = cfg_.beta2 * p->v + ( 1.0 - cfg_.beta2 ) * p->grad.cwiseProduct( p->grad );
      p->value.array() -= cfg_.lr * ( p->m.array() / c1 ) / ( ( p->v.array() / c2 ).sqrt() + cfg_.adam_eps );
    }
  }

  train_config cfg_;
  mixgate_model model_;
  uint64_t step_ = 0u;
};

/* checkpoint: "MVGCKPT1", u64 config length, config JSON, u64 tensor count,
   then per tensor: u64 name length, name, u64 rows, u64 cols, row-major doubles */

inline void save_checkpoint( std::ostream& os, mixgate_model const& m )
{
  auto put = [&]( uint64_t x ) { os.write( reinterpret_cast<char const*>( &x ), sizeof( x ) ); };
  train_config tc;
  tc.model = m.config();
  auto const cfg = config_json( tc )["model"].dump();
  os.write( "MVGCKPT1", 8 );
  put( cfg.size() );
  os.write( cfg.data(), static_cast<std::streamsize>( cfg.size() ) );
  auto const& all = m.params().all();
  put( all.size() );
  for ( auto const& p : all )
  {
    put( p->name.size() );
    os.write( p->name.data(), static_cast<std::streamsize>( p->name.size() ) );
    put( static_cast<uint64_t>( p->value.rows() ) );
    put( static_cast<uint64_t>( p->value.cols() ) );
    for ( Eigen::Index r = 0; r < p->value.rows(); ++r )
      for ( Eigen::Index c = 0; c < p->value.cols(); ++c )
      {
        double const x = p->value( r, c );
        os.write( reinterpret_cast<char const*>( &x ), sizeof( x ) );
      }
  }
}

inline mixgate_model load_checkpoint( std::istream& is )
{
  auto get = [&]() {
    uint64_t x = 0;
    if ( !is.read( reinterpret_cast<char*>( &x ), sizeof( x ) ) )
      throw error( errc::truncated_file, "checkpoint ends early" );
    return x;
  };
  char magic[8];
  if ( !is.read( magic, 8 ) || std::string( magic, 8 ) != "MVGCKPT1" )
    throw error( errc::bad_header, "not a version-1 checkpoint" );
  auto const len = get();
  std::string cfg( len, '\0' );
  if ( !is.read( cfg.data(), static_cast<std::streamsize>( len ) ) )
    throw error( errc::truncated_file, "checkpoint config truncated" );
  mixgate_model m( model_config_from_json( nlohmann::json::parse( cfg ) ) );
  auto const count = get();
  if ( count != m.params().all().size() )
    throw error( errc::schema_violation, "checkpoint tensor count " + std::to_string( count ) + " does not match the model" );
  for ( uint64_t i = 0; i < count; ++i )
  {
    std::string name( get(), '\0' );
    if ( !is.read( name.data(), static_cast<std::streamsize>( name.size() ) ) )
      throw error( errc::truncated_file, "checkpoint tensor name truncated" );
    if ( !m.params().contains( name ) )
      throw error( errc::schema_violation, "checkpoint tensor '" + name + "' unknown to the model" );
    auto& p = m.params()[name];
    auto const rows = get(), cols = get();
    if ( rows != static_cast<uint64_t>( p.value.rows() ) || cols != static_cast<uint64_t>( p.value.cols() ) )
      throw error( errc::width_mismatch, "checkpoint tensor '" + name + "' has the wrong shape" );
    for ( Eigen::Index r = 0; r < p.value.rows(); ++r )
      for ( Eigen::Index c = 0; c < p.value.cols(); ++c )
        if ( !is.read( reinterpret_cast<char*>( &p.value( r, c ) ), sizeof( double ) ) )
          throw error( errc::truncated_file, "checkpoint tensor data truncated" );
  }
  return m;
}

} // namespace mvg::nn
