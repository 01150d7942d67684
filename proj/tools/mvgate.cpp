/* mvgate: corpus building, view conversion, labeling, tokenization, statistics and training demos. */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <mvg/mvg.hpp>

namespace fs = std::filesystem;
using namespace mvg;

namespace
{

enum exit_code : int
{
  exit_ok = 0,
  exit_other = 1,
  exit_parse = 2,
  exit_verify = 3,
  exit_resource = 4,
  exit_non_finite = 5
};

int exit_for( errc c )
{
  switch ( c )
  {
  case errc::bad_header:
  case errc::truncated_file:
  case errc::bad_token:
  case errc::latches_unsupported:
  case errc::schema_violation:
  case errc::index_out_of_range:
  case errc::cycle_detected:
  case errc::arity_mismatch:
  case errc::illegal_gate_for_view:
  case errc::length_mismatch:
  case errc::missing_template:
    return exit_parse;
  case errc::non_finite_loss: return exit_non_finite;
  default: return exit_other;
  }
}

bool quiet = false;

void log_line( std::string const& s )
{
  if ( !quiet )
    std::cerr << s << '\n';
}

std::string read_file( fs::path const& p )
{
  std::ifstream in( p, std::ios::binary );
  if ( !in )
    throw error( errc::truncated_file, "cannot read " + p.string() );
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file( fs::path const& p, std::string const& data )
{
  if ( p.has_parent_path() )
    fs::create_directories( p.parent_path() );
  std::ofstream out( p, std::ios::binary );
  if ( !out || !( out << data ) )
    throw error( errc::invalid_argument, "cannot write " + p.string() );
}

circuit load_circuit( fs::path const& p )
{
  auto const ext = p.extension().string();
  auto const text = read_file( p );
  if ( ext == ".aag" || ext == ".aig" )
    return parse_aiger( text, p.stem().string() );
  if ( ext == ".mvnl" )
    return parse_mvnl( text, p.stem().string() );
  throw error( errc::bad_header, "unrecognized circuit extension '" + ext + "'" );
}

/* files of a directory with one of the extensions, sorted by name */
std::vector<fs::path> list_inputs( fs::path const& dir, std::vector<std::string> const& exts )
{
  std::vector<fs::path> out;
  if ( !fs::is_directory( dir ) )
    throw error( errc::invalid_argument, dir.string() + " is not a directory" );
  for ( auto const& e : fs::directory_iterator( dir ) )
    if ( e.is_regular_file() && std::find( exts.begin(), exts.end(), e.path().extension().string() ) != exts.end() )
      out.push_back( e.path() );
  std::sort( out.begin(), out.end() );
  return out;
}

/* runs f(i) for i in [0, n) on `jobs` threads; results are indexed, so output order is fixed */
void parallel_for( std::size_t n, uint32_t jobs, std::function<void( std::size_t )> const& f )
{
  jobs = std::max( 1u, std::min<uint32_t>( jobs, static_cast<uint32_t>( n ) ) );
  if ( jobs <= 1u )
  {
    for ( std::size_t i = 0; i < n; ++i )
      f( i );
    return;
  }
  std::atomic<std::size_t> next{ 0 };
  std::vector<std::exception_ptr> errors( n );
  std::vector<std::thread> pool;
  for ( uint32_t j = 0; j < jobs; ++j )
    pool.emplace_back( [&] {
      for ( std::size_t i; ( i = next.fetch_add( 1 ) ) < n; )
        try
        {
          f( i );
        }
        catch ( ... )
        {
          errors[i] = std::current_exception();
        }
    } );
  for ( auto& t : pool )
    t.join();
  for ( auto const& e : errors )
    if ( e )
      std::rethrow_exception( e );
}

std::vector<view_kind> parse_views( std::vector<std::string> const& names )
{
  std::vector<view_kind> out;
  for ( auto const& n : names )
  {
    auto const v = view_from_name( n );
    if ( !v || *v == view_kind::lut )
      throw error( errc::invalid_argument, "unknown target view '" + n + "'" );
    if ( *v != view_kind::aig )
      out.push_back( *v );
  }
  return out;
}

struct summary
{
  double min = 0.0, max = 0.0, mean = 0.0, std = 0.0;
};

summary summarize( std::vector<double> const& xs )
{
  summary s;
  if ( xs.empty() )
    return s;
  s.min = *std::min_element( xs.begin(), xs.end() );
  s.max = *std::max_element( xs.begin(), xs.end() );
  for ( auto x : xs )
    s.mean += x;
  s.mean /= xs.size();
  for ( auto x : xs )
    s.std += ( x - s.mean ) * ( x - s.mean );
  s.std = std::sqrt( s.std / xs.size() );
  return s;
}

std::string fmt( char const* f, auto... args )
{
  char buf[256];
  std::snprintf( buf, sizeof( buf ), f, args... );
  return buf;
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "Multiview gate-level circuit toolkit" };
  app.require_subcommand( 1 );
  uint64_t seed = 1;
  uint32_t jobs = 1;
  app.add_option( "--seed", seed, "root seed; every random component derives its own sub-seed from it" )->capture_default_str();
  app.add_option( "--jobs", jobs, "worker threads across records" )->capture_default_str();
  app.add_flag( "-q,--quiet", quiet, "suppress log output on stderr" );

  /* convert */
  auto* convert = app.add_subcommand( "convert", "AIG -> LUT -> MIG/XAG/XMG with verification" );
  std::string conv_in, conv_out = ".";
  std::vector<std::string> conv_targets{ "mig", "xag", "xmg" };
  uint64_t conv_budget = 100000;
  convert->add_option( "input", conv_in, "AIGER file" )->required();
  convert->add_option( "-o,--out-dir", conv_out, "directory for the MVNL files" )->capture_default_str();
  convert->add_option( "--targets", conv_targets, "target views" )->delimiter( ',' )->capture_default_str();
  convert->add_option( "--budget", conv_budget, "conflict budget per PO check (0 = unlimited)" )->capture_default_str();

  /* gen-corpus */
  auto* gen = app.add_subcommand( "gen-corpus", "write a seeded random AIG corpus (or the fixed demo set)" );
  std::string gen_out;
  bool gen_demo = false;
  corpus_params cp;
  gen->add_option( "-o,--out-dir", gen_out, "output directory" )->required();
  gen->add_flag( "--demo", gen_demo, "write the fixed demo corpus instead" );
  gen->add_option( "--count", cp.count )->capture_default_str();
  gen->add_option( "--min-pis", cp.min_pis )->capture_default_str();
  gen->add_option( "--max-pis", cp.max_pis )->capture_default_str();
  gen->add_option( "--min-ands", cp.min_ands )->capture_default_str();
  gen->add_option( "--max-ands", cp.max_ands )->capture_default_str();
  gen->add_option( "--max-pos", cp.max_pos )->capture_default_str();

  /* build-records */
  auto* build = app.add_subcommand( "build-records", "convert every AIG of a directory into a multiview record" );
  std::string build_in, build_out;
  std::vector<std::string> build_targets{ "mig", "xag", "xmg" };
  record_params rp;
  bool build_label = false;
  build->add_option( "input", build_in, "directory of AIGER files" )->required();
  build->add_option( "-o,--out-dir", build_out, "record directory" )->required();
  build->add_option( "--targets", build_targets )->delimiter( ',' )->capture_default_str();
  build->add_option( "--patterns", rp.pattern_count, "fingerprint / labeling patterns" )->capture_default_str();
  build->add_option( "--spp-patterns", rp.spp_patterns, "signal-probability patterns" )->capture_default_str();
  build->add_flag( "--label", build_label, "also compute equivalence labels with default budgets" );

  /* label-equiv */
  auto* label = app.add_subcommand( "label-equiv", "label cross-view equivalent node pairs by simulation and SAT sweeping" );
  std::string label_in, label_out;
  label_params lp;
  double max_dropped = 0.5;
  label->add_option( "input", label_in, "directory of records (.jsonl) or AIGER files" )->required();
  label->add_option( "-o,--out-dir", label_out, "labeled record directory" )->required();
  label->add_option( "--budget", lp.conflict_budget, "conflict budget per candidate (0 = unlimited)" )->capture_default_str();
  label->add_option( "--pair-cap", lp.pair_cap, "pairs emitted per bucket (0 = unlimited)" )->capture_default_str();
  label->add_flag( "--complement", lp.include_complement, "also emit complemented pairs" );
  label->add_flag( "--support-pruning", lp.support_pruning, "skip candidates with disjoint structural support" );
  label->add_option( "--max-dropped-fraction", max_dropped, "exit 4 when more SAT calls than this fraction run out of budget" )
      ->capture_default_str();

  /* tokenize */
  auto* tok = app.add_subcommand( "tokenize", "partition a circuit into hop/subgraph/graph tokens" );
  std::string tok_in, tok_emit;
  hierarchy_params hp;
  tok->add_option( "input", tok_in, "AIGER or MVNL file" )->required();
  tok->add_option( "--l", hp.l, "levels per hop" )->capture_default_str();
  tok->add_option( "--q", hp.q, "level stride between bands" )->capture_default_str();
  tok->add_option( "--max-hop", hp.max_nodes_per_hop )->capture_default_str();
  tok->add_option( "--max-sub", hp.max_hops_per_subgraph )->capture_default_str();
  tok->add_option( "--emit", tok_emit, "write the serialized hierarchy here" );

  /* stats */
  auto* stats = app.add_subcommand( "stats", "node and level statistics per view" );
  std::string stats_in;
  stats->add_option( "input", stats_in, "directory of records or circuit files" )->required();

  /* train-demo */
  auto* train = app.add_subcommand( "train-demo", "toy-scale staged training of the multiview model" );
  std::string train_records, train_ckpt, train_log, train_variant = "mask-align", train_objective = "l1";
  uint32_t train_count = 200;
  std::vector<uint32_t> train_epochs{ 8, 8, 8 };
  bool no_stages = false;
  nn::train_config tc;
  train->add_option( "--records", train_records, "labeled record directory (default: generated toy corpus)" );
  train->add_option( "--count", train_count, "toy corpus size when no records are given" )->capture_default_str();
  train->add_option( "--variant", train_variant, "baseline | mask | align | mask-align" )->capture_default_str();
  train->add_option( "--epochs", train_epochs, "epochs of stages 1,2,3" )->delimiter( ',' )->expected( 3 )->capture_default_str();
  train->add_option( "--stage0", tc.curriculum.epochs[0], "SPP-only warm-up epochs" )->capture_default_str();
  train->add_flag( "--no-stages", no_stages, "spend all epochs on the full objective" );
  train->add_option( "--d", tc.model.d, "embedding width" )->capture_default_str();
  train->add_option( "--heads", tc.model.heads )->capture_default_str();
  train->add_option( "--lr", tc.lr )->capture_default_str();
  train->add_option( "--batch", tc.batch )->capture_default_str();
  train->add_option( "--w-spp", tc.curriculum.w_spp )->capture_default_str();
  train->add_option( "--w-align", tc.curriculum.w_align )->capture_default_str();
  train->add_option( "--w-ttdp", tc.curriculum.w_ttdp )->capture_default_str();
  train->add_option( "--w-mcm", tc.curriculum.w_mcm )->capture_default_str();
  train->add_option( "--mask-ratio", tc.curriculum.mask_ratio )->capture_default_str();
  train->add_option( "--cone-depth", tc.curriculum.mask_cone_depth )->capture_default_str();
  train->add_option( "--objective", train_objective, "alignment objective: l1 | infonce" )->capture_default_str();
  train->add_option( "--tau", tc.tau )->capture_default_str();
  train->add_option( "--negatives", tc.negatives )->capture_default_str();
  train->add_option( "--checkpoint", train_ckpt, "write the trained parameters here" );
  train->add_option( "--log", train_log, "write the per-step JSON log here" );

  /* dump-cnf */
  auto* dump = app.add_subcommand( "dump-cnf", "DIMACS miter of one PO pair of two circuits" );
  std::string dump_a, dump_b, dump_out;
  uint32_t dump_po = 0;
  dump->add_option( "a", dump_a, "first circuit" )->required();
  dump->add_option( "b", dump_b, "second circuit" )->required();
  dump->add_option( "--po", dump_po, "PO position" )->capture_default_str();
  dump->add_option( "-o,--output", dump_out, "output file (default: stdout)" );

  try
  {
    app.parse( argc, argv );
  }
  catch ( CLI::ParseError const& e )
  {
    return app.exit( e );
  }
  {
    auto* sub = app.get_subcommands().front();
    log_line( "effective config:\nseed=" + std::to_string( seed ) + "\njobs=" + std::to_string( jobs ) + "\n[" + sub->get_name() + "]\n" +
              sub->config_to_str( true, false ) );
  }

  try
  {
    if ( *convert )
    {
      auto const aig = load_circuit( conv_in );
      auto const views = convert_views( aig, parse_views( conv_targets ) );
      verify_params vp;
      vp.conflict_budget = conv_budget;
      bool failed = false, unknown = false;
      for ( auto const& [v, c] : views )
      {
        auto const path = fs::path( conv_out ) / ( aig.name() + "." + std::string( view_name( v ) ) + ".mvnl" );
        write_file( path, write_mvnl( c ) );
        auto const rep = verify_views( aig, c, vp );
        uint32_t bad = 0, unk = 0;
        for ( auto const& chk : rep.checks )
        {
          bad += chk.status == po_status::differ;
          unk += chk.status != po_status::equal && chk.status != po_status::differ;
        }
        failed |= bad > 0;
        unknown |= unk > 0;
        std::cout << fmt( "%-4s %6u nodes %4u levels  %s  %s\n", std::string( view_name( v ) ).c_str(), c.size(), c.depth(),
                          bad ? "FAIL" : ( unk ? "UNKNOWN" : "PASS" ), path.string().c_str() );
      }
      return failed ? exit_verify : ( unknown ? exit_resource : exit_ok );
    }

    if ( *gen )
    {
      cp.seed = derive_seed( seed, "gen-corpus" );
      auto const corpus = gen_demo ? demo_corpus() : random_corpus( cp );
      for ( auto const& c : corpus )
        write_file( fs::path( gen_out ) / ( c.name() + ".aag" ), write_aiger( c ) );
      log_line( "wrote " + std::to_string( corpus.size() ) + " circuits to " + gen_out );
      return exit_ok;
    }

    if ( *build )
    {
      auto const files = list_inputs( build_in, { ".aag", ".aig" } );
      rp.targets = parse_views( build_targets );
      std::vector<std::string> out( files.size() );
      parallel_for( files.size(), jobs, [&]( std::size_t i ) {
        auto ps = rp;
        ps.seed = derive_seed( seed, "record", i );
        auto r = build_record( load_circuit( files[i] ), ps );
        if ( build_label )
          label_record( r, {}, {} );
        out[i] = write_record( r );
      } );
      for ( std::size_t i = 0; i < files.size(); ++i )
        write_file( fs::path( build_out ) / ( files[i].stem().string() + ".jsonl" ), out[i] );
      log_line( "wrote " + std::to_string( files.size() ) + " records to " + build_out );
      return exit_ok;
    }

    if ( *label )
    {
      auto const files = list_inputs( label_in, { ".jsonl", ".aag", ".aig" } );
      std::vector<dataset_record> recs( files.size() );
      parallel_for( files.size(), jobs, [&]( std::size_t i ) {
        auto& r = recs[i];
        if ( files[i].extension() == ".jsonl" )
          r = read_record( read_file( files[i] ) );
        else
        {
          r.name = files[i].stem().string();
          r.views.emplace( view_kind::aig, load_circuit( files[i] ) );
        }
        if ( r.views.size() >= 2u )
          label_record( r, {}, lp );
        else
        {
          r.equiv_pairs.clear();
          r.meta.labeled = true;
        }
      } );
      equiv_stats total;
      uint64_t pairs = 0;
      std::cout << fmt( "%-16s %10s %8s %8s %8s %8s\n", "record", "candidates", "UNSAT", "SAT", "dropped", "pairs" );
      for ( std::size_t i = 0; i < recs.size(); ++i )
      {
        auto const& s = recs[i].meta.label_stats;
        total += s;
        pairs += recs[i].equiv_pairs.size();
        std::cout << fmt( "%-16s %10llu %8llu %8llu %8llu %8zu\n", recs[i].name.c_str(), (unsigned long long)s.candidates_filtered,
                          (unsigned long long)s.unsat_count, (unsigned long long)s.sat_count, (unsigned long long)s.dropped_resourceout,
                          recs[i].equiv_pairs.size() );
        write_file( fs::path( label_out ) / ( files[i].stem().string() + ".jsonl" ), write_record( recs[i] ) );
      }
      std::cout << fmt( "%-16s %10llu %8llu %8llu %8llu %8llu\n", "total", (unsigned long long)total.candidates_filtered,
                        (unsigned long long)total.unsat_count, (unsigned long long)total.sat_count,
                        (unsigned long long)total.dropped_resourceout, (unsigned long long)pairs );
      if ( total.sat_calls && double( total.dropped_resourceout ) > max_dropped * double( total.sat_calls ) )
      {
        log_line( "too many SAT calls ran out of budget" );
        return exit_resource;
      }
      return exit_ok;
    }

    if ( *tok )
    {
      auto const c = load_circuit( tok_in );
      auto const h = partition( c, hp );
      auto const n = token_counts( h );
      std::cout << fmt( "%s: %u nodes -> %u hops, %u subgraphs, %u graph = %u tokens (%u unassigned)\n", c.name().c_str(), c.size(),
                        n.hops, n.subgraphs, n.graph, n.total(), static_cast<uint32_t>( h.unassigned.size() ) );
      if ( !tok_emit.empty() )
        write_file( tok_emit, write_hierarchy( h ) );
      return exit_ok;
    }

    if ( *stats )
    {
      auto const files = list_inputs( stats_in, { ".jsonl", ".aag", ".aig", ".mvnl" } );
      std::map<view_kind, std::pair<std::vector<double>, std::vector<double>>> per_view;
      for ( auto const& f : files )
      {
        auto add = [&]( circuit const& c ) {
          per_view[c.view()].first.push_back( c.size() );
          per_view[c.view()].second.push_back( c.depth() );
        };
        if ( f.extension() == ".jsonl" )
          for ( auto const& [v, c] : read_record( read_file( f ) ).views )
            add( c );
        else
          add( load_circuit( f ) );
      }
      std::cout << fmt( "%-5s %6s | %8s %8s %10s %10s | %6s %6s %8s %8s\n", "view", "count", "nodes.min", "max", "mean", "std", "lvl.min",
                        "max", "mean", "std" );
      for ( auto const& [v, data] : per_view )
      {
        auto const n = summarize( data.first ), l = summarize( data.second );
        std::cout << fmt( "%-5s %6zu | %9.0f %8.0f %10.2f %10.2f | %7.0f %6.0f %8.2f %8.2f\n", std::string( view_name( v ) ).c_str(),
                          data.first.size(), n.min, n.max, n.mean, n.std, l.min, l.max, l.mean, l.std );
      }
      return exit_ok;
    }

    if ( *train )
    {
      tc.var = nn::parse_variant( train_variant );
      if ( train_objective == "l1" )
        tc.objective = nn::align_objective::l1;
      else if ( train_objective == "infonce" )
        tc.objective = nn::align_objective::infonce;
      else
        throw error( errc::invalid_argument, "unknown objective '" + train_objective + "'" );
      for ( int s = 0; s < 3; ++s )
        tc.curriculum.epochs[s + 1] = train_epochs[s];
      tc.staged = !no_stages;
      tc.seed = derive_seed( seed, "train" );
      tc.model.seed = derive_seed( seed, "model" );

      std::vector<dataset_record> recs;
      if ( !train_records.empty() )
        for ( auto const& f : list_inputs( train_records, { ".jsonl" } ) )
          recs.push_back( read_record( read_file( f ) ) );
      else
      {
        corpus_params toy;
        toy.count = train_count;
        toy.seed = derive_seed( seed, "toy-corpus" );
        auto const corpus = random_corpus( toy );
        recs.resize( corpus.size() );
        parallel_for( corpus.size(), jobs, [&]( std::size_t i ) {
          recs[i] = build_record( corpus[i], { .pattern_count = 1024, .spp_patterns = 15040, .seed = derive_seed( seed, "record", i ) } );
          label_record( recs[i], {}, {} );
        } );
      }
      std::vector<nn::sample> data( recs.size() );
      parallel_for( recs.size(), jobs, [&]( std::size_t i ) { data[i] = nn::make_sample( recs[i], tc.model.hierarchy ); } );
      log_line( "training on " + std::to_string( data.size() ) + " circuits" );
      log_line( nn::config_json( tc ).dump() );

      nn::trainer tr( tc );
      std::ofstream log_file;
      if ( !train_log.empty() )
      {
        if ( fs::path( train_log ).has_parent_path() )
          fs::create_directories( fs::path( train_log ).parent_path() );
        log_file.open( train_log, std::ios::binary );
        log_file << nn::config_json( tc ).dump() << '\n';
      }
      auto const before = tr.evaluate( data );
      tr.run( data, [&]( std::string const& l ) {
        if ( log_file.is_open() )
          log_file << l << '\n';
        if ( tr.steps() % 50u == 0u )
          log_line( l );
      } );
      auto const after = tr.evaluate( data );
      if ( !train_ckpt.empty() )
      {
        std::ostringstream blob;
        nn::save_checkpoint( blob, tr.model() );
        write_file( train_ckpt, blob.str() );
      }
      std::cout << fmt( "%-12s %10s %10s %10s %10s %10s %10s\n", "model", "L_spp", "L_ttdp", "L_mcm", "L_align", "pair_L1", "random_L1" );
      std::cout << fmt( "%-12s %10.4f %10.4f %10.4f %10.4f %10.4f %10.4f\n", "untrained", before.spp, before.ttdp, before.mcm, before.align,
                        before.pair_l1, before.random_l1 );
      std::cout << fmt( "%-12s %10.4f %10.4f %10.4f %10.4f %10.4f %10.4f\n", std::string( nn::variant_name( tc.var ) ).c_str(), after.spp,
                        after.ttdp, after.mcm, after.align, after.pair_l1, after.random_l1 );
      return exit_ok;
    }

    if ( *dump )
    {
      auto const a = load_circuit( dump_a ), b = load_circuit( dump_b );
      if ( a.num_pis() != b.num_pis() )
        throw error( errc::pi_count_mismatch, "circuits have different PI counts" );
      if ( dump_po >= a.num_pos() || dump_po >= b.num_pos() )
        throw error( errc::index_out_of_range, "PO " + std::to_string( dump_po ) + " out of range" );
      auto const text = sat::to_dimacs( sat::build_miter( a, a.fanins( a.pos()[dump_po] )[0], b, b.fanins( b.pos()[dump_po] )[0] ) );
      if ( dump_out.empty() )
        std::cout << text;
      else
        write_file( dump_out, text );
      return exit_ok;
    }
  }
  catch ( error const& e )
  {
    std::cerr << "error: " << e.what() << '\n';
    return exit_for( e.code() );
  }
  catch ( std::exception const& e )
  {
    std::cerr << "error: " << e.what() << '\n';
    return exit_other;
  }
  return exit_ok;
}
