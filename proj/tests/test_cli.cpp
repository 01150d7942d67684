#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <mvg/aiger.hpp>
#include <mvg/generators.hpp>
#include <mvg/record.hpp>

namespace fs = std::filesystem;

namespace
{

struct run_result
{
  int code = -1;
  std::string out;
};

/* std::system with stdout captured; stderr is discarded */
run_result mvgate( std::string const& args )
{
  auto const out_file = fs::temp_directory_path() / ( "mvgate_cli_" + std::to_string( ::getpid() ) + ".out" );
  auto const cmd = std::string( MVGATE_BIN ) + " " + args + " > " + out_file.string() + " 2>/dev/null";
  int const st = std::system( cmd.c_str() );
  run_result r;
  r.code = WIFEXITED( st ) ? WEXITSTATUS( st ) : -1;
  std::ifstream in( out_file );
  std::ostringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  fs::remove( out_file );
  return r;
}

std::string slurp( fs::path const& p )
{
  std::ifstream in( p, std::ios::binary );
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class cli : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir = fs::temp_directory_path() / ( "mvgate_cli_" + std::to_string( ::getpid() ) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name() );
    fs::remove_all( dir );
    fs::create_directories( dir );
  }
  void TearDown() override { fs::remove_all( dir ); }

  std::string p( std::string const& rel ) const { return ( dir / rel ).string(); }

  fs::path dir;
};

std::string const demo = std::string( MVG_DATA_DIR ) + "/demo";

} // namespace

TEST_F( cli, convert_writes_verified_views )
{
  auto const r = mvgate( "-q convert " + demo + "/adder3.aag -o " + p( "v" ) );
  EXPECT_EQ( r.code, 0 );
  for ( auto const* v : { "MIG", "XAG", "XMG" } )
    EXPECT_TRUE( fs::exists( p( std::string( "v/adder3." ) + v + ".mvnl" ) ) ) << v;
  EXPECT_EQ( std::count( r.out.begin(), r.out.end(), '\n' ), 3 );
  EXPECT_EQ( r.out.find( "FAIL" ), std::string::npos );

  auto const one = mvgate( "-q convert " + demo + "/adder3.aag --targets xmg -o " + p( "x" ) );
  EXPECT_EQ( one.code, 0 );
  EXPECT_EQ( std::distance( fs::directory_iterator( p( "x" ) ), fs::directory_iterator{} ), 1 );
}

TEST_F( cli, parse_errors_exit_two )
{
  std::ofstream( p( "bad.aag" ) ) << "aag 3 2 x\n";
  EXPECT_EQ( mvgate( "-q convert " + p( "bad.aag" ) + " -o " + p( "v" ) ).code, 2 );
  std::ofstream( p( "latch.aag" ) ) << "aag 1 0 1 0 0\n2 3\n";
  EXPECT_EQ( mvgate( "-q convert " + p( "latch.aag" ) + " -o " + p( "v" ) ).code, 2 );
}

TEST_F( cli, aig_only_directory_labels_nothing )
{
  fs::create_directories( p( "aigs" ) );
  fs::copy( demo + "/adder3.aag", p( "aigs/adder3.aag" ) );
  auto const r = mvgate( "-q label-equiv " + p( "aigs" ) + " -o " + p( "lab" ) );
  EXPECT_EQ( r.code, 0 );
  auto const rec = mvg::read_record( slurp( p( "lab/adder3.jsonl" ) ) );
  EXPECT_TRUE( rec.equiv_pairs.empty() );
}

TEST_F( cli, demo_corpus_matches_golden_counts_and_stats )
{
  ASSERT_EQ( mvgate( "-q build-records " + demo + " -o " + p( "rec" ) ).code, 0 );
  auto const stats = mvgate( "-q stats " + p( "rec" ) );
  EXPECT_EQ( stats.code, 0 );
  EXPECT_EQ( stats.out, slurp( std::string( MVG_DATA_DIR ) + "/golden/demo_stats.txt" ) );

  auto const lab = mvgate( "-q label-equiv " + p( "rec" ) + " -o " + p( "lab" ) );
  EXPECT_EQ( lab.code, 0 );
  auto const last = lab.out.substr( lab.out.rfind( "total" ) );
  std::istringstream ts( last );
  std::string word;
  uint64_t x = 0, pairs = 0;
  ts >> word >> x >> x >> x >> x >> pairs;
  std::istringstream gs( slurp( std::string( MVG_DATA_DIR ) + "/golden/demo_pairs.txt" ) );
  uint64_t golden = 0;
  gs >> golden;
  EXPECT_EQ( pairs, golden );

  /* rerunning on unchanged inputs reproduces the bytes */
  ASSERT_EQ( mvgate( "-q build-records " + demo + " -o " + p( "rec2" ) ).code, 0 );
  EXPECT_EQ( slurp( p( "rec/rand_0003.jsonl" ) ), slurp( p( "rec2/rand_0003.jsonl" ) ) );
}

TEST_F( cli, tight_budget_reports_drops )
{
  fs::create_directories( p( "in" ) );
  mvg::rng gen( 47 );
  auto const aig = mvg::random_aig( gen, { .num_pis = 40, .num_ands = 900, .max_pos = 4 } );
  std::ofstream( p( "in/big.aag" ) ) << mvg::write_aiger( aig );
  ASSERT_EQ( mvgate( "-q build-records " + p( "in" ) + " -o " + p( "rec" ) + " --targets mig" ).code, 0 );
  auto const r = mvgate( "-q label-equiv " + p( "rec" ) + " -o " + p( "lab" ) + " --budget 1 --max-dropped-fraction 1" );
  EXPECT_EQ( r.code, 0 );
  auto const rec = mvg::read_record( slurp( p( "lab/big.jsonl" ) ) );
  EXPECT_GT( rec.meta.label_stats.dropped_resourceout, 0u );
  EXPECT_EQ( mvgate( "-q label-equiv " + p( "rec" ) + " -o " + p( "lab2" ) + " --budget 1 --max-dropped-fraction 0" ).code, 4 );
}

TEST_F( cli, stats_of_empty_and_single_directories )
{
  fs::create_directories( p( "empty" ) );
  auto const e = mvgate( "-q stats " + p( "empty" ) );
  EXPECT_EQ( e.code, 0 );
  EXPECT_EQ( std::count( e.out.begin(), e.out.end(), '\n' ), 1 );

  fs::create_directories( p( "one" ) );
  fs::copy( demo + "/adder3.aag", p( "one/adder3.aag" ) );
  auto const s = mvgate( "-q stats " + p( "one" ) );
  EXPECT_EQ( s.code, 0 );
  std::istringstream ls( s.out.substr( s.out.find( "AIG" ) ) );
  std::string view, bar;
  double count, mn, mx, mean, sd;
  ls >> view >> count >> bar >> mn >> mx >> mean >> sd;
  EXPECT_EQ( count, 1.0 );
  EXPECT_EQ( mean, mn );
  EXPECT_EQ( sd, 0.0 );
}

TEST_F( cli, tokenize_emits_hierarchy )
{
  auto const r = mvgate( "-q tokenize " + demo + "/adder8.aag --emit " + p( "h.txt" ) );
  EXPECT_EQ( r.code, 0 );
  auto const h = slurp( p( "h.txt" ) );
  EXPECT_NE( h.find( "\nHOP 0 " ), std::string::npos );
  EXPECT_NE( h.find( "\nSUB 0 " ), std::string::npos );
  EXPECT_NE( h.find( "\nGRAPH " ), std::string::npos );
}

TEST_F( cli, dump_cnf_is_dimacs )
{
  ASSERT_EQ( mvgate( "-q convert " + demo + "/adder3.aag --targets xag -o " + p( "v" ) ).code, 0 );
  auto const r = mvgate( "-q dump-cnf " + demo + "/adder3.aag " + p( "v/adder3.XAG.mvnl" ) + " --po 1" );
  EXPECT_EQ( r.code, 0 );
  EXPECT_EQ( r.out.rfind( "p cnf ", 0 ), 0u );
  EXPECT_EQ( mvgate( "-q dump-cnf " + demo + "/adder3.aag " + demo + "/adder8.aag" ).code, 1 );
}

TEST_F( cli, training_demo_is_reproducible )
{
  auto const args = " -q --seed 3 train-demo --count 6 --epochs 1,1,1 --d 8 --batch 3 ";
  auto const a = mvgate( args + std::string( "--variant mask-align --log " ) + p( "a.jsonl" ) + " --checkpoint " + p( "a.ckpt" ) );
  auto const b = mvgate( args + std::string( "--variant mask-align --log " ) + p( "b.jsonl" ) );
  EXPECT_EQ( a.code, 0 );
  EXPECT_EQ( a.out, b.out );
  EXPECT_EQ( slurp( p( "a.jsonl" ) ), slurp( p( "b.jsonl" ) ) );
  EXPECT_EQ( slurp( p( "a.ckpt" ) ).substr( 0, 8 ), "MVGCKPT1" );
  for ( auto const* col : { "L_spp", "L_ttdp", "L_mcm", "L_align" } )
    EXPECT_NE( a.out.find( col ), std::string::npos );

  /* the baseline never trains alignment or reconstruction */
  auto const base = mvgate( args + std::string( "--variant baseline --log " ) + p( "c.jsonl" ) );
  EXPECT_EQ( base.code, 0 );
  std::istringstream log( slurp( p( "c.jsonl" ) ) );
  std::string line;
  std::getline( log, line ); /* config */
  while ( std::getline( log, line ) )
  {
    EXPECT_NE( line.find( "\"align\":null" ), std::string::npos );
    EXPECT_NE( line.find( "\"mcm\":null" ), std::string::npos );
  }
  EXPECT_EQ( mvgate( args + std::string( "--variant both" ) ).code, 1 );
  EXPECT_EQ( mvgate( args + std::string( "--lr nan" ) ).code, 5 );
}
