/* Regenerates data/npn4_db.txt: exact synthesis for every NPN class in every view. */

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <mvg/npn4_db.hpp>

int main( int argc, char** argv )
{
  CLI::App app{ "Generate the 4-input NPN template database" };
  std::string out_path = std::string( MVG_DATA_DIR ) + "/npn4_db.txt";
  uint32_t max_steps = 6;
  uint64_t budget = 200000;
  app.add_option( "-o,--output", out_path, "output file" );
  app.add_option( "--max-steps", max_steps, "largest exact chain tried before Shannon expansion" );
  app.add_option( "--budget", budget, "conflict budget per SAT query" );
  CLI11_PARSE( app, argc, argv );

  auto const& reps = mvg::npn4_classes::instance().representatives();
  std::cerr << reps.size() << " NPN classes\n";
  mvg::npn4_db db;
  for ( auto v : mvg::template_views )
  {
    auto const t0 = std::chrono::steady_clock::now();
    uint32_t shannon = 0, total_steps = 0;
    for ( auto r : reps )
    {
      auto t = mvg::synthesize_template( v, r, max_steps, budget );
      shannon += t.shannon;
      total_steps += t.steps;
      db.insert( v, r, std::move( t ) );
    }
    auto const secs = std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count();
    std::fprintf( stderr, "%s: %u steps total, %u Shannon classes, %.1fs\n", std::string( mvg::view_name( v ) ).c_str(),
                  total_steps, shannon, secs );
  }
  std::ofstream( out_path, std::ios::binary ) << db.serialize();
  /* reload to run the self-check */
  auto const back = mvg::npn4_db::load( out_path );
  std::cerr << "wrote " << back.size() << " templates to " << out_path << "\n";
  return 0;
}
