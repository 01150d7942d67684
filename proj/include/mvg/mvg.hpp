/*!
  \file mvg.hpp
  \brief Umbrella header for the whole library
*/

#pragma once

#include "aiger.hpp"
#include "circuit.hpp"
#include "corpus.hpp"
#include "equivalence.hpp"
#include "error.hpp"
#include "exact_synthesis.hpp"
#include "generators.hpp"
#include "hier_tokenizer.hpp"
#include "lut_mapping.hpp"
#include "lut_resyn.hpp"
#include "mvnl.hpp"
#include "npn.hpp"
#include "npn4_db.hpp"
#include "pipeline.hpp"
#include "random.hpp"
#include "record.hpp"
#include "sat/cnf.hpp"
#include "sat/solver.hpp"
#include "simulation.hpp"
#include "verify.hpp"
#include "nn/gradcheck.hpp"
#include "nn/layers.hpp"
#include "nn/losses.hpp"
#include "nn/model.hpp"
#include "nn/tape.hpp"
#include "nn/training.hpp"
