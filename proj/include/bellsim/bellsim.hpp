#pragma once

// Everything in one include.

#include "bellsim/core/csv.hpp"
#include "bellsim/core/error.hpp"
#include "bellsim/core/labels.hpp"
#include "bellsim/core/parallel.hpp"
#include "bellsim/core/random.hpp"
#include "bellsim/core/vec3.hpp"

#include "bellsim/spin/matrix.hpp"
#include "bellsim/spin/singlet.hpp"
#include "bellsim/spin/spinor.hpp"

#include "bellsim/probspace/bell.hpp"
#include "bellsim/probspace/finite_space.hpp"
#include "bellsim/probspace/lemma.hpp"
#include "bellsim/probspace/locality.hpp"
#include "bellsim/probspace/quantum_model.hpp"
#include "bellsim/probspace/random_models.hpp"
#include "bellsim/probspace/serialize.hpp"
#include "bellsim/probspace/setting_model.hpp"

#include "bellsim/dynamics/brownian.hpp"
#include "bellsim/dynamics/ensemble.hpp"
#include "bellsim/dynamics/evolve.hpp"
#include "bellsim/dynamics/exchange.hpp"
#include "bellsim/dynamics/fields.hpp"
#include "bellsim/dynamics/io.hpp"
#include "bellsim/dynamics/langevin.hpp"
#include "bellsim/dynamics/packet.hpp"
#include "bellsim/dynamics/params.hpp"

#include "bellsim/epr/config.hpp"
#include "bellsim/epr/detect.hpp"
#include "bellsim/epr/flight.hpp"
#include "bellsim/epr/run.hpp"
#include "bellsim/epr/stats.hpp"

#include "bellsim/oracle/compare.hpp"
#include "bellsim/oracle/crank_nicolson.hpp"
#include "bellsim/oracle/ehrenfest.hpp"
#include "bellsim/oracle/validation.hpp"
#include "bellsim/oracle/wavefunction.hpp"

#include "bellsim/cli/app.hpp"
#include "bellsim/cli/commands.hpp"
#include "bellsim/cli/config_reader.hpp"
#include "bellsim/cli/configs.hpp"
