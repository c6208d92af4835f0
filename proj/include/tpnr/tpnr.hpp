#ifndef TPNR_TPNR_HPP
#define TPNR_TPNR_HPP

#include "tpnr/detector_model.hpp"
#include "tpnr/errors.hpp"
#include "tpnr/estimation.hpp"
#include "tpnr/ingest.hpp"
#include "tpnr/montecarlo.hpp"
#include "tpnr/multiplexer.hpp"
#include "tpnr/sample_io.hpp"

#endif
