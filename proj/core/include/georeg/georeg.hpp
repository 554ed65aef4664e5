#pragma once

#include "georeg/coupling.hpp"
#include "georeg/csv_io.hpp"
#include "georeg/errors.hpp"
#include "georeg/flight_sim.hpp"
#include "georeg/geodesy.hpp"
#include "georeg/registration.hpp"
#include "georeg/rng.hpp"
#include "georeg/timing.hpp"
