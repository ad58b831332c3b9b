#pragma once

#include <chirpqfi/config.hpp>
#include <chirpqfi/dynamics.hpp>
#include <chirpqfi/error.hpp>
#include <chirpqfi/fisher.hpp>
#include <chirpqfi/modes.hpp>
#include <chirpqfi/numerics/derivative.hpp>
#include <chirpqfi/numerics/fourier.hpp>
#include <chirpqfi/numerics/grid.hpp>
#include <chirpqfi/numerics/integrator.hpp>
#include <chirpqfi/numerics/quadrature.hpp>
#include <chirpqfi/numerics/special.hpp>
#include <chirpqfi/pulses.hpp>
