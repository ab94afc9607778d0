// Umbrella header.

#ifndef LIESYS_LIESYS_HPP
#define LIESYS_LIESYS_HPP

#include "liesys/expr.hpp"
#include "liesys/ode.hpp"
#include "liesys/quadrature.hpp"
#include "liesys/sl2.hpp"
#include "liesys/vectorfield.hpp"
#include "liesys/riccati.hpp"
#include "liesys/oscillator.hpp"
#include "liesys/ermakov.hpp"
#include "liesys/io.hpp"

#endif  // LIESYS_LIESYS_HPP
