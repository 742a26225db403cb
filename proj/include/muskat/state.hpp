#pragma once

#include "muskat/spectral.hpp"

namespace muskat {

/// The evolving unknown: interface height h at time t.
struct SimState {
  PeriodicField h;
  double t = 0.0;
  long step_count = 0;
};

}  // namespace muskat
