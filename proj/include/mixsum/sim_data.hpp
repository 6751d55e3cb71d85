#pragma once

#include "mixsum/dataset.hpp"
#include "mixsum/mixture.hpp"
#include "mixsum/rng.hpp"

namespace mixsum {

// True generating mixtures for the two built-in simulation designs.
MixtureDraw sim_univariate_truth();
MixtureDraw sim_bivariate_truth();

// n labeled draws from the five-component univariate design.
Dataset generate_sim_univariate(long n, RngStream& rng);

// n labeled draws from the three-component bivariate design.
Dataset generate_sim_bivariate(long n, RngStream& rng);

}  // namespace mixsum
