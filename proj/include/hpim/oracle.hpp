#pragma once

#include <vector>

#include "hpim/topology.hpp"

namespace hpim {

// Reverse shortest path toward the source's link, one Route per router (index = router index).
// Only up routers, links and interfaces take part. Root ties go to the lowest interface id.
std::vector<Route> compute_routes(const Topology& topo, int source);

}  // namespace hpim
