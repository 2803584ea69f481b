#pragma once

#include "rffa/abandonment.hpp"
#include "rffa/annealer.hpp"
#include "rffa/candidates.hpp"
#include "rffa/flow.hpp"
#include "rffa/io.hpp"
#include "rffa/move.hpp"
#include "rffa/network.hpp"
#include "rffa/oracle.hpp"
#include "rffa/problem.hpp"
#include "rffa/report.hpp"
#include "rffa/shortest_paths.hpp"
#include "rffa/virtual_extension.hpp"
