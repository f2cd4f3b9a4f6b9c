#pragma once

#include "qcsync/errors.hpp"
#include "qcsync/gaussian.hpp"
#include "qcsync/optical_network.hpp"
#include "qcsync/collision.hpp"
#include "qcsync/measures.hpp"
#include "qcsync/liouvillian.hpp"
#include "qcsync/config.hpp"
#include "qcsync/csv.hpp"
#include "qcsync/commands.hpp"
