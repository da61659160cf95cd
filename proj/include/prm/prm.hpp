#pragma once

#include "prm/label.hpp"
#include "prm/machine.hpp"
#include "prm/semantics.hpp"
#include "prm/format.hpp"
#include "prm/nmdp.hpp"
#include "prm/product.hpp"
#include "prm/gridworld.hpp"
#include "prm/episode.hpp"
#include "prm/table.hpp"
#include "prm/hypothesis.hpp"
#include "prm/verify.hpp"
#include "prm/active.hpp"
#include "prm/passive.hpp"
