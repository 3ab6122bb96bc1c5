#pragma once

#include "logpot/value.hpp"

// Pointer-based splay trees with explicit rotations.
namespace reference {

logpot::Tree splay(long key, const logpot::Tree& t);
logpot::Tree insert(long key, const logpot::Tree& t);
logpot::Tree remove(long key, const logpot::Tree& t);

} // namespace reference
