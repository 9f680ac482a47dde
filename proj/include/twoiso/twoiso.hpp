#ifndef TWOISO_TWOISO_HPP
#define TWOISO_TWOISO_HPP

#include "twoiso/constructions.hpp"
#include "twoiso/error.hpp"
#include "twoiso/generators.hpp"
#include "twoiso/io.hpp"
#include "twoiso/linalg.hpp"
#include "twoiso/operators.hpp"
#include "twoiso/random.hpp"
#include "twoiso/space.hpp"

#endif  // TWOISO_TWOISO_HPP
