#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace unitok {

// Path counts grow exponentially in word length; exact arithmetic is
// required for exact-uniform sampling, so no fixed-width fallback.
using BigInt = boost::multiprecision::cpp_int;

}  // namespace unitok
