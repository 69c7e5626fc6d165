#include "spcvm/rng.hpp"

#include "spcvm/mvn.hpp"

namespace spcvm {

double NormalStream::normal() { return std_normal_quantile(uniform()); }

} // namespace spcvm
