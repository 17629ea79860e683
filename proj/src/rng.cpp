#include "perclab/rng.hpp"

#include <cmath>

namespace perclab {

OpenThreshold::OpenThreshold(double p) : p_(p) {
    if (!(p > 0.0)) {
        threshold_ = 0;
        all_ = false;
    } else if (p >= 1.0) {
        threshold_ = ~0ull;
        all_ = true;
    } else {
        threshold_ = static_cast<std::uint64_t>(std::ldexp(p, 64));
        all_ = false;
    }
}

}  // namespace perclab
