#pragma once

#include <functional>
#include <optional>
#include <stdexcept>

namespace fleetplan {

class EmptyRange : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct IntArgmin {
    int x = 0;
    double value = 0.0;
    int evaluations = 0;
};

/// Smallest minimizer of a convex f over the integers in [lo, hi].
/// Bisects on the sign of f(x+1) - f(x), so it needs about 2 log2(hi - lo) evaluations.
/// With a guess the bracket is found by doubling steps away from it instead.
IntArgmin convex_int_argmin(const std::function<double(int)>& f, int lo, int hi,
                            std::optional<int> guess = std::nullopt);

/// Reference linear scan with the same tie rule.
IntArgmin scan_int_argmin(const std::function<double(int)>& f, int lo, int hi);

}  // namespace fleetplan
