#include "fleetplan/convex_search.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

namespace fleetplan {

namespace {

class Memo {
public:
    explicit Memo(const std::function<double(int)>& f) : f_(f) {}
    double operator()(int x) {
        if (auto it = seen_.find(x); it != seen_.end()) return it->second;
        return seen_.emplace(x, f_(x)).first->second;
    }
    int evaluations() const { return static_cast<int>(seen_.size()); }

private:
    const std::function<double(int)>& f_;
    std::unordered_map<int, double> seen_;
};

void check(int lo, int hi) {
    if (lo > hi) throw EmptyRange("empty range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

}  // namespace

IntArgmin convex_int_argmin(const std::function<double(int)>& f, int lo, int hi, std::optional<int> guess) {
    check(lo, hi);
    Memo g(f);
    // rising(x): the minimum is at or left of x
    auto rising = [&](int x) { return x >= hi || g(x) <= g(x + 1); };
    int l = lo, r = hi;
    if (guess) {
        const int start = std::clamp(*guess, lo, hi);
        if (rising(start)) {
            r = start;
            for (long step = 1; r > lo; step *= 2) {
                const int probe = static_cast<int>(std::max<long>(lo, start - step));
                if (!rising(probe)) {
                    l = probe + 1;
                    break;
                }
                r = probe;
            }
        } else {
            l = start + 1;
            for (long step = 1; l < hi; step *= 2) {
                const int probe = static_cast<int>(std::min<long>(hi, start + step));
                if (rising(probe)) {
                    r = probe;
                    break;
                }
                l = probe + 1;
            }
        }
    }
    while (l < r) {
        const int mid = l + (r - l) / 2;
        if (rising(mid))
            r = mid;
        else
            l = mid + 1;
    }
    const double value = g(l);
    return {l, value, g.evaluations()};
}

IntArgmin scan_int_argmin(const std::function<double(int)>& f, int lo, int hi) {
    check(lo, hi);
    IntArgmin best{lo, f(lo), 1};
    for (int x = lo + 1; x <= hi; ++x) {
        const double v = f(x);
        ++best.evaluations;
        if (v < best.value) {
            best.x = x;
            best.value = v;
        }
    }
    return best;
}

}  // namespace fleetplan
