#pragma once
#include <stdexcept>
#include <string>

namespace ryd {

// Hydrogenic level in parabolic quantum numbers (n, n1, m).
// n2 = n - n1 - |m| - 1 is implied.
struct RydbergLevel {
    int n = 0;
    int n1 = 0;
    int m = 0;

    int n2() const { return n - n1 - std::abs(m) - 1; }
    bool valid() const {
        return n >= 1 && n1 >= 0 && std::abs(m) <= n - 1 && n2() >= 0;
    }
    bool circular() const { return valid() && std::abs(m) == n - 1 && n1 == 0; }

    bool operator==(const RydbergLevel& o) const {
        return n == o.n && n1 == o.n1 && m == o.m;
    }

    std::string str() const {
        return "(" + std::to_string(n) + "," + std::to_string(n1) + "," +
               std::to_string(m) + ")";
    }
};

class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

inline void require_valid(const RydbergLevel& lv) {
    if (!lv.valid()) throw DomainError("invalid quantum numbers " + lv.str());
}

inline RydbergLevel circular_state(int n) { return RydbergLevel{n, 0, n - 1}; }

} // namespace ryd
