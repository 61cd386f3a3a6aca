#pragma once
#include <stdexcept>
#include <string>

namespace solsim {

// Error taxonomy shared across modules. Construction-time validation throws;
// protocol misuse (out-of-order calls, losses outside [0,1]) throws too, so a
// bad experiment aborts instead of producing silent garbage.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& m) : std::runtime_error("config: " + m) {}
};
struct dimension_error : std::runtime_error {
    explicit dimension_error(const std::string& m) : std::runtime_error("dimension: " + m) {}
};
struct infeasible_error : std::runtime_error {
    explicit infeasible_error(const std::string& m) : std::runtime_error("infeasible: " + m) {}
};
struct protocol_error : std::runtime_error {
    explicit protocol_error(const std::string& m) : std::runtime_error("protocol: " + m) {}
};
struct size_error : std::runtime_error {
    explicit size_error(const std::string& m) : std::runtime_error("size: " + m) {}
};
struct smoothness_error : std::runtime_error {
    explicit smoothness_error(const std::string& m) : std::runtime_error("smoothness: " + m) {}
};

inline void require(bool cond, const char* what) {
    if (!cond) throw protocol_error(what);
}

} // namespace solsim
