#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace onf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Error taxonomy shared by the library and the CLI. kind() maps onto the
/// CLI exit-code contract: 2 parse/dimension, 3 domain/strictness,
/// 4 numerical failure, 5 invariant violation.
class Error : public std::runtime_error {
public:
    enum class Kind : int {
        parse = 2,
        domain = 3,
        numerical = 4,
        invariant = 5,
    };

    Error(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind)
    {
    }

    Kind kind() const { return kind_; }
    int exit_code() const { return static_cast<int>(kind_); }

private:
    Kind kind_;
};

[[noreturn]] inline void fail_parse(const std::string& m) { throw Error(Error::Kind::parse, m); }
[[noreturn]] inline void fail_domain(const std::string& m) { throw Error(Error::Kind::domain, m); }
[[noreturn]] inline void fail_numerical(const std::string& m) { throw Error(Error::Kind::numerical, m); }
[[noreturn]] inline void fail_invariant(const std::string& m) { throw Error(Error::Kind::invariant, m); }

/// Multiply accumulator threaded through the implicit kernels. Plain
/// multiplies and fused multiply-adds both count as one.
struct MultiplyCounter {
    std::uint64_t multiplies = 0;
};

inline void count_multiplies(MultiplyCounter* counter, std::uint64_t k)
{
    if (counter != nullptr) counter->multiplies += k;
}

} // namespace onf
