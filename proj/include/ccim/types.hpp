#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace ccim {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VecXi = Eigen::VectorXi;
using Index = Eigen::Index;

// Keeps a parameter out of template deduction so Eigen expressions convert to
// the storage type at the call site.
template <typename T>
using AsArg = std::type_identity_t<T>;

enum class HamiltonianMode : std::uint8_t { Ising = 0, Qubo = 1 };

inline const char* to_string(HamiltonianMode m) {
    return m == HamiltonianMode::Ising ? "ising" : "qubo";
}

enum class ErrorKind { Validation, Divergence, Io };

/// All library failures surface as Error; `kind()` maps to CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string& msg) {
    throw Error(ErrorKind::Validation, msg);
}
[[noreturn]] inline void fail_divergence(const std::string& msg) {
    throw Error(ErrorKind::Divergence, msg);
}
[[noreturn]] inline void fail_io(const std::string& msg) {
    throw Error(ErrorKind::Io, msg);
}

/// sign(0) = +1 by convention so runs stay deterministic.
template <typename Scalar>
int sign_spin(Scalar c) {
    return c < Scalar(0) ? -1 : 1;
}

/// Heaviside with H(0) = 0 by convention.
template <typename Scalar>
int heaviside(Scalar c) {
    return c > Scalar(0) ? 1 : 0;
}

}  // namespace ccim
