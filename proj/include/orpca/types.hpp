#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace orpca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Errc : int {
  contract_violation = 1,
  io = 2,
  parse = 3,
  numerical = 4,
  version = 5,
  corrupt = 6,
  initialization = 7,
};

/// Every failure in the library surfaces as an orpca::Error carrying a
/// category; the C API maps the category onto its status codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(Errc::contract_violation, what);
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& x, const char* name) {
  if (!x.allFinite()) fail(Errc::contract_violation, std::string(name) + " contains non-finite entries");
}

}  // namespace orpca
