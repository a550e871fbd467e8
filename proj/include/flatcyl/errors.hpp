#pragma once

#include <stdexcept>
#include <string>

namespace flatcyl {

// Exit codes of flatcyl-lab, one per error family.
enum class exit_code : int {
  ok = 0,
  usage = 2,
  config = 3,
  domain = 4,
  infeasible = 5,
  quadrature = 6,
  convergence = 7,
  io = 8,
  internal = 70,
};

class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
  virtual exit_code code() const noexcept { return exit_code::internal; }
  virtual const char* kind() const noexcept { return "internal"; }
};

#define FLATCYL_ERROR(name, tag, ec)                                   \
  class name : public error {                                          \
   public:                                                             \
    using error::error;                                                \
    exit_code code() const noexcept override { return exit_code::ec; } \
    const char* kind() const noexcept override { return tag; }         \
  };

FLATCYL_ERROR(domain_error, "domain", domain)
FLATCYL_ERROR(direction_error, "direction", domain)
FLATCYL_ERROR(kind_error, "kind", domain)
FLATCYL_ERROR(window_error, "out_of_window", domain)
FLATCYL_ERROR(tangency_error, "tangency", convergence)
FLATCYL_ERROR(quadrature_error, "quadrature", quadrature)
FLATCYL_ERROR(convergence_error, "convergence", convergence)
FLATCYL_ERROR(infeasible_error, "infeasible", infeasible)
FLATCYL_ERROR(config_error, "config", config)
FLATCYL_ERROR(io_error, "io", io)

#undef FLATCYL_ERROR

}  // namespace flatcyl
