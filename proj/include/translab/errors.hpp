#pragma once

#include <stdexcept>
#include <string>

namespace translab {

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define TRANSLAB_ERROR(Name, tag)                                       \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(tag, what) {}        \
  };

TRANSLAB_ERROR(ParameterError, "parameter")
TRANSLAB_ERROR(ConstructionError, "construction")
TRANSLAB_ERROR(DomainError, "domain")
TRANSLAB_ERROR(UnsupportedError, "unsupported")
TRANSLAB_ERROR(ConvergenceError, "convergence")
TRANSLAB_ERROR(DegeneracyError, "degeneracy")
TRANSLAB_ERROR(ClassificationError, "classification")
TRANSLAB_ERROR(RangeError, "range")
TRANSLAB_ERROR(IntegrationError, "integration")
TRANSLAB_ERROR(StructureError, "structure")
TRANSLAB_ERROR(ChartError, "chart")
TRANSLAB_ERROR(ConfigError, "config")

#undef TRANSLAB_ERROR

}  // namespace translab
