#pragma once

#include <stdexcept>
#include <string>

namespace nsfd {

// Base for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidGridError : Error {
  using Error::Error;
};

struct IndexError : Error {
  using Error::Error;
};

// A stencil reached a node whose value is unset or that carries no value.
struct StencilDataError : Error {
  using Error::Error;
};

struct ContractError : Error {
  using Error::Error;
};

struct TopologyError : Error {
  using Error::Error;
};

struct DivergenceError : Error {
  using Error::Error;
};

struct SolverError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace nsfd
