#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hyperfill {

using PointId = std::uint32_t;
using VertexId = std::uint32_t;

inline constexpr VertexId kNoVertex = static_cast<VertexId>(-1);

enum class ErrorKind {
  invalid_argument,
  unknown_generator,
  disconnected,
  too_deep,
  incompatible,
  degenerate,
  io,
};

// Thrown for every recoverable failure surfaced by the library. The kind lets
// the CLI map failures onto exit codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hyperfill
