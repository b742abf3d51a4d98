#pragma once

#include <string_view>

namespace monolab {

/// Three-valued outcome for tests that may only be decidable up to a bound.
enum class Tri { yes, no, unknown };

constexpr std::string_view to_string(Tri t) noexcept {
  switch (t) {
    case Tri::yes: return "yes";
    case Tri::no: return "no";
    case Tri::unknown: return "unknown";
  }
  return "unknown";
}

/// Membership-style spelling used in reports (in/out/unknown).
constexpr std::string_view membership_string(Tri t) noexcept {
  switch (t) {
    case Tri::yes: return "in";
    case Tri::no: return "out";
    case Tri::unknown: return "unknown";
  }
  return "unknown";
}

}  // namespace monolab
