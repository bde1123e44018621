#pragma once

#include <cstdint>
#include <string_view>

namespace cmon {

// Binary condition label. "fault" is the positive class everywhere.
enum class Label : std::uint8_t { normal = 0, fault = 1 };

inline constexpr bool is_fault(Label l) noexcept { return l == Label::fault; }
inline constexpr Label to_label(bool fault) noexcept { return fault ? Label::fault : Label::normal; }
inline constexpr std::string_view to_string(Label l) noexcept { return l == Label::fault ? "fault" : "normal"; }

}  // namespace cmon
