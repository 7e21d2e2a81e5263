#pragma once

#include <optional>
#include <string_view>

namespace irbench {

// Run-level inference-input configuration: which images the model sees and
// whether the infrared-characteristics prior is injected.
enum class InputMode { IF, IF_TEXT, RGB, IF_RGB, IF_RGB_TEXT };

inline constexpr InputMode kAllModes[] = {InputMode::IF, InputMode::IF_TEXT, InputMode::RGB,
                                          InputMode::IF_RGB, InputMode::IF_RGB_TEXT};

inline std::string_view mode_code(InputMode m) {
    switch (m) {
        case InputMode::IF: return "if";
        case InputMode::IF_TEXT: return "if-text";
        case InputMode::RGB: return "rgb";
        case InputMode::IF_RGB: return "if-rgb";
        case InputMode::IF_RGB_TEXT: return "if-rgb-text";
    }
    return "?";
}

inline std::optional<InputMode> parse_mode(std::string_view code) {
    for (InputMode m : kAllModes)
        if (mode_code(m) == code) return m;
    return std::nullopt;
}

/// Modes whose payload contains the translated RGB image.
inline bool mode_needs_translation(InputMode m) {
    return m == InputMode::RGB || m == InputMode::IF_RGB || m == InputMode::IF_RGB_TEXT;
}

/// Modes whose payload carries the textual prior.
inline bool mode_needs_prior(InputMode m) {
    return m == InputMode::IF_TEXT || m == InputMode::IF_RGB_TEXT;
}

/// Modes presenting two images (infrared first, translated RGB second).
inline bool mode_dual_image(InputMode m) {
    return m == InputMode::IF_RGB || m == InputMode::IF_RGB_TEXT;
}

}  // namespace irbench
