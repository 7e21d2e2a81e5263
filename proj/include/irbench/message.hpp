#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irbench/jsonl.hpp"

namespace irbench {

/// An image slot in presentation order. Tags name the slot role ("ir"/"rgb");
/// bytes stay empty until composition binds real image data.
struct ImageSlot {
    std::string tag;
    std::vector<unsigned char> bytes;
    std::string media_type = "image/png";
};

/// A renderable chat request, independent of the wire encoding.
struct MessagePayload {
    std::string system_text;
    std::string user_text;
    std::vector<ImageSlot> images;
    std::string task_id;  // echoed as request metadata; opaque to the server
};

/// Chat-completions wire request (documented in docs/wire.md). Images are
/// embedded as base64 data URLs in the user content, in slot order, before
/// the text block.
json chat_wire_request(const MessagePayload& payload, const std::string& model,
                       std::optional<bool> thinking);

/// Canonical bytes of a wire request: sorted keys, no insignificant
/// whitespace. Cache keys and payload digests are computed over this form.
std::string canonical_request(const json& wire);

/// Extracts choices[0].message.content; throws Error on malformed bodies.
std::string chat_wire_reply_text(const json& body);

}  // namespace irbench
