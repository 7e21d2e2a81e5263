#include "irbench/message.hpp"

#include "irbench/digest.hpp"
#include "irbench/errors.hpp"

namespace irbench {

json chat_wire_request(const MessagePayload& payload, const std::string& model,
                       std::optional<bool> thinking) {
    json content = json::array();
    for (const auto& slot : payload.images) {
        std::string url = "data:" + slot.media_type + ";base64," + base64_encode(slot.bytes);
        content.push_back(json{{"type", "image_url"}, {"image_url", json{{"url", url}}}});
    }
    content.push_back(json{{"type", "text"}, {"text", payload.user_text}});

    json messages = json::array();
    if (!payload.system_text.empty())
        messages.push_back(json{{"role", "system"}, {"content", payload.system_text}});
    messages.push_back(json{{"role", "user"}, {"content", content}});

    json req{{"model", model}, {"messages", messages}, {"temperature", 0.0}};
    if (!payload.task_id.empty()) req["metadata"] = json{{"task_id", payload.task_id}};
    if (thinking.has_value()) req["enable_thinking"] = *thinking;
    return req;
}

std::string canonical_request(const json& wire) { return canonical_dump(wire); }

std::string chat_wire_reply_text(const json& body) {
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty())
        throw Error("malformed chat response: no choices");
    const auto& msg = body["choices"][0];
    if (!msg.contains("message") || !msg["message"].contains("content"))
        throw Error("malformed chat response: no message content");
    return msg["message"]["content"].get<std::string>();
}

}  // namespace irbench
