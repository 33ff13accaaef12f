#include "pinauthor/llm/structured.hpp"

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace pinauthor::llm {

namespace {

void appendEscaped(std::string& out, char c) {
    switch (c) {
    case '"': out += "\\\""; break;
    case '\\': out += "\\\\"; break;
    case '\n': out += "\\n"; break;
    case '\r': out += "\\r"; break;
    case '\t': out += "\\t"; break;
    default:
        if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned char>(c));
            out += buf;
        } else {
            out += c;
        }
    }
}

// Copies the balanced object starting at `text[start] == '{'` into strict
// JSON. Returns nullopt when the braces never balance.
std::optional<std::string> normalizedObject(std::string_view text, std::size_t start) {
    std::string out;
    int depth = 0;
    std::size_t i = start;
    while (i < text.size()) {
        char c = text[i];
        if (text.substr(i, 3) == R"(""")") {
            auto close = text.find(R"(""")", i + 3);
            if (close == std::string_view::npos) return std::nullopt;
            out += '"';
            for (char t : text.substr(i + 3, close - i - 3)) appendEscaped(out, t);
            out += '"';
            i = close + 3;
            continue;
        }
        if (c == '"') {
            out += '"';
            ++i;
            while (i < text.size() && text[i] != '"') {
                if (text[i] == '\\' && i + 1 < text.size()) {
                    out += text[i];
                    out += text[i + 1];
                    i += 2;
                    continue;
                }
                if (static_cast<unsigned char>(text[i]) < 0x20) appendEscaped(out, text[i]);
                else out += text[i];
                ++i;
            }
            if (i >= text.size()) return std::nullopt;
            out += '"';
            ++i;
            continue;
        }
        out += c;
        ++i;
        if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return out;
    }
    return std::nullopt;
}

std::optional<nlohmann::json> firstObject(std::string_view text) {
    for (std::size_t pos = text.find('{'); pos != std::string_view::npos; pos = text.find('{', pos + 1)) {
        auto candidate = normalizedObject(text, pos);
        if (!candidate) continue;
        auto parsed = nlohmann::json::parse(*candidate, nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
    }
    return std::nullopt;
}

std::vector<std::string_view> fencedBlocks(std::string_view raw) {
    std::vector<std::string_view> blocks;
    std::size_t pos = 0;
    while ((pos = raw.find("```", pos)) != std::string_view::npos) {
        auto bodyStart = raw.find('\n', pos + 3);
        if (bodyStart == std::string_view::npos) break;
        auto close = raw.find("```", bodyStart);
        if (close == std::string_view::npos) break;
        blocks.push_back(raw.substr(bodyStart + 1, close - bodyStart - 1));
        pos = close + 3;
    }
    return blocks;
}

} // namespace

nlohmann::json extractJsonObject(std::string_view raw) {
    auto whole = nlohmann::json::parse(raw, nullptr, false);
    if (!whole.is_discarded() && whole.is_object()) return whole;
    for (std::string_view block : fencedBlocks(raw)) {
        if (auto j = firstObject(block)) return *j;
    }
    if (auto j = firstObject(raw)) return *j;
    throw SchemaError("model output contains no JSON object", std::string(raw));
}

} // namespace pinauthor::llm
