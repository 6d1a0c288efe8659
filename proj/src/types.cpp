#include "trustbed/types.hpp"

namespace trustbed {

std::string_view nameOf(PerformanceLevel level) {
    switch (level) {
        case PerformanceLevel::Perfect: return "PERFECT";
        case PerformanceLevel::Good: return "GOOD";
        case PerformanceLevel::Ok: return "OK";
        case PerformanceLevel::Bad: return "BAD";
        case PerformanceLevel::Worst: return "WORST";
    }
    return "?";
}

std::string_view nameOf(ConsumerGroup group) {
    switch (group) {
        case ConsumerGroup::NoTrustModel: return "notrust";
        case ConsumerGroup::Fire: return "fire";
        case ConsumerGroup::Ca: return "ca";
    }
    return "?";
}

std::optional<ConsumerGroup> parseGroup(std::string_view text) {
    for (auto group : kAllGroups) {
        if (nameOf(group) == text) {
            return group;
        }
    }
    return std::nullopt;
}

}  // namespace trustbed
