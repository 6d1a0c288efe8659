#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

namespace trustbed {

// Unique within one simulation run; providers and consumers share the space.
enum class AgentId : std::uint64_t {};

inline std::uint64_t value(AgentId id) { return static_cast<std::uint64_t>(id); }

class IdSource {
public:
    AgentId next() { return AgentId{next_++}; }

private:
    std::uint64_t next_ = 1;
};

// Service quality levels, declared from hardest to easiest so that the CA
// broadcast waves can iterate the enum in order.
enum class PerformanceLevel : std::uint8_t { Perfect, Good, Ok, Bad, Worst };

inline constexpr std::array<PerformanceLevel, 5> kLevelsHardestFirst = {
    PerformanceLevel::Perfect, PerformanceLevel::Good, PerformanceLevel::Ok,
    PerformanceLevel::Bad, PerformanceLevel::Worst};

constexpr double utilityOf(PerformanceLevel level) {
    switch (level) {
        case PerformanceLevel::Perfect: return 10.0;
        case PerformanceLevel::Good: return 5.0;
        case PerformanceLevel::Ok: return 0.0;
        case PerformanceLevel::Bad: return -5.0;
        case PerformanceLevel::Worst: return -10.0;
    }
    return 0.0;
}

std::string_view nameOf(PerformanceLevel level);

inline constexpr double kMinUtility = -10.0;
inline constexpr double kMaxUtility = 10.0;

enum class ConsumerGroup : std::uint8_t { NoTrustModel, Fire, Ca };

inline constexpr std::array<ConsumerGroup, 3> kAllGroups = {
    ConsumerGroup::NoTrustModel, ConsumerGroup::Fire, ConsumerGroup::Ca};

constexpr std::size_t indexOf(ConsumerGroup group) { return static_cast<std::size_t>(group); }

std::string_view nameOf(ConsumerGroup group);
std::optional<ConsumerGroup> parseGroup(std::string_view text);

// A FIRE rating: the evaluator's utility gain from one interaction with the
// target, timestamped with the round number.
struct Rating {
    AgentId evaluator{};
    AgentId target{};
    int round = 0;
    double value = 0.0;

    friend bool operator==(const Rating&, const Rating&) = default;
};

}  // namespace trustbed
