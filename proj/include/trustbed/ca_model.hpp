#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "trustbed/types.hpp"

namespace trustbed::ca {

// The testbed offers a single service, so every task shares category 0.
struct Task {
    std::uint32_t category = 0;
    PerformanceLevel requirement = PerformanceLevel::Ok;

    friend bool operator==(const Task&, const Task&) = default;
};

struct Params {
    double threshold = 0.5;
    double alpha = 0.1;  // strengthening rate
    double beta = 0.1;   // weakening rate
};

struct RequestMessage {
    AgentId trustor{};
    Task task;
    int round = 0;

    friend bool operator==(const RequestMessage&, const RequestMessage&) = default;
};

enum class Outcome { Success, Failure };
enum class Decision { Attempt, Decline };

inline constexpr double kInitialWeight = 0.5;

// Utility a delivery must reach for the task to count as a success.
double minSuccessfulPerformance(const Task& task);

Outcome outcomeOf(const Task& task, double performance);

// w + alpha (1 - w) on success, w - beta (1 - w) on failure, kept in [0, 1].
double updateWeight(double w, Outcome outcome, const Params& params);

// Trust state held by one provider: its connections to trustors, keyed by
// (trustor, task), plus the list of request messages not yet processed.
class Trustee {
public:
    Trustee() = default;
    explicit Trustee(AgentId self) : self_(self) {}

    AgentId id() const { return self_; }

    // Stores the message and creates the (trustor, task) connection if it is
    // missing.
    void handleRequest(const RequestMessage& m);

    // Weight a new connection to `trustor` for `task` would start with: the
    // mean weight of this trustee's connections to other trustors for the
    // same task, or 0.5 if there are none.
    double initWeight(AgentId trustor, const Task& task) const;

    // Pending message whose connection is strongest; ties go to the lowest
    // (round, trustor id, requirement).
    std::optional<RequestMessage> selectBestRequest() const;

    // Threshold gate. Removes `m` from the pending list whatever the result.
    Decision attemptTask(const RequestMessage& m, bool taskDone, const Params& params);

    // Applies the weight update for an executed task and promotes harder
    // tasks of the same trustor the delivered performance would have met.
    Outcome completeTask(const RequestMessage& m, double performance, const Params& params);

    void promoteHarderTasks(AgentId trustor, const Task& executed, double performance,
                            const Params& params);

    std::optional<double> weight(AgentId trustor, const Task& task) const;
    void setWeight(AgentId trustor, const Task& task, double w);

    // Drops every connection and pending message involving `trustor`.
    void forgetTrustor(AgentId trustor);

    void clearPending() { pending_.clear(); }
    const std::vector<RequestMessage>& pending() const { return pending_; }
    std::size_t connectionCount() const { return connections_.size(); }

private:
    struct Key {
        AgentId trustor;
        Task task;
        friend bool operator==(const Key&, const Key&) = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept;
    };
    struct TaskHash {
        std::size_t operator()(const Task& t) const noexcept;
    };
    struct Tally {
        double sum = 0.0;
        std::size_t count = 0;
    };

    AgentId self_{};
    std::unordered_map<Key, double, KeyHash> connections_;
    // Per-task running sums so initWeight does not scan every connection.
    std::unordered_map<Task, Tally, TaskHash> perTask_;
    std::vector<RequestMessage> pending_;
};

}  // namespace trustbed::ca
