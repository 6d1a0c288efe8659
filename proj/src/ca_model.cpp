#include "trustbed/ca_model.hpp"

#include <algorithm>
#include <tuple>

namespace trustbed::ca {

double minSuccessfulPerformance(const Task& task) { return utilityOf(task.requirement); }

Outcome outcomeOf(const Task& task, double performance) {
    return performance >= minSuccessfulPerformance(task) ? Outcome::Success : Outcome::Failure;
}

double updateWeight(double w, Outcome outcome, const Params& params) {
    if (outcome == Outcome::Success) {
        return std::min(1.0, w + params.alpha * (1.0 - w));
    }
    return std::max(0.0, w - params.beta * (1.0 - w));
}

std::size_t Trustee::KeyHash::operator()(const Key& k) const noexcept {
    const std::uint64_t h = value(k.trustor) * 0x9E3779B97F4A7C15ULL;
    return static_cast<std::size_t>(h ^ (static_cast<std::uint64_t>(k.task.category) << 8) ^
                                    static_cast<std::uint64_t>(k.task.requirement));
}

std::size_t Trustee::TaskHash::operator()(const Task& t) const noexcept {
    return (static_cast<std::size_t>(t.category) << 8) ^ static_cast<std::size_t>(t.requirement);
}

double Trustee::initWeight(AgentId trustor, const Task& task) const {
    auto it = perTask_.find(task);
    if (it == perTask_.end() || it->second.count == 0) {
        return kInitialWeight;
    }
    Tally others = it->second;
    if (auto own = connections_.find({trustor, task}); own != connections_.end()) {
        others.sum -= own->second;
        --others.count;
    }
    if (others.count == 0) {
        return kInitialWeight;
    }
    return std::clamp(others.sum / static_cast<double>(others.count), 0.0, 1.0);
}

void Trustee::handleRequest(const RequestMessage& m) {
    pending_.push_back(m);
    if (!connections_.contains({m.trustor, m.task})) {
        setWeight(m.trustor, m.task, initWeight(m.trustor, m.task));
    }
}

std::optional<RequestMessage> Trustee::selectBestRequest() const {
    const RequestMessage* best = nullptr;
    double bestWeight = -1.0;
    auto order = [](const RequestMessage& m) {
        return std::make_tuple(m.round, value(m.trustor), static_cast<int>(m.task.requirement));
    };
    for (const auto& m : pending_) {
        const double w = weight(m.trustor, m.task).value_or(0.0);
        if (best == nullptr || w > bestWeight || (w == bestWeight && order(m) < order(*best))) {
            best = &m;
            bestWeight = w;
        }
    }
    if (best == nullptr) {
        return std::nullopt;
    }
    return *best;
}

Decision Trustee::attemptTask(const RequestMessage& m, bool taskDone, const Params& params) {
    if (auto it = std::find(pending_.begin(), pending_.end(), m); it != pending_.end()) {
        pending_.erase(it);
    }
    if (taskDone) {
        return Decision::Decline;
    }
    const double w = weight(m.trustor, m.task).value_or(kInitialWeight);
    return w >= params.threshold ? Decision::Attempt : Decision::Decline;
}

Outcome Trustee::completeTask(const RequestMessage& m, double performance, const Params& params) {
    const Outcome outcome = outcomeOf(m.task, performance);
    const double w = weight(m.trustor, m.task).value_or(kInitialWeight);
    setWeight(m.trustor, m.task, updateWeight(w, outcome, params));
    promoteHarderTasks(m.trustor, m.task, performance, params);
    return outcome;
}

void Trustee::promoteHarderTasks(AgentId trustor, const Task& executed, double performance,
                                 const Params& params) {
    const double executedUtility = utilityOf(executed.requirement);
    for (auto level : kLevelsHardestFirst) {
        if (utilityOf(level) <= executedUtility) {
            continue;
        }
        const Task harder{executed.category, level};
        auto w = weight(trustor, harder);
        if (!w || *w >= params.threshold) {
            continue;
        }
        if (performance >= minSuccessfulPerformance(harder)) {
            setWeight(trustor, harder, params.threshold);
        }
    }
}

std::optional<double> Trustee::weight(AgentId trustor, const Task& task) const {
    if (auto it = connections_.find({trustor, task}); it != connections_.end()) {
        return it->second;
    }
    return std::nullopt;
}

void Trustee::setWeight(AgentId trustor, const Task& task, double w) {
    w = std::clamp(w, 0.0, 1.0);
    auto [it, inserted] = connections_.try_emplace({trustor, task}, w);
    Tally& tally = perTask_[task];
    if (inserted) {
        tally.sum += w;
        ++tally.count;
    } else {
        tally.sum += w - it->second;
        it->second = w;
    }
}

void Trustee::forgetTrustor(AgentId trustor) {
    for (auto it = connections_.begin(); it != connections_.end();) {
        if (it->first.trustor == trustor) {
            Tally& tally = perTask_[it->first.task];
            tally.sum -= it->second;
            --tally.count;
            if (tally.count == 0) {
                tally.sum = 0.0;
            }
            it = connections_.erase(it);
        } else {
            ++it;
        }
    }
    std::erase_if(pending_, [trustor](const RequestMessage& m) { return m.trustor == trustor; });
}

}  // namespace trustbed::ca
