#pragma once

#include <functional>
#include <map>

#include "reconf/recsa.hpp"

namespace reconf {

// Reconfiguration Management: triggers estab() on majority collapse (via the
// core-agreement rule) or on majority agreement of the prediction function.
class RecmaCore {
public:
    struct Hooks {
        // cause: "collapse" or "prediction" (the coordinator patch adds
        // "delicate" through the same path).
        std::function<void(const char* cause, const IdSet& proposed)> on_trigger;
    };

    explicit RecmaCore(ProcessorId self) : self_(self) {}

    // The application-supplied prediction function; treated as a black box.
    std::function<bool(const ConfigValue&)> eval_conf = [](const ConfigValue&) {
        return false;
    };
    // Optional replacement of the prediction-path trigger (coordinator patch).
    std::function<bool()> delicate_override;

    IdSet core(const RecsaCore& sa) const;
    void tick(RecsaCore& sa);
    void on_receive(const RecsaCore& sa, ProcessorId j, const RecmaMessage& m);

    bool no_maj(ProcessorId k) const {
        auto it = no_maj_.find(k);
        return it != no_maj_.end() && it->second;
    }
    bool need_reconf(ProcessorId k) const {
        auto it = need_reconf_.find(k);
        return it != need_reconf_.end() && it->second;
    }

    // Messages produced by the last tick (⟨noMaj, needReconf⟩ to participants).
    const std::vector<std::pair<ProcessorId, RecmaMessage>>& outbox() const {
        return outbox_;
    }

    void inject_flags(ProcessorId k, bool no_maj, bool need_reconf) {
        no_maj_[k] = no_maj;
        need_reconf_[k] = need_reconf;
    }

    Hooks hooks;

private:
    void flush_flags();

    ProcessorId self_;
    std::map<ProcessorId, bool> no_maj_;
    std::map<ProcessorId, bool> need_reconf_;
    ConfigValue prev_config_ = ConfigValue::bottom();
    std::vector<std::pair<ProcessorId, RecmaMessage>> outbox_;
};

}  // namespace reconf
