#pragma once
// Success-rate accounting across epochs.

#include <map>
#include <string>
#include <vector>

#include "apex/common.hpp"

namespace apex {

struct TaskEpochOutcome {
    bool solved = false;
    int iterations = 0;
};

struct EpochMetrics {
    int epoch = 0;  // 1-based
    double sr = 0.0;
    double csr = 0.0;
    double mean_iterations = 0.0;
    std::map<int, int> iteration_histogram;  // iterations used -> task count
    double first_attempt_rate = 0.0;
};

struct Flip {
    std::string task_id;
    int from_epoch = 0;  // FAIL
    int to_epoch = 0;    // PASS
};

struct MetricsLedger {
    std::vector<std::string> task_ids;
    std::vector<EpochMetrics> epochs;
    std::vector<Flip> flips;             // consecutive-epoch FAIL -> PASS
    int first_to_last_fail_to_pass = 0;  // failed in epoch 1, solved in the last epoch
    int first_to_last_pass_to_fail = 0;
};

// outcomes[e][t]: epoch e, task t. Throws RaggedInput unless rectangular.
MetricsLedger compute_metrics(const std::vector<std::string>& task_ids,
                              const std::vector<std::vector<TaskEpochOutcome>>& outcomes);

Json ledger_to_json(const MetricsLedger& ledger);
MetricsLedger ledger_from_json(const Json& j);

// Learning curves (SR and CSR per epoch) as a standalone SVG document.
std::string render_learning_curves_svg(const std::vector<std::pair<std::string, MetricsLedger>>& runs);

}  // namespace apex
