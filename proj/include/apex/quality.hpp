#pragma once
// Quality score and gate applied at ingest.

#include <string>
#include <string_view>

namespace apex {

enum class Status { Successful, Failed };

std::string_view to_string(Status s);
Status status_from_string(std::string_view text);

struct QualityWeights {
    double correctness = 0.9;
    double efficiency = 0.05;
    double completeness = 0.05;

    bool operator==(const QualityWeights&) const = default;
};

inline constexpr double kDefaultQualityThreshold = 0.3;

struct EvaluationInput {
    double correctness = 0.0;   // oracle verdict, [0,1]
    double efficiency = 0.0;
    double completeness = 0.0;
    std::string_view teacher_feedback;
    bool oracle_reject = false;
};

// Throws WeightSumInvalid unless the weights are non-negative and sum to 1.
void check_weights(const QualityWeights& w);
double compute_quality(const EvaluationInput& in, const QualityWeights& w = {});
// Failed when the oracle rejected the artifact, otherwise successful iff q >= theta.
Status gate(double q, double theta, bool oracle_reject);

}  // namespace apex
