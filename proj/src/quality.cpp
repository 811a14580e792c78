#include "apex/quality.hpp"

#include <cmath>

#include "apex/common.hpp"

namespace apex {

std::string_view to_string(Status s) {
    return s == Status::Successful ? "successful" : "failed";
}

Status status_from_string(std::string_view text) {
    if (text == "successful") return Status::Successful;
    if (text == "failed") return Status::Failed;
    throw Error(ErrorCode::ParseError, "unknown status '" + std::string(text) + "'");
}

void check_weights(const QualityWeights& w) {
    if (w.correctness < 0.0 || w.efficiency < 0.0 || w.completeness < 0.0) {
        throw Error(ErrorCode::WeightSumInvalid, "quality weights must be non-negative");
    }
    const double sum = w.correctness + w.efficiency + w.completeness;
    if (!(std::abs(sum - 1.0) <= 1e-9)) {
        throw Error(ErrorCode::WeightSumInvalid, "quality weights sum to " + std::to_string(sum));
    }
}

double compute_quality(const EvaluationInput& in, const QualityWeights& w) {
    check_weights(w);
    for (double v : {in.correctness, in.efficiency, in.completeness}) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "evaluation scores must lie in [0,1]");
        }
    }
    return w.correctness * in.correctness + w.efficiency * in.efficiency +
           w.completeness * in.completeness;
}

Status gate(double q, double theta, bool oracle_reject) {
    if (oracle_reject) return Status::Failed;
    return q >= theta ? Status::Successful : Status::Failed;
}

}  // namespace apex
