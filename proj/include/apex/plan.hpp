#pragma once
// Planning output shared by the orchestrator, the signature extractor and the
// experience assembler.

#include <string>
#include <vector>

#include "apex/signature.hpp"

namespace apex {

// One procedural step as produced by a domain adapter. Metadata names the
// entities, properties and topic the step touches; extraction turns them
// into RELATES_TO / USES / MEMBER_OF edges.
struct RawStep {
    std::string text;
    std::vector<std::string> entities;
    std::vector<std::string> properties;
    std::string topic;
};

struct TaskUnderstanding {
    std::string intent;
    std::vector<std::string> constraints;
    std::string output_format;
    std::string complexity;
};

struct PlanDecomposition {
    std::string task_id;
    std::string task_description;
    std::string domain;
    TaskUnderstanding understanding;        // TU
    std::vector<std::string> entities;      // E (mentions)
    std::vector<std::string> schema;        // S (properties / schema elements)
    std::vector<RawStep> steps;
    StructuralSignature signature;          // hypothesised sigma-hat
    std::string procedure_name;             // template name, optional
    std::string topic;
};

}  // namespace apex
