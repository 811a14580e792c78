#pragma once
// Structural signatures: ordered, type-prefixed operation sequences, and the
// LCS-based similarity used to match them across domains.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apex/common.hpp"

namespace apex {

struct StructuralSignature {
    std::vector<std::string> ops;  // e.g. "op:entity_resolution"

    bool empty() const noexcept { return ops.empty(); }
    std::size_t size() const noexcept { return ops.size(); }
    // Stable hash of the canonical sequence (first 16 hex chars of SHA-256).
    std::string fingerprint() const;

    bool operator==(const StructuralSignature&) const = default;
};

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// |LCS(a,b)| / min(|a|,|b|); 0 when either side is empty.
double structural_similarity(const StructuralSignature& a, const StructuralSignature& b);

// "op:temporal_filter" -> "temporal filter"
std::string humanize_op(std::string_view op_id);
// "Temporal Filter!" -> "op:temporal_filter"
std::string op_id_from_text(std::string_view text);
bool is_op_id(std::string_view text);

// Synonym table mapping surface phrasings to canonical operations.
// Text format, one mapping per line: `<synonym phrase> = op:<name>`;
// blank lines and lines starting with '#' are ignored.
class OperationCanon {
public:
    static const OperationCanon& defaults();
    static std::string_view default_text();
    static OperationCanon parse(std::string_view text);
    static OperationCanon load(const std::filesystem::path& path);

    // Throws InvalidArgument when the synonym already maps elsewhere.
    void add(std::string_view synonym, std::string_view canonical);

    // Longest synonym occurring as a contiguous token run in `step`.
    std::optional<std::string> lookup(std::string_view step) const;

    const std::set<std::string>& canonical_ops() const noexcept { return ops_; }
    std::size_t synonym_count() const noexcept { return synonyms_.size(); }
    const std::map<std::string, std::string>& synonyms() const noexcept { return synonyms_; }

private:
    std::map<std::string, std::string> synonyms_;  // normalised phrase -> op id
    std::set<std::string> ops_;
    std::size_t max_phrase_tokens_ = 1;
};

}  // namespace apex
