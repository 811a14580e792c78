#include "apex/signature.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "apex/digest.hpp"
#include "apex/embedding.hpp"

namespace apex {

namespace {

constexpr std::string_view kDefaultCanon = R"(# Operation canon: <synonym phrase> = op:<canonical operation>
resolve entity = op:entity_resolution
identify entity = op:entity_resolution
entity lookup = op:entity_resolution
link entity = op:entity_resolution
entity linking = op:entity_resolution
traverse schema = op:schema_traversal
navigate schema = op:schema_traversal
schema lookup = op:schema_traversal
property lookup = op:schema_traversal
find property = op:schema_traversal
filter by date = op:temporal_filter
filter by season = op:temporal_filter
filter by year = op:temporal_filter
restrict period = op:temporal_filter
time window = op:temporal_filter
group by = op:aggregation
aggregate by = op:aggregation
aggregate = op:aggregation
sum by = op:aggregation
total by = op:aggregation
summarize = op:aggregation
compare = op:comparison
contrast = op:comparison
versus = op:comparison
load data = op:data_loading
load csv = op:data_loading
read csv = op:data_loading
read file = op:data_loading
import data = op:data_loading
transform = op:transformation
reshape = op:transformation
convert = op:transformation
pivot = op:transformation
clean data = op:transformation
plot = op:visualization
visualize = op:visualization
chart = op:visualization
render figure = op:visualization
formulate problem = op:problem_formulation
set up problem = op:problem_formulation
define variables = op:problem_formulation
derive = op:mathematical_derivation
prove = op:mathematical_derivation
symbolic derivation = op:mathematical_derivation
calculate = op:numerical_computation
compute numerically = op:numerical_computation
evaluate expression = op:numerical_computation
verify = op:verification
check result = op:verification
validate answer = op:verification
sanity check = op:verification
filter rows = op:filtering
select where = op:filtering
filter = op:filtering
exclude = op:filtering
sort = op:sorting
order by = op:sorting
rank = op:ranking
top k = op:ranking
pick top = op:ranking
join = op:join
merge tables = op:join
combine datasets = op:join
count = op:counting
tally = op:counting
number of = op:counting
hypothesis test = op:statistical_test
significance test = op:statistical_test
t test = op:statistical_test
fit model = op:model_fitting
train model = op:model_fitting
regression = op:model_fitting
predict = op:prediction
forecast = op:prediction
parse text = op:text_parsing
extract fields = op:text_parsing
tokenize = op:text_parsing
call api = op:api_call
http request = op:api_call
fetch endpoint = op:api_call
query api = op:api_call
write file = op:file_output
save output = op:file_output
save to file = op:file_output
export results = op:file_output
handle errors = op:error_handling
catch exception = op:error_handling
retry = op:error_handling
normalize = op:normalization
standardize = op:normalization
scale values = op:normalization
z score = op:normalization
deduplicate = op:deduplication
remove duplicates = op:deduplication
drop duplicates = op:deduplication
format output = op:formatting
pretty print = op:formatting
decompose = op:decomposition
break into subproblems = op:decomposition
split problem = op:decomposition
web search = op:search
search = op:search
fact check = op:fact_check
cross reference = op:fact_check
corroborate = op:fact_check
rolling average = op:rolling_window
moving average = op:rolling_window
)";

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t from, std::size_t n) {
    std::string out;
    for (std::size_t i = from; i < from + n; ++i) {
        if (i > from) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::string normalise_phrase(std::string_view text) {
    auto tokens = tokenize(text);
    return join_tokens(tokens, 0, tokens.size());
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

std::string StructuralSignature::fingerprint() const {
    std::string canonical;
    for (const auto& op : ops) {
        canonical += op;
        canonical.push_back('\n');
    }
    return sha256_hex(canonical).substr(0, 16);
}

namespace {

// op ids share the "op:" prefix, so the tail decides most mismatches
inline bool same_op(const std::string& x, const std::string& y) noexcept {
    const std::size_t n = x.size();
    const bool tail = (n == y.size()) & (n == 0 || x[n - 1] == y[n - 1]);
    return tail && (n < 2 || std::memcmp(x.data(), y.data(), n - 1) == 0);
}

}  // namespace

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.empty() || b.empty()) return 0;
    if (a.size() < b.size()) std::swap(a, b);
    if (b.size() <= 64) {
        // bit-vector LCS: zero bits of v mark matched positions of b
        const std::uint64_t full = b.size() == 64 ? ~0ull : (1ull << b.size()) - 1;
        std::uint64_t v = full;
        for (const auto& x : a) {
            std::uint64_t m = 0;
            for (std::size_t j = 0; j < b.size(); ++j) m |= std::uint64_t(same_op(x, b[j])) << j;
            const std::uint64_t u = v & m;
            v = ((v + u) | (v - u)) & full;
        }
        return b.size() - static_cast<std::size_t>(std::popcount(v));
    }
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = same_op(a[i - 1], b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double structural_similarity(const StructuralSignature& a, const StructuralSignature& b) {
    if (a.empty() || b.empty()) return 0.0;
    const double lcs = static_cast<double>(lcs_length(a.ops, b.ops));
    return lcs / static_cast<double>(std::min(a.size(), b.size()));
}

std::string humanize_op(std::string_view op_id) {
    std::string_view body = op_id.substr(0, 3) == "op:" ? op_id.substr(3) : op_id;
    std::string out(body);
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

std::string op_id_from_text(std::string_view text) {
    std::string_view body = text.substr(0, 3) == "op:" ? text.substr(3) : text;
    std::string out = "op:";
    bool pending_sep = false;
    for (unsigned char c : body) {
        if (std::isalnum(c)) {
            if (pending_sep && out.size() > 3) out.push_back('_');
            pending_sep = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_sep = true;
        }
    }
    if (out.size() == 3) throw Error(ErrorCode::InvalidArgument, "step text has no word characters");
    return out;
}

bool is_op_id(std::string_view text) {
    if (text.size() <= 3 || text.substr(0, 3) != "op:") return false;
    return std::all_of(text.begin() + 3, text.end(), [](unsigned char c) {
        return std::islower(c) || std::isdigit(c) || c == '_';
    });
}

std::string_view OperationCanon::default_text() { return kDefaultCanon; }

const OperationCanon& OperationCanon::defaults() {
    static const OperationCanon canon = parse(kDefaultCanon);
    return canon;
}

OperationCanon OperationCanon::parse(std::string_view text) {
    OperationCanon canon;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto eq = t.rfind('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::ParseError, "canon line " + std::to_string(lineno) +
                                                   ": expected '<synonym> = op:<name>'");
        }
        std::string synonym = trim(std::string_view(t).substr(0, eq));
        std::string op = trim(std::string_view(t).substr(eq + 1));
        if (synonym.empty() || !is_op_id(op)) {
            throw Error(ErrorCode::ParseError,
                        "canon line " + std::to_string(lineno) + ": bad mapping '" + t + "'");
        }
        canon.add(synonym, op);
    }
    return canon;
}

OperationCanon OperationCanon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open canon file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void OperationCanon::add(std::string_view synonym, std::string_view canonical) {
    if (!is_op_id(canonical)) {
        throw Error(ErrorCode::InvalidArgument, "not a canonical op id: " + std::string(canonical));
    }
    auto put = [&](const std::string& phrase) {
        if (phrase.empty()) return;
        auto [it, inserted] = synonyms_.emplace(phrase, std::string(canonical));
        if (!inserted && it->second != canonical) {
            throw Error(ErrorCode::InvalidArgument, "synonym '" + phrase + "' maps to both " +
                                                        it->second + " and " +
                                                        std::string(canonical));
        }
        max_phrase_tokens_ = std::max(max_phrase_tokens_, tokenize(phrase).size());
    };
    put(normalise_phrase(synonym));
    if (ops_.insert(std::string(canonical)).second) {
        // Canonical names always resolve to themselves.
        put(normalise_phrase(canonical));
        put(normalise_phrase(humanize_op(canonical)));
        put(normalise_phrase(canonical.substr(3)));
    }
}

std::optional<std::string> OperationCanon::lookup(std::string_view step) const {
    auto tokens = tokenize(step);
    for (std::size_t n = std::min(max_phrase_tokens_, tokens.size()); n >= 1; --n) {
        for (std::size_t start = 0; start + n <= tokens.size(); ++start) {
            auto it = synonyms_.find(join_tokens(tokens, start, n));
            if (it != synonyms_.end()) return it->second;
        }
    }
    return std::nullopt;
}

}  // namespace apex
