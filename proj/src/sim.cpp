#include "apex/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "apex/ingest.hpp"

namespace apex::sim {
namespace {

constexpr const char* kConsonantGroups[] = {"krtm", "vlsn", "bdgp", "fhjz"};
constexpr const char* kVowels = "aeiou";

std::uint64_t mix(std::uint64_t a, std::string_view b) {
    return fnv1a64(std::to_string(a) + "\x1f" + std::string(b));
}

std::size_t below(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string word(std::mt19937_64& rng, const std::vector<std::string>& syllables, int count) {
    std::string w;
    for (int i = 0; i < count; ++i) w += syllables[below(rng, syllables.size())];
    return w;
}

std::string hex(std::uint64_t v, int digits) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s(static_cast<std::size_t>(digits), '0');
    for (int i = digits - 1; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kHex[v & 0xf];
    return s;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

constexpr ErrorClass kClasses[] = {ErrorClass::ConstraintViolation, ErrorClass::EntityDisambiguation,
                                   ErrorClass::ToolFailure, ErrorClass::SchemaMismatch};

ErrorClass failure_class(const SyntheticTask& t) {
    if (t.failure_mode) return *t.failure_mode;
    return kClasses[fnv1a64(t.id) % 4];
}

bool structured(const std::string& feedback) {
    if (feedback.empty()) return false;
    try {
        return !stub_feedback_extractor(feedback).errors.empty();
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

World World::generate(std::uint64_t seed, std::size_t templates, std::vector<std::string> domains) {
    if (domains.empty() || domains.size() > std::size(kConsonantGroups)) {
        throw Error(ErrorCode::InvalidArgument, "world needs between 1 and 4 domains");
    }
    World w;
    w.seed_ = seed;
    std::mt19937_64 rng(seed);
    const auto& ops_set = OperationCanon::defaults().canonical_ops();
    const std::vector<std::string> ops(ops_set.begin(), ops_set.end());

    std::size_t attempts = 0;
    while (w.templates_.size() < templates) {
        if (++attempts > 200000) {
            throw Error(ErrorCode::InvalidArgument, "cannot find enough dissimilar templates");
        }
        std::vector<std::string> pool = ops;
        std::shuffle(pool.begin(), pool.end(), rng);
        pool.resize(4 + below(rng, 3));
        StructuralSignature sig{pool};
        const bool distinct = std::all_of(w.templates_.begin(), w.templates_.end(), [&](const Template& t) {
            return structural_similarity(t.signature, sig) < 0.6;
        });
        if (!distinct) continue;
        Template t;
        char id[16];
        std::snprintf(id, sizeof id, "T%02zu", w.templates_.size() + 1);
        t.id = id;
        t.signature = std::move(sig);
        if (unit(rng) >= SimParams{}.clean_template_rate) t.failure_mode = kClasses[below(rng, 4)];
        t.failure_step = 1 + static_cast<int>(below(rng, t.signature.size()));
        w.templates_.push_back(std::move(t));
    }

    w.canon_ = std::make_shared<OperationCanon>(OperationCanon::defaults());
    for (std::size_t d = 0; d < domains.size(); ++d) {
        DomainVocab v;
        v.name = domains[d];
        for (const char* c = kConsonantGroups[d]; *c; ++c) {
            for (const char* x = kVowels; *x; ++x) v.syllables.push_back(std::string{*c, *x});
        }
        std::set<std::string> used;
        for (const auto& op : ops) {
            std::string verb;
            do verb = word(rng, v.syllables, 3);
            while (!used.insert(verb).second);
            w.canon_->add(verb, op);
            if (w.canon_->lookup(verb) != op) {
                throw Error(ErrorCode::InvariantViolation, "domain verb '" + verb + "' is ambiguous");
            }
            v.verbs[op] = verb;
        }
        w.domains_.push_back(std::move(v));
    }
    return w;
}

const Template& World::template_by_id(const std::string& id) const {
    for (const auto& t : templates_) {
        if (t.id == id) return t;
    }
    throw Error(ErrorCode::NotFound, "unknown template " + id);
}

const DomainVocab& World::domain(const std::string& name) const {
    for (const auto& d : domains_) {
        if (d.name == name) return d;
    }
    throw Error(ErrorCode::NotFound, "unknown domain " + name);
}

SyntheticTask World::make_task(const std::string& id, const std::string& template_id,
                               const std::string& domain_name, double difficulty,
                               std::optional<ErrorClass> failure_mode) const {
    if (!(difficulty >= 0.0 && difficulty <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "difficulty must lie in [0,1]");
    }
    const auto& tpl = template_by_id(template_id);
    const auto& vocab = domain(domain_name);
    std::mt19937_64 rng(mix(seed_, id));
    SyntheticTask t;
    t.id = id;
    t.template_id = template_id;
    t.domain = domain_name;
    t.difficulty = difficulty;
    t.failure_mode = failure_mode;
    t.failure_step = tpl.failure_step;
    t.signature = tpl.signature;
    for (const auto& op : tpl.signature.ops) {
        t.entities.push_back(word(rng, vocab.syllables, 4));
        if (!t.description.empty()) t.description += "; ";
        t.description += vocab.verbs.at(op) + " " + t.entities.back();
    }
    t.hidden_oracle = "ans" + hex(rng(), 12);
    return t;
}

std::vector<SyntheticTask> World::generate_tasks(std::size_t n, std::uint64_t seed,
                                                 const std::vector<std::string>& domains,
                                                 const SimParams& params) const {
    std::vector<std::string> names = domains;
    if (names.empty()) {
        for (const auto& d : domains_) names.push_back(d.name);
    }
    std::mt19937_64 rng(mix(seed_, "tasks:" + std::to_string(seed)));
    std::vector<SyntheticTask> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& tpl = templates_[below(rng, templates_.size())];
        const auto& dom = names[below(rng, names.size())];
        const double d = params.difficulty_min + unit(rng) * (params.difficulty_max - params.difficulty_min);
        char id[48];
        std::snprintf(id, sizeof id, "%s-%04zu", dom.c_str(), i + 1);
        out.push_back(make_task(id, tpl.id, dom, d, tpl.failure_mode));
    }
    return out;
}

std::string tasks_to_text(const std::vector<SyntheticTask>& tasks) {
    std::string out = "# id,template,domain,difficulty,failure_mode\n";
    for (const auto& t : tasks) {
        char d[32];
        std::snprintf(d, sizeof d, "%.6f", t.difficulty);
        out += t.id + "," + t.template_id + "," + t.domain + "," + d + "," +
               (t.failure_mode ? std::string(to_string(*t.failure_mode)) : "none") + "\n";
    }
    return out;
}

std::vector<SyntheticTask> tasks_from_text(const World& world, std::string_view text) {
    std::vector<SyntheticTask> out;
    std::set<std::string> ids;
    std::size_t lineno = 0;
    for (const auto& raw : split(text, '\n')) {
        ++lineno;
        if (raw.empty() || raw.front() == '#') continue;
        const auto f = split(raw, ',');
        auto bad = [&](const std::string& why) {
            return Error(ErrorCode::ParseError, "task line " + std::to_string(lineno) + ": " + why);
        };
        if (f.size() != 5) throw bad("expected 5 comma-separated fields");
        double d = 0.0;
        try {
            std::size_t used = 0;
            d = std::stod(f[3], &used);
            if (used != f[3].size()) throw bad("bad difficulty");
        } catch (const std::logic_error&) {
            throw bad("bad difficulty");
        }
        std::optional<ErrorClass> mode;
        if (f[4] != "none") {
            mode = error_class_from_string(f[4]);
            if (!mode) throw bad("unknown failure mode '" + f[4] + "'");
        }
        if (!ids.insert(f[0]).second) throw bad("duplicate task id " + f[0]);
        out.push_back(world.make_task(f[0], f[1], f[2], d, mode));
    }
    return out;
}

std::vector<SyntheticTask> load_tasks(const World& world, const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::IoError, "cannot open task file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return tasks_from_text(world, ss.str());
}

std::vector<TaskSpec> specs(const std::vector<SyntheticTask>& tasks) {
    std::vector<TaskSpec> out;
    out.reserve(tasks.size());
    for (const auto& t : tasks) out.push_back(t.spec());
    return out;
}

PlanDecomposition synthetic_adapter(const TaskView& view) {
    PlanDecomposition plan;
    plan.task_id = view.id;
    plan.task_description = view.description;
    plan.domain = view.domain;
    plan.understanding.intent = "carry out every clause in order";
    plan.understanding.output_format = "answer: <token>";
    for (const auto& clause : split(view.description, ';')) {
        if (clause.empty()) continue;
        RawStep step;
        step.text = clause;
        auto tokens = split(clause, ' ');
        for (std::size_t i = 1; i < tokens.size(); ++i) {
            if (tokens[i].empty()) continue;
            step.entities.push_back(tokens[i]);
            plan.entities.push_back(tokens[i]);
        }
        plan.steps.push_back(std::move(step));
    }
    if (plan.steps.empty()) throw Error(ErrorCode::AdapterFailure, "task has no clauses");
    plan.understanding.complexity = std::to_string(plan.steps.size()) + " steps";
    return plan;
}

double success_probability(const SyntheticTask& task, const AgentContext& ctx, const SimParams& params) {
    int pos = 0;
    for (const auto& ex : ctx.positives) {
        if (structural_similarity(task.signature, StructuralSignature{ex.signature}) >= params.tau_sigma) ++pos;
    }
    int neg = 0;
    if (task.failure_mode) {
        const std::string mode(to_string(*task.failure_mode));
        for (const auto& ex : ctx.negatives) {
            if (std::find(ex.error_classes.begin(), ex.error_classes.end(), mode) != ex.error_classes.end()) ++neg;
        }
    }
    int iter = 0;
    for (const auto& h : ctx.history) {
        if (h.iteration < ctx.iteration && structured(h.feedback)) ++iter;
    }
    const double p = (1.0 - task.difficulty) + params.boost_pos * std::min(pos, params.pos_cap) +
                     params.boost_neg * std::min(neg, params.neg_cap) + params.boost_iter * iter;
    return std::clamp(p, 0.0, 1.0);
}

double attempt_draw(std::uint64_t seed, const std::string& task_id, int iteration) {
    std::mt19937_64 rng(mix(seed, task_id + "#" + std::to_string(iteration)));
    return unit(rng);
}

std::optional<ParsedArtifact> parse_artifact(std::string_view artifact) {
    constexpr std::string_view kPrefix = "answer: ";
    if (artifact.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
    std::istringstream in{std::string(artifact.substr(kPrefix.size()))};
    ParsedArtifact out;
    if (!(in >> out.answer)) return std::nullopt;
    std::string tag;
    if (in >> tag) {
        constexpr std::string_view kErr = "error=";
        const auto at = tag.find("@step");
        if (tag.rfind(kErr, 0) != 0 || at == std::string::npos) return std::nullopt;
        out.error_class = error_class_from_string(tag.substr(kErr.size(), at - kErr.size()));
        try {
            out.step = std::stoi(tag.substr(at + 5));
        } catch (const std::logic_error&) {
            return std::nullopt;
        }
        if (!out.error_class || out.step < 1) return std::nullopt;
    }
    return out;
}

SimHooks::SimHooks(std::vector<SyntheticTask> tasks, std::uint64_t seed, SimParams params)
    : seed_(seed), params_(params) {
    for (auto& t : tasks) {
        const auto id = t.id;
        if (!tasks_.emplace(id, std::move(t)).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate task id " + id);
        }
    }
}

const SyntheticTask& SimHooks::task(const std::string& id) const {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) throw Error(ErrorCode::NotFound, "unknown task " + id);
    return it->second;
}

std::string SimHooks::agent(const AgentContext& ctx) const {
    const auto& t = task(ctx.task.id);
    const double p = success_probability(t, ctx, params_);
    if (attempt_draw(seed_, t.id, ctx.iteration) < p) return "answer: " + t.hidden_oracle;
    const auto wrong = "x" + hex(fnv1a64(t.id + "#wrong#" + std::to_string(ctx.iteration)), 10);
    return "answer: " + wrong + " error=" + std::string(to_string(failure_class(t))) + "@step" +
           std::to_string(t.failure_step);
}

ValidationResult SimHooks::validate(const TaskSpec& spec, const std::string& artifact) const {
    const auto parsed = parse_artifact(artifact);
    if (!parsed) return {"unparseable artifact", false, "ERROR: schema_mismatch @step 1"};
    if (parsed->answer == spec.hidden_oracle) return {"answer accepted", true, ""};
    const auto cls = parsed->error_class.value_or(ErrorClass::ConstraintViolation);
    const int step = parsed->error_class ? parsed->step : 1;
    return {"answer rejected", false,
            "ERROR: " + std::string(to_string(cls)) + " @step " + std::to_string(step)};
}

double SimHooks::oracle(const TaskSpec& spec, const std::string& artifact) const {
    const auto parsed = parse_artifact(artifact);
    return parsed && parsed->answer == spec.hidden_oracle ? 1.0 : 0.0;
}

TeacherReport SimHooks::teach(const TeacherInput& in) const {
    const auto& t = task(in.task.id);
    const int iters = static_cast<int>(in.trace.size());
    const int budget = std::max(1, in.max_iterations);
    const bool solved = in.correctness >= 0.5 && !in.trace.empty() && in.trace.back().valid;
    TeacherReport r;
    r.efficiency = std::clamp(1.0 - static_cast<double>(iters - 1) / budget, 0.0, 1.0);

    int last_failed = 0;
    std::optional<ParsedArtifact> failure;
    for (int i = iters; i >= 1; --i) {
        const auto& step = in.trace[static_cast<std::size_t>(i - 1)];
        if (step.valid) continue;
        auto p = parse_artifact(step.artifact);
        if (p && p->error_class) {
            last_failed = i;
            failure = p;
            break;
        }
    }
    if (solved) {
        r.completeness = 1.0;
    } else {
        const int k = failure ? failure->step : 1;
        r.completeness = static_cast<double>(k - 1) / static_cast<double>(t.signature.size());
    }
    if (!failure) return r;

    const auto cls = std::string(to_string(*failure->error_class));
    const auto& op = t.signature.ops[static_cast<std::size_t>(failure->step - 1) % t.signature.size()];
    r.feedback = "ERROR: " + cls + " @step " + std::to_string(failure->step) + " @iter " +
                 std::to_string(last_failed) + "\nCAUSE: the " + humanize_op(op) +
                 " step was carried out without checking its " + cls + " precondition 0.8";
    if (in.judge_model == "strong") {
        r.feedback += "\nPATCH: replace_logic step" + std::to_string(failure->step) + " recheck the " +
                      humanize_op(op) + " output before moving on";
    }
    return r;
}

Hooks SimHooks::hooks() {
    Hooks h;
    h.adapter = synthetic_adapter;
    h.agent = [this](const AgentContext& ctx) { return agent(ctx); };
    h.validator = [this](const TaskSpec& t, const std::string& a) { return validate(t, a); };
    h.oracle = [this](const TaskSpec& t, const std::string& a) { return oracle(t, a); };
    h.teacher = [this](const TeacherInput& in) { return teach(in); };
    return h;
}

CrossDomainFixture cross_domain_fixture() {
    auto make = [](std::string id, std::string desc, std::string domain,
                   std::vector<std::pair<std::string, std::vector<std::string>>> steps) {
        PlanDecomposition p;
        p.task_id = std::move(id);
        p.task_description = std::move(desc);
        p.domain = std::move(domain);
        p.understanding.intent = "find the top performer";
        for (auto& [text, ents] : steps) {
            p.entities.insert(p.entities.end(), ents.begin(), ents.end());
            p.steps.push_back({text, ents, {}, ""});
        }
        return p;
    };
    CrossDomainFixture f;
    f.sports = make("fig-sports", "Which footballer scored the most goals during the 2022 season?", "sports",
                    {{"identify entity footballer", {"footballer"}},
                     {"traverse schema player stats", {}},
                     {"filter by season 2022", {}},
                     {"aggregate goals per player", {}},
                     {"compare player totals", {}}});
    f.business = make("fig-business", "Which company earned highest revenue in fiscal 2023?", "business",
                      {{"resolve entity company", {"company"}},
                       {"property lookup earnings", {}},
                       {"filter by year fiscal 2023", {}},
                       {"sum by revenue stream", {}},
                       {"contrast revenues", {}}});
    return f;
}

}  // namespace apex::sim
