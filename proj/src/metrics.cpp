#include "apex/metrics.hpp"

#include <algorithm>
#include <cstdio>

namespace apex {

MetricsLedger compute_metrics(const std::vector<std::string>& task_ids,
                              const std::vector<std::vector<TaskEpochOutcome>>& outcomes) {
    const std::size_t n = task_ids.size();
    for (const auto& row : outcomes) {
        if (row.size() != n) {
            throw Error(ErrorCode::RaggedInput, "epoch row has " + std::to_string(row.size()) +
                                                    " outcomes for " + std::to_string(n) + " tasks");
        }
    }
    MetricsLedger ledger;
    ledger.task_ids = task_ids;
    std::vector<bool> ever(n, false);
    for (std::size_t e = 0; e < outcomes.size(); ++e) {
        const auto& row = outcomes[e];
        EpochMetrics m;
        m.epoch = static_cast<int>(e + 1);
        std::size_t solved = 0, first = 0, cumulative = 0;
        double iterations = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            if (row[t].solved) {
                ++solved;
                ever[t] = true;
                if (row[t].iterations == 1) ++first;
            }
            if (ever[t]) ++cumulative;
            iterations += row[t].iterations;
            ++m.iteration_histogram[row[t].iterations];
            if (e > 0 && !outcomes[e - 1][t].solved && row[t].solved) {
                ledger.flips.push_back({task_ids[t], static_cast<int>(e), static_cast<int>(e + 1)});
            }
        }
        if (n > 0) {
            const double dn = static_cast<double>(n);
            m.sr = static_cast<double>(solved) / dn;
            m.csr = static_cast<double>(cumulative) / dn;
            m.mean_iterations = iterations / dn;
            m.first_attempt_rate = static_cast<double>(first) / dn;
        }
        ledger.epochs.push_back(std::move(m));
    }
    if (outcomes.size() >= 2) {
        for (std::size_t t = 0; t < n; ++t) {
            const bool a = outcomes.front()[t].solved, b = outcomes.back()[t].solved;
            if (!a && b) ++ledger.first_to_last_fail_to_pass;
            if (a && !b) ++ledger.first_to_last_pass_to_fail;
        }
    }
    return ledger;
}

Json ledger_to_json(const MetricsLedger& ledger) {
    Json epochs = Json::array();
    for (const auto& m : ledger.epochs) {
        Json hist = Json::object();
        for (const auto& [k, v] : m.iteration_histogram) hist[std::to_string(k)] = v;
        epochs.push_back({{"epoch", m.epoch},
                          {"sr", m.sr},
                          {"csr", m.csr},
                          {"mean_iterations", m.mean_iterations},
                          {"iteration_histogram", hist},
                          {"first_attempt_rate", m.first_attempt_rate}});
    }
    Json flips = Json::array();
    for (const auto& f : ledger.flips) {
        flips.push_back({{"task", f.task_id}, {"from_epoch", f.from_epoch}, {"to_epoch", f.to_epoch}});
    }
    return {{"tasks", ledger.task_ids.size()},
            {"task_ids", ledger.task_ids},
            {"epochs", epochs},
            {"flips", flips},
            {"first_to_last",
             {{"fail_to_pass", ledger.first_to_last_fail_to_pass},
              {"pass_to_fail", ledger.first_to_last_pass_to_fail}}}};
}

MetricsLedger ledger_from_json(const Json& j) {
    try {
        MetricsLedger ledger;
        ledger.task_ids = j.at("task_ids").get<std::vector<std::string>>();
        for (const auto& e : j.at("epochs")) {
            EpochMetrics m;
            m.epoch = e.at("epoch").get<int>();
            m.sr = e.at("sr").get<double>();
            m.csr = e.at("csr").get<double>();
            m.mean_iterations = e.at("mean_iterations").get<double>();
            for (const auto& [k, v] : e.at("iteration_histogram").items()) {
                m.iteration_histogram[std::stoi(k)] = v.get<int>();
            }
            m.first_attempt_rate = e.at("first_attempt_rate").get<double>();
            ledger.epochs.push_back(std::move(m));
        }
        for (const auto& f : j.at("flips")) {
            ledger.flips.push_back({f.at("task").get<std::string>(), f.at("from_epoch").get<int>(),
                                    f.at("to_epoch").get<int>()});
        }
        ledger.first_to_last_fail_to_pass = j.at("first_to_last").at("fail_to_pass").get<int>();
        ledger.first_to_last_pass_to_fail = j.at("first_to_last").at("pass_to_fail").get<int>();
        return ledger;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("metrics ledger: ") + e.what());
    }
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string render_learning_curves_svg(const std::vector<std::pair<std::string, MetricsLedger>>& runs) {
    constexpr double W = 640, H = 400, L = 60, R = 160, T = 30, B = 50;
    std::size_t max_epochs = 1;
    for (const auto& [_, ledger] : runs) max_epochs = std::max(max_epochs, ledger.epochs.size());
    auto x = [&](double epoch) {
        const double span = max_epochs > 1 ? static_cast<double>(max_epochs - 1) : 1.0;
        return L + (epoch - 1.0) / span * (W - L - R);
    };
    auto y = [&](double rate) { return T + (1.0 - rate) * (H - T - B); };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) +
                      "\" height=\"" + num(H) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int i = 0; i <= 10; i += 2) {
        const double r = i / 10.0;
        svg += "<line x1=\"" + num(L) + "\" y1=\"" + num(y(r)) + "\" x2=\"" + num(W - R) +
               "\" y2=\"" + num(y(r)) + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + num(L - 8) + "\" y=\"" + num(y(r) + 4) +
               "\" text-anchor=\"end\">" + num(r * 100) + "%</text>\n";
    }
    for (std::size_t e = 1; e <= max_epochs; ++e) {
        svg += "<text x=\"" + num(x(static_cast<double>(e))) + "\" y=\"" + num(H - B + 18) +
               "\" text-anchor=\"middle\">E" + std::to_string(e) + "</text>\n";
    }
    svg += "<text x=\"" + num((L + W - R) / 2) + "\" y=\"" + num(H - 10) +
           "\" text-anchor=\"middle\">epoch (solid: SR, dashed: CSR)</text>\n";

    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& [label, ledger] = runs[i];
        const std::string color = kPalette[i % std::size(kPalette)];
        std::string sr, csr;
        for (const auto& m : ledger.epochs) {
            sr += num(x(m.epoch)) + "," + num(y(m.sr)) + " ";
            csr += num(x(m.epoch)) + "," + num(y(m.csr)) + " ";
        }
        svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"" +
               sr + "\"/>\n";
        svg += "<polyline fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\" stroke-dasharray=\"5,4\" points=\"" + csr + "\"/>\n";
        const double ly = T + 18.0 * static_cast<double>(i);
        svg += "<line x1=\"" + num(W - R + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" +
               num(W - R + 32) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + num(W - R + 38) + "\" y=\"" + num(ly + 4) + "\">" + escape(label) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace apex
