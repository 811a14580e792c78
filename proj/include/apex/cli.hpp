#pragma once
// Command-line front door. Namespaces live under <root>/<ns>/ as an
// append-only log.jsonl plus the last run's metrics.json.

#include <ostream>
#include <string>
#include <vector>

namespace apex {

// args excludes the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace apex
