#pragma once

#include <string>
#include <vector>

namespace hemlab::cli {

/// Runs one CLI invocation. Exit codes: 0 success, 1 usage error,
/// 2 parse/ingestion error, 3 numerical failure.
int run(const std::vector<std::string>& args);

}  // namespace hemlab::cli
