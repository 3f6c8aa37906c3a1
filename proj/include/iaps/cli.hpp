#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iaps {

// Batch tool entry point. Exit codes: 0 success, 1 configuration/usage error,
// 2 infeasible-dominated run (more than half of all trials infeasible).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Built-in property suite (the `selftest` verb); returns the failure count.
int run_selftest(std::ostream& out);

// Writes the independent oracle reference tables (the `oracle` verb); each
// table is accompanied by a .fnv64 checksum file.
int write_oracle_tables(const std::string& out_dir, std::ostream& out);

} // namespace iaps
