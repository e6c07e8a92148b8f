#pragma once
// Command-line front end. One declarative JSON config drives every
// subcommand; flag overrides (--seed, --out) win over the file. A single
// root seed reaches every submodule through purpose-named substreams, and
// every output directory carries provenance (config hash, seed, version).

namespace causalseg::cli {

inline constexpr const char* kVersion = "0.1.0";

// argv-style entry point, callable in-process by tests. Returns the process
// exit code: 0 ok, 2 config error, 3 validation/parse error, 4 numerical or
// convergence error.
int run_cli(int argc, const char* const* argv);

}  // namespace causalseg::cli
