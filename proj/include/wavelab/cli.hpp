#pragma once

#include <string>
#include <vector>

namespace wavelab {

inline constexpr const char* version_stamp = "wavelab 0.1.0";

/// Experiment runner. `args` is the argument list without the program name
/// (argv[1..]). Parses flags (and an optional key = value config file given
/// with --config, schema-validated against the declared options), dispatches
/// the subcommand, and persists results under the output directory: a JSON
/// run report echoing the resolved configuration, CSV series, optional
/// binary field snapshots, and (with --plot) a gnuplot script reading the
/// CSVs. The output directory defaults to the current directory, can be
/// preset with the WAVELAB_OUT environment variable, and is overridden by
/// --out.
///
/// Every run is fully determined by the resolved configuration (which
/// embeds the seed); repeated runs with the same configuration, seed, and
/// thread cap produce byte-identical CSVs.
///
/// Exit codes: 0 success, 1 usage error, 2 validation error (malformed
/// parameters, infeasible configurations, schema violations), 3 numerical
/// error (blow-up outside sweeps, no convergence, constraint drift).
int run_cli(const std::vector<std::string>& args);

}  // namespace wavelab
