#pragma once

namespace mhqa::report {

// Subcommands: validate, translate, filter, evaluate, attribute, sweep,
// lingsim, correlate, report. Returns the process exit status.
int run_cli(int argc, const char* const* argv);

}  // namespace mhqa::report
