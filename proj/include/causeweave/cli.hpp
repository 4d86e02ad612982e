#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace causeweave {

/// Entry point of the `causeweave` command line tool. Results go to `out`,
/// diagnostics and error JSON to `err`. Returns 0 on success, 1 on a
/// computational error and 2 on a usage or input error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count from --threads, else CAUSEWEAVE_THREADS, else the hardware.
int resolve_threads(int flag_value);

} // namespace causeweave
