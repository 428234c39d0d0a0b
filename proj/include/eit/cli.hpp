#pragma once

namespace eit {

/// Whole command-line program: run / sweep / fit / validate verbs.
/// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
/// 4 filesystem error.
int cli_main(int argc, char** argv);

}  // namespace eit
