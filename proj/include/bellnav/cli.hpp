#pragma once

namespace bellnav {

enum ExitCode : int {
    kExitOk          = 0,
    kExitValidation  = 1, // oracle or validation failure
    kExitPartial     = 2, // sweep finished with unconverged points
    kExitConfig      = 3,
    kExitRuntime     = 4, // solver or I/O failure
};

int run_cli(int argc, char **argv);

} // namespace bellnav
