#ifndef QESC_CLI_HPP
#define QESC_CLI_HPP

namespace qesc {

// Parses argv and runs the selected subcommand (escape, survey,
// bisect-study, report). Returns the process exit status: 0 on success,
// 2 on configuration/usage errors, 1 on internal failure.
int run_cli(int argc, const char* const* argv);

}  // namespace qesc

#endif
