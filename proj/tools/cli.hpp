#ifndef MASKEM_TOOLS_CLI_HPP
#define MASKEM_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace maskem::cli {

// Parses args (argv without the program name) and runs one subcommand.
// Writes normal output to out and diagnostics to err. Exit codes:
//   0  success (including --help / --version)
//   2  usage error (unknown flag, missing required flag, bad enum value)
//   3  invariant violation (parameter-set rules, key/ciphertext mismatch,
//      experiment guards, keygen failure)
//   4  I/O or file-format error (unreadable path, malformed key file) and
//      exchange transport failures
//   5  exchange fingerprint mismatch (tamper detected)
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace maskem::cli

#endif
