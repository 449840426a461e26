#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sparsenet {

/// Entry point of the `sparsenet` tool. Subcommands:
///   train | prune | finetune | eval | sweep | curve | export
/// Returns 0 on success; on any error writes a diagnostic to `err` and
/// returns nonzero. `out` receives normal output (e.g. CSV when no --out).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sparsenet
