#ifndef MORPHFORGE_CLI_HPP
#define MORPHFORGE_CLI_HPP

#include "morphforge/protocol.hpp"
#include "morphforge/vuln.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace morphforge::cli {

/// Entry point behind the `morphforge` binary. Exit codes: 0 success,
/// 1 usage/validation error, 2 runtime error.
int run(int argc, const char* const* argv);

/// Output file name for a generated morph: "<a_id>_<b_id>_<method>.png".
std::string morph_filename(const protocol::MorphPair& pair, const std::string& method);

/// Loads the morph PNGs for every pair of a split from `dir`, tagged with
/// contributing subjects and consumed source images.
std::vector<vuln::MorphRecord> load_morph_records(const std::filesystem::path& dir,
                                                  const protocol::SplitProtocol& proto,
                                                  protocol::Split split,
                                                  const std::string& method);

/// Probe images (role=probe) per identity of the chosen split, paths
/// resolved against the manifest directory.
std::map<std::string, std::vector<vuln::ProbeImage>> load_probes(
    const protocol::DatasetManifest& manifest, const std::filesystem::path& manifest_dir,
    const std::set<std::string>& identities);

} // namespace morphforge::cli

#endif
