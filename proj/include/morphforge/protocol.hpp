#ifndef MORPHFORGE_PROTOCOL_HPP
#define MORPHFORGE_PROTOCOL_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace morphforge::protocol {

enum class ImageRole { Reference, Probe };

struct ImageRecord {
    std::string id;
    std::string path; // relative to the manifest file's directory
    ImageRole role = ImageRole::Reference;
};

struct IdentityRecord {
    std::string id;
    std::vector<ImageRecord> images;
};

/// Dataset description; the single source of truth for what images exist.
/// Invariants: globally unique image ids, every identity owns at least one
/// reference and one probe image, non-empty paths.
struct DatasetManifest {
    std::vector<IdentityRecord> identities;

    const IdentityRecord* find_identity(const std::string& id) const;
    const ImageRecord* find_image(const std::string& image_id) const;
};

enum class Split { Train, Test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct MorphPair {
    std::string a_id;    // identity of contributor A
    std::string a_img;   // image id used from A
    std::string b_id;
    std::string b_img;
    Split split = Split::Train;
};

/// Identity-disjoint train/test split plus the morph pair list.
struct SplitProtocol {
    std::set<std::string> train_identities;
    std::set<std::string> test_identities;
    std::vector<MorphPair> pairs;

    std::vector<MorphPair> pairs_for(Split s) const;
};

/// Loads and validates a manifest JSON document. Unknown fields rejected.
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);
void validate_manifest(const DatasetManifest& m);

/// Deterministically builds identity-disjoint splits and morph pairs.
/// Identities are shuffled by the seed; each identity draws up to
/// pairs_per_identity within-split partners without pair repetition.
/// Pair images cycle through each contributor's reference images.
/// Throws ProtocolError when either split cannot form a single pair.
SplitProtocol build_splits(const DatasetManifest& manifest, double train_fraction,
                           int pairs_per_identity, uint64_t seed);

void validate_split_protocol(const SplitProtocol& p, const DatasetManifest& manifest);

SplitProtocol load_protocol(const std::filesystem::path& path);
void save_protocol(const SplitProtocol& p, const std::filesystem::path& path);

/// Which manifest images count as bona fide for evaluation.
enum class BonafidePolicy {
    ExcludeMorphSources, // every image of split identities not consumed as a morph source
    AllImages            // every image of split identities
};

/// Image ids (with records) usable as bona fide samples for a split.
std::vector<ImageRecord> bonafide_images(const DatasetManifest& manifest,
                                         const SplitProtocol& protocol, Split split,
                                         BonafidePolicy policy);

struct ExpectedCounts {
    std::optional<long> train_pairs;
    std::optional<long> test_pairs;
    std::optional<long> train_bonafide;
    std::optional<long> test_bonafide;
};

struct CountEntry {
    std::string name;
    long actual = 0;
    long expected = 0;
    long delta = 0; // actual - expected
};

struct CountReport {
    std::vector<CountEntry> entries;
    bool pass = true;
};

/// Compares actual pair / bona fide counts against expectations.
/// Reporting only; never throws on mismatch.
CountReport validate_counts(const SplitProtocol& protocol, const DatasetManifest& manifest,
                            const ExpectedCounts& expected,
                            BonafidePolicy policy = BonafidePolicy::ExcludeMorphSources);

std::string count_report_to_text(const CountReport& r);

} // namespace morphforge::protocol

#endif
