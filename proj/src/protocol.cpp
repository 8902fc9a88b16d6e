#include "morphforge/protocol.hpp"

#include "morphforge/errors.hpp"
#include "morphforge/rng.hpp"
#include "morphforge/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

namespace morphforge::protocol {

namespace {

void reject_unknown_fields(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                           const std::string& context) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end())
            throw ParseError(context + ": unknown field '" + key + "'");
    }
}

ImageRole role_from_string(const std::string& s) {
    if (s == "reference") return ImageRole::Reference;
    if (s == "probe") return ImageRole::Probe;
    throw ParseError("unknown image role '" + s + "'");
}

std::string role_to_string(ImageRole r) {
    return r == ImageRole::Reference ? "reference" : "probe";
}

} // namespace

std::string to_string(Split s) { return s == Split::Train ? "train" : "test"; }

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    throw ParseError("unknown split '" + s + "'");
}

const IdentityRecord* DatasetManifest::find_identity(const std::string& id) const {
    for (const auto& rec : identities)
        if (rec.id == id) return &rec;
    return nullptr;
}

const ImageRecord* DatasetManifest::find_image(const std::string& image_id) const {
    for (const auto& rec : identities)
        for (const auto& img : rec.images)
            if (img.id == image_id) return &img;
    return nullptr;
}

void validate_manifest(const DatasetManifest& m) {
    std::set<std::string> identity_ids;
    std::set<std::string> image_ids;
    if (m.identities.empty()) throw ValidationError("manifest has no identities");
    for (const auto& rec : m.identities) {
        if (rec.id.empty()) throw ValidationError("identity with empty id");
        if (!identity_ids.insert(rec.id).second)
            throw ValidationError("duplicate identity id '" + rec.id + "'");
        int refs = 0, probes = 0;
        for (const auto& img : rec.images) {
            if (img.id.empty()) throw ValidationError("image with empty id");
            if (img.path.empty())
                throw ValidationError("image '" + img.id + "' has empty path");
            if (!image_ids.insert(img.id).second)
                throw ValidationError("duplicate image id '" + img.id + "'");
            (img.role == ImageRole::Reference ? refs : probes) += 1;
        }
        if (refs == 0)
            throw ValidationError("identity '" + rec.id + "' has no reference image");
        if (probes == 0)
            throw ValidationError("identity '" + rec.id + "' has no probe image");
    }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("manifest " + path.string() + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("identities"))
        throw ParseError("manifest " + path.string() + ": missing 'identities'");
    reject_unknown_fields(j, {"identities"}, "manifest");

    DatasetManifest m;
    for (const auto& ident : j.at("identities")) {
        reject_unknown_fields(ident, {"id", "images"}, "manifest identity");
        IdentityRecord rec;
        rec.id = ident.at("id").get<std::string>();
        for (const auto& img : ident.at("images")) {
            reject_unknown_fields(img, {"id", "path", "role"}, "manifest image");
            ImageRecord ir;
            ir.id = img.at("id").get<std::string>();
            ir.path = img.at("path").get<std::string>();
            ir.role = role_from_string(img.at("role").get<std::string>());
            rec.images.push_back(std::move(ir));
        }
        m.identities.push_back(std::move(rec));
    }
    validate_manifest(m);
    return m;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    nlohmann::json j;
    auto idents = nlohmann::json::array();
    for (const auto& rec : m.identities) {
        nlohmann::json ident;
        ident["id"] = rec.id;
        auto images = nlohmann::json::array();
        for (const auto& img : rec.images) {
            images.push_back({{"id", img.id}, {"path", img.path}, {"role", role_to_string(img.role)}});
        }
        ident["images"] = images;
        idents.push_back(ident);
    }
    j["identities"] = idents;
    atomic_write_file(path, j.dump(2) + "\n");
}

std::vector<MorphPair> SplitProtocol::pairs_for(Split s) const {
    std::vector<MorphPair> out;
    for (const auto& p : pairs)
        if (p.split == s) out.push_back(p);
    return out;
}

namespace {

/// Pairs identities inside one split: every identity draws up to
/// `pairs_per_identity` partners; a pair consumes quota on both sides and
/// unordered pairs never repeat.
void pair_within_split(const DatasetManifest& manifest, const std::vector<std::string>& ids,
                       Split split, int pairs_per_identity, Rng& rng,
                       std::vector<MorphPair>& out) {
    std::map<std::string, int> remaining;
    std::map<std::string, int> ref_cursor;
    std::set<std::pair<std::string, std::string>> used;
    for (const auto& id : ids) remaining[id] = pairs_per_identity;

    auto next_reference = [&](const std::string& identity) -> const ImageRecord& {
        const IdentityRecord* rec = manifest.find_identity(identity);
        std::vector<const ImageRecord*> refs;
        for (const auto& img : rec->images)
            if (img.role == ImageRole::Reference) refs.push_back(&img);
        const int k = ref_cursor[identity]++;
        return *refs[static_cast<size_t>(k) % refs.size()];
    };

    std::vector<std::string> order = ids;
    rng.shuffle(order);
    for (const auto& a : order) {
        while (remaining[a] > 0) {
            // Candidate partners, in shuffled order, with quota left and no
            // existing pair with `a`.
            std::vector<std::string> candidates;
            for (const auto& b : order) {
                if (b == a || remaining[b] <= 0) continue;
                auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
                if (used.count(key)) continue;
                candidates.push_back(b);
            }
            if (candidates.empty()) break;
            const auto& b = candidates[static_cast<size_t>(rng.next_below(candidates.size()))];
            auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
            used.insert(key);
            remaining[a] -= 1;
            remaining[b] -= 1;
            MorphPair pair;
            pair.a_id = a;
            pair.a_img = next_reference(a).id;
            pair.b_id = b;
            pair.b_img = next_reference(b).id;
            pair.split = split;
            out.push_back(std::move(pair));
        }
    }
}

} // namespace

SplitProtocol build_splits(const DatasetManifest& manifest, double train_fraction,
                           int pairs_per_identity, uint64_t seed) {
    validate_manifest(manifest);
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("train_fraction must lie in (0,1)");
    if (pairs_per_identity < 1)
        throw ValidationError("pairs_per_identity must be positive");

    std::vector<std::string> ids;
    for (const auto& rec : manifest.identities) ids.push_back(rec.id);
    const size_t n = ids.size();
    const auto n_train = static_cast<size_t>(std::lround(train_fraction * static_cast<double>(n)));
    if (n_train < 2 || n - n_train < 2)
        throw ProtocolError("protocol infeasible: need >= 2 identities per split, got " +
                            std::to_string(n_train) + " train / " + std::to_string(n - n_train) +
                            " test");

    Rng rng(seed);
    rng.shuffle(ids);

    SplitProtocol p;
    std::vector<std::string> train_ids(ids.begin(), ids.begin() + static_cast<long>(n_train));
    std::vector<std::string> test_ids(ids.begin() + static_cast<long>(n_train), ids.end());
    p.train_identities.insert(train_ids.begin(), train_ids.end());
    p.test_identities.insert(test_ids.begin(), test_ids.end());

    Rng train_rng = rng.fork(1);
    Rng test_rng = rng.fork(2);
    pair_within_split(manifest, train_ids, Split::Train, pairs_per_identity, train_rng, p.pairs);
    pair_within_split(manifest, test_ids, Split::Test, pairs_per_identity, test_rng, p.pairs);

    validate_split_protocol(p, manifest);
    return p;
}

void validate_split_protocol(const SplitProtocol& p, const DatasetManifest& manifest) {
    for (const auto& id : p.train_identities) {
        if (p.test_identities.count(id))
            throw ValidationError("identity '" + id + "' appears in both splits");
        if (!manifest.find_identity(id))
            throw ValidationError("train identity '" + id + "' missing from manifest");
    }
    for (const auto& id : p.test_identities) {
        if (!manifest.find_identity(id))
            throw ValidationError("test identity '" + id + "' missing from manifest");
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& pair : p.pairs) {
        if (pair.a_id == pair.b_id)
            throw ValidationError("morph pair with identical identities '" + pair.a_id + "'");
        const auto& members =
            pair.split == Split::Train ? p.train_identities : p.test_identities;
        if (!members.count(pair.a_id) || !members.count(pair.b_id))
            throw ValidationError("pair (" + pair.a_id + "," + pair.b_id +
                                  ") references identities outside its split");
        auto key = pair.a_id < pair.b_id ? std::make_pair(pair.a_id, pair.b_id)
                                         : std::make_pair(pair.b_id, pair.a_id);
        if (!seen.insert(key).second)
            throw ValidationError("repeated morph pair (" + key.first + "," + key.second + ")");
        for (const auto& [identity, image] :
             {std::make_pair(pair.a_id, pair.a_img), std::make_pair(pair.b_id, pair.b_img)}) {
            const ImageRecord* img = manifest.find_image(image);
            if (!img) throw ValidationError("pair image '" + image + "' missing from manifest");
            const IdentityRecord* owner = manifest.find_identity(identity);
            bool owned = false;
            for (const auto& rec : owner->images) owned |= rec.id == image;
            if (!owned)
                throw ValidationError("pair image '" + image + "' does not belong to identity '" +
                                      identity + "'");
        }
    }
}

SplitProtocol load_protocol(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("protocol " + path.string() + ": " + e.what());
    }
    reject_unknown_fields(j, {"train", "test", "pairs"}, "protocol");
    SplitProtocol p;
    for (const auto& id : j.at("train")) p.train_identities.insert(id.get<std::string>());
    for (const auto& id : j.at("test")) p.test_identities.insert(id.get<std::string>());
    for (const auto& pj : j.at("pairs")) {
        reject_unknown_fields(pj, {"a_id", "a_img", "b_id", "b_img", "split"}, "protocol pair");
        MorphPair pair;
        pair.a_id = pj.at("a_id").get<std::string>();
        pair.a_img = pj.at("a_img").get<std::string>();
        pair.b_id = pj.at("b_id").get<std::string>();
        pair.b_img = pj.at("b_img").get<std::string>();
        pair.split = split_from_string(pj.at("split").get<std::string>());
        p.pairs.push_back(std::move(pair));
    }
    return p;
}

void save_protocol(const SplitProtocol& p, const std::filesystem::path& path) {
    nlohmann::json j;
    j["train"] = p.train_identities;
    j["test"] = p.test_identities;
    auto pairs = nlohmann::json::array();
    for (const auto& pair : p.pairs) {
        pairs.push_back({{"a_id", pair.a_id},
                         {"a_img", pair.a_img},
                         {"b_id", pair.b_id},
                         {"b_img", pair.b_img},
                         {"split", to_string(pair.split)}});
    }
    j["pairs"] = pairs;
    atomic_write_file(path, j.dump(2) + "\n");
}

std::vector<ImageRecord> bonafide_images(const DatasetManifest& manifest,
                                         const SplitProtocol& protocol, Split split,
                                         BonafidePolicy policy) {
    const auto& members =
        split == Split::Train ? protocol.train_identities : protocol.test_identities;
    std::set<std::string> consumed;
    if (policy == BonafidePolicy::ExcludeMorphSources) {
        for (const auto& pair : protocol.pairs) {
            if (pair.split != split) continue;
            consumed.insert(pair.a_img);
            consumed.insert(pair.b_img);
        }
    }
    std::vector<ImageRecord> out;
    for (const auto& rec : manifest.identities) {
        if (!members.count(rec.id)) continue;
        for (const auto& img : rec.images) {
            if (consumed.count(img.id)) continue;
            out.push_back(img);
        }
    }
    return out;
}

CountReport validate_counts(const SplitProtocol& protocol, const DatasetManifest& manifest,
                            const ExpectedCounts& expected, BonafidePolicy policy) {
    CountReport report;
    auto add = [&](const std::string& name, long actual, std::optional<long> want) {
        if (!want) return;
        CountEntry e;
        e.name = name;
        e.actual = actual;
        e.expected = *want;
        e.delta = actual - *want;
        report.pass = report.pass && e.delta == 0;
        report.entries.push_back(std::move(e));
    };
    add("train_pairs", static_cast<long>(protocol.pairs_for(Split::Train).size()),
        expected.train_pairs);
    add("test_pairs", static_cast<long>(protocol.pairs_for(Split::Test).size()),
        expected.test_pairs);
    add("train_bonafide",
        static_cast<long>(bonafide_images(manifest, protocol, Split::Train, policy).size()),
        expected.train_bonafide);
    add("test_bonafide",
        static_cast<long>(bonafide_images(manifest, protocol, Split::Test, policy).size()),
        expected.test_bonafide);
    return report;
}

std::string count_report_to_text(const CountReport& r) {
    std::ostringstream os;
    for (const auto& e : r.entries) {
        os << e.name << ": actual=" << e.actual << " expected=" << e.expected
           << " delta=" << e.delta << "\n";
    }
    os << (r.pass ? "PASS" : "FAIL") << "\n";
    return os.str();
}

} // namespace morphforge::protocol
