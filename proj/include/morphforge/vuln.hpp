#ifndef MORPHFORGE_VULN_HPP
#define MORPHFORGE_VULN_HPP

#include "morphforge/image.hpp"
#include "morphforge/recognition.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace morphforge::vuln {

/// One morph attack image with its contributing identities and the source
/// image ids consumed to build it.
struct MorphRecord {
    std::string morph_id;
    FaceImage image;
    std::string subject_a;
    std::string subject_b;
    std::string source_img_a;
    std::string source_img_b;
};

struct ProbeImage {
    std::string probe_id;
    FaceImage image;
};

struct ScoreRow {
    std::string morph_id;
    std::string subject_id;
    std::string probe_id;
    double score = 0.0;
};

/// (morph, subject, probe) -> similarity rows. Every morph has rows for
/// exactly two subjects.
struct ScoreTable {
    std::vector<ScoreRow> rows;
};

void validate_score_table(const ScoreTable& table);

void save_score_table(const ScoreTable& table, const std::filesystem::path& path);
ScoreTable load_score_table(const std::filesystem::path& path);

/// Scores every morph against every probe of its two contributing
/// subjects. Throws ProtocolError when a probe doubles as a morph source
/// or a subject has no probes.
ScoreTable score_morphs(const std::vector<MorphRecord>& morphs,
                        const std::map<std::string, std::vector<ProbeImage>>& probes_per_identity,
                        const RecognitionBackend& backend);

struct Threshold {
    double tau = 0.0;
    double achieved_fmr = 0.0;
};

/// Smallest tau such that the fraction of imposter scores strictly above
/// tau is <= target_fmr.
Threshold fmr_threshold(const std::vector<double>& imposter_scores, double target_fmr);

enum class SubjectAggregation { Max, Mean };

/// Mated Morphed Presentation Match Rate: a morph succeeds when its
/// aggregated per-subject score exceeds tau for BOTH subjects.
double mmpmr(const ScoreTable& table, double tau,
             SubjectAggregation agg = SubjectAggregation::Max);

/// Fully Mated MPMR over paired probe attempts: an attempt succeeds when
/// both subjects' scores exceed tau; the rate pools attempts across morphs.
double fmmpmr(const std::vector<std::vector<std::array<double, 2>>>& paired_attempts, double tau);

/// Pairs each morph's two probe score lists by probe index (sorted by
/// probe id), truncating to the shorter list.
std::vector<std::vector<std::array<double, 2>>> paired_attempts_from_table(const ScoreTable& table);

struct VulnReport {
    std::string attack;
    std::string backend;
    double tau = 0.0;
    double achieved_fmr = 0.0;
    double mmpmr = 0.0;   // fraction in [0,1]
    double fmmpmr = 0.0;  // fraction in [0,1]
    // per morph: aggregated score against subject 1 and subject 2
    std::vector<std::array<double, 2>> scatter;
};

/// Builds the per-attack report: rates at tau plus Fig.-style scatter
/// points (per-subject aggregated scores). Throws ProtocolError when the
/// threshold is not finite.
VulnReport vulnerability_report(const std::string& attack, const std::string& backend_name,
                                const ScoreTable& table, const Threshold& threshold,
                                SubjectAggregation agg = SubjectAggregation::Max);

std::string vuln_report_to_json(const VulnReport& r);
void save_vuln_report(const VulnReport& r, const std::filesystem::path& path);
VulnReport load_vuln_report(const std::filesystem::path& path);

/// Scatter CSV: header "s1,s2", one row per morph.
void save_scatter_csv(const VulnReport& r, const std::filesystem::path& path);

} // namespace morphforge::vuln

#endif
