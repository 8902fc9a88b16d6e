#include "morphforge/vuln.hpp"

#include "morphforge/errors.hpp"
#include "morphforge/reference_context.hpp"
#include "morphforge/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace morphforge::vuln {

void validate_score_table(const ScoreTable& table) {
    std::set<std::tuple<std::string, std::string, std::string>> keys;
    std::map<std::string, std::set<std::string>> subjects_per_morph;
    for (const auto& row : table.rows) {
        if (!std::isfinite(row.score))
            throw ValidationError("score table contains non-finite score");
        if (!keys.insert({row.morph_id, row.subject_id, row.probe_id}).second)
            throw ValidationError("duplicate score row (" + row.morph_id + "," + row.subject_id +
                                  "," + row.probe_id + ")");
        subjects_per_morph[row.morph_id].insert(row.subject_id);
    }
    for (const auto& [morph, subjects] : subjects_per_morph) {
        if (subjects.size() != 2)
            throw ValidationError("morph '" + morph + "' has " +
                                  std::to_string(subjects.size()) + " subjects, expected 2");
    }
}

void save_score_table(const ScoreTable& table, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "morph_id,subject_id,probe_id,score\n";
    for (const auto& row : table.rows) {
        os << row.morph_id << "," << row.subject_id << "," << row.probe_id << ","
           << format_double(row.score) << "\n";
    }
    atomic_write_file(path, os.str());
}

ScoreTable load_score_table(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "morph_id,subject_id,probe_id,score")
        throw ParseError("score table " + path.string() + ": bad header");
    ScoreTable table;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        ScoreRow row;
        std::string score_text;
        if (!std::getline(ls, row.morph_id, ',') || !std::getline(ls, row.subject_id, ',') ||
            !std::getline(ls, row.probe_id, ',') || !std::getline(ls, score_text))
            throw ParseError("score table " + path.string() + ": bad row '" + line + "'");
        row.score = std::stod(score_text);
        table.rows.push_back(std::move(row));
    }
    validate_score_table(table);
    return table;
}

ScoreTable score_morphs(const std::vector<MorphRecord>& morphs,
                        const std::map<std::string, std::vector<ProbeImage>>& probes_per_identity,
                        const RecognitionBackend& backend) {
    ScoreTable table;
    // Probe embeddings are shared across morphs; compute once.
    std::map<std::string, std::vector<std::pair<std::string, Eigen::VectorXd>>> probe_embeds;
    for (const auto& [identity, probes] : probes_per_identity) {
        auto& list = probe_embeds[identity];
        for (const auto& p : probes) list.emplace_back(p.probe_id, backend.embed(p.image));
    }

    for (const auto& morph : morphs) {
        const Eigen::VectorXd morph_embed = backend.embed(morph.image);
        for (const auto& [subject, source_img] :
             {std::make_pair(morph.subject_a, morph.source_img_a),
              std::make_pair(morph.subject_b, morph.source_img_b)}) {
            auto it = probe_embeds.find(subject);
            if (it == probe_embeds.end() || it->second.empty())
                throw ProtocolError("no probes for contributing subject '" + subject + "'");
            for (const auto& [probe_id, probe_embed] : it->second) {
                if (probe_id == morph.source_img_a || probe_id == morph.source_img_b)
                    throw ProtocolError("probe '" + probe_id +
                                        "' was used as a morph source for '" + morph.morph_id +
                                        "'");
                ScoreRow row;
                row.morph_id = morph.morph_id;
                row.subject_id = subject;
                row.probe_id = probe_id;
                row.score = backend.compare(morph_embed, probe_embed);
                table.rows.push_back(std::move(row));
            }
        }
    }
    validate_score_table(table);
    return table;
}

Threshold fmr_threshold(const std::vector<double>& imposter_scores, double target_fmr) {
    if (imposter_scores.empty())
        throw ValidationError("fmr_threshold: empty imposter score list");
    if (!(target_fmr > 0.0 && target_fmr < 1.0))
        throw ValidationError("target_fmr must lie in (0,1)");

    std::vector<double> sorted = imposter_scores;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    // FMR(tau) = #(scores strictly above tau) / n is right-continuous and
    // non-increasing in tau, so the smallest feasible tau is a score value.
    for (size_t i = 0; i < sorted.size(); ++i) {
        if (i > 0 && sorted[i] == sorted[i - 1]) continue; // same candidate
        const double tau = sorted[i];
        const auto above = static_cast<double>(
            sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), tau));
        const double fmr = above / n;
        if (fmr <= target_fmr) return {tau, fmr};
    }
    // The maximum score always yields FMR 0 <= target, so this is unreachable.
    throw ValidationError("fmr_threshold: no feasible threshold");
}

namespace {

/// morph_id -> subject_id -> scores (probe order: sorted by probe id,
/// which is how rows are grouped for attempt pairing).
std::map<std::string, std::map<std::string, std::vector<std::pair<std::string, double>>>>
group_scores(const ScoreTable& table) {
    std::map<std::string, std::map<std::string, std::vector<std::pair<std::string, double>>>> g;
    for (const auto& row : table.rows)
        g[row.morph_id][row.subject_id].emplace_back(row.probe_id, row.score);
    for (auto& [_, subjects] : g)
        for (auto& [__, scores] : subjects) std::sort(scores.begin(), scores.end());
    return g;
}

double aggregate(const std::vector<std::pair<std::string, double>>& scores,
                 SubjectAggregation agg) {
    double acc = agg == SubjectAggregation::Max ? -std::numeric_limits<double>::infinity() : 0.0;
    for (const auto& [_, s] : scores)
        acc = agg == SubjectAggregation::Max ? std::max(acc, s) : acc + s;
    if (agg == SubjectAggregation::Mean) acc /= static_cast<double>(scores.size());
    return acc;
}

} // namespace

double mmpmr(const ScoreTable& table, double tau, SubjectAggregation agg) {
    validate_score_table(table);
    const auto grouped = group_scores(table);
    if (grouped.empty()) return 0.0;
    long successes = 0;
    for (const auto& [_, subjects] : grouped) {
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& [__, scores] : subjects) worst = std::min(worst, aggregate(scores, agg));
        if (worst > tau) ++successes;
    }
    return static_cast<double>(successes) / static_cast<double>(grouped.size());
}

double fmmpmr(const std::vector<std::vector<std::array<double, 2>>>& paired_attempts,
              double tau) {
    long total = 0;
    long hits = 0;
    for (const auto& morph : paired_attempts) {
        if (morph.empty())
            throw ValidationError("fmmpmr: a morph has no paired attempts");
        for (const auto& [s1, s2] : morph) {
            ++total;
            if (s1 > tau && s2 > tau) ++hits;
        }
    }
    if (total == 0) throw ValidationError("fmmpmr: no attempts");
    return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<std::vector<std::array<double, 2>>> paired_attempts_from_table(
    const ScoreTable& table) {
    validate_score_table(table);
    const auto grouped = group_scores(table);
    std::vector<std::vector<std::array<double, 2>>> out;
    for (const auto& [_, subjects] : grouped) {
        auto it = subjects.begin();
        const auto& first = it->second;
        const auto& second = std::next(it)->second;
        const size_t n = std::min(first.size(), second.size());
        std::vector<std::array<double, 2>> attempts;
        for (size_t i = 0; i < n; ++i)
            attempts.push_back({first[i].second, second[i].second});
        out.push_back(std::move(attempts));
    }
    return out;
}

VulnReport vulnerability_report(const std::string& attack, const std::string& backend_name,
                                const ScoreTable& table, const Threshold& threshold,
                                SubjectAggregation agg) {
    if (!std::isfinite(threshold.tau))
        throw ProtocolError("vulnerability_report: missing/non-finite threshold");
    validate_score_table(table);

    VulnReport r;
    r.attack = attack;
    r.backend = backend_name;
    r.tau = threshold.tau;
    r.achieved_fmr = threshold.achieved_fmr;
    r.mmpmr = mmpmr(table, threshold.tau, agg);
    r.fmmpmr = fmmpmr(paired_attempts_from_table(table), threshold.tau);
    for (const auto& [_, subjects] : group_scores(table)) {
        auto it = subjects.begin();
        const double s1 = aggregate(it->second, agg);
        const double s2 = aggregate(std::next(it)->second, agg);
        r.scatter.push_back({s1, s2});
    }
    return r;
}

std::string vuln_report_to_json(const VulnReport& r) {
    nlohmann::json j;
    j["attack"] = r.attack;
    j["backend"] = r.backend;
    j["tau"] = r.tau;
    j["achieved_fmr"] = r.achieved_fmr;
    j["mmpmr"] = r.mmpmr;
    j["fmmpmr"] = r.fmmpmr;
    auto scatter = nlohmann::json::array();
    for (const auto& [s1, s2] : r.scatter) scatter.push_back({s1, s2});
    j["scatter"] = scatter;
    j["reference_context"] = vulnerability_reference_context();
    return j.dump(2) + "\n";
}

void save_vuln_report(const VulnReport& r, const std::filesystem::path& path) {
    atomic_write_file(path, vuln_report_to_json(r));
}

VulnReport load_vuln_report(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("vulnerability report " + path.string() + ": " + e.what());
    }
    VulnReport r;
    r.attack = j.at("attack").get<std::string>();
    r.backend = j.at("backend").get<std::string>();
    r.tau = j.at("tau").get<double>();
    r.achieved_fmr = j.value("achieved_fmr", 0.0);
    r.mmpmr = j.at("mmpmr").get<double>();
    r.fmmpmr = j.at("fmmpmr").get<double>();
    for (const auto& pt : j.at("scatter"))
        r.scatter.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
    return r;
}

void save_scatter_csv(const VulnReport& r, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "s1,s2\n";
    for (const auto& [s1, s2] : r.scatter)
        os << format_double(s1) << "," << format_double(s2) << "\n";
    atomic_write_file(path, os.str());
}

} // namespace morphforge::vuln
