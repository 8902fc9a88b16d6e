#ifndef MORPHFORGE_REFERENCE_CONTEXT_HPP
#define MORPHFORGE_REFERENCE_CONTEXT_HPP

#include <nlohmann/json.hpp>

namespace morphforge {

/// Published evaluation results for the original large-scale study of the
/// regeneration morphing method (Damer et al., "ReGenMorph: Visibly
/// Realistic GAN Generated Face Morphing Attacks by Attack Re-generation",
/// IJCB 2021; FRGC-V2 data, StyleGAN backbone, ArcFace + commercial
/// matcher). This toolkit's desk-scale backends do NOT reproduce these
/// numbers; reports embed them as context only.
namespace reference_results {

// Vulnerability at FMR 0.1% (percent), regeneration morphs.
inline constexpr double kRegenMmpmrCotsPercent = 42.24;
inline constexpr double kRegenFmmpmrCotsPercent = 34.47;
inline constexpr double kRegenMmpmrArcfacePercent = 33.98;
inline constexpr double kRegenFmmpmrArcfacePercent = 14.05;

// Detection of regeneration morphs (percent D-EER).
inline constexpr double kKnownAttackHybridDeerPercent = 2.48;
inline constexpr double kKnownAttackEnsembleDeerPercent = 0.00;
inline constexpr double kCrossSetMipganHybridDeerPercent = 50.00;
inline constexpr double kCrossSetMipganEnsembleDeerPercent = 33.34;

} // namespace reference_results

/// JSON block embedded into vulnerability reports.
nlohmann::json vulnerability_reference_context();

/// JSON block embedded into detection reports.
nlohmann::json detection_reference_context();

} // namespace morphforge

#endif
