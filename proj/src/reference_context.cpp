#include "morphforge/reference_context.hpp"

namespace morphforge {

namespace {

const char* kSource =
    "Damer et al., 'ReGenMorph: Visibly Realistic GAN Generated Face Morphing Attacks by "
    "Attack Re-generation', IJCB 2021 (FRGC-V2, StyleGAN, ArcFace/FaceVACS)";

const char* kNote =
    "Published large-scale results, NOT reproduced by this toolkit's desk-scale backends; "
    "contextual only.";

} // namespace

nlohmann::json vulnerability_reference_context() {
    using namespace reference_results;
    return {
        {"source", kSource},
        {"reproduced", false},
        {"note", kNote},
        {"regen_morphs_at_fmr_0.1_percent",
         {{"cots",
           {{"mmpmr_percent", kRegenMmpmrCotsPercent},
            {"fmmpmr_percent", kRegenFmmpmrCotsPercent}}},
          {"arcface",
           {{"mmpmr_percent", kRegenMmpmrArcfacePercent},
            {"fmmpmr_percent", kRegenFmmpmrArcfacePercent}}}}},
    };
}

nlohmann::json detection_reference_context() {
    using namespace reference_results;
    return {
        {"source", kSource},
        {"reproduced", false},
        {"note", kNote},
        {"regen_morph_detection",
         {{"known_attack",
           {{"hybrid_deer_percent", kKnownAttackHybridDeerPercent},
            {"ensemble_deer_percent", kKnownAttackEnsembleDeerPercent}}},
          {"cross_set_trained_on_mipgan2",
           {{"hybrid_deer_percent", kCrossSetMipganHybridDeerPercent},
            {"ensemble_deer_percent", kCrossSetMipganEnsembleDeerPercent}}}}},
    };
}

} // namespace morphforge
