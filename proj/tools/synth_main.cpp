// Synthetic dataset generator: procedural face sprites with landmarks and
// a manifest, sized for desk-scale runs of the morphing pipeline.

#include "morphforge/synth.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"morphforge-synth: generate a synthetic face dataset"};
    std::string out_dir;
    morphforge::synth::DatasetOptions opts;
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--identities", opts.identities, "number of identities");
    app.add_option("--references", opts.references_per_identity, "reference images per identity");
    app.add_option("--probes", opts.probes_per_identity, "probe images per identity");
    app.add_option("--size", opts.image_size, "image side length in pixels");
    app.add_option("--seed", opts.seed, "generator seed");
    CLI11_PARSE(app, argc, argv);

    try {
        const auto manifest = morphforge::synth::generate_dataset(out_dir, opts);
        size_t images = 0;
        for (const auto& rec : manifest.identities) images += rec.images.size();
        std::cout << "synth: " << manifest.identities.size() << " identities, " << images
                  << " images at " << opts.image_size << "x" << opts.image_size << " -> "
                  << out_dir << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}
