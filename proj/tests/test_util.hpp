#ifndef MORPHFORGE_TESTS_TEST_UTIL_HPP
#define MORPHFORGE_TESTS_TEST_UTIL_HPP

#include "morphforge/image.hpp"
#include "morphforge/landmarks.hpp"
#include "morphforge/rng.hpp"

#include <filesystem>
#include <string>

namespace morphforge::test {

inline FaceImage random_image(Rng& rng, int w, int h) {
    FaceImage img(w, h);
    for (auto& v : img.pixels) v = rng.next_unit();
    return img;
}

/// Random image whose pixels sit exactly on the 8-bit grid.
inline FaceImage random_quantized_image(Rng& rng, int w, int h) {
    FaceImage img(w, h);
    for (auto& v : img.pixels) v = static_cast<double>(rng.next_below(256)) / 255.0;
    return img;
}

inline LandmarkSet random_landmarks(Rng& rng, size_t n, double lo, double hi) {
    LandmarkSet lm;
    for (size_t i = 0; i < n; ++i)
        lm.points.push_back({rng.uniform(lo, hi), rng.uniform(lo, hi)});
    return lm;
}

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("morphforge-test-" + tag + "-" + std::to_string(counter()++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    static uint64_t& counter() {
        static uint64_t c = 0;
        return c;
    }
    std::filesystem::path path_;
};

} // namespace morphforge::test

#endif
