#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "classp/matrix.hpp"
#include "classp/rng.hpp"

namespace classp {

/// A labelled classification dataset. Features live in [0,1].
struct Dataset {
    Matrix x;                  // (examples, features)
    std::vector<int> y;        // class index per example
    int num_classes = 0;
    std::string name;

    std::size_t size() const { return x.rows; }
    std::size_t features() const { return x.cols; }
    void validate() const;
};

// Reads a big-endian IDX image/label file pair (the MNIST container format:
// magic 0x00000803 for 3-dim ubyte images, 0x00000801 for 1-dim labels).
// Pixels are scaled by 1/255 and images flattened row-major.
// Missing files raise DataError; malformed contents raise FormatError.
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path);

// Keeps only examples whose label is in `classes`. Labels are not remapped
// and num_classes is unchanged, so split tasks share one output head.
Dataset split_classes(const Dataset& d, std::span<const int> classes);

// Reorders feature columns: output column j = input column perm[j].
Dataset permute_features(const Dataset& d, std::span<const std::size_t> perm);

// Gaussian clusters, class k drawn around centers[k] with the given std.
Dataset make_blobs(Pcg32& rng, std::size_t per_class,
                   const std::vector<std::vector<double>>& centers, double stddev);

struct SynthImageOptions {
    int num_classes = 10;
    std::size_t per_class = 200;
    std::size_t side = 28;      // images are side x side, flattened
    double noise = 0.15;        // pixel noise std
    int max_shift = 2;          // uniform integer translation in [-max_shift, max_shift]
};

// Deterministic image classification task: one smooth high-contrast
// prototype per class, each example a shifted noisy copy. Stands in for a
// digits corpus when no IDX files are available.
Dataset make_synth_images(Pcg32& rng, const SynthImageOptions& opts);

// Writes a dataset back out as an IDX image/label file pair (values
// rounded to bytes). Used to build loader fixtures and offline task files.
void write_idx(const Dataset& d, std::size_t side,
               const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path);

} // namespace classp
