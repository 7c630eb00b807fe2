#include "classp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "classp/error.hpp"

namespace classp {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& what) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw FormatError("IDX file truncated while reading " + what);
    return (static_cast<std::uint32_t>(buf[0]) << 24) |
           (static_cast<std::uint32_t>(buf[1]) << 16) |
           (static_cast<std::uint32_t>(buf[2]) << 8) |
           static_cast<std::uint32_t>(buf[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const unsigned char buf[4] = {
        static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

std::ifstream open_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file: " + path.string());
    return in;
}

} // namespace

void Dataset::validate() const {
    if (y.size() != x.rows) {
        throw DimensionError("dataset: " + std::to_string(y.size()) + " labels for " +
                             std::to_string(x.rows) + " examples");
    }
    if (num_classes < 1) throw ArgumentError("dataset: num_classes must be >= 1");
    for (int label : y) {
        if (label < 0 || label >= num_classes) {
            throw ArgumentError("dataset: label " + std::to_string(label) + " out of range [0, " +
                                std::to_string(num_classes) + ")");
        }
    }
}

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path) {
    std::ifstream img = open_binary(images_path);
    const std::uint32_t img_magic = read_be32(img, "image magic");
    if (img_magic != kImageMagic) {
        throw FormatError("bad image magic in " + images_path.string() + ": expected 0x00000803");
    }
    const std::uint32_t count = read_be32(img, "image count");
    const std::uint32_t rows = read_be32(img, "image rows");
    const std::uint32_t cols = read_be32(img, "image cols");
    if (count == 0 || rows == 0 || cols == 0) {
        throw FormatError("IDX image file declares an empty dimension");
    }

    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    std::vector<unsigned char> raw(static_cast<std::size_t>(count) * pixels);
    img.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(img.gcount()) != raw.size()) {
        throw FormatError("IDX image file truncated: " + images_path.string());
    }

    std::ifstream lbl = open_binary(labels_path);
    const std::uint32_t lbl_magic = read_be32(lbl, "label magic");
    if (lbl_magic != kLabelMagic) {
        throw FormatError("bad label magic in " + labels_path.string() + ": expected 0x00000801");
    }
    const std::uint32_t lbl_count = read_be32(lbl, "label count");
    if (lbl_count != count) {
        throw FormatError("IDX image/label count mismatch: " + std::to_string(count) + " vs " +
                          std::to_string(lbl_count));
    }
    std::vector<unsigned char> raw_labels(lbl_count);
    lbl.read(reinterpret_cast<char*>(raw_labels.data()),
             static_cast<std::streamsize>(raw_labels.size()));
    if (static_cast<std::size_t>(lbl.gcount()) != raw_labels.size()) {
        throw FormatError("IDX label file truncated: " + labels_path.string());
    }

    Dataset d;
    d.x = Matrix(count, pixels);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        d.x.data[i] = static_cast<double>(raw[i]) / 255.0;
    }
    d.y.resize(lbl_count);
    int max_label = 0;
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
        d.y[i] = static_cast<int>(raw_labels[i]);
        max_label = std::max(max_label, d.y[i]);
    }
    d.num_classes = max_label + 1;
    d.name = images_path.stem().string();
    return d;
}

Dataset split_classes(const Dataset& d, std::span<const int> classes) {
    if (classes.empty()) throw ArgumentError("split_classes: empty class subset");
    std::vector<bool> keep(static_cast<std::size_t>(d.num_classes), false);
    for (int c : classes) {
        if (c < 0 || c >= d.num_classes) {
            throw ArgumentError("split_classes: class " + std::to_string(c) + " out of range");
        }
        keep[static_cast<std::size_t>(c)] = true;
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (keep[static_cast<std::size_t>(d.y[i])]) rows.push_back(i);
    }
    if (rows.empty()) throw ArgumentError("split_classes: no examples match the class subset");

    Dataset out;
    out.x = Matrix(rows.size(), d.features());
    out.y.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t src = rows[r];
        std::copy_n(d.x.data.begin() + static_cast<std::ptrdiff_t>(src * d.features()),
                    d.features(), out.x.data.begin() + static_cast<std::ptrdiff_t>(r * d.features()));
        out.y.push_back(d.y[src]);
    }
    out.num_classes = d.num_classes;
    out.name = d.name;
    return out;
}

Dataset permute_features(const Dataset& d, std::span<const std::size_t> perm) {
    if (perm.size() != d.features()) {
        throw ArgumentError("permute_features: permutation length != feature count");
    }
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t p : perm) {
        if (p >= perm.size() || seen[p]) {
            throw ArgumentError("permute_features: not a bijection on [0, features)");
        }
        seen[p] = true;
    }
    Dataset out = d;
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.features(); ++j) {
            out.x(i, j) = d.x(i, perm[j]);
        }
    }
    return out;
}

Dataset make_blobs(Pcg32& rng, std::size_t per_class,
                   const std::vector<std::vector<double>>& centers, double stddev) {
    if (per_class == 0) throw ArgumentError("make_blobs: per_class must be >= 1");
    if (centers.empty()) throw ArgumentError("make_blobs: need at least one center");
    if (stddev < 0.0) throw ArgumentError("make_blobs: std must be >= 0");
    const std::size_t dim = centers.front().size();
    for (const auto& c : centers) {
        if (c.size() != dim) throw ArgumentError("make_blobs: centers have mismatched dimensions");
    }
    if (dim == 0) throw ArgumentError("make_blobs: centers must be non-empty vectors");

    Dataset d;
    d.x = Matrix(per_class * centers.size(), dim);
    d.y.reserve(d.x.rows);
    std::size_t row = 0;
    for (std::size_t k = 0; k < centers.size(); ++k) {
        for (std::size_t n = 0; n < per_class; ++n, ++row) {
            for (std::size_t j = 0; j < dim; ++j) {
                d.x(row, j) = centers[k][j] + stddev * rng.next_normal();
            }
            d.y.push_back(static_cast<int>(k));
        }
    }
    d.num_classes = static_cast<int>(centers.size());
    d.name = "blobs";
    return d;
}

Dataset make_synth_images(Pcg32& rng, const SynthImageOptions& opts) {
    if (opts.num_classes < 1) throw ArgumentError("make_synth_images: num_classes must be >= 1");
    if (opts.per_class == 0) throw ArgumentError("make_synth_images: per_class must be >= 1");
    if (opts.side < 4) throw ArgumentError("make_synth_images: side must be >= 4");
    if (opts.noise < 0.0) throw ArgumentError("make_synth_images: noise must be >= 0");

    const std::size_t side = opts.side;
    const std::size_t pixels = side * side;
    const std::size_t grid = 7; // low-resolution field bilinearly upsampled

    // One smooth prototype per class: random coarse field, upsampled, then
    // contrast-stretched so a digit-like subset of pixels saturates.
    std::vector<std::vector<double>> prototypes;
    for (int k = 0; k < opts.num_classes; ++k) {
        std::vector<double> coarse(grid * grid);
        for (double& v : coarse) v = rng.next_unit();
        std::vector<double> proto(pixels);
        const double scale = static_cast<double>(grid - 1) / static_cast<double>(side - 1);
        for (std::size_t r = 0; r < side; ++r) {
            for (std::size_t c = 0; c < side; ++c) {
                const double gr = static_cast<double>(r) * scale;
                const double gc = static_cast<double>(c) * scale;
                const std::size_t r0 = static_cast<std::size_t>(gr);
                const std::size_t c0 = static_cast<std::size_t>(gc);
                const std::size_t r1 = std::min(r0 + 1, grid - 1);
                const std::size_t c1 = std::min(c0 + 1, grid - 1);
                const double fr = gr - static_cast<double>(r0);
                const double fc = gc - static_cast<double>(c0);
                const double v = coarse[r0 * grid + c0] * (1 - fr) * (1 - fc) +
                                 coarse[r0 * grid + c1] * (1 - fr) * fc +
                                 coarse[r1 * grid + c0] * fr * (1 - fc) +
                                 coarse[r1 * grid + c1] * fr * fc;
                proto[r * side + c] = std::clamp((v - 0.45) * 3.0, 0.0, 1.0);
            }
        }
        prototypes.push_back(std::move(proto));
    }

    Dataset d;
    d.x = Matrix(opts.per_class * static_cast<std::size_t>(opts.num_classes), pixels);
    d.y.reserve(d.x.rows);
    std::size_t row = 0;
    for (int k = 0; k < opts.num_classes; ++k) {
        const auto& proto = prototypes[static_cast<std::size_t>(k)];
        for (std::size_t n = 0; n < opts.per_class; ++n, ++row) {
            const int span = 2 * opts.max_shift + 1;
            const int dr = opts.max_shift > 0
                               ? static_cast<int>(rng.next_below(static_cast<std::uint32_t>(span))) -
                                     opts.max_shift
                               : 0;
            const int dc = opts.max_shift > 0
                               ? static_cast<int>(rng.next_below(static_cast<std::uint32_t>(span))) -
                                     opts.max_shift
                               : 0;
            for (std::size_t r = 0; r < side; ++r) {
                for (std::size_t c = 0; c < side; ++c) {
                    const long sr = static_cast<long>(r) - dr;
                    const long sc = static_cast<long>(c) - dc;
                    double v = 0.0;
                    if (sr >= 0 && sr < static_cast<long>(side) && sc >= 0 &&
                        sc < static_cast<long>(side)) {
                        v = proto[static_cast<std::size_t>(sr) * side + static_cast<std::size_t>(sc)];
                    }
                    v += opts.noise * rng.next_normal();
                    d.x(row, r * side + c) = std::clamp(v, 0.0, 1.0);
                }
            }
            d.y.push_back(k);
        }
    }
    d.num_classes = opts.num_classes;
    d.name = "synth";
    return d;
}

void write_idx(const Dataset& d, std::size_t side, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path) {
    if (side * side != d.features()) {
        throw ArgumentError("write_idx: side^2 != feature count");
    }
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw DataError("cannot write " + images_path.string());
    write_be32(img, kImageMagic);
    write_be32(img, static_cast<std::uint32_t>(d.size()));
    write_be32(img, static_cast<std::uint32_t>(side));
    write_be32(img, static_cast<std::uint32_t>(side));
    std::vector<unsigned char> raw(d.x.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        raw[i] = static_cast<unsigned char>(
            std::lround(std::clamp(d.x.data[i], 0.0, 1.0) * 255.0));
    }
    img.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));

    std::ofstream lbl(labels_path, std::ios::binary);
    if (!lbl) throw DataError("cannot write " + labels_path.string());
    write_be32(lbl, kLabelMagic);
    write_be32(lbl, static_cast<std::uint32_t>(d.size()));
    std::vector<unsigned char> raw_labels(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        raw_labels[i] = static_cast<unsigned char>(d.y[i]);
    }
    lbl.write(reinterpret_cast<const char*>(raw_labels.data()),
              static_cast<std::streamsize>(raw_labels.size()));
}

} // namespace classp
