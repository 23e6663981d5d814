#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "edgebench/sparse.hpp"

namespace edgebench {

/// Row-major image with interleaved channels; pixel values lie in [0, 1].
struct Image {
    std::vector<double> pixels;
    int height = 0;
    int width = 0;
    int channels = 1;

    std::size_t size() const { return static_cast<std::size_t>(height) * width * channels; }
    bool operator==(const Image&) const = default;
};

struct Dataset {
    std::string name;
    std::vector<Image> images;
    std::vector<int> labels;
    int n_classes = 0;

    std::size_t size() const { return images.size(); }
    /// Pixels per image (height * width * channels); 0 for an empty dataset.
    std::size_t feature_count() const { return images.empty() ? 0 : images.front().size(); }
    double zero_fraction() const;

    /// Throws DataError describing the first broken invariant.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

struct SyntheticSpec {
    int n_images = 300;
    int resolution = 28;
    int channels = 1;
    int n_classes = 10;
    double sparsity = 0.0;          ///< target fraction of zero pixels, [0, 1)
    double class_separation = 1.0;  ///< class signal relative to unit noise, >= 0
    std::uint64_t seed = 1;
    std::string name = "synthetic";
};

/**
 * Balanced synthetic image set. Each class owns a fixed template of standard
 * normal values t; a pixel is logistic(class_separation * t + noise) with unit
 * Gaussian noise, so class_separation acts as a signal-to-noise ratio. Pixels
 * whose latent value falls below the `sparsity` quantile are zeroed, so the
 * zero pattern follows the class template the way strokes do in digit scans.
 */
Dataset generate_synthetic(const SyntheticSpec& spec);

/**
 * Load a class-per-subdirectory image tree (PNG, PGM, PPM). Subdirectories
 * are labelled in lexicographic order. Images are stretched to
 * resolution x resolution with bilinear interpolation and converted to one
 * channel (grayscale) or three. Undecodable files are skipped with a warning.
 */
Dataset ingest_images(const std::filesystem::path& dir, int resolution, bool grayscale);

/// Bilinear resize with half-pixel centers. Same-size resizes return an exact copy.
Image resize_bilinear(const Image& image, int height, int width);

/**
 * One variant per (size, resolution) pair, size-major. Size subsets are
 * nested: a class-interleaved ordering of the base set is drawn once per
 * seed and each subset takes a prefix of it.
 */
std::vector<Dataset> standardize(const Dataset& base, const std::vector<int>& sizes,
                                 const std::vector<int>& resolutions, std::uint64_t seed);

/// Stratified, disjoint split; every class contributes at least one image to each side.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction, std::uint64_t seed);

/// Zero fraction above which a dataset is stored in compressed form.
inline constexpr double kSparseThreshold = 0.5;

FeatureMatrix to_dense_matrix(const Dataset& dataset);
FeatureMatrix to_sparse(const Dataset& dataset);
/// Sparse when the dataset's zero fraction exceeds kSparseThreshold, dense otherwise.
FeatureMatrix to_feature_matrix(const Dataset& dataset);

/// CSV with header id,label,h,w,c,p0..pN. The dataset name comes from the file stem.
void save_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset_csv(const std::filesystem::path& path);

}  // namespace edgebench
