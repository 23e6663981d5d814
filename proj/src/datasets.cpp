#include "edgebench/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "edgebench/common.hpp"
#include "edgebench/image_io.hpp"

namespace edgebench {

namespace fs = std::filesystem;

double Dataset::zero_fraction() const {
    std::size_t zeros = 0;
    std::size_t total = 0;
    for (const Image& img : images) {
        total += img.pixels.size();
        zeros += static_cast<std::size_t>(std::count(img.pixels.begin(), img.pixels.end(), 0.0));
    }
    return total == 0 ? 0.0 : static_cast<double>(zeros) / static_cast<double>(total);
}

void Dataset::validate() const {
    if (images.size() != labels.size()) {
        throw DataError("dataset '" + name + "': " + std::to_string(images.size()) + " images but " +
                        std::to_string(labels.size()) + " labels");
    }
    for (std::size_t i = 0; i < images.size(); ++i) {
        const Image& img = images[i];
        if (img.channels != 1 && img.channels != 3) {
            throw DataError("dataset '" + name + "': image " + std::to_string(i) + " has " +
                            std::to_string(img.channels) + " channels");
        }
        if (img.pixels.size() != img.size()) {
            throw DataError("dataset '" + name + "': image " + std::to_string(i) + " pixel count mismatch");
        }
        const Image& first = images.front();
        if (img.height != first.height || img.width != first.width || img.channels != first.channels) {
            throw DataError("dataset '" + name + "': image " + std::to_string(i) + " shape differs from image 0");
        }
        for (const double v : img.pixels) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw DataError("dataset '" + name + "': image " + std::to_string(i) + " pixel outside [0,1]");
            }
        }
        if (labels[i] < 0 || labels[i] >= n_classes) {
            throw DataError("dataset '" + name + "': label " + std::to_string(labels[i]) + " of image " +
                            std::to_string(i) + " outside [0, " + std::to_string(n_classes) + ")");
        }
    }
}

namespace {

double normal_quantile(double p) {
    double lo = -40.0;
    double hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_classes < 1) {
        throw ConfigError("SyntheticSpec.n_classes must be >= 1");
    }
    if (spec.n_images < 1 || spec.n_images % spec.n_classes != 0) {
        throw ConfigError("SyntheticSpec.n_images must be a positive multiple of n_classes");
    }
    if (spec.resolution < 1) {
        throw ConfigError("SyntheticSpec.resolution must be >= 1");
    }
    if (spec.channels != 1 && spec.channels != 3) {
        throw ConfigError("SyntheticSpec.channels must be 1 or 3");
    }
    if (!(spec.sparsity >= 0.0 && spec.sparsity < 1.0)) {
        throw ConfigError("SyntheticSpec.sparsity must be in [0, 1)");
    }
    if (!(spec.class_separation >= 0.0) || !std::isfinite(spec.class_separation)) {
        throw ConfigError("SyntheticSpec.class_separation must be finite and >= 0");
    }

    const std::size_t pixels = static_cast<std::size_t>(spec.resolution) * spec.resolution * spec.channels;
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    // z ~ N(0, separation^2 + 1) over pixels and classes, so this cutoff zeroes a `sparsity` fraction on average.
    const double cutoff = spec.sparsity > 0.0
                              ? normal_quantile(spec.sparsity) * std::sqrt(spec.class_separation * spec.class_separation + 1.0)
                              : -std::numeric_limits<double>::infinity();

    std::vector<std::vector<double>> templates(static_cast<std::size_t>(spec.n_classes), std::vector<double>(pixels));
    for (auto& t : templates) {
        for (double& v : t) {
            v = normal(rng);
        }
    }

    Dataset ds;
    ds.name = spec.name;
    ds.n_classes = spec.n_classes;
    ds.images.reserve(static_cast<std::size_t>(spec.n_images));
    ds.labels.reserve(static_cast<std::size_t>(spec.n_images));
    for (int i = 0; i < spec.n_images; ++i) {
        const int label = i % spec.n_classes;
        const auto& tmpl = templates[static_cast<std::size_t>(label)];
        Image img{std::vector<double>(pixels), spec.resolution, spec.resolution, spec.channels};
        for (std::size_t p = 0; p < pixels; ++p) {
            const double z = spec.class_separation * tmpl[p] + normal(rng);
            img.pixels[p] = z >= cutoff ? 1.0 / (1.0 + std::exp(-z)) : 0.0;
        }
        ds.images.push_back(std::move(img));
        ds.labels.push_back(label);
    }
    return ds;
}

Image resize_bilinear(const Image& image, int height, int width) {
    if (height < 1 || width < 1) {
        throw ConfigError("resize_bilinear: target size must be positive");
    }
    if (height == image.height && width == image.width) {
        return image;
    }
    const int c = image.channels;
    Image out{std::vector<double>(static_cast<std::size_t>(height) * width * c), height, width, c};
    const double sy = static_cast<double>(image.height) / height;
    const double sx = static_cast<double>(image.width) / width;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(image.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, image.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(image.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, image.width - 1);
            const double wx = fx - x0;
            for (int ch = 0; ch < c; ++ch) {
                auto at = [&](int yy, int xx) {
                    return image.pixels[(static_cast<std::size_t>(yy) * image.width + xx) * c + ch];
                };
                const double top = at(y0, x0) * (1.0 - wx) + at(y0, x1) * wx;
                const double bottom = at(y1, x0) * (1.0 - wx) + at(y1, x1) * wx;
                out.pixels[(static_cast<std::size_t>(y) * width + x) * c + ch] =
                    std::clamp(top * (1.0 - wy) + bottom * wy, 0.0, 1.0);
            }
        }
    }
    return out;
}

Dataset ingest_images(const fs::path& dir, int resolution, bool grayscale) {
    if (resolution < 1) {
        throw ConfigError("ingest_images: resolution must be >= 1");
    }
    if (!fs::is_directory(dir)) {
        throw DataError("ingest_images: not a directory: " + dir.string());
    }
    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory()) {
            class_dirs.push_back(entry.path());
        }
    }
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.empty()) {
        throw DataError("ingest_images: no class subdirectories in " + dir.string());
    }

    Dataset ds;
    ds.name = dir.filename().string();
    ds.n_classes = static_cast<int>(class_dirs.size());
    for (std::size_t label = 0; label < class_dirs.size(); ++label) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(class_dirs[label])) {
            if (entry.is_regular_file()) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        std::size_t loaded = 0;
        for (const auto& file : files) {
            Image img;
            try {
                img = read_image_rgb(file);
            } catch (const DataError& e) {
                warn(std::string("skipping ") + e.what());
                continue;
            }
            img = resize_bilinear(img, resolution, resolution);
            ds.images.push_back(grayscale ? to_grayscale(img) : img);
            ds.labels.push_back(static_cast<int>(label));
            ++loaded;
        }
        if (loaded == 0) {
            throw DataError("ingest_images: class directory has no decodable images: " + class_dirs[label].string());
        }
    }
    ds.validate();
    return ds;
}

std::vector<Dataset> standardize(const Dataset& base, const std::vector<int>& sizes,
                                 const std::vector<int>& resolutions, std::uint64_t seed) {
    if (sizes.empty() || resolutions.empty()) {
        throw ConfigError("standardize: sizes and resolutions must be nonempty");
    }
    for (const int s : sizes) {
        if (s < 1 || static_cast<std::size_t>(s) > base.size()) {
            throw ConfigError("standardize: size " + std::to_string(s) + " outside [1, " +
                              std::to_string(base.size()) + "]");
        }
    }
    for (const int r : resolutions) {
        if (r < 1) {
            throw ConfigError("standardize: resolution must be >= 1");
        }
    }

    // Per-class shuffled queues, drained round-robin so every prefix is as balanced as the base allows.
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(base.n_classes));
    for (std::size_t i = 0; i < base.size(); ++i) {
        by_class[static_cast<std::size_t>(base.labels[i])].push_back(i);
    }
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
    }
    std::vector<std::size_t> order;
    order.reserve(base.size());
    for (std::size_t round = 0; order.size() < base.size(); ++round) {
        for (const auto& members : by_class) {
            if (round < members.size()) {
                order.push_back(members[round]);
            }
        }
    }

    std::vector<Dataset> variants;
    variants.reserve(sizes.size() * resolutions.size());
    for (const int size : sizes) {
        std::vector<std::size_t> subset(order.begin(), order.begin() + size);
        std::sort(subset.begin(), subset.end());
        for (const int res : resolutions) {
            Dataset v;
            v.name = base.name + "_n" + std::to_string(size) + "_r" + std::to_string(res);
            v.n_classes = base.n_classes;
            v.images.reserve(subset.size());
            for (const std::size_t idx : subset) {
                v.images.push_back(resize_bilinear(base.images[idx], res, res));
                v.labels.push_back(base.labels[idx]);
            }
            variants.push_back(std::move(v));
        }
    }
    return variants;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("split: train_fraction must be in (0, 1)");
    }
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(dataset.n_classes));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::vector<char> in_train(dataset.size(), 0);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        if (members.empty()) {
            continue;
        }
        if (members.size() < 2) {
            throw DataError("split: class " + std::to_string(c) + " has fewer than 2 members");
        }
        std::shuffle(members.begin(), members.end(), rng);
        const auto want = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(members.size())));
        const std::size_t n_train = std::clamp<std::size_t>(want, 1, members.size() - 1);
        for (std::size_t k = 0; k < n_train; ++k) {
            in_train[members[k]] = 1;
        }
    }
    Dataset train{dataset.name + "_train", {}, {}, dataset.n_classes};
    Dataset test{dataset.name + "_test", {}, {}, dataset.n_classes};
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        Dataset& dst = in_train[i] != 0 ? train : test;
        dst.images.push_back(dataset.images[i]);
        dst.labels.push_back(dataset.labels[i]);
    }
    return {std::move(train), std::move(test)};
}

FeatureMatrix to_dense_matrix(const Dataset& dataset) {
    const std::size_t d = dataset.feature_count();
    std::vector<double> data;
    data.reserve(dataset.size() * d);
    for (const Image& img : dataset.images) {
        if (img.pixels.size() != d) {
            throw DataError("to_dense_matrix: images differ in size");
        }
        data.insert(data.end(), img.pixels.begin(), img.pixels.end());
    }
    return FeatureMatrix::dense(std::move(data), dataset.size(), d);
}

FeatureMatrix to_sparse(const Dataset& dataset) {
    const std::size_t d = dataset.feature_count();
    std::vector<std::size_t> offsets{0};
    std::vector<std::uint32_t> idx;
    std::vector<double> val;
    for (const Image& img : dataset.images) {
        if (img.pixels.size() != d) {
            throw DataError("to_sparse: images differ in size");
        }
        for (std::size_t c = 0; c < d; ++c) {
            if (img.pixels[c] != 0.0) {
                idx.push_back(static_cast<std::uint32_t>(c));
                val.push_back(img.pixels[c]);
            }
        }
        offsets.push_back(val.size());
    }
    return FeatureMatrix::sparse(SparseMatrix(dataset.size(), d, std::move(offsets), std::move(idx), std::move(val)));
}

FeatureMatrix to_feature_matrix(const Dataset& dataset) {
    return dataset.zero_fraction() > kSparseThreshold ? to_sparse(dataset) : to_dense_matrix(dataset);
}

void save_dataset_csv(const Dataset& dataset, const fs::path& path) {
    dataset.validate();
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "id,label,h,w,c";
    for (std::size_t p = 0; p < dataset.feature_count(); ++p) {
        out << ",p" << p;
    }
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Image& img = dataset.images[i];
        out << i << ',' << dataset.labels[i] << ',' << img.height << ',' << img.width << ',' << img.channels;
        for (const double v : img.pixels) {
            const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << std::string_view(buf, static_cast<std::size_t>(n));
        }
        out << '\n';
    }
}

Dataset load_dataset_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line.rfind("id,label,h,w,c", 0) != 0) {
        throw DataError(path.string() + ":1: expected header id,label,h,w,c,p0..pN");
    }
    Dataset ds;
    ds.name = path.stem().string();
    std::size_t line_no = 1;
    int max_label = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        auto fail = [&](const std::string& what) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + what);
        };
        if (fields.size() < 5) {
            fail("too few fields");
        }
        auto parse_int = [&](std::string_view f) {
            int v = 0;
            const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
            if (r.ec != std::errc() || r.ptr != f.data() + f.size()) {
                fail("bad integer '" + std::string(f) + "'");
            }
            return v;
        };
        const int label = parse_int(fields[1]);
        Image img{{}, parse_int(fields[2]), parse_int(fields[3]), parse_int(fields[4])};
        if (img.height < 1 || img.width < 1 || (img.channels != 1 && img.channels != 3)) {
            fail("bad image shape");
        }
        if (fields.size() != 5 + img.size()) {
            fail("expected " + std::to_string(img.size()) + " pixel values");
        }
        img.pixels.reserve(img.size());
        for (std::size_t k = 5; k < fields.size(); ++k) {
            const std::string s(fields[k]);
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (s.empty() || end != s.c_str() + s.size()) {
                fail("bad pixel value '" + s + "'");
            }
            img.pixels.push_back(v);
        }
        max_label = std::max(max_label, label);
        ds.images.push_back(std::move(img));
        ds.labels.push_back(label);
    }
    ds.n_classes = max_label + 1;
    ds.validate();
    return ds;
}

}  // namespace edgebench
