#include "edgebench/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <png.h>

#include "edgebench/common.hpp"

namespace edgebench {

namespace {

bool has_png_signature(const std::vector<unsigned char>& bytes) {
    return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

Image decode_png(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()) == 0) {
        throw DataError("cannot decode PNG " + path.string() + ": " + img.message);
    }
    img.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(img));
    if (png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr) == 0) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw DataError("cannot decode PNG " + path.string() + ": " + msg);
    }
    Image out;
    out.height = static_cast<int>(img.height);
    out.width = static_cast<int>(img.width);
    out.channels = 3;
    out.pixels.resize(buffer.size());
    std::transform(buffer.begin(), buffer.end(), out.pixels.begin(), [](unsigned char v) { return v / 255.0; });
    return out;
}

class NetpbmReader {
public:
    NetpbmReader(const std::vector<unsigned char>& bytes, const std::filesystem::path& path)
        : bytes_(bytes), path_(path) {}

    Image read() {
        if (bytes_.size() < 2 || bytes_[0] != 'P') {
            fail("not a Netpbm file");
        }
        const char kind = static_cast<char>(bytes_[1]);
        if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
            fail("unsupported Netpbm variant");
        }
        pos_ = 2;
        const long width = next_int();
        const long height = next_int();
        const long maxval = next_int();
        if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
            fail("bad header");
        }
        const bool color = kind == '3' || kind == '6';
        const bool binary = kind == '5' || kind == '6';
        const int channels = color ? 3 : 1;
        const std::size_t count = static_cast<std::size_t>(width) * height * channels;

        std::vector<double> values(count);
        if (binary) {
            ++pos_;  // single whitespace after maxval
            const std::size_t bytes_per = maxval > 255 ? 2 : 1;
            if (bytes_.size() < pos_ + count * bytes_per) {
                fail("truncated pixel data");
            }
            for (std::size_t i = 0; i < count; ++i) {
                unsigned v = bytes_[pos_ + i * bytes_per];
                if (bytes_per == 2) {
                    v = (v << 8) | bytes_[pos_ + i * 2 + 1];
                }
                values[i] = static_cast<double>(v) / static_cast<double>(maxval);
            }
        } else {
            for (std::size_t i = 0; i < count; ++i) {
                values[i] = static_cast<double>(next_int()) / static_cast<double>(maxval);
            }
        }
        Image img{std::move(values), static_cast<int>(height), static_cast<int>(width), channels};
        return color ? img : to_rgb(img);
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw DataError("cannot decode " + path_.string() + ": " + what);
    }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(bytes_[pos_]) != 0) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long next_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || std::isdigit(bytes_[pos_]) == 0) {
            fail("expected integer");
        }
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_]) != 0) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000'000L) {
                fail("integer overflow");
            }
            ++pos_;
        }
        return v;
    }

    const std::vector<unsigned char>& bytes_;
    const std::filesystem::path& path_;
    std::size_t pos_ = 0;
};

std::vector<unsigned char> to_bytes(const Image& image) {
    std::vector<unsigned char> out(image.pixels.size());
    std::transform(image.pixels.begin(), image.pixels.end(), out.begin(), [](double v) {
        return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    });
    return out;
}

}  // namespace

Image read_image_rgb(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (has_png_signature(bytes)) {
        return decode_png(bytes, path);
    }
    return NetpbmReader(bytes, path).read();
}

Image to_grayscale(const Image& image) {
    if (image.channels == 1) {
        return image;
    }
    Image out{{}, image.height, image.width, 1};
    const std::size_t n = static_cast<std::size_t>(image.height) * image.width;
    out.pixels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = image.pixels.data() + i * 3;
        out.pixels[i] = std::clamp(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2], 0.0, 1.0);
    }
    return out;
}

Image to_rgb(const Image& image) {
    if (image.channels == 3) {
        return image;
    }
    Image out{{}, image.height, image.width, 3};
    out.pixels.reserve(image.pixels.size() * 3);
    for (const double v : image.pixels) {
        out.pixels.insert(out.pixels.end(), 3, v);
    }
    return out;
}

void write_netpbm(const Image& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << (image.channels == 3 ? "P6" : "P5") << '\n' << image.width << ' ' << image.height << "\n255\n";
    const auto bytes = to_bytes(image);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_png(const Image& image, const std::filesystem::path& path) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width);
    img.height = static_cast<png_uint_32>(image.height);
    img.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const auto bytes = to_bytes(image);
    if (png_image_write_to_file(&img, path.c_str(), 0, bytes.data(), 0, nullptr) == 0) {
        throw DataError("cannot write PNG " + path.string() + ": " + img.message);
    }
}

}  // namespace edgebench
