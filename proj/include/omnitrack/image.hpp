#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace omnitrack {

// 8-bit row-major raster, 1 or 3 channels.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> data;

    Image() = default;
    Image(int w, int h, int c, std::uint8_t fill = 0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, fill) {
        if (w <= 0 || h <= 0 || (c != 1 && c != 3))
            throw std::invalid_argument("Image: bad dimensions or channel count");
    }

    std::uint8_t& at(int i, int j, int c = 0) {
        return data[(static_cast<std::size_t>(j) * width + i) * channels + c];
    }
    std::uint8_t at(int i, int j, int c = 0) const {
        return data[(static_cast<std::size_t>(j) * width + i) * channels + c];
    }
};

// Binary occupancy raster; values are exactly 0 or 1.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    Mask() = default;
    Mask(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("Mask: bad dimensions");
    }

    bool get(int i, int j) const { return data[static_cast<std::size_t>(j) * width + i] != 0; }
    void set(int i, int j, bool v = true) {
        data[static_cast<std::size_t>(j) * width + i] = v ? 1 : 0;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto b : data) n += b;
        return n;
    }
    bool any() const {
        for (auto b : data)
            if (b) return true;
        return false;
    }
};

}  // namespace omnitrack
