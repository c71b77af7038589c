#include "nthp/mask.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nthp {

BinaryMask BinaryMask::zeros(std::size_t height, std::size_t width) {
    BinaryMask m;
    m.height = height;
    m.width = width;
    m.data.assign(height * width, 0);
    return m;
}

std::size_t BinaryMask::area() const {
    std::size_t n = 0;
    for (std::uint8_t v : data) n += v;
    return n;
}

DenseMap DenseMap::zeros(std::vector<std::size_t> dims) {
    DenseMap m;
    m.dims = std::move(dims);
    m.data.assign(m.length(), 0.0);
    return m;
}

std::size_t DenseMap::length() const {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
}

void validate(const BinaryMask& mask) {
    if (mask.height < 1 || mask.width < 1) {
        throw std::invalid_argument("BinaryMask: height and width must be >= 1");
    }
    if (mask.data.size() != mask.height * mask.width) {
        throw std::invalid_argument("BinaryMask: data length does not match height*width");
    }
    for (std::uint8_t v : mask.data) {
        if (v > 1) throw std::invalid_argument("BinaryMask: values must be 0 or 1");
    }
}

void validate(const DenseMap& map) {
    if (map.dims.empty()) {
        throw std::invalid_argument("DenseMap: rank must be >= 1");
    }
    for (std::size_t d : map.dims) {
        if (d == 0) throw std::invalid_argument("DenseMap: zero-sized dimension");
    }
    if (map.data.size() != map.length()) {
        throw std::invalid_argument("DenseMap: data length does not match dims");
    }
    for (double v : map.data) {
        if (!std::isfinite(v)) throw std::invalid_argument("DenseMap: non-finite value");
    }
}

double iou(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("iou: mask dimensions differ");
    }
    std::size_t inter = 0, uni = 0;
    for (std::size_t p = 0; p < a.data.size(); ++p) {
        inter += static_cast<std::size_t>(a.data[p] & b.data[p]);
        uni += static_cast<std::size_t>(a.data[p] | b.data[p]);
    }
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

CenterExtent mass_center_extent(const BinaryMask& m) {
    std::size_t count = 0;
    double sum_x = 0.0, sum_y = 0.0;
    std::size_t min_x = m.width, max_x = 0, min_y = m.height, max_y = 0;
    for (std::size_t y = 0; y < m.height; ++y) {
        for (std::size_t x = 0; x < m.width; ++x) {
            if (!m.at(y, x)) continue;
            ++count;
            sum_x += static_cast<double>(x);
            sum_y += static_cast<double>(y);
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
        }
    }
    if (count == 0) {
        throw std::invalid_argument("mass_center_extent: empty mask");
    }
    CenterExtent ce;
    ce.cx = sum_x / static_cast<double>(count);
    ce.cy = sum_y / static_cast<double>(count);
    ce.width = max_x - min_x + 1;
    ce.height = max_y - min_y + 1;
    return ce;
}

BinaryMask threshold_map(const DenseMap& m, double t) {
    if (m.rank() != 2) {
        throw std::invalid_argument("threshold_map: expected a rank-2 map");
    }
    if (!(t > 0.0 && t < 1.0)) {
        throw std::invalid_argument("threshold_map: threshold must lie in (0,1)");
    }
    BinaryMask out = BinaryMask::zeros(m.dims[0], m.dims[1]);
    for (std::size_t p = 0; p < m.data.size(); ++p) {
        out.data[p] = m.data[p] > t ? 1 : 0;
    }
    return out;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace nthp
