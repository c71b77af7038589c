#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nthp {

// Dense binary mask over the image plane, row-major, values are exactly 0/1.
// Pixel coordinates are zero-based with x = column, y = row.
struct BinaryMask {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> data;

    static BinaryMask zeros(std::size_t height, std::size_t width);

    std::uint8_t at(std::size_t y, std::size_t x) const { return data[y * width + x]; }
    std::uint8_t& at(std::size_t y, std::size_t x) { return data[y * width + x]; }

    std::size_t size() const { return height * width; }
    std::size_t area() const;        // foreground pixel count
    bool any() const { return area() > 0; }
    bool same_shape(const BinaryMask& other) const {
        return height == other.height && width == other.width;
    }

    bool operator==(const BinaryMask&) const = default;
};

// Rank-N real tensor, row-major. Used for score maps, prototype banks,
// coefficient grids and synthesized soft masks.
struct DenseMap {
    std::vector<std::size_t> dims;
    std::vector<double> data;

    static DenseMap zeros(std::vector<std::size_t> dims);

    std::size_t rank() const { return dims.size(); }
    std::size_t length() const;      // product of dims

    // rank-2 accessor (i = row, j = column)
    double at2(std::size_t i, std::size_t j) const { return data[i * dims[1] + j]; }
    double& at2(std::size_t i, std::size_t j) { return data[i * dims[1] + j]; }

    // rank-3 accessor (k = channel)
    double at3(std::size_t k, std::size_t i, std::size_t j) const {
        return data[(k * dims[1] + i) * dims[2] + j];
    }
    double& at3(std::size_t k, std::size_t i, std::size_t j) {
        return data[(k * dims[1] + i) * dims[2] + j];
    }

    bool operator==(const DenseMap&) const = default;
};

// Throw std::invalid_argument if the structural invariants do not hold
// (shape/data length agreement, 0/1 values, finite values).
void validate(const BinaryMask& mask);
void validate(const DenseMap& map);

// Intersection-over-union of two same-shape masks. Two empty masks give 0.
double iou(const BinaryMask& a, const BinaryMask& b);

struct CenterExtent {
    double cx = 0.0;          // mean x of foreground pixels
    double cy = 0.0;          // mean y of foreground pixels
    std::size_t width = 0;    // extent of the minimal axis-aligned bounding box
    std::size_t height = 0;
};

// Mass center and bounding-box extents of a nonempty mask.
CenterExtent mass_center_extent(const BinaryMask& m);

// Binarize a rank-2 map with the strict rule out[p] = 1 iff m[p] > t, so a
// uniform map sitting exactly at t yields the empty mask.
BinaryMask threshold_map(const DenseMap& m, double t);

// Numerically stable logistic function.
double sigmoid(double x);

} // namespace nthp
