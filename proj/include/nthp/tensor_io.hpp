#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "nthp/mask.hpp"

namespace nthp {

// Binary tensor container: magic "NTHP", version byte 1, dtype byte, rank
// byte, rank x 32-bit little-endian dims, then the row-major payload.
// dtype 0 stores 32-bit little-endian floats, dtype 1 unsigned bytes.
enum class TensorDtype : std::uint8_t { Float32 = 0, Uint8 = 1 };

enum class IoStatus {
    OpenFailed,
    WriteFailed,
    BadMagic,
    BadVersion,
    BadDtype,
    BadRank,
    BadDims,
    TruncatedPayload,
    TrailingBytes,
    DtypeMismatch,
};

class IoError : public std::runtime_error {
public:
    IoError(IoStatus status, const std::string& message)
        : std::runtime_error(message), status_(status) {}
    IoStatus status() const { return status_; }

private:
    IoStatus status_;
};

struct Tensor {
    TensorDtype dtype = TensorDtype::Float32;
    std::vector<std::size_t> dims;
    std::vector<float> floats;          // dtype Float32
    std::vector<std::uint8_t> bytes;    // dtype Uint8
};

// Writes go through a temp file plus rename, so readers never observe a
// partial tensor. DenseMap values are narrowed to float32; BinaryMask data
// is stored as bytes.
void write_tensor(const std::filesystem::path& path, const DenseMap& map);
void write_tensor(const std::filesystem::path& path, const BinaryMask& mask);
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);

Tensor read_tensor(const std::filesystem::path& path);

// Typed readers; dtype disagreement raises IoError{DtypeMismatch}, a byte
// payload with values other than 0/1 fails BinaryMask validation.
DenseMap read_map(const std::filesystem::path& path);
BinaryMask read_mask(const std::filesystem::path& path);

} // namespace nthp
