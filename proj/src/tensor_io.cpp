#include "nthp/tensor_io.hpp"

#include <cstring>
#include <fstream>

namespace nthp {

namespace {

constexpr char kMagic[4] = {'N', 'T', 'H', 'P'};
constexpr std::uint8_t kVersion = 1;

void append_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

std::uint32_t read_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string encode(const Tensor& t) {
    if (t.dims.empty() || t.dims.size() > 255) {
        throw IoError(IoStatus::BadRank, "tensor rank must be in [1,255]");
    }
    std::size_t count = 1;
    for (std::size_t d : t.dims) {
        if (d == 0 || d > 0xFFFFFFFFull) {
            throw IoError(IoStatus::BadDims, "tensor dimension out of range");
        }
        count *= d;
    }
    const std::size_t payload = t.dtype == TensorDtype::Float32 ? t.floats.size() : t.bytes.size();
    if (payload != count) {
        throw IoError(IoStatus::BadDims, "payload length does not match dims");
    }

    std::string out;
    out.reserve(7 + 4 * t.dims.size() + count * 4);
    out.append(kMagic, 4);
    out.push_back(static_cast<char>(kVersion));
    out.push_back(static_cast<char>(t.dtype));
    out.push_back(static_cast<char>(t.dims.size()));
    for (std::size_t d : t.dims) append_u32le(out, static_cast<std::uint32_t>(d));

    if (t.dtype == TensorDtype::Float32) {
        for (float f : t.floats) {
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            append_u32le(out, bits);
        }
    } else {
        out.append(reinterpret_cast<const char*>(t.bytes.data()), t.bytes.size());
    }
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(IoStatus::OpenFailed, "cannot open " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError(IoStatus::WriteFailed, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError(IoStatus::WriteFailed, "rename failed for " + path.string());
}

} // namespace

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
    write_atomic(path, encode(tensor));
}

void write_tensor(const std::filesystem::path& path, const DenseMap& map) {
    validate(map);
    Tensor t;
    t.dtype = TensorDtype::Float32;
    t.dims = map.dims;
    t.floats.reserve(map.data.size());
    for (double v : map.data) t.floats.push_back(static_cast<float>(v));
    write_tensor(path, t);
}

void write_tensor(const std::filesystem::path& path, const BinaryMask& mask) {
    validate(mask);
    Tensor t;
    t.dtype = TensorDtype::Uint8;
    t.dims = {mask.height, mask.width};
    t.bytes = mask.data;
    write_tensor(path, t);
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoStatus::OpenFailed, "cannot open " + path.string());
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (body.size() < 7) throw IoError(IoStatus::TruncatedPayload, "file shorter than header");
    const auto* p = reinterpret_cast<const unsigned char*>(body.data());
    if (std::memcmp(p, kMagic, 4) != 0) {
        throw IoError(IoStatus::BadMagic, "bad magic in " + path.string());
    }
    if (p[4] != kVersion) throw IoError(IoStatus::BadVersion, "unsupported version");
    if (p[5] > 1) throw IoError(IoStatus::BadDtype, "unknown dtype");
    const auto dtype = static_cast<TensorDtype>(p[5]);
    const std::size_t rank = p[6];
    if (rank == 0) throw IoError(IoStatus::BadRank, "rank must be >= 1");
    if (body.size() < 7 + 4 * rank) {
        throw IoError(IoStatus::TruncatedPayload, "truncated dimension table");
    }

    Tensor t;
    t.dtype = dtype;
    std::size_t count = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        const std::uint32_t d = read_u32le(p + 7 + 4 * i);
        if (d == 0) throw IoError(IoStatus::BadDims, "zero-sized dimension");
        t.dims.push_back(d);
        count *= d;
    }

    const std::size_t element = dtype == TensorDtype::Float32 ? 4 : 1;
    const std::size_t offset = 7 + 4 * rank;
    if (body.size() < offset + count * element) {
        throw IoError(IoStatus::TruncatedPayload, "truncated payload in " + path.string());
    }
    if (body.size() > offset + count * element) {
        throw IoError(IoStatus::TrailingBytes, "trailing bytes in " + path.string());
    }

    if (dtype == TensorDtype::Float32) {
        t.floats.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            const std::uint32_t bits = read_u32le(p + offset + 4 * i);
            float f;
            std::memcpy(&f, &bits, 4);
            t.floats[i] = f;
        }
    } else {
        t.bytes.assign(p + offset, p + offset + count);
    }
    return t;
}

DenseMap read_map(const std::filesystem::path& path) {
    Tensor t = read_tensor(path);
    if (t.dtype != TensorDtype::Float32) {
        throw IoError(IoStatus::DtypeMismatch, "expected a float tensor in " + path.string());
    }
    DenseMap map;
    map.dims = t.dims;
    map.data.reserve(t.floats.size());
    for (float f : t.floats) map.data.push_back(static_cast<double>(f));
    validate(map);
    return map;
}

BinaryMask read_mask(const std::filesystem::path& path) {
    Tensor t = read_tensor(path);
    if (t.dtype != TensorDtype::Uint8 || t.dims.size() != 2) {
        throw IoError(IoStatus::DtypeMismatch, "expected a rank-2 byte tensor in " + path.string());
    }
    BinaryMask mask;
    mask.height = t.dims[0];
    mask.width = t.dims[1];
    mask.data = std::move(t.bytes);
    validate(mask);
    return mask;
}

} // namespace nthp
