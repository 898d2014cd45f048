#include "hazelab/fwbt.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <limits>

#include "hazelab/error.hpp"

namespace hazelab::fwbt {

namespace {

constexpr char kMagic[4] = {'F', 'W', 'B', 'T'};
constexpr uint8_t kVersion = 1;
constexpr uint8_t kDtypeF32LE = 0;

struct FileCloser {
    FILE* f = nullptr;
    ~FileCloser() {
        if (f) std::fclose(f);
    }
};

void put_u32le(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(uint8_t(v & 0xff));
    out.push_back(uint8_t((v >> 8) & 0xff));
    out.push_back(uint8_t((v >> 16) & 0xff));
    out.push_back(uint8_t((v >> 24) & 0xff));
}

uint32_t get_u32le(const uint8_t* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
           uint32_t(p[3]) << 24;
}

}  // namespace

void write(const std::string& path, const std::vector<uint32_t>& dims,
           const float* data, size_t count) {
    if (dims.size() < 2 || dims.size() > 4)
        fail(ErrorCode::Data, "fwbt: rank must be 2, 3 or 4");
    size_t expected = 1;
    for (uint32_t d : dims) {
        if (d == 0) fail(ErrorCode::Data, "fwbt: empty dimension rejected at write");
        if (expected > std::numeric_limits<size_t>::max() / d)
            fail(ErrorCode::Data, "fwbt: dimension overflow");
        expected *= d;
    }
    if (expected != count)
        fail(ErrorCode::Data, "fwbt: payload size does not match dims");
    for (size_t i = 0; i < count; ++i)
        if (!std::isfinite(data[i]))
            fail(ErrorCode::Numeric, "fwbt: nonfinite value rejected at write");

    std::vector<uint8_t> header;
    header.insert(header.end(), kMagic, kMagic + 4);
    header.push_back(kVersion);
    header.push_back(kDtypeF32LE);
    header.push_back(uint8_t(dims.size()));
    for (uint32_t d : dims) put_u32le(header, d);

    FileCloser fc{std::fopen(path.c_str(), "wb")};
    if (!fc.f) fail(ErrorCode::Data, "fwbt: cannot open for write: " + path);
    if (std::fwrite(header.data(), 1, header.size(), fc.f) != header.size())
        fail(ErrorCode::Data, "fwbt: write failed: " + path);

    if constexpr (std::endian::native == std::endian::little) {
        if (std::fwrite(data, sizeof(float), count, fc.f) != count)
            fail(ErrorCode::Data, "fwbt: write failed: " + path);
    } else {
        std::vector<uint8_t> buf(count * 4);
        for (size_t i = 0; i < count; ++i) {
            uint32_t bits;
            std::memcpy(&bits, &data[i], 4);
            buf[i * 4 + 0] = uint8_t(bits & 0xff);
            buf[i * 4 + 1] = uint8_t((bits >> 8) & 0xff);
            buf[i * 4 + 2] = uint8_t((bits >> 16) & 0xff);
            buf[i * 4 + 3] = uint8_t((bits >> 24) & 0xff);
        }
        if (std::fwrite(buf.data(), 1, buf.size(), fc.f) != buf.size())
            fail(ErrorCode::Data, "fwbt: write failed: " + path);
    }
}

Payload read(const std::string& path) {
    FileCloser fc{std::fopen(path.c_str(), "rb")};
    if (!fc.f) fail(ErrorCode::Data, "fwbt: cannot open: " + path);

    uint8_t head[7];
    if (std::fread(head, 1, 7, fc.f) != 7)
        fail(ErrorCode::Data, "fwbt: truncated header: " + path);
    if (std::memcmp(head, kMagic, 4) != 0)
        fail(ErrorCode::Data, "fwbt: bad magic: " + path);
    if (head[4] != kVersion)
        fail(ErrorCode::Data, "fwbt: unsupported version " + std::to_string(head[4]));
    if (head[5] != kDtypeF32LE)
        fail(ErrorCode::Data, "fwbt: unsupported dtype " + std::to_string(head[5]));
    int rank = head[6];
    if (rank < 2 || rank > 4)
        fail(ErrorCode::Data, "fwbt: bad rank " + std::to_string(rank));

    Payload p;
    p.rank = rank;
    uint8_t dimbuf[16];
    if (std::fread(dimbuf, 1, size_t(rank) * 4, fc.f) != size_t(rank) * 4)
        fail(ErrorCode::Data, "fwbt: truncated dims: " + path);
    size_t count = 1;
    for (int i = 0; i < rank; ++i) {
        uint32_t d = get_u32le(dimbuf + i * 4);
        if (d == 0) fail(ErrorCode::Data, "fwbt: empty dimension: " + path);
        if (count > (size_t(1) << 40) / d)
            fail(ErrorCode::Data, "fwbt: dimension overflow: " + path);
        count *= d;
        p.dims[size_t(i)] = d;
    }

    p.data.resize(count);
    size_t got;
    if constexpr (std::endian::native == std::endian::little) {
        got = std::fread(p.data.data(), sizeof(float), count, fc.f);
    } else {
        std::vector<uint8_t> buf(count * 4);
        got = std::fread(buf.data(), 4, count, fc.f);
        for (size_t i = 0; i < got; ++i) {
            uint32_t bits = get_u32le(buf.data() + i * 4);
            std::memcpy(&p.data[i], &bits, 4);
        }
    }
    if (got != count)
        fail(ErrorCode::Data, "fwbt: truncated payload: " + path);
    uint8_t extra;
    if (std::fread(&extra, 1, 1, fc.f) == 1)
        fail(ErrorCode::Data, "fwbt: trailing bytes after payload: " + path);
    return p;
}

void write_field(const std::string& path, const ScalarField& f) {
    write(path, {uint32_t(f.height), uint32_t(f.width)}, f.data.data(), f.data.size());
}

void write_image(const std::string& path, const Image& img) {
    write(path, {uint32_t(img.height), uint32_t(img.width), 3}, img.data.data(),
          img.data.size());
}

void write_tensor(const std::string& path, const Tensor4& t) {
    write(path,
          {uint32_t(t.shape[0]), uint32_t(t.shape[1]), uint32_t(t.shape[2]),
           uint32_t(t.shape[3])},
          t.data.data(), t.data.size());
}

ScalarField read_field(const std::string& path) {
    Payload p = read(path);
    if (p.rank != 2) fail(ErrorCode::Data, "fwbt: expected rank-2 field: " + path);
    ScalarField f(int(p.dims[0]), int(p.dims[1]));
    f.data = std::move(p.data);
    return f;
}

Image read_image(const std::string& path) {
    Payload p = read(path);
    if (p.rank != 3 || p.dims[2] != 3)
        fail(ErrorCode::Data, "fwbt: expected rank-3 (H,W,3) image: " + path);
    Image img(int(p.dims[0]), int(p.dims[1]));
    img.data = std::move(p.data);
    return img;
}

Tensor4 read_tensor(const std::string& path) {
    Payload p = read(path);
    if (p.rank != 4) fail(ErrorCode::Data, "fwbt: expected rank-4 tensor: " + path);
    Tensor4 t(int(p.dims[0]), int(p.dims[1]), int(p.dims[2]), int(p.dims[3]));
    t.data = std::move(p.data);
    return t;
}

}  // namespace hazelab::fwbt
