#include "gyrodrift/field_io.hpp"

#include <bit>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>

namespace gyrodrift {

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian and so is every supported target");

namespace {

constexpr char kMagic[16] = {'G', 'Y', 'R', 'O', 'D', 'R', 'I', 'F',
                             'T', 0,   'F', 'L', 'D', 0,   0,   0};
constexpr std::uint32_t kMaxRank = 8;

size_t checked_count(const std::vector<std::uint32_t>& dims, const std::string& path) {
    if (dims.empty() || dims.size() > kMaxRank)
        throw IoError("field file " + path + ": rank " + std::to_string(dims.size()) +
                      " outside [1, " + std::to_string(kMaxRank) + "]");
    size_t count = 1;
    for (std::uint32_t d : dims) {
        if (d == 0)
            throw IoError("field file " + path + ": zero dimension");
        if (count > std::numeric_limits<size_t>::max() / 8 / d)
            throw IoError("field file " + path + ": dimension overflow");
        count *= d;
    }
    return count;
}

} // namespace

void dump_field(const FieldBlob& blob, const std::string& path) {
    const size_t count = checked_count(blob.dims, path);
    if (count != blob.data.size())
        throw ConfigError("dump_field: dims promise " + std::to_string(count) +
                          " entries, payload has " + std::to_string(blob.data.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out.write(kMagic, sizeof kMagic);
    const auto rank = static_cast<std::uint32_t>(blob.dims.size());
    out.write(reinterpret_cast<const char*>(&rank), 4);
    out.write(reinterpret_cast<const char*>(blob.dims.data()), 4 * rank);
    out.write(reinterpret_cast<const char*>(blob.data.data()), 8 * count);
    if (!out)
        throw IoError("write failed on " + path);
}

void dump_field(const ScalarField& f, const std::string& path) {
    FieldBlob b;
    b.dims = {static_cast<std::uint32_t>(f.n1), static_cast<std::uint32_t>(f.n2)};
    b.data = f.a;
    dump_field(b, path);
}

void dump_field(const Distribution& f, const std::string& path) {
    FieldBlob b;
    b.dims = {static_cast<std::uint32_t>(f.nx1), static_cast<std::uint32_t>(f.nx2),
              static_cast<std::uint32_t>(f.nv1), static_cast<std::uint32_t>(f.nv2)};
    b.data = f.a;
    dump_field(b, path);
}

FieldBlob load_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);

    char magic[16];
    in.read(magic, sizeof magic);
    if (in.gcount() != sizeof magic)
        throw IoError("field file " + path + ": truncated header");
    for (size_t k = 0; k < sizeof magic; ++k)
        if (magic[k] != kMagic[k])
            throw IoError("field file " + path + ": magic mismatch");

    std::uint32_t rank = 0;
    in.read(reinterpret_cast<char*>(&rank), 4);
    if (in.gcount() != 4)
        throw IoError("field file " + path + ": truncated header");
    if (rank == 0 || rank > kMaxRank)
        throw IoError("field file " + path + ": rank " + std::to_string(rank) +
                      " outside [1, " + std::to_string(kMaxRank) + "]");

    FieldBlob blob;
    blob.dims.resize(rank);
    in.read(reinterpret_cast<char*>(blob.dims.data()), 4 * rank);
    if (in.gcount() != 4 * static_cast<std::streamsize>(rank))
        throw IoError("field file " + path + ": truncated header");

    const size_t count = checked_count(blob.dims, path);
    blob.data.resize(count);
    in.read(reinterpret_cast<char*>(blob.data.data()), 8 * count);
    if (in.gcount() != 8 * static_cast<std::streamsize>(count))
        throw IoError("field file " + path + ": truncated payload, expected " +
                      std::to_string(count) + " doubles");
    if (in.peek() != std::ifstream::traits_type::eof())
        throw IoError("field file " + path + ": trailing bytes after payload");
    return blob;
}

ScalarField as_scalar_field(const FieldBlob& blob) {
    if (blob.dims.size() != 2)
        throw ConfigError("as_scalar_field: blob rank is " +
                          std::to_string(blob.dims.size()) + ", want 2");
    ScalarField f(static_cast<int>(blob.dims[0]), static_cast<int>(blob.dims[1]));
    f.a = blob.data;
    return f;
}

} // namespace gyrodrift
