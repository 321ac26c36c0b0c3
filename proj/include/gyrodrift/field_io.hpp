#pragma once
/// @file field_io.hpp
/// @brief Flat binary container for rank-N double fields.
///
/// Layout: a 16-byte magic ("GYRODRIFT\0FLD" padded with NULs), a little-endian
/// u32 rank, u32 dims[rank], then the row-major f64 payload. Round-trips are
/// bit-exact. Structural faults (unreadable file, bad magic, absurd rank,
/// dimension overflow, truncation) raise IoError naming the file.

#include <cstdint>
#include <string>
#include <vector>

#include "gyrodrift/errors.hpp"
#include "gyrodrift/fields.hpp"

namespace gyrodrift {

struct FieldBlob {
    std::vector<std::uint32_t> dims;
    std::vector<double> data; // row-major, size = product of dims
};

/// rank must lie in [1, 8], every dimension must be positive, and the dim
/// product must equal data.size().
void dump_field(const FieldBlob& blob, const std::string& path);
void dump_field(const ScalarField& f, const std::string& path);
void dump_field(const Distribution& f, const std::string& path);

FieldBlob load_field(const std::string& path);

/// Reshapes a rank-2 blob; the expected use is reading back a ScalarField.
ScalarField as_scalar_field(const FieldBlob& blob);

} // namespace gyrodrift
