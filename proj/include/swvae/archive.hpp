#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "swvae/factor_space.hpp"

namespace swvae {

struct ArchiveDescriptor {
    ImageShape image;
    int num_factors = 0;
    std::vector<int> cardinalities;
    std::int64_t count = 0;

    bool operator==(const ArchiveDescriptor&) const = default;
};

// Immutable factor-annotated image store. Pixels are 8-bit intensities
// (255 = full); factor rows index grid positions.
class DatasetArchive {
  public:
    DatasetArchive(ArchiveDescriptor descriptor,
                   std::vector<std::uint8_t> pixels,
                   std::vector<std::int32_t> factors);

    const ArchiveDescriptor& descriptor() const { return descriptor_; }
    std::int64_t count() const { return descriptor_.count; }
    const std::vector<std::uint8_t>& pixel_bytes() const { return pixels_; }
    const std::vector<std::int32_t>& factor_values() const { return factors_; }

    Observation observation(std::int64_t index) const;
    std::vector<int> factors_row(std::int64_t index) const;

    // True when every factor combination appears exactly once.
    bool exhaustive() const;

    // Grid view of the archive; requires every cardinality >= 2.
    FactorSpace factor_space() const;

  private:
    ArchiveDescriptor descriptor_;
    std::vector<std::uint8_t> pixels_;
    std::vector<std::int32_t> factors_;
};

// Renders the full micro space in index order into an in-memory archive.
DatasetArchive build_micro_archive();

// Native "SWVD1" container: magic, little-endian descriptor integers, raw
// image bytes, then int32 factor rows. save/load round-trip bit-identically.
void save_archive(const DatasetArchive& archive, const std::filesystem::path& path);

// Loads either a native SWVD1 file or, for ".npz" paths, a zipped-array
// archive with "imgs.npy" and "latents_classes.npy" entries (the public
// dSprites layout).
DatasetArchive load_archive(const std::filesystem::path& path);

}  // namespace swvae
