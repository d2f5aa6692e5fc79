#include "swvae/archive.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include "swvae/errors.hpp"

namespace swvae {

namespace {

constexpr char kMagic[5] = {'S', 'W', 'V', 'D', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    write_u32(out, static_cast<std::uint32_t>(v));
    write_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw DataError("truncated archive header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64(std::istream& in) {
    const std::uint64_t lo = read_u32(in);
    const std::uint64_t hi = read_u32(in);
    return lo | (hi << 32);
}

}  // namespace

DatasetArchive::DatasetArchive(ArchiveDescriptor descriptor,
                               std::vector<std::uint8_t> pixels,
                               std::vector<std::int32_t> factors)
    : descriptor_(std::move(descriptor)), pixels_(std::move(pixels)), factors_(std::move(factors)) {
    const auto& d = descriptor_;
    if (d.count < 0 || d.num_factors <= 0 || d.image.pixel_count() <= 0)
        throw DataError("archive descriptor fields must be positive");
    if (d.cardinalities.size() != static_cast<std::size_t>(d.num_factors))
        throw DataError("archive descriptor cardinality count mismatch");
    if (pixels_.size() != static_cast<std::size_t>(d.count * d.image.pixel_count()))
        throw DataError("shape mismatch between image store and descriptor");
    if (factors_.size() != static_cast<std::size_t>(d.count) * d.num_factors)
        throw DataError("shape mismatch between image and factor stores");
    for (std::int64_t i = 0; i < d.count; ++i)
        for (int f = 0; f < d.num_factors; ++f) {
            const std::int32_t v = factors_[i * d.num_factors + f];
            if (v < 0 || v >= d.cardinalities[f])
                throw DataError("factor value outside declared cardinality");
        }
}

Observation DatasetArchive::observation(std::int64_t index) const {
    if (index < 0 || index >= descriptor_.count) throw DataError("archive index out of range");
    const std::int64_t np = descriptor_.image.pixel_count();
    Observation obs;
    obs.pixels.resize(np);
    const std::uint8_t* src = pixels_.data() + index * np;
    for (std::int64_t i = 0; i < np; ++i) obs.pixels[i] = static_cast<float>(src[i]) / 255.0f;
    obs.factors = factors_row(index);
    return obs;
}

std::vector<int> DatasetArchive::factors_row(std::int64_t index) const {
    if (index < 0 || index >= descriptor_.count) throw DataError("archive index out of range");
    std::vector<int> row(descriptor_.num_factors);
    for (int f = 0; f < descriptor_.num_factors; ++f)
        row[f] = factors_[index * descriptor_.num_factors + f];
    return row;
}

bool DatasetArchive::exhaustive() const {
    std::int64_t product = 1;
    for (int c : descriptor_.cardinalities) product *= c;
    if (product != descriptor_.count) return false;
    std::unordered_set<std::int64_t> seen;
    seen.reserve(descriptor_.count);
    for (std::int64_t i = 0; i < descriptor_.count; ++i) {
        std::int64_t key = 0;
        for (int f = 0; f < descriptor_.num_factors; ++f)
            key = key * descriptor_.cardinalities[f] + factors_[i * descriptor_.num_factors + f];
        if (!seen.insert(key).second) return false;
    }
    return true;
}

FactorSpace DatasetArchive::factor_space() const {
    std::vector<std::string> names;
    std::vector<std::vector<double>> grids;
    for (int f = 0; f < descriptor_.num_factors; ++f) {
        names.push_back("factor_" + std::to_string(f));
        std::vector<double> grid(descriptor_.cardinalities[f]);
        for (int v = 0; v < descriptor_.cardinalities[f]; ++v) grid[v] = v;
        grids.push_back(std::move(grid));
    }
    return FactorSpace(std::move(names), descriptor_.cardinalities, std::move(grids));
}

DatasetArchive build_micro_archive() {
    const FactorSpace space = build_micro_space();
    const ImageShape shape = micro_image_shape();
    ArchiveDescriptor desc{shape, space.num_factors(), space.cardinalities(), space.total_size()};
    std::vector<std::uint8_t> pixels;
    pixels.reserve(desc.count * shape.pixel_count());
    std::vector<std::int32_t> factors;
    factors.reserve(desc.count * desc.num_factors);
    for (std::int64_t i = 0; i < desc.count; ++i) {
        const Observation obs = render_micro(space, space.factors_of(i));
        for (float p : obs.pixels) pixels.push_back(p >= 0.5f ? 255 : 0);
        for (int f : obs.factors) factors.push_back(f);
    }
    return DatasetArchive(std::move(desc), std::move(pixels), std::move(factors));
}

void save_archive(const DatasetArchive& archive, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open archive for writing: " + path.string());
    const auto& d = archive.descriptor();
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, static_cast<std::uint32_t>(d.image.height));
    write_u32(out, static_cast<std::uint32_t>(d.image.width));
    write_u32(out, static_cast<std::uint32_t>(d.image.channels));
    write_u32(out, static_cast<std::uint32_t>(d.num_factors));
    for (int c : d.cardinalities) write_u32(out, static_cast<std::uint32_t>(c));
    write_u64(out, static_cast<std::uint64_t>(d.count));
    out.write(reinterpret_cast<const char*>(archive.pixel_bytes().data()),
              static_cast<std::streamsize>(archive.pixel_bytes().size()));
    for (std::int32_t v : archive.factor_values()) write_u32(out, static_cast<std::uint32_t>(v));
    if (!out) throw IoError("failed writing archive: " + path.string());
}

namespace {

DatasetArchive load_swvd1(std::ifstream& in, const std::filesystem::path& path) {
    ArchiveDescriptor desc;
    desc.image.height = static_cast<int>(read_u32(in));
    desc.image.width = static_cast<int>(read_u32(in));
    desc.image.channels = static_cast<int>(read_u32(in));
    desc.num_factors = static_cast<int>(read_u32(in));
    if (desc.num_factors <= 0 || desc.num_factors > 64)
        throw DataError("malformed archive header: factor count");
    desc.cardinalities.resize(desc.num_factors);
    for (int f = 0; f < desc.num_factors; ++f)
        desc.cardinalities[f] = static_cast<int>(read_u32(in));
    desc.count = static_cast<std::int64_t>(read_u64(in));

    const std::int64_t pixel_bytes = desc.count * desc.image.pixel_count();
    std::vector<std::uint8_t> pixels(pixel_bytes);
    in.read(reinterpret_cast<char*>(pixels.data()), pixel_bytes);
    if (!in) throw DataError("archive image store truncated: " + path.string());
    std::vector<std::int32_t> factors(desc.count * desc.num_factors);
    for (auto& v : factors) v = static_cast<std::int32_t>(read_u32(in));
    in.peek();
    if (!in.eof()) throw DataError("trailing bytes after factor store: " + path.string());
    return DatasetArchive(std::move(desc), std::move(pixels), std::move(factors));
}

// --- minimal zip/npy reading for the public dSprites-style layout ---

struct ZipEntry {
    std::string name;
    std::uint16_t method = 0;
    std::uint64_t compressed_size = 0;
    std::uint64_t uncompressed_size = 0;
    std::uint64_t local_offset = 0;
};

std::uint16_t le16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<ZipEntry> zip_central_directory(const std::vector<unsigned char>& file) {
    // End-of-central-directory record: signature 0x06054b50, within the last
    // 64KiB + 22 bytes of the file.
    if (file.size() < 22) throw DataError("zip file too small");
    std::size_t eocd = std::string::npos;
    const std::size_t scan_start = file.size() >= 22 + 65535 ? file.size() - 22 - 65535 : 0;
    for (std::size_t i = file.size() - 22 + 1; i-- > scan_start;) {
        if (le32(&file[i]) == 0x06054b50u) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string::npos) throw DataError("zip end-of-central-directory not found");
    const std::uint16_t entry_count = le16(&file[eocd + 10]);
    std::uint64_t dir_offset = le32(&file[eocd + 16]);

    std::vector<ZipEntry> entries;
    for (int e = 0; e < entry_count; ++e) {
        if (dir_offset + 46 > file.size() || le32(&file[dir_offset]) != 0x02014b50u)
            throw DataError("zip central directory corrupt");
        ZipEntry entry;
        entry.method = le16(&file[dir_offset + 10]);
        entry.compressed_size = le32(&file[dir_offset + 20]);
        entry.uncompressed_size = le32(&file[dir_offset + 24]);
        const std::uint16_t name_len = le16(&file[dir_offset + 28]);
        const std::uint16_t extra_len = le16(&file[dir_offset + 30]);
        const std::uint16_t comment_len = le16(&file[dir_offset + 32]);
        entry.local_offset = le32(&file[dir_offset + 42]);
        entry.name.assign(reinterpret_cast<const char*>(&file[dir_offset + 46]), name_len);
        entries.push_back(std::move(entry));
        dir_offset += 46 + name_len + extra_len + comment_len;
    }
    return entries;
}

std::vector<unsigned char> zip_extract(const std::vector<unsigned char>& file, const ZipEntry& entry) {
    if (entry.local_offset + 30 > file.size() || le32(&file[entry.local_offset]) != 0x04034b50u)
        throw DataError("zip local header corrupt for " + entry.name);
    const std::uint16_t name_len = le16(&file[entry.local_offset + 26]);
    const std::uint16_t extra_len = le16(&file[entry.local_offset + 28]);
    const std::uint64_t data_start = entry.local_offset + 30 + name_len + extra_len;
    if (data_start + entry.compressed_size > file.size())
        throw DataError("zip entry data truncated: " + entry.name);

    if (entry.method == 0) {  // stored
        return {file.begin() + data_start, file.begin() + data_start + entry.compressed_size};
    }
    if (entry.method != 8) throw DataError("unsupported zip compression method for " + entry.name);

    std::vector<unsigned char> out(entry.uncompressed_size);
    z_stream strm{};
    if (inflateInit2(&strm, -15) != Z_OK) throw DataError("zlib init failed");
    strm.next_in = const_cast<unsigned char*>(file.data() + data_start);
    strm.avail_in = static_cast<uInt>(entry.compressed_size);
    strm.next_out = out.data();
    strm.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&strm, Z_FINISH);
    inflateEnd(&strm);
    if (rc != Z_STREAM_END) throw DataError("zlib inflate failed for " + entry.name);
    return out;
}

struct NpyArray {
    std::string dtype;  // e.g. "|u1", "<i8"
    std::vector<std::int64_t> shape;
    std::vector<unsigned char> data;
};

NpyArray parse_npy(const std::vector<unsigned char>& bytes, const std::string& name) {
    if (bytes.size() < 10 || std::memcmp(bytes.data(), "\x93NUMPY", 6) != 0)
        throw DataError("not an npy array: " + name);
    const int major = bytes[6];
    std::size_t header_len, header_start;
    if (major == 1) {
        header_len = le16(&bytes[8]);
        header_start = 10;
    } else {
        header_len = le32(&bytes[8]);
        header_start = 12;
    }
    const std::string header(reinterpret_cast<const char*>(&bytes[header_start]), header_len);

    auto find_value = [&](const std::string& key) {
        const auto pos = header.find("'" + key + "'");
        if (pos == std::string::npos) throw DataError("npy header missing " + key);
        return header.find(':', pos) + 1;
    };

    NpyArray arr;
    {
        std::size_t p = find_value("descr");
        const auto q1 = header.find('\'', p);
        const auto q2 = header.find('\'', q1 + 1);
        arr.dtype = header.substr(q1 + 1, q2 - q1 - 1);
    }
    if (header.find("'fortran_order': True") != std::string::npos)
        throw DataError("fortran-ordered npy arrays are unsupported: " + name);
    {
        std::size_t p = header.find('(', find_value("shape"));
        const auto close = header.find(')', p);
        std::string dims = header.substr(p + 1, close - p - 1);
        std::size_t start = 0;
        while (start < dims.size()) {
            const auto comma = dims.find(',', start);
            const std::string tok = dims.substr(start, comma == std::string::npos ? std::string::npos
                                                                                  : comma - start);
            if (tok.find_first_not_of(" \t") != std::string::npos)
                arr.shape.push_back(std::stoll(tok));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    arr.data.assign(bytes.begin() + header_start + header_len, bytes.end());
    return arr;
}

std::int64_t npy_element_count(const NpyArray& arr) {
    std::int64_t n = 1;
    for (auto d : arr.shape) n *= d;
    return n;
}

std::int64_t npy_int_at(const NpyArray& arr, std::int64_t i) {
    const unsigned char* p;
    if (arr.dtype == "<i8") {
        p = arr.data.data() + i * 8;
        std::int64_t v;
        std::memcpy(&v, p, 8);
        return v;
    }
    if (arr.dtype == "<i4") {
        p = arr.data.data() + i * 4;
        std::int32_t v;
        std::memcpy(&v, p, 4);
        return v;
    }
    if (arr.dtype == "|u1") return arr.data[i];
    throw DataError("unsupported npy factor dtype " + arr.dtype);
}

DatasetArchive load_npz(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open archive: " + path.string());
    std::vector<unsigned char> file((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    const auto entries = zip_central_directory(file);
    const ZipEntry* imgs_entry = nullptr;
    const ZipEntry* factors_entry = nullptr;
    for (const auto& e : entries) {
        if (e.name == "imgs.npy") imgs_entry = &e;
        if (e.name == "latents_classes.npy") factors_entry = &e;
    }
    if (!imgs_entry || !factors_entry)
        throw DataError("npz archive must contain imgs.npy and latents_classes.npy");

    const NpyArray imgs = parse_npy(zip_extract(file, *imgs_entry), imgs_entry->name);
    const NpyArray classes = parse_npy(zip_extract(file, *factors_entry), factors_entry->name);
    if (imgs.dtype != "|u1") throw DataError("imgs.npy must hold uint8 pixels");
    if (imgs.shape.size() != 3 && imgs.shape.size() != 4)
        throw DataError("imgs.npy must be (N,H,W) or (N,H,W,C)");
    if (classes.shape.size() != 2) throw DataError("latents_classes.npy must be (N,v)");
    if (imgs.shape[0] != classes.shape[0])
        throw DataError("shape mismatch between image and factor stores");
    if (static_cast<std::int64_t>(imgs.data.size()) != npy_element_count(imgs))
        throw DataError("imgs.npy payload truncated");

    ArchiveDescriptor desc;
    desc.count = imgs.shape[0];
    desc.image.height = static_cast<int>(imgs.shape[1]);
    desc.image.width = static_cast<int>(imgs.shape[2]);
    desc.image.channels = imgs.shape.size() == 4 ? static_cast<int>(imgs.shape[3]) : 1;
    desc.num_factors = static_cast<int>(classes.shape[1]);

    std::vector<std::int32_t> factors(desc.count * desc.num_factors);
    desc.cardinalities.assign(desc.num_factors, 1);
    for (std::int64_t i = 0; i < desc.count * desc.num_factors; ++i) {
        factors[i] = static_cast<std::int32_t>(npy_int_at(classes, i));
        const int f = static_cast<int>(i % desc.num_factors);
        desc.cardinalities[f] = std::max(desc.cardinalities[f], factors[i] + 1);
    }

    // dSprites stores binary images as 0/1; rescale so 255 means full intensity.
    std::vector<std::uint8_t> pixels(imgs.data.begin(), imgs.data.end());
    const std::uint8_t max_px = pixels.empty() ? 0 : *std::max_element(pixels.begin(), pixels.end());
    if (max_px == 1)
        for (auto& p : pixels) p = static_cast<std::uint8_t>(p * 255);

    return DatasetArchive(std::move(desc), std::move(pixels), std::move(factors));
}

}  // namespace

DatasetArchive load_archive(const std::filesystem::path& path) {
    if (path.extension() == ".npz") return load_npz(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open archive: " + path.string());
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("malformed archive header: bad magic in " + path.string());
    return load_swvd1(in, path);
}

}  // namespace swvae
