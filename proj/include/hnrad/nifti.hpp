#ifndef HNRAD_NIFTI_HPP
#define HNRAD_NIFTI_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "hnrad/errors.hpp"
#include "hnrad/volume.hpp"

namespace hnrad {
namespace nifti {

// NIfTI-1 header, 348 bytes, no padding on any sane ABI.
struct Nifti1Header {
    int32_t sizeof_hdr;
    char data_type[10];
    char db_name[18];
    int32_t extents;
    int16_t session_error;
    char regular;
    char dim_info;
    int16_t dim[8];
    float intent_p1, intent_p2, intent_p3;
    int16_t intent_code;
    int16_t datatype;
    int16_t bitpix;
    int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max, cal_min;
    float slice_duration, toffset;
    int32_t glmax, glmin;
    char descrip[80];
    char aux_file[24];
    int16_t qform_code, sform_code;
    float quatern_b, quatern_c, quatern_d;
    float qoffset_x, qoffset_y, qoffset_z;
    float srow_x[4], srow_y[4], srow_z[4];
    char intent_name[16];
    char magic[4];
};

static_assert(sizeof(Nifti1Header) == 348, "Nifti1Header must be 348 bytes");

enum DataType : int16_t {
    DT_UINT8 = 2,
    DT_INT16 = 4,
    DT_INT32 = 8,
    DT_FLOAT32 = 16,
    DT_FLOAT64 = 64,
    DT_INT8 = 256,
    DT_UINT16 = 512,
    DT_UINT32 = 768,
};

inline void swap_bytes(void* p, size_t size) {
    auto* b = static_cast<unsigned char*>(p);
    for (size_t i = 0; i < size / 2; ++i) std::swap(b[i], b[size - 1 - i]);
}

template <typename T>
inline void swap_value(T& v) {
    swap_bytes(&v, sizeof(T));
}

inline void swap_header(Nifti1Header& h) {
    swap_value(h.sizeof_hdr);
    swap_value(h.extents);
    swap_value(h.session_error);
    for (auto& d : h.dim) swap_value(d);
    swap_value(h.intent_p1);
    swap_value(h.intent_p2);
    swap_value(h.intent_p3);
    swap_value(h.intent_code);
    swap_value(h.datatype);
    swap_value(h.bitpix);
    swap_value(h.slice_start);
    for (auto& p : h.pixdim) swap_value(p);
    swap_value(h.vox_offset);
    swap_value(h.scl_slope);
    swap_value(h.scl_inter);
    swap_value(h.slice_end);
    swap_value(h.cal_max);
    swap_value(h.cal_min);
    swap_value(h.slice_duration);
    swap_value(h.toffset);
    swap_value(h.glmax);
    swap_value(h.glmin);
    swap_value(h.qform_code);
    swap_value(h.sform_code);
    swap_value(h.quatern_b);
    swap_value(h.quatern_c);
    swap_value(h.quatern_d);
    swap_value(h.qoffset_x);
    swap_value(h.qoffset_y);
    swap_value(h.qoffset_z);
    for (auto& v : h.srow_x) swap_value(v);
    for (auto& v : h.srow_y) swap_value(v);
    for (auto& v : h.srow_z) swap_value(v);
}

// gzread handles both gzip-compressed and plain files.
inline std::vector<char> read_file(const std::string& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw io_error("cannot open " + path);
    std::vector<char> out;
    char buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof(buf))) > 0) out.insert(out.end(), buf, buf + n);
    const bool bad = n < 0;
    gzclose(f);
    if (bad) throw format_error("decompression failed for " + path);
    return out;
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline void write_file(const std::string& path, const char* data, size_t size) {
    if (ends_with(path, ".gz")) {
        gzFile f = gzopen(path.c_str(), "wb");
        if (!f) throw io_error("cannot open " + path + " for writing");
        size_t off = 0;
        while (off < size) {
            const unsigned chunk = unsigned(std::min<size_t>(size - off, 1u << 28));
            if (gzwrite(f, data + off, chunk) != int(chunk)) {
                gzclose(f);
                throw io_error("write failed for " + path);
            }
            off += chunk;
        }
        if (gzclose(f) != Z_OK) throw io_error("write failed for " + path);
    } else {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw io_error("cannot open " + path + " for writing");
        f.write(data, std::streamsize(size));
        if (!f) throw io_error("write failed for " + path);
    }
}

inline GridGeometry geometry_from_header(const Nifti1Header& h, const Index3& dims) {
    GridGeometry g;
    g.dims = dims;
    if (h.sform_code > 0) {
        Mat3 m{};
        for (int c = 0; c < 3; ++c) {
            m.m[0][c] = h.srow_x[c];
            m.m[1][c] = h.srow_y[c];
            m.m[2][c] = h.srow_z[c];
        }
        g.origin = {h.srow_x[3], h.srow_y[3], h.srow_z[3]};
        for (int c = 0; c < 3; ++c) {
            const Vec3 col = m.col(c);
            const double len = norm(col);
            if (len <= 0.0) throw format_error("sform has a zero column");
            g.spacing[c] = len;
            g.orientation.set_col(c, (1.0 / len) * col);
        }
    } else if (h.qform_code > 0) {
        const double b = h.quatern_b, c = h.quatern_c, d = h.quatern_d;
        const double a2 = 1.0 - (b * b + c * c + d * d);
        const double a = a2 > 0.0 ? std::sqrt(a2) : 0.0;
        Mat3 r{};
        r.m[0][0] = a * a + b * b - c * c - d * d;
        r.m[0][1] = 2 * (b * c - a * d);
        r.m[0][2] = 2 * (b * d + a * c);
        r.m[1][0] = 2 * (b * c + a * d);
        r.m[1][1] = a * a + c * c - b * b - d * d;
        r.m[1][2] = 2 * (c * d - a * b);
        r.m[2][0] = 2 * (b * d - a * c);
        r.m[2][1] = 2 * (c * d + a * b);
        r.m[2][2] = a * a + d * d - c * c - b * b;
        const double qfac = h.pixdim[0] < 0.0f ? -1.0 : 1.0;
        for (int row = 0; row < 3; ++row) r.m[row][2] *= qfac;
        g.orientation = r;
        for (int i = 0; i < 3; ++i) g.spacing[i] = std::abs(double(h.pixdim[i + 1]));
        g.origin = {h.qoffset_x, h.qoffset_y, h.qoffset_z};
    } else {
        for (int i = 0; i < 3; ++i) {
            const double p = std::abs(double(h.pixdim[i + 1]));
            g.spacing[i] = p > 0.0 ? p : 1.0;
        }
    }
    g.validate();
    return g;
}

template <typename Raw>
inline void decode_as(const char* data, int64_t n, bool swapped, double slope, double inter,
                      std::vector<double>& out) {
    out.resize(size_t(n));
    for (int64_t i = 0; i < n; ++i) {
        Raw v;
        std::memcpy(&v, data + i * int64_t(sizeof(Raw)), sizeof(Raw));
        if (swapped) swap_value(v);
        out[size_t(i)] = slope * double(v) + inter;
    }
}

struct RawVolume {
    GridGeometry geom;
    std::vector<double> values;
};

inline RawVolume load_raw(const std::string& path) {
    const std::vector<char> bytes = read_file(path);
    if (bytes.size() < sizeof(Nifti1Header)) throw format_error(path + ": file too small for a NIfTI-1 header");

    Nifti1Header h{};
    std::memcpy(&h, bytes.data(), sizeof(h));
    bool swapped = false;
    if (h.sizeof_hdr != 348) {
        swap_header(h);
        swapped = true;
        if (h.sizeof_hdr != 348) throw format_error(path + ": not a NIfTI-1 file (bad sizeof_hdr)");
    }
    if (std::strncmp(h.magic, "n+1", 3) != 0 && std::strncmp(h.magic, "ni1", 3) != 0)
        throw format_error(path + ": not a NIfTI-1 file (bad magic)");
    if (std::strncmp(h.magic, "ni1", 3) == 0)
        throw format_error(path + ": detached .hdr/.img pairs are not supported");

    int nd = h.dim[0];
    if (nd == 4 && h.dim[4] <= 1) nd = 3; // squeeze a trivial fourth axis
    if (nd != 3)
        throw dimension_error(path + ": expected a 3D volume, got " + std::to_string(int(h.dim[0])) + "D");
    for (int a = 1; a <= 3; ++a)
        if (h.dim[a] <= 0) throw dimension_error(path + ": non-positive dimension");

    const Index3 dims{h.dim[1], h.dim[2], h.dim[3]};
    const int64_t n = int64_t(dims[0]) * dims[1] * dims[2];

    const int64_t offset = int64_t(h.vox_offset);
    if (offset < int64_t(sizeof(Nifti1Header)))
        throw format_error(path + ": bad vox_offset");

    int bytes_per = 0;
    switch (h.datatype) {
        case DT_UINT8:
        case DT_INT8: bytes_per = 1; break;
        case DT_INT16:
        case DT_UINT16: bytes_per = 2; break;
        case DT_INT32:
        case DT_UINT32:
        case DT_FLOAT32: bytes_per = 4; break;
        case DT_FLOAT64: bytes_per = 8; break;
        default:
            throw format_error(path + ": unsupported datatype code " + std::to_string(int(h.datatype)));
    }
    if (int64_t(bytes.size()) < offset + n * bytes_per)
        throw format_error(path + ": truncated voxel data");

    double slope = double(h.scl_slope);
    double inter = double(h.scl_inter);
    if (slope == 0.0 || !std::isfinite(slope)) {
        slope = 1.0;
        inter = 0.0;
    }

    RawVolume raw;
    raw.geom = geometry_from_header(h, dims);
    const char* data = bytes.data() + offset;
    switch (h.datatype) {
        case DT_UINT8: decode_as<uint8_t>(data, n, swapped, slope, inter, raw.values); break;
        case DT_INT8: decode_as<int8_t>(data, n, swapped, slope, inter, raw.values); break;
        case DT_INT16: decode_as<int16_t>(data, n, swapped, slope, inter, raw.values); break;
        case DT_UINT16: decode_as<uint16_t>(data, n, swapped, slope, inter, raw.values); break;
        case DT_INT32: decode_as<int32_t>(data, n, swapped, slope, inter, raw.values); break;
        case DT_UINT32: decode_as<uint32_t>(data, n, swapped, slope, inter, raw.values); break;
        case DT_FLOAT32: decode_as<float>(data, n, swapped, slope, inter, raw.values); break;
        case DT_FLOAT64: decode_as<double>(data, n, swapped, slope, inter, raw.values); break;
    }
    return raw;
}

inline Nifti1Header make_header(const GridGeometry& g, int16_t datatype, int16_t bitpix) {
    Nifti1Header h{};
    h.sizeof_hdr = 348;
    h.regular = 'r';
    h.dim[0] = 3;
    h.dim[1] = int16_t(g.dims[0]);
    h.dim[2] = int16_t(g.dims[1]);
    h.dim[3] = int16_t(g.dims[2]);
    for (int a = 4; a < 8; ++a) h.dim[a] = 1;
    h.datatype = datatype;
    h.bitpix = bitpix;
    h.pixdim[0] = 1.0f;
    for (int a = 0; a < 3; ++a) h.pixdim[a + 1] = float(g.spacing[a]);
    h.vox_offset = 352.0f;
    h.scl_slope = 1.0f;
    h.scl_inter = 0.0f;
    h.xyzt_units = 2; // NIFTI_UNITS_MM
    std::snprintf(h.descrip, sizeof(h.descrip), "hnrad");
    h.sform_code = 1;
    const Mat3 m = g.index_to_world_matrix();
    for (int c = 0; c < 3; ++c) {
        h.srow_x[c] = float(m.m[0][c]);
        h.srow_y[c] = float(m.m[1][c]);
        h.srow_z[c] = float(m.m[2][c]);
    }
    h.srow_x[3] = float(g.origin[0]);
    h.srow_y[3] = float(g.origin[1]);
    h.srow_z[3] = float(g.origin[2]);
    std::memcpy(h.magic, "n+1", 4);
    return h;
}

template <typename T>
inline void write_volume_bytes(const std::string& path, const Nifti1Header& h, const std::vector<T>& data) {
    std::vector<char> bytes(352 + data.size() * sizeof(T), 0);
    std::memcpy(bytes.data(), &h, sizeof(h));
    std::memcpy(bytes.data() + 352, data.data(), data.size() * sizeof(T));
    write_file(path, bytes.data(), bytes.size());
}

} // namespace nifti

/// Load a scalar 3D NIfTI-1 volume (.nii or .nii.gz). Values are returned as
/// stored (after scl_slope/scl_inter); no intensity normalization is applied.
inline VoxelGrid load_scalar_volume(const std::string& path) {
    nifti::RawVolume raw = nifti::load_raw(path);
    VoxelGrid grid;
    grid.geom = raw.geom;
    grid.values.resize(raw.values.size());
    for (size_t i = 0; i < raw.values.size(); ++i) {
        if (!std::isfinite(raw.values[i]))
            throw format_error(path + ": non-finite voxel value");
        grid.values[i] = float(raw.values[i]);
    }
    return grid;
}

/// Load a label mask; values are rounded to the nearest integer and must be in {0,1,2}.
inline LabelMask load_label_mask(const std::string& path) {
    nifti::RawVolume raw = nifti::load_raw(path);
    LabelMask mask;
    mask.geom = raw.geom;
    mask.labels.resize(raw.values.size());
    for (size_t i = 0; i < raw.values.size(); ++i) {
        if (!std::isfinite(raw.values[i])) throw format_error(path + ": non-finite mask value");
        const long long v = std::llround(raw.values[i]);
        if (v < 0 || v > 2)
            throw label_error(path + ": mask label " + std::to_string(v) + " outside {0,1,2}");
        mask.labels[i] = uint8_t(v);
    }
    return mask;
}

/// Write a scalar volume as float32 with an sform affine.
inline void save_volume(const VoxelGrid& grid, const std::string& path) {
    grid.geom.validate();
    const nifti::Nifti1Header h = nifti::make_header(grid.geom, nifti::DT_FLOAT32, 32);
    nifti::write_volume_bytes(path, h, grid.values);
}

/// Write a label mask as uint8 with an sform affine.
inline void save_volume(const LabelMask& mask, const std::string& path) {
    mask.geom.validate();
    const nifti::Nifti1Header h = nifti::make_header(mask.geom, nifti::DT_UINT8, 8);
    nifti::write_volume_bytes(path, h, mask.labels);
}

} // namespace hnrad

#endif
