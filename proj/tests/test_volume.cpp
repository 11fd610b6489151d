#include <doctest.h>

#include <cmath>
#include <random>

#include "hnrad/nifti.hpp"
#include "hnrad/resample.hpp"
#include "hnrad/volume.hpp"

#include "helpers.hpp"

using namespace hnrad;
using hnrad_tests::geometry;
using hnrad_tests::random_grid;
using hnrad_tests::temp_path;

TEST_CASE("geometry: world/voxel round trip") {
    GridGeometry g = geometry({4, 5, 6}, {1.5, 2.0, 2.5}, {-10, 3, 7});
    g.validate();
    const Vec3 w = g.voxel_to_world(2, 3, 4);
    CHECK(w[0] == doctest::Approx(-10 + 2 * 1.5));
    CHECK(w[1] == doctest::Approx(3 + 3 * 2.0));
    CHECK(w[2] == doctest::Approx(7 + 4 * 2.5));
    const Vec3 v = g.world_to_voxel(w);
    CHECK(v[0] == doctest::Approx(2.0));
    CHECK(v[1] == doctest::Approx(3.0));
    CHECK(v[2] == doctest::Approx(4.0));
}

TEST_CASE("geometry: invalid spacing rejected") {
    GridGeometry g = geometry({2, 2, 2}, {0.0, 1.0, 1.0});
    CHECK_THROWS_AS(g.validate(), geometry_error);
}

TEST_CASE("nifti: round trip of a small counting volume") {
    VoxelGrid grid = make_grid(geometry({2, 2, 2}, {1, 1, 1}, {5, -3, 2}));
    for (size_t i = 0; i < grid.values.size(); ++i) grid.values[i] = float(i);

    const std::string path = temp_path("count.nii");
    save_volume(grid, path);
    const VoxelGrid back = load_scalar_volume(path);

    REQUIRE(back.geom.dims == grid.geom.dims);
    for (size_t i = 0; i < grid.values.size(); ++i) CHECK(back.values[i] == grid.values[i]);
    for (int a = 0; a < 3; ++a) {
        CHECK(back.geom.spacing[a] == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(std::abs(back.geom.origin[a] - grid.geom.origin[a]) < 1e-5);
    }
}

TEST_CASE("nifti: gzip round trip") {
    VoxelGrid grid = random_grid({8, 8, 8}, 77);
    const std::string path = temp_path("rand.nii.gz");
    save_volume(grid, path);
    const VoxelGrid back = load_scalar_volume(path);
    REQUIRE(back.values.size() == grid.values.size());
    for (size_t i = 0; i < grid.values.size(); ++i) CHECK(back.values[i] == grid.values[i]);
}

TEST_CASE("nifti: CT range preserved bit-exactly") {
    VoxelGrid ct = make_grid(geometry({4, 4, 4}));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> hu(-1024.0, 3071.0);
    for (auto& v : ct.values) v = float(hu(rng));
    ct.values[0] = -1024.0f;
    ct.values[1] = 3071.0f;

    const std::string path = temp_path("ct.nii");
    save_volume(ct, path);
    const VoxelGrid back = load_scalar_volume(path);
    for (size_t i = 0; i < ct.values.size(); ++i) CHECK(back.values[i] == ct.values[i]);
}

TEST_CASE("nifti: mask round trip is bit-exact and labels validated") {
    LabelMask mask = make_mask(geometry({3, 3, 3}));
    mask.at(0, 0, 0) = 1;
    mask.at(1, 1, 1) = 2;
    const std::string path = temp_path("mask.nii");
    save_volume(mask, path);
    const LabelMask back = load_label_mask(path);
    for (size_t i = 0; i < mask.labels.size(); ++i) CHECK(back.labels[i] == mask.labels[i]);

    // A label outside {0,1,2} must be rejected.
    VoxelGrid bad = make_grid(geometry({2, 2, 2}));
    bad.values[3] = 3.0f;
    const std::string bad_path = temp_path("bad_mask.nii");
    save_volume(bad, bad_path);
    CHECK_THROWS_AS(load_label_mask(bad_path), label_error);
}

TEST_CASE("nifti: malformed and missing files") {
    CHECK_THROWS_AS(load_scalar_volume(temp_path("missing.nii")), io_error);

    const std::string junk = temp_path("junk.nii");
    {
        std::ofstream f(junk, std::ios::binary);
        f << "this is not a nifti file at all";
    }
    CHECK_THROWS_AS(load_scalar_volume(junk), format_error);
}

TEST_CASE("nifti: 4D volume rejected") {
    // Hand-build a 4D header with two time points.
    VoxelGrid grid = make_grid(geometry({2, 2, 2}));
    nifti::Nifti1Header h = nifti::make_header(grid.geom, nifti::DT_FLOAT32, 32);
    h.dim[0] = 4;
    h.dim[4] = 2;
    std::vector<float> data(16, 0.0f);
    const std::string path = temp_path("fourd.nii");
    nifti::write_volume_bytes(path, h, data);
    CHECK_THROWS_AS(load_scalar_volume(path), dimension_error);
}

TEST_CASE("nifti: byte-swapped (foreign-endian) file loads correctly") {
    VoxelGrid grid = random_grid({3, 4, 5}, 55);
    nifti::Nifti1Header h = nifti::make_header(grid.geom, nifti::DT_FLOAT32, 32);
    nifti::swap_header(h);
    std::vector<float> swapped = grid.values;
    for (auto& v : swapped) nifti::swap_value(v);
    const std::string path = hnrad_tests::temp_path("swapped.nii");
    nifti::write_volume_bytes(path, h, swapped);

    const VoxelGrid back = load_scalar_volume(path);
    REQUIRE(back.geom.dims == grid.geom.dims);
    for (size_t i = 0; i < grid.values.size(); ++i) CHECK(back.values[i] == grid.values[i]);
}

TEST_CASE("nifti: qform-only geometry (identity quaternion)") {
    VoxelGrid grid = make_grid(geometry({4, 4, 4}, {1.5, 2.0, 2.5}, {10, -5, 3}), 1.0f);
    nifti::Nifti1Header h = nifti::make_header(grid.geom, nifti::DT_FLOAT32, 32);
    h.sform_code = 0;
    h.qform_code = 1;
    h.quatern_b = h.quatern_c = h.quatern_d = 0.0f; // identity rotation
    h.qoffset_x = 10.0f;
    h.qoffset_y = -5.0f;
    h.qoffset_z = 3.0f;
    const std::string path = hnrad_tests::temp_path("qform.nii");
    nifti::write_volume_bytes(path, h, grid.values);

    const VoxelGrid back = load_scalar_volume(path);
    CHECK(back.geom.spacing[0] == doctest::Approx(1.5));
    CHECK(back.geom.spacing[1] == doctest::Approx(2.0));
    CHECK(back.geom.spacing[2] == doctest::Approx(2.5));
    CHECK(back.geom.origin[0] == doctest::Approx(10.0));
    CHECK(back.geom.origin[2] == doctest::Approx(3.0));
    const Vec3 w = back.geom.voxel_to_world(1, 1, 1);
    CHECK(w[0] == doctest::Approx(11.5));
    CHECK(w[1] == doctest::Approx(-3.0));
    CHECK(w[2] == doctest::Approx(5.5));
}

TEST_CASE("crop_to_box honors a rotated input orientation") {
    // Input grid rotated 90 degrees about z: voxel x axis points along world +y.
    GridGeometry g = geometry({20, 20, 20});
    g.orientation = {{{0, -1, 0}, {1, 0, 0}, {0, 0, 1}}};
    g.origin = {0, 0, 0};
    VoxelGrid grid = make_grid(g, 1.0f);
    // Marker at voxel (5, 0, 3) -> world (0, 5, 3).
    grid.at(5, 0, 3) = 9.0f;

    // Box placed so that output voxel (1,1,1) centers exactly on the marker.
    BoundingBoxMM box;
    box.center = {0.5, 5.5, 3.5};
    box.size = {4, 4, 4};
    const VoxelGrid out = crop_to_box(grid, box, {1, 1, 1}, Interp::nearest);
    bool found = false;
    for (const float v : out.values) found |= v == 9.0f;
    CHECK(found);
    CHECK(out.at(1, 1, 1) == doctest::Approx(9.0));
}

TEST_CASE("resample: constant grid stays constant") {
    VoxelGrid grid = make_grid(geometry({5, 4, 3}, {2, 2, 2}), 7.5f);
    const VoxelGrid out = resample(grid, 1.3, Interp::linear);
    for (int a = 0; a < 3; ++a) CHECK(out.geom.spacing[a] == doctest::Approx(1.3));
    for (const float v : out.values) CHECK(v == doctest::Approx(7.5).epsilon(1e-6));
}

TEST_CASE("resample: identity when target equals input spacing") {
    VoxelGrid grid = random_grid({6, 5, 4}, 3);
    const VoxelGrid out = resample(grid, 1.0, Interp::linear);
    REQUIRE(out.geom.dims == grid.geom.dims);
    for (size_t i = 0; i < grid.values.size(); ++i)
        CHECK(double(out.values[i]) == doctest::Approx(double(grid.values[i])).epsilon(1e-6));
}

TEST_CASE("resample: 1D ramp midpoint") {
    // Values 0 and 10 at 2mm spacing; the 1mm grid hits the midpoint exactly.
    VoxelGrid grid = make_grid(geometry({2, 1, 1}, {2, 2, 2}));
    grid.values = {0.0f, 10.0f};
    const VoxelGrid out = resample(grid, Vec3{1, 2, 2}, Interp::linear);
    REQUIRE(out.geom.dims[0] == 4);
    CHECK(out.values[0] == doctest::Approx(0.0));
    CHECK(out.values[1] == doctest::Approx(5.0));
    CHECK(out.values[2] == doctest::Approx(10.0));
    CHECK(out.values[3] == doctest::Approx(10.0)); // edge cell clamps to the edge value
}

TEST_CASE("resample: nearest on masks never invents labels") {
    LabelMask mask = make_mask(geometry({7, 7, 7}));
    std::mt19937_64 rng(5);
    for (auto& l : mask.labels) l = uint8_t(rng() % 3);
    const LabelMask out = resample(mask, 0.7, Interp::nearest);
    for (const uint8_t l : out.labels) CHECK(l <= 2);

    CHECK_THROWS_AS(resample(mask, 0.7, Interp::linear), method_error);
}

TEST_CASE("crop_to_box: constant grid, exact dims, outside fill") {
    VoxelGrid grid = make_grid(geometry({40, 40, 40}, {2, 2, 2}), 3.0f);

    BoundingBoxMM inside;
    inside.center = {40, 40, 40};
    inside.size = {24, 24, 24};
    const VoxelGrid in_crop = crop_to_box(grid, inside, {1, 1, 1});
    CHECK(in_crop.geom.dims == Index3{24, 24, 24});
    for (const float v : in_crop.values) CHECK(v == doctest::Approx(3.0));

    BoundingBoxMM half_out;
    half_out.center = {0, 40, 40}; // half the box sits at x < -0.5, outside the volume
    half_out.size = {40, 20, 20};
    const VoxelGrid out_crop = crop_to_box(grid, half_out, {1, 1, 1});
    int zeros = 0;
    for (const float v : out_crop.values)
        if (v == 0.0f) ++zeros;
    CHECK(zeros > int(out_crop.values.size()) / 4);
    CHECK(zeros < int(out_crop.values.size()));
}

TEST_CASE("crop_to_box: 224mm box at 1mm gives exactly 224^3") {
    VoxelGrid grid = make_grid(geometry({10, 10, 10}, {4, 4, 4}), 1.0f);
    BoundingBoxMM box;
    box.center = {20, 20, 20};
    box.size = {224, 224, 224};
    const VoxelGrid out = crop_to_box(grid, box, {1, 1, 1});
    CHECK(out.geom.dims == Index3{224, 224, 224});
    // Physical extent equals the box size.
    for (int a = 0; a < 3; ++a)
        CHECK(double(out.geom.dims[a]) * out.geom.spacing[a] == doctest::Approx(224.0));
}

TEST_CASE("crop_to_box: indivisible size rejected") {
    VoxelGrid grid = make_grid(geometry({4, 4, 4}));
    BoundingBoxMM box;
    box.center = {2, 2, 2};
    box.size = {3, 3, 3};
    CHECK_THROWS_AS(crop_to_box(grid, box, {2, 2, 2}), geometry_error);
}

TEST_CASE("resample then crop preserves mask label set") {
    LabelMask mask = make_mask(geometry({20, 20, 20}));
    for (int k = 8; k < 12; ++k)
        for (int j = 8; j < 12; ++j)
            for (int i = 8; i < 12; ++i) mask.at(i, j, k) = uint8_t(1 + (i % 2));
    BoundingBoxMM box;
    box.center = {10, 10, 10};
    box.size = {16, 16, 16};
    const LabelMask out = crop_to_box(mask, box, {1, 1, 1});
    bool saw1 = false, saw2 = false;
    for (const uint8_t l : out.labels) {
        CHECK(l <= 2);
        saw1 |= l == 1;
        saw2 |= l == 2;
    }
    CHECK(saw1);
    CHECK(saw2);
}
