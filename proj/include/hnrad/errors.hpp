#ifndef HNRAD_ERRORS_HPP
#define HNRAD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hnrad {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File could not be read or written.
struct io_error : error {
    using error::error;
};

// File content is not a volume we understand (bad magic, truncation, NaNs).
struct format_error : io_error {
    using io_error::io_error;
};

// Volume is not 3D.
struct dimension_error : format_error {
    using format_error::format_error;
};

// Mask contains labels outside {0,1,2}.
struct label_error : error {
    using error::error;
};

// Grids that must share geometry do not, or a geometry is invalid.
struct geometry_error : error {
    using error::error;
};

// Unsupported interpolation request (e.g. linear on a label mask).
struct method_error : error {
    using error::error;
};

// Region of interest is empty where a non-empty one is required.
struct empty_roi_error : error {
    using error::error;
};

// Feature undefined on this input (e.g. no co-occurrence pairs at all).
struct undefined_feature_error : error {
    using error::error;
};

// Column/feature name mismatch between two tables or a model and its input.
struct schema_error : error {
    using error::error;
};

// Singular or rank-deficient design matrix.
struct design_error : error {
    using error::error;
};

// A batch with fewer samples than harmonization requires.
struct batch_size_error : error {
    using error::error;
};

// Degenerate model input (zero-variance feature, no events, no permissible pairs).
struct fit_error : error {
    using error::error;
};

// A pipeline stage produced nothing to continue with.
struct pipeline_error : error {
    using error::error;
};

} // namespace hnrad

#endif
