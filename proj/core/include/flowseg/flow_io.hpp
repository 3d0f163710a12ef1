#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowseg/errors.hpp"
#include "flowseg/types.hpp"

namespace flowseg {

/// Parse a Middlebury .flo byte stream.
///
/// Layout: 4-byte little-endian float 202021.25, int32 width, int32 height,
/// then height*width interleaved (u, v) float32 pairs, row-major.
/// Throws FormatError with kind BadMagic, Truncated, BadDims or NonFinite.
FlowField read_flo(std::span<const std::byte> bytes);

/// Bit-exact inverse of read_flo.
std::vector<std::byte> write_flo(const FlowField& f);

FlowField read_flo_file(const std::string& path);
void write_flo_file(const FlowField& f, const std::string& path);

/// Bilinear resampling onto a new_w x new_h grid (pixel-center aligned).
/// u components are scaled by new_w/width and v by new_h/height so the field
/// stays consistent with the resampled coordinate frame.
FlowField resize_bilinear(const FlowField& f, int new_w, int new_h);

/// HSV rendering of a flow field: hue is the vector angle, saturation the
/// magnitude normalized by max_mag (99th-percentile magnitude when absent),
/// value fixed at 1.
RgbImage flow_to_color(const FlowField& f, std::optional<double> max_mag = std::nullopt);

/// Paint labels with a fixed palette (cycled when K exceeds it); when an
/// overlay image is given, blend at alpha 0.5. Throws LabelOutOfRange.
RgbImage render_labels(const LabelMap& labels, int k, const RgbImage* overlay = nullptr);

/// Binary PPM (P6) encoding.
std::vector<std::byte> write_ppm(const RgbImage& img);
void write_ppm_file(const RgbImage& img, const std::string& path);

/// Binary PGM (P5) label-map encoding; labels must fit in a byte.
std::vector<std::byte> write_pgm(const LabelMap& labels);
void write_pgm_file(const LabelMap& labels, const std::string& path);

/// Parse a binary PGM (P5); pixel values are returned verbatim as labels.
LabelMap read_pgm(std::span<const std::byte> bytes);
LabelMap read_pgm_file(const std::string& path);

/// Ground-truth convention: values > 127 are foreground.
BinaryMask mask_from_gt(const LabelMap& gt);

}  // namespace flowseg
