#pragma once

#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace tamp {

// Reads any OpenCV-supported format as RGB, values scaled to [0,1].
Tensor read_image_rgb(const std::string& path);
// Reads as single-channel grayscale in [0,1].
Tensor read_image_gray(const std::string& path);

// Lossless artifact format: binary PPM/PGM with a fixed value mapping
// ([lo,hi] -> [0,255], round-to-nearest). Metrics are always computed from
// these files, never from previews.
void write_ppm(const std::string& path, const Tensor& img, float lo = -1.0f, float hi = 1.0f);
void write_pgm(const std::string& path, const Tensor& map, float lo = 0.0f, float hi = 1.0f);

// Lossy preview (JPEG, fixed quality) for side-by-side grids.
void write_preview_jpg(const std::string& path, const Tensor& img, float lo = -1.0f,
                       float hi = 1.0f);

Tensor resize_bilinear(const Tensor& img, int out_h, int out_w);
Tensor resize_nearest(const Tensor& img, int out_h, int out_w);

// Rows of equally-sized (3,H,W) tiles composed into one image with a 2px gap.
Tensor compose_grid(const std::vector<std::vector<Tensor>>& rows);

// 1-channel map replicated to 3 channels and rescaled from [0,1] to [-1,1]
// so masks/confidence can sit in an image grid.
Tensor map_to_rgb(const Tensor& map);

}  // namespace tamp
