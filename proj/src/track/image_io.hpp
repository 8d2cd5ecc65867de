#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace racelab {

// 8-bit grayscale raster, row-major, row 0 at the top.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  uint8_t at(int row, int col) const {
    return pixels[static_cast<size_t>(row) * width + col];
  }
};

// Reads a PGM (P2/P5) or PNG file; the PNG must be 8-bit grayscale.
GrayImage load_gray_image(const std::string& path);

void save_pgm(const std::string& path, const GrayImage& img);

// 24-bit RGB PPM (P6) writer for debug dumps; data is HxWx3 in [0,1].
void save_ppm(const std::string& path, int width, int height,
              const std::vector<double>& rgb);

}  // namespace racelab
