#include "track/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "common/errors.hpp"

namespace racelab {

namespace {

int next_pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments, then parses a non-negative integer.
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      in.unget();
      break;
    }
  }
  int value;
  if (!(in >> value)) throw FormatError("malformed PGM header");
  return value;
}

GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path + "'");
  char p, kind;
  in.get(p);
  in.get(kind);
  if (p != 'P' || (kind != '2' && kind != '5'))
    throw FormatError("'" + path + "' is not a P2/P5 PGM");
  int width = next_pnm_token(in);
  int height = next_pnm_token(in);
  int maxval = next_pnm_token(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
    throw FormatError("unsupported PGM header in '" + path + "' (need 8-bit)");
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<size_t>(width) * height);
  if (kind == '5') {
    in.get();  // single whitespace after maxval
    if (!in.read(reinterpret_cast<char*>(img.pixels.data()),
                 static_cast<std::streamsize>(img.pixels.size())))
      throw FormatError("truncated PGM '" + path + "'");
  } else {
    for (auto& px : img.pixels) px = static_cast<uint8_t>(next_pnm_token(in));
  }
  return img;
}

GrayImage load_png(const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!fp) throw IoError("cannot open image '" + path + "'");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("libpng failed to decode '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 width = png_get_image_width(png, info);
  png_uint_32 height = png_get_image_height(png, info);
  png_byte color_type = png_get_color_type(png, info);
  png_byte bit_depth = png_get_bit_depth(png, info);

  if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth > 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("'" + path + "' must be an 8-bit grayscale PNG");
  }
  if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  GrayImage img;
  img.width = static_cast<int>(width);
  img.height = static_cast<int>(height);
  img.pixels.resize(static_cast<size_t>(width) * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 r = 0; r < height; ++r)
    rows[r] = img.pixels.data() + static_cast<size_t>(r) * width;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace

GrayImage load_gray_image(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".png") return load_png(path);
  return load_pgm(path);
}

void save_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

void save_ppm(const std::string& path, int width, int height,
              const std::vector<double>& rgb) {
  if (static_cast<int>(rgb.size()) != width * height * 3)
    throw DimensionError("save_ppm: buffer does not match dimensions");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "P6\n" << width << " " << height << "\n255\n";
  std::vector<uint8_t> bytes(rgb.size());
  for (size_t i = 0; i < rgb.size(); ++i) {
    double v = std::clamp(rgb[i], 0.0, 1.0);
    bytes[i] = static_cast<uint8_t>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace racelab
