#include "nnfn/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "nnfn/errors.hpp"

namespace nnfn {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

ColorImage from_bytes(int h, int w, const std::vector<std::uint8_t>& bytes) {
  ColorImage img(h, w);
  auto dst = img.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = bytes[i];
  return img;
}

std::vector<std::uint8_t> to_bytes(const ColorImage& image) {
  const auto src = image.data();
  std::vector<std::uint8_t> bytes(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = std::clamp(src[i], 0.0, 255.0);
    bytes[i] = static_cast<std::uint8_t>(std::lround(v));
  }
  return bytes;
}

ColorImage load_png(const fs::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, bytes.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return from_bytes(static_cast<int>(png.height), static_cast<int>(png.width),
                    bytes);
}

void save_png(const fs::path& path, const ColorImage& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_RGB;
  const auto bytes = to_bytes(image);
  if (!png_image_write_to_file(&png, path.c_str(), 0, bytes.data(), 0,
                               nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + png.message);
  }
}

// Next header token of a PNM file, skipping whitespace and # comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
    } else if (!std::isspace(ch)) {
      tok.push_back(static_cast<char>(ch));
      break;
    }
  }
  while ((ch = in.peek()) != EOF && !std::isspace(ch) && ch != '#') {
    tok.push_back(static_cast<char>(in.get()));
  }
  return tok;
}

int pnm_int(std::istream& in, const fs::path& path, const char* what) {
  const std::string tok = pnm_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used == tok.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw IoError("malformed PPM " + path.string() + ": bad " + what);
}

ColorImage load_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (pnm_token(in) != "P6") {
    throw IoError("malformed PPM " + path.string() + ": expected P6 header");
  }
  const int w = pnm_int(in, path, "width");
  const int h = pnm_int(in, path, "height");
  const int maxval = pnm_int(in, path, "maxval");
  if (maxval != 255) {
    throw IoError("unsupported PPM " + path.string() + ": maxval " +
                  std::to_string(maxval) + " (only 255)");
  }
  if (!std::isspace(in.get())) {
    throw IoError("malformed PPM " + path.string() + ": header terminator");
  }
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * kChannels);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw IoError("truncated PPM " + path.string());
  }
  return from_bytes(h, w, bytes);
}

void save_ppm(const fs::path& path, const ColorImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  const auto bytes = to_bytes(image);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

ImageFormat format_from_path(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return ImageFormat::png;
  if (ext == ".ppm") return ImageFormat::ppm;
  throw InvalidParameter("unsupported image extension '" + ext +
                         "' (use .png or .ppm)");
}

ColorImage load_image(const fs::path& path) {
  const ImageFormat format = format_from_path(path);
  if (!fs::exists(path)) throw IoError("no such file: " + path.string());
  return format == ImageFormat::png ? load_png(path) : load_ppm(path);
}

void save_image(const fs::path& path, const ColorImage& image) {
  const ImageFormat format = format_from_path(path);
  if (image.empty()) throw InvalidParameter("cannot save an empty image");
  if (format == ImageFormat::png) {
    save_png(path, image);
  } else {
    save_ppm(path, image);
  }
}

}  // namespace nnfn
