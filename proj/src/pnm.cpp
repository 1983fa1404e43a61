#include "bifactor/pnm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bifactor {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t offset,
                       const std::string& what) {
  std::ostringstream msg;
  msg << path << ": " << what << " (byte offset " << offset << ")";
  throw std::runtime_error(msg.str());
}

struct Scanner {
  const std::string& path;
  const std::string& buf;
  std::size_t pos = 0;

  // Skips whitespace and '#' comments (comments run to end of line).
  void skip() {
    while (pos < buf.size()) {
      if (std::isspace(static_cast<unsigned char>(buf[pos]))) {
        ++pos;
      } else if (buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n') ++pos;
      } else {
        return;
      }
    }
  }

  long next_int(const char* what) {
    skip();
    const std::size_t start = pos;
    if (pos >= buf.size()) fail(path, pos, std::string("missing ") + what);
    long value = 0;
    bool any = false;
    while (pos < buf.size() &&
           std::isdigit(static_cast<unsigned char>(buf[pos]))) {
      value = value * 10 + (buf[pos] - '0');
      if (value > 1'000'000'000L) fail(path, start, "numeric overflow");
      ++pos;
      any = true;
    }
    if (!any) fail(path, start, std::string("expected integer for ") + what);
    return value;
  }
};

}  // namespace

PortableImage read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image file: " + path);
  std::ostringstream raw;
  raw << in.rdbuf();
  const std::string buf = raw.str();

  if (buf.size() < 2 || buf[0] != 'P')
    fail(path, 0, "not a PNM file (bad magic)");
  const char kind = buf[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6')
    fail(path, 0, std::string("unsupported magic 'P") + kind + "'");
  const bool binary = kind == '5' || kind == '6';
  const int channels = (kind == '3' || kind == '6') ? 3 : 1;

  Scanner sc{path, buf, 2};
  PortableImage img;
  img.channels = channels;
  img.width = sc.next_int("width");
  img.height = sc.next_int("height");
  if (img.width <= 0 || img.height <= 0)
    fail(path, sc.pos, "non-positive dimensions");
  const long maxval = sc.next_int("maxval");
  if (maxval != 255) fail(path, sc.pos, "unsupported maxval (must be 255)");
  img.maxval = 255;

  const std::size_t count =
      static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  img.pixels.assign(static_cast<std::size_t>(channels),
                    std::vector<std::uint8_t>(count));

  if (binary) {
    // Exactly one whitespace byte separates the header from raster data.
    if (sc.pos >= buf.size() ||
        !std::isspace(static_cast<unsigned char>(buf[sc.pos])))
      fail(path, sc.pos, "missing raster separator");
    std::size_t at = sc.pos + 1;
    const std::size_t need = count * static_cast<std::size_t>(channels);
    if (buf.size() - at < need) fail(path, buf.size(), "truncated raster data");
    for (std::size_t p = 0; p < count; ++p)
      for (int c = 0; c < channels; ++c)
        img.pixels[static_cast<std::size_t>(c)][p] =
            static_cast<std::uint8_t>(buf[at + p * channels + c]);
  } else {
    for (std::size_t p = 0; p < count; ++p) {
      for (int c = 0; c < channels; ++c) {
        const long v = sc.next_int("pixel");
        if (v > 255) fail(path, sc.pos, "pixel value exceeds maxval");
        img.pixels[static_cast<std::size_t>(c)][p] =
            static_cast<std::uint8_t>(v);
      }
    }
  }
  return img;
}

void write_pnm(const std::string& path, const PortableImage& image,
               bool binary) {
  if (image.channels != 1 && image.channels != 3)
    throw std::invalid_argument("write_pnm: channels must be 1 or 3");
  const std::size_t count = static_cast<std::size_t>(image.width) *
                            static_cast<std::size_t>(image.height);
  if (image.pixels.size() != static_cast<std::size_t>(image.channels))
    throw std::invalid_argument("write_pnm: channel count mismatch");
  for (const auto& ch : image.pixels)
    if (ch.size() != count)
      throw std::invalid_argument("write_pnm: pixel count mismatch");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image file: " + path);
  const char magic = image.channels == 3 ? (binary ? '6' : '3')
                                         : (binary ? '5' : '2');
  out << 'P' << magic << '\n'
      << image.width << ' ' << image.height << '\n'
      << 255 << '\n';
  if (binary) {
    std::string row;
    row.reserve(count * static_cast<std::size_t>(image.channels));
    for (std::size_t p = 0; p < count; ++p)
      for (int c = 0; c < image.channels; ++c)
        row.push_back(static_cast<char>(
            image.pixels[static_cast<std::size_t>(c)][p]));
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  } else {
    for (std::size_t p = 0; p < count; ++p) {
      for (int c = 0; c < image.channels; ++c) {
        out << static_cast<int>(image.pixels[static_cast<std::size_t>(c)][p]);
        out << (((p * image.channels + c + 1) % 16 == 0) ? '\n' : ' ');
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

DenseMatrix channel_to_matrix(const PortableImage& image, int channel) {
  DenseMatrix m(image.height, image.width);
  const auto& ch = image.pixels.at(static_cast<std::size_t>(channel));
  for (Index y = 0; y < image.height; ++y)
    for (Index x = 0; x < image.width; ++x)
      m(y, x) = static_cast<double>(
          ch[static_cast<std::size_t>(y * image.width + x)]);
  return m;
}

void matrix_to_channel(const DenseMatrix& m, PortableImage& image,
                       int channel) {
  if (m.rows() != image.height || m.cols() != image.width)
    throw std::invalid_argument("matrix_to_channel: shape mismatch");
  auto& ch = image.pixels.at(static_cast<std::size_t>(channel));
  for (Index y = 0; y < image.height; ++y)
    for (Index x = 0; x < image.width; ++x) {
      const double v = std::round(m(y, x));
      ch[static_cast<std::size_t>(y * image.width + x)] =
          static_cast<std::uint8_t>(std::min(255.0, std::max(0.0, v)));
    }
}

}  // namespace bifactor
