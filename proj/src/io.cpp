#include "pradkit/io.hpp"

#include <png.h>

#include <array>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "pradkit/error.hpp"
#include "pradkit/keyvalue.hpp"

namespace pradkit {

namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& path, const std::string& header,
               const std::vector<unsigned char>& payload) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

class PnmHeaderReader {
 public:
  PnmHeaderReader(const std::vector<unsigned char>& bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  unsigned long next_number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw DataError(name_ + ": malformed PGM header");
    }
    unsigned long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1ul << 31)) {
        throw DataError(name_ + ": PGM header value too large");
      }
      ++pos_;
    }
    return value;
  }

  /// Position after the single whitespace that terminates the header.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw DataError(name_ + ": malformed PGM header");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
          ++pos_;
        }
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string name_;
  std::size_t pos_ = 2;
};

GrayImage decode_pgm(const std::vector<unsigned char>& bytes, const std::string& name,
                     const FrameMeta& meta) {
  PnmHeaderReader header(bytes, name);
  const auto width = header.next_number();
  const auto height = header.next_number();
  const auto maxval = header.next_number();
  const auto offset = header.payload_offset();
  if (width == 0 || height == 0) {
    throw DataError(name + ": zero-sized image");
  }
  if (maxval != 255 && maxval != 65535) {
    throw DataError(name + ": unsupported PGM maxval " + std::to_string(maxval) +
                    " (expected 255 or 65535)");
  }
  const std::size_t sample_bytes = maxval == 255 ? 1 : 2;
  const std::size_t count = width * height;
  if (bytes.size() < offset + count * sample_bytes) {
    throw DataError(name + ": truncated PGM payload");
  }
  std::vector<double> px(count);
  const unsigned char* p = bytes.data() + offset;
  if (sample_bytes == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      px[i] = p[i] / 255.0;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned v = (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1];
      px[i] = v / 65535.0;
    }
  }
  return GrayImage(width, height, std::move(px), meta);
}

std::uint32_t read_be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

GrayImage decode_png(const std::vector<unsigned char>& bytes, const std::string& name,
                     const FrameMeta& meta) {
  // IHDR is always the first chunk; check depth and colour type before
  // handing the buffer to libpng, which would silently convert them.
  if (bytes.size() < 33 || std::memcmp(bytes.data() + 12, "IHDR", 4) != 0) {
    throw DataError(name + ": malformed PNG header");
  }
  const auto width = read_be32(bytes.data() + 16);
  const auto height = read_be32(bytes.data() + 20);
  const int bit_depth = bytes[24];
  const int color_type = bytes[25];
  if (width == 0 || height == 0) {
    throw DataError(name + ": zero-sized image");
  }
  if (color_type != PNG_COLOR_TYPE_GRAY) {
    throw DataError(name + ": only single-channel grayscale PNG is supported");
  }
  if (bit_depth != 8 && bit_depth != 16) {
    throw DataError(name + ": unsupported PNG bit depth " + std::to_string(bit_depth));
  }

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw DataError(name + ": " + image.message);
  }
  const std::size_t count = std::size_t{width} * height;
  std::vector<double> px(count);
  if (bit_depth == 8) {
    image.format = PNG_FORMAT_GRAY;
    std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
      throw DataError(name + ": " + image.message);
    }
    for (std::size_t i = 0; i < count; ++i) {
      px[i] = buf[i] / 255.0;
    }
  } else {
    image.format = PNG_FORMAT_LINEAR_Y;
    std::vector<png_uint_16> buf(PNG_IMAGE_SIZE(image) / sizeof(png_uint_16));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
      throw DataError(name + ": " + image.message);
    }
    for (std::size_t i = 0; i < count; ++i) {
      px[i] = buf[i] / 65535.0;
    }
  }
  return GrayImage(width, height, std::move(px), meta);
}

}  // namespace

GrayImage load_gray(const std::filesystem::path& path, const FrameMeta& meta) {
  const auto bytes = read_all(path);
  const auto name = path.string();
  static constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P',  'N',  'G',
                                                                 '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature.data(), 8) == 0) {
    return decode_png(bytes, name, meta);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    return decode_pgm(bytes, name, meta);
  }
  throw DataError(name + ": unsupported image format (expected binary PGM or grayscale PNG)");
}

void save_gray(const GrayImage& img, const std::filesystem::path& path) {
  std::vector<unsigned char> payload(img.size() * 2);
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto v = static_cast<unsigned>(std::lround(px[i] * 65535.0));
    payload[2 * i] = static_cast<unsigned char>(v >> 8);
    payload[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
  }
  write_all(path,
            "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n65535\n",
            payload);
}

void save_mask(const BinaryImage& bin, const std::filesystem::path& path) {
  std::vector<unsigned char> payload(bin.size());
  const auto fg = bin.data();
  for (std::size_t i = 0; i < fg.size(); ++i) {
    payload[i] = fg[i] ? 255 : 0;
  }
  write_all(path,
            "P5\n" + std::to_string(bin.width()) + " " + std::to_string(bin.height()) + "\n255\n",
            payload);
}

std::filesystem::path sidecar_path(const std::filesystem::path& frame_path) {
  auto p = frame_path;
  p += ".meta";
  return p;
}

void write_sidecar(const FrameMeta& meta, const std::filesystem::path& frame_path) {
  KeyValueFile kv;
  kv.set("time_us", format_number(meta.time_us));
  kv.set("exposure_us", format_number(meta.exposure_us));
  kv.set("pixel_pitch_mm", format_number(meta.pixel_pitch_mm));
  kv.save(sidecar_path(frame_path));
}

std::optional<FrameMeta> read_sidecar(const std::filesystem::path& frame_path) {
  const auto path = sidecar_path(frame_path);
  if (!std::filesystem::exists(path)) {
    return std::nullopt;
  }
  const auto kv = KeyValueFile::load(path);
  kv.require_known({"time_us", "exposure_us", "pixel_pitch_mm"});
  FrameMeta meta;
  meta.time_us = kv.get_double("time_us", meta.time_us);
  meta.exposure_us = kv.get_double("exposure_us", meta.exposure_us);
  meta.pixel_pitch_mm = kv.get_double("pixel_pitch_mm", meta.pixel_pitch_mm);
  return meta;
}

GrayImage load_frame(const std::filesystem::path& path, const FrameMeta& fallback) {
  return load_gray(path, read_sidecar(path).value_or(fallback));
}

}  // namespace pradkit
