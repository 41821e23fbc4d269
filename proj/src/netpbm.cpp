#include "mnflow/netpbm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "mnflow/errors.hpp"

namespace mnflow {

namespace {

std::vector<char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Cursor over a netpbm header: whitespace-separated ASCII integers with
// optional '#' comments running to end of line.
class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<char>& bytes) : bytes_(bytes) {}

  std::optional<long> next_int() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000) return std::nullopt;
      ++pos_;
    }
    if (pos_ == start) return std::nullopt;
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  bool consume_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      return false;
    }
    ++pos_;
    return true;
  }

  std::size_t position() const noexcept { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<char>& bytes_;
  std::size_t pos_ = 2;
};

void write_bytes(const std::filesystem::path& path, const std::string& header,
                 const std::vector<std::uint8_t>& payload) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

Image load_pgm(const std::filesystem::path& path) {
  const std::vector<char> bytes = read_all(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError(FormatError::Kind::kBadMagic, path.string() + ": not a binary PGM (P5)");
  }

  HeaderReader header(bytes);
  const auto width = header.next_int();
  const auto height = header.next_int();
  const auto maxval = header.next_int();
  if (!width || !height || !maxval || *width <= 0 || *height <= 0 ||
      !header.consume_single_space()) {
    throw FormatError(FormatError::Kind::kBadHeader, path.string() + ": malformed PGM header");
  }
  if (*maxval != 255) {
    throw FormatError(FormatError::Kind::kBadMaxval,
                      path.string() + ": maxval " + std::to_string(*maxval) + " unsupported");
  }

  const std::size_t count = static_cast<std::size_t>(*width) * static_cast<std::size_t>(*height);
  if (bytes.size() - header.position() < count) {
    throw FormatError(FormatError::Kind::kTruncated,
                      path.string() + ": expected " + std::to_string(count) + " pixel bytes, found " +
                          std::to_string(bytes.size() - header.position()));
  }

  std::vector<double> data(count);
  const auto* payload = reinterpret_cast<const unsigned char*>(bytes.data() + header.position());
  std::transform(payload, payload + count, data.begin(),
                 [](unsigned char v) { return v / 255.0; });
  return Image(static_cast<int>(*width), static_cast<int>(*height), std::move(data));
}

std::uint8_t quantize(double value) {
  if (!(value > 0.0)) return 0;  // also maps NaN to 0
  return static_cast<std::uint8_t>(std::round(std::min(value, 1.0) * 255.0));
}

void save_pgm(const Image& image, const std::filesystem::path& path) {
  std::vector<std::uint8_t> payload(image.size());
  std::transform(image.pixels().begin(), image.pixels().end(), payload.begin(), quantize);
  const std::string header = "P5\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  write_bytes(path, header, payload);
}

void save_ppm(const RgbImage& image, const std::filesystem::path& path) {
  if (image.rgb.size() != 3u * static_cast<std::size_t>(image.width) * image.height) {
    throw InvalidArgument("RGB buffer length does not match dimensions");
  }
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  write_bytes(path, header, image.rgb);
}

}  // namespace mnflow
