#include <cctype>
#include <fstream>
#include <sstream>

#include "whisker/errors.hpp"
#include "whisker/render.hpp"

namespace whisker::render {

namespace {

void skip_space_and_comments(const std::string& s, std::size_t& pos) {
  while (pos < s.size()) {
    if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
}

int read_header_int(const std::string& s, std::size_t& pos, const char* what) {
  skip_space_and_comments(s, pos);
  if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
    throw FormatError(std::string("PPM: malformed header, expected ") + what);
  long v = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + (s[pos] - '0');
    if (v > 1'000'000) throw FormatError(std::string("PPM: ") + what + " too large");
    ++pos;
  }
  return static_cast<int>(v);
}

}  // namespace

std::string encode_ppm(const Frame& frame) {
  std::string out = "P6\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(frame.pixels.data()), frame.pixels.size());
  return out;
}

Frame decode_ppm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    throw FormatError("PPM: bad magic, expected binary P6");
  std::size_t pos = 2;
  const int width = read_header_int(bytes, pos, "width");
  const int height = read_header_int(bytes, pos, "height");
  const int maxval = read_header_int(bytes, pos, "maxval");
  if (width <= 0 || height <= 0) throw FormatError("PPM: image dimensions must be positive");
  if (maxval != 255) throw FormatError("PPM: only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw FormatError("PPM: malformed header, missing separator before pixel data");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  if (bytes.size() - pos < need) throw FormatError("PPM: truncated pixel data");
  Frame frame(width, height);
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
            bytes.begin() + static_cast<std::ptrdiff_t>(pos + need), frame.pixels.begin());
  return frame;
}

void write_ppm(const Frame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const auto bytes = encode_ppm(frame);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Frame read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_ppm(buf.str());
}

}  // namespace whisker::render
