#include "smart_track/depth_image.hpp"

#include "smart_track/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

namespace smart_track {

std::size_t DepthImage::valid_count() const {
  return static_cast<std::size_t>(std::count_if(data.begin(), data.end(), [](float d) { return is_valid(d); }));
}

std::uint16_t depth_to_mm(float depth) {
  if (!DepthImage::is_valid(depth)) {
    return 0;
  }
  const long mm = std::lround(static_cast<double>(depth) * 1000.0);
  if (mm <= 0 || mm > 65535) {
    return 0;
  }
  return static_cast<std::uint16_t>(mm);
}

void write_pgm(std::ostream& out, const DepthImage& img) {
  out << "P5\n" << img.width << ' ' << img.height << "\n65535\n";
  std::vector<char> bytes(img.data.size() * 2);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const std::uint16_t mm = depth_to_mm(img.data[i]);
    bytes[2 * i] = static_cast<char>(mm >> 8);
    bytes[2 * i + 1] = static_cast<char>(mm & 0xFF);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::Io, "failed writing PGM stream");
  }
}

void write_pgm(const std::string& path, const DepthImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  }
  write_pgm(out, img);
}

namespace {

// Reads one header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) {
        break;
      }
      continue;
    }
    token.push_back(c);
  }
  return token;
}

int parse_header_int(std::istream& in, const char* what) {
  const std::string token = next_token(in);
  try {
    std::size_t used = 0;
    const int value = std::stoi(token, &used);
    if (used != token.size()) {
      throw std::invalid_argument(token);
    }
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, std::string("bad PGM header field ") + what + ": '" + token + "'");
  }
}

}  // namespace

DepthImage read_pgm(std::istream& in) {
  if (next_token(in) != "P5") {
    throw Error(ErrorCode::Io, "not a binary PGM (expected P5)");
  }
  const int width = parse_header_int(in, "width");
  const int height = parse_header_int(in, "height");
  const int maxval = parse_header_int(in, "maxval");
  if (width <= 0 || height <= 0 || maxval != 65535) {
    throw Error(ErrorCode::Io, "unsupported PGM geometry or maxval");
  }
  DepthImage img(width, height);
  std::vector<unsigned char> bytes(img.data.size() * 2);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw Error(ErrorCode::Io, "truncated PGM payload");
  }
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const unsigned mm = (static_cast<unsigned>(bytes[2 * i]) << 8) | bytes[2 * i + 1];
    img.data[i] = mm == 0 ? DepthImage::kInvalid : static_cast<float>(mm / 1000.0);
  }
  return img;
}

DepthImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open " + path);
  }
  return read_pgm(in);
}

}  // namespace smart_track
