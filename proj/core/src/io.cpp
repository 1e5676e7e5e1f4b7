#include "mcg/io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mcg/error.hpp"

namespace mcg {
namespace {

constexpr std::uint8_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw IoError("unexpected end of file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void expect_magic(std::istream& in, const char* magic) {
  std::array<char, 4> m{};
  if (!in.read(m.data(), 4)) throw FormatError("file too short for magic");
  if (std::memcmp(m.data(), magic, 4) != 0) throw FormatError(std::string("bad magic, expected ") + magic);
  char version = 0;
  if (!in.get(version)) throw FormatError("missing version byte");
  if (static_cast<std::uint8_t>(version) != kVersion) throw FormatError("unsupported version");
}

Dims get_dims(std::istream& in) {
  const std::uint32_t h = get_u32(in);
  const std::uint32_t w = get_u32(in);
  if (h == 0 || w == 0 || h > (1u << 16) || w > (1u << 16)) throw FormatError("implausible dimensions");
  return Dims{static_cast<int>(h), static_cast<int>(w)};
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) return tok;
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  return tok;
}

int pnm_int(std::istream& in) {
  const std::string tok = pnm_token(in);
  if (tok.empty()) throw FormatError("truncated PNM header");
  int v = 0;
  for (char ch : tok) {
    if (ch < '0' || ch > '9') throw FormatError("non-numeric PNM header field: " + tok);
    v = v * 10 + (ch - '0');
    if (v > (1 << 20)) throw FormatError("PNM header field too large");
  }
  return v;
}

struct RawPnm {
  Dims dims;
  int channels = 1;
  std::vector<unsigned char> bytes;
};

RawPnm read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string magic = pnm_token(in);
  RawPnm raw;
  if (magic == "P5") {
    raw.channels = 1;
  } else if (magic == "P6") {
    raw.channels = 3;
  } else {
    throw FormatError(path.string() + ": expected binary PGM (P5) or PPM (P6)");
  }
  raw.dims.width = pnm_int(in);
  raw.dims.height = pnm_int(in);
  const int maxval = pnm_int(in);
  if (raw.dims.width <= 0 || raw.dims.height <= 0) throw FormatError(path.string() + ": empty image");
  if (maxval != 255) throw FormatError(path.string() + ": maxval must be 255");
  raw.bytes.resize(raw.dims.size() * static_cast<std::size_t>(raw.channels));
  in.read(reinterpret_cast<char*>(raw.bytes.data()), static_cast<std::streamsize>(raw.bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.bytes.size()) {
    throw IoError(path.string() + ": truncated pixel payload");
  }
  return raw;
}

void write_pnm(const std::filesystem::path& path, Dims dims, int channels, const std::vector<unsigned char>& bytes) {
  std::ostringstream out;
  out << (channels == 1 ? "P5" : "P6") << '\n' << dims.width << ' ' << dims.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  write_file_atomic(path, out.str());
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

Image load_image(const std::filesystem::path& path) {
  const RawPnm raw = read_pnm(path);
  Image img{raw.dims, raw.channels, std::vector<double>(raw.bytes.size())};
  for (std::size_t i = 0; i < raw.bytes.size(); ++i) img.data[i] = raw.bytes[i] / 255.0;
  return img;
}

void save_image(const Image& image, const std::filesystem::path& path) {
  if (image.channels != 1 && image.channels != 3) throw ParameterError("save_image: channels must be 1 or 3");
  std::vector<unsigned char> bytes(image.data.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<unsigned char>(std::lround(std::clamp(image.data[i], 0.0, 1.0) * 255.0));
  }
  write_pnm(path, image.dims, image.channels, bytes);
}

void write_labelmap(std::ostream& out, const LabelMap& map) {
  out.write("MCGL", 4);
  out.put(static_cast<char>(kVersion));
  put_u32(out, static_cast<std::uint32_t>(map.dims.height));
  put_u32(out, static_cast<std::uint32_t>(map.dims.width));
  for (std::uint32_t v : map.labels) put_u32(out, v);
}

LabelMap read_labelmap(std::istream& in) {
  expect_magic(in, "MCGL");
  LabelMap map;
  map.dims = get_dims(in);
  map.labels.resize(map.dims.size());
  for (auto& v : map.labels) v = get_u32(in);
  return map;
}

void save_labelmap(const LabelMap& map, const std::filesystem::path& path) {
  std::ostringstream out;
  write_labelmap(out, map);
  write_file_atomic(path, out.str());
}

LabelMap load_labelmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_labelmap(in);
}

void save_contour_map(const ContourMap& cm, const std::filesystem::path& path) {
  std::ostringstream out;
  out.write("MCGC", 4);
  out.put(static_cast<char>(kVersion));
  put_u32(out, static_cast<std::uint32_t>(cm.pixels().height));
  put_u32(out, static_cast<std::uint32_t>(cm.pixels().width));
  for (double v : cm.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  write_file_atomic(path, out.str());
}

ContourMap load_contour_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  expect_magic(in, "MCGC");
  ContourMap cm(get_dims(in));
  for (double& v : cm.data()) {
    v = static_cast<double>(std::bit_cast<float>(get_u32(in)));
    if (!(v >= 0.0 && v <= 1.0)) throw FormatError(path.string() + ": contour strength outside [0,1]");
  }
  return cm;
}

std::string ucm_to_bytes(const Ucm& u) {
  std::ostringstream out;
  write_labelmap(out, u.finest);
  nlohmann::json merges = nlohmann::json::array();
  for (const Merge& m : u.merges) {
    merges.push_back({{"id", m.id}, {"children", m.children}, {"lambda", m.lambda}});
  }
  out << nlohmann::json{{"merges", merges}}.dump();
  return out.str();
}

Ucm ucm_from_bytes(const std::string& bytes) {
  std::istringstream in(bytes);
  Ucm u;
  u.finest = read_labelmap(in);
  const std::string rest(std::istreambuf_iterator<char>(in), {});
  try {
    const auto doc = nlohmann::json::parse(rest);
    for (const auto& m : doc.at("merges")) {
      u.merges.push_back(Merge{m.at("id").get<int>(), m.at("children").get<std::vector<int>>(),
                               m.at("lambda").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad merge list: ") + e.what());
  }
  try {
    Dendrogram check(u);
  } catch (const ParameterError& e) {
    throw FormatError(std::string("invalid hierarchy: ") + e.what());
  }
  return u;
}

void save_ucm(const Ucm& u, const std::filesystem::path& path) { write_file_atomic(path, ucm_to_bytes(u)); }

Ucm load_ucm(const std::filesystem::path& path) {
  try {
    return ucm_from_bytes(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

InstanceGroundTruth load_ground_truth(const std::filesystem::path& path) {
  InstanceGroundTruth gt;
  const std::string head = read_file(path).substr(0, 4);
  if (head == "MCGL") {
    LabelMap raw = load_labelmap(path);
    gt.dims = raw.dims;
    gt.ids = std::move(raw.labels);
  } else {
    const RawPnm raw = read_pnm(path);
    if (raw.channels != 1) throw FormatError(path.string() + ": ground truth PNM must be single-channel");
    gt.dims = raw.dims;
    gt.ids.assign(raw.bytes.begin(), raw.bytes.end());
  }
  std::set<std::uint32_t> present(gt.ids.begin(), gt.ids.end());
  present.erase(0);
  std::uint32_t expect = 1;
  for (std::uint32_t id : present) {
    if (id != expect++) throw FormatError(path.string() + ": instance ids are not contiguous");
  }
  return gt;
}

void save_ground_truth(const InstanceGroundTruth& gt, const std::filesystem::path& path) {
  save_labelmap(LabelMap{gt.dims, gt.ids}, path);
}

}  // namespace mcg
