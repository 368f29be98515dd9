#include "pstereo/io_formats.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

namespace pstereo {
namespace {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

[[noreturn]] void fail(const std::string& msg) { throw FormatError(msg); }

std::streamoff offset_of(std::istream& in) {
    const auto pos = in.rdstate() ? std::streampos(-1) : in.tellg();
    return pos == std::streampos(-1) ? -1 : static_cast<std::streamoff>(pos);
}

void read_exact(std::istream& in, void* dst, std::size_t n, const char* what) {
    const std::streamoff at = offset_of(in);
    in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        fail(std::string(what) + ": truncated at offset " + std::to_string(at) +
             " (wanted " + std::to_string(n) + " bytes, got " +
             std::to_string(in.gcount()) + ")");
}

// Bytes left from the current position to end of stream.
std::uint64_t bytes_remaining(std::istream& in) {
    const std::streampos here = in.tellg();
    in.seekg(0, std::ios::end);
    const std::streampos end = in.tellg();
    in.seekg(here);
    if (here == std::streampos(-1) || end == std::streampos(-1))
        fail("stream is not seekable");
    return static_cast<std::uint64_t>(end - here);
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::ostream& out, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail("cannot open '" + path + "' for reading");
    return in;
}

// Writes through a temp file and renames it into place, so a failed write
// never leaves a partial output behind.
void atomic_write(const std::string& path,
                  const std::function<void(std::ostream&)>& writer) {
    namespace fs = std::filesystem;
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            fail("cannot open '" + tmp + "' for writing");
        writer(out);
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            fail("write to '" + tmp + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        fail("rename '" + tmp + "' -> '" + path + "' failed: " + ec.message());
    }
}

constexpr char kPsfmMagic[4] = {'P', 'S', 'F', 'M'};
constexpr std::uint16_t kPsfmVersion = 1;
constexpr std::size_t kPsfmHeaderSize = 4 + 2 + 4 + 4 + 4 + 1;

}  // namespace

FeatureMap read_feature_map(std::istream& in) {
    unsigned char header[kPsfmHeaderSize];
    read_exact(in, header, sizeof(header), "PSFM header");
    if (std::memcmp(header, kPsfmMagic, 4) != 0)
        fail("PSFM: bad magic at offset 0");
    const std::uint16_t version = get_u16(header + 4);
    if (version != kPsfmVersion)
        fail("PSFM: unsupported version " + std::to_string(version) + " at offset 4");
    const std::uint32_t w = get_u32(header + 6);
    const std::uint32_t h = get_u32(header + 10);
    const std::uint32_t c = get_u32(header + 14);
    const std::uint8_t dtype = header[18];
    if (w == 0 || h == 0 || c == 0)
        fail("PSFM: zero dimension in header (offset 6)");
    if (dtype > 1)
        fail("PSFM: unknown dtype code " + std::to_string(dtype) + " at offset 18");
    const std::uint64_t elems = static_cast<std::uint64_t>(w) * h * c;
    const std::uint64_t scalar_size = dtype == 0 ? 4 : 8;
    if (elems > std::numeric_limits<std::uint64_t>::max() / scalar_size)
        fail("PSFM: dimensions overflow payload size");
    const std::uint64_t expect = elems * scalar_size;
    const std::uint64_t have = bytes_remaining(in);
    if (have != expect)
        fail("PSFM: payload length mismatch at offset " +
             std::to_string(kPsfmHeaderSize) + ": header declares " +
             std::to_string(expect) + " bytes, stream has " + std::to_string(have));

    FeatureMap map(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c), 0.0);
    if (dtype == 0) {
        std::vector<float> buf(elems);
        read_exact(in, buf.data(), expect, "PSFM payload");
        for (std::uint64_t i = 0; i < elems; ++i)
            map.data[i] = static_cast<double>(buf[i]);
    } else {
        read_exact(in, map.data.data(), expect, "PSFM payload");
    }
    if (!all_finite(map.data))
        fail("PSFM: payload contains non-finite values");
    return map;
}

FeatureMap read_feature_map(const std::string& path) {
    auto in = open_input(path);
    return read_feature_map(in);
}

void write_feature_map(const FeatureMap& map, std::ostream& out, ScalarType dtype) {
    if (map.width < 1 || map.height < 1 || map.channels < 1)
        throw DimensionError("write_feature_map: empty map");
    out.write(kPsfmMagic, 4);
    put_u16(out, kPsfmVersion);
    put_u32(out, static_cast<std::uint32_t>(map.width));
    put_u32(out, static_cast<std::uint32_t>(map.height));
    put_u32(out, static_cast<std::uint32_t>(map.channels));
    const unsigned char code = static_cast<unsigned char>(dtype);
    out.write(reinterpret_cast<const char*>(&code), 1);
    if (dtype == ScalarType::f32) {
        std::vector<float> buf(map.data.size());
        for (std::size_t i = 0; i < map.data.size(); ++i)
            buf[i] = static_cast<float>(map.data[i]);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
    } else {
        out.write(reinterpret_cast<const char*>(map.data.data()),
                  static_cast<std::streamsize>(map.data.size() * sizeof(double)));
    }
}

void write_feature_map(const FeatureMap& map, const std::string& path,
                       ScalarType dtype) {
    atomic_write(path, [&](std::ostream& out) { write_feature_map(map, out, dtype); });
}

void write_cost_volume(const CostVolume& vol, const std::string& path,
                       ScalarType dtype) {
    FeatureMap flat(vol.width, vol.height, vol.levels * vol.channels, 0.0);
    flat.data = vol.data;
    write_feature_map(flat, path, dtype);
}

// ---- PFM ----

namespace {

// One whitespace-separated token from a PFM/PNM header.
std::string next_token(std::istream& in, const char* what) {
    std::string tok;
    int ch;
    while ((ch = in.peek()) != EOF && std::isspace(ch))
        in.get();
    while ((ch = in.peek()) != EOF && !std::isspace(ch)) {
        tok.push_back(static_cast<char>(in.get()));
        if (tok.size() > 32)
            fail(std::string(what) + ": header token too long at offset " +
                 std::to_string(offset_of(in)));
    }
    if (tok.empty())
        fail(std::string(what) + ": missing header token at offset " +
             std::to_string(offset_of(in)));
    return tok;
}

long parse_long(const std::string& tok, const char* what) {
    try {
        std::size_t used = 0;
        const long v = std::stol(tok, &used);
        if (used != tok.size())
            fail(std::string(what) + ": trailing characters in '" + tok + "'");
        return v;
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception&) {
        fail(std::string(what) + ": cannot parse integer '" + tok + "'");
    }
}

double parse_double(const std::string& tok, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size())
            fail(std::string(what) + ": trailing characters in '" + tok + "'");
        return v;
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception&) {
        fail(std::string(what) + ": cannot parse number '" + tok + "'");
    }
}

float swap_f32(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    u = (u >> 24) | ((u >> 8) & 0xff00u) | ((u << 8) & 0xff0000u) | (u << 24);
    std::memcpy(&v, &u, 4);
    return v;
}

struct PfmPayload {
    int width = 0;
    int height = 0;
    std::vector<double> values;  // top-down
};

PfmPayload read_pfm(std::istream& in) {
    if (next_token(in, "PFM") != "Pf")
        fail("PFM: bad magic at offset 0 (expected 'Pf')");
    const long w = parse_long(next_token(in, "PFM"), "PFM width");
    const long h = parse_long(next_token(in, "PFM"), "PFM height");
    const double scale = parse_double(next_token(in, "PFM"), "PFM scale");
    if (w < 1 || h < 1 || w > (1 << 20) || h > (1 << 20))
        fail("PFM: implausible dimensions " + std::to_string(w) + "x" +
             std::to_string(h));
    if (scale == 0.0 || !std::isfinite(scale))
        fail("PFM: invalid scale");
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep))
        fail("PFM: expected single whitespace before payload at offset " +
             std::to_string(offset_of(in)));
    const std::uint64_t expect = static_cast<std::uint64_t>(w) * h * 4;
    const std::uint64_t have = bytes_remaining(in);
    if (have != expect)
        fail("PFM: payload length mismatch: expected " + std::to_string(expect) +
             " bytes, stream has " + std::to_string(have));
    std::vector<float> rows(static_cast<std::size_t>(w) * h);
    read_exact(in, rows.data(), expect, "PFM payload");
    const bool big_endian = scale > 0.0;
    PfmPayload out;
    out.width = static_cast<int>(w);
    out.height = static_cast<int>(h);
    out.values.resize(rows.size());
    // PFM rows run bottom-up.
    for (long y = 0; y < h; ++y) {
        const float* src = rows.data() + static_cast<std::size_t>(h - 1 - y) * w;
        double* dst = out.values.data() + static_cast<std::size_t>(y) * w;
        for (long x = 0; x < w; ++x) {
            const float v = big_endian ? swap_f32(src[x]) : src[x];
            dst[x] = static_cast<double>(v);
        }
    }
    return out;
}

void write_pfm(std::ostream& out, int width, int height, const double* values) {
    out << "Pf\n" << width << " " << height << "\n-1.0\n";
    std::vector<float> row(static_cast<std::size_t>(width));
    for (int y = height - 1; y >= 0; --y) {
        const double* src = values + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x)
            row[static_cast<std::size_t>(x)] = static_cast<float>(src[x]);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
}

bool pfm_value_valid(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

DepthMap read_depth_pfm(std::istream& in) {
    const PfmPayload raw = read_pfm(in);
    DepthMap map(raw.width, raw.height);
    for (std::size_t i = 0; i < raw.values.size(); ++i)
        if (pfm_value_valid(raw.values[i])) {
            map.z[i] = raw.values[i];
            map.valid[i] = 1;
        }
    return map;
}

DepthMap read_depth_pfm(const std::string& path) {
    auto in = open_input(path);
    return read_depth_pfm(in);
}

void write_depth_pfm(const DepthMap& map, std::ostream& out) {
    if (map.width < 1 || map.height < 1)
        throw DimensionError("write_depth_pfm: empty map");
    std::vector<double> vals(map.z.size(), 0.0);
    for (std::size_t i = 0; i < vals.size(); ++i)
        vals[i] = map.valid[i] ? map.z[i] : 0.0;
    write_pfm(out, map.width, map.height, vals.data());
}

void write_depth_pfm(const DepthMap& map, const std::string& path) {
    atomic_write(path, [&](std::ostream& out) { write_depth_pfm(map, out); });
}

DisparityMap read_disparity_pfm(std::istream& in) {
    const PfmPayload raw = read_pfm(in);
    DisparityMap map(raw.width, raw.height);
    for (std::size_t i = 0; i < raw.values.size(); ++i)
        if (pfm_value_valid(raw.values[i])) {
            map.d[i] = raw.values[i];
            map.valid[i] = 1;
        }
    return map;
}

DisparityMap read_disparity_pfm(const std::string& path) {
    auto in = open_input(path);
    return read_disparity_pfm(in);
}

void write_disparity_pfm(const DisparityMap& map, std::ostream& out) {
    if (map.width < 1 || map.height < 1)
        throw DimensionError("write_disparity_pfm: empty map");
    std::vector<double> vals(map.d.size(), 0.0);
    for (std::size_t i = 0; i < vals.size(); ++i)
        vals[i] = map.valid[i] ? map.d[i] : 0.0;
    write_pfm(out, map.width, map.height, vals.data());
}

void write_disparity_pfm(const DisparityMap& map, const std::string& path) {
    atomic_write(path, [&](std::ostream& out) { write_disparity_pfm(map, out); });
}

// ---- PGM / PPM ----

namespace {

// Netpbm header token; '#' starts a comment running to end of line.
std::string pnm_token(std::istream& in) {
    int ch;
    for (;;) {
        ch = in.peek();
        if (ch == EOF)
            fail("PNM: unexpected end of header");
        if (std::isspace(ch)) {
            in.get();
            continue;
        }
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        break;
    }
    std::string tok;
    while ((ch = in.peek()) != EOF && !std::isspace(ch) && ch != '#') {
        tok.push_back(static_cast<char>(in.get()));
        if (tok.size() > 16)
            fail("PNM: header token too long at offset " +
                 std::to_string(offset_of(in)));
    }
    return tok;
}

}  // namespace

RasterImage read_image(std::istream& in) {
    const std::string magic = pnm_token(in);
    int channels = 0;
    if (magic == "P5")
        channels = 1;
    else if (magic == "P6")
        channels = 3;
    else
        fail("PNM: unsupported magic '" + magic + "' at offset 0 (want P5 or P6)");
    const long w = parse_long(pnm_token(in), "PNM width");
    const long h = parse_long(pnm_token(in), "PNM height");
    const long maxval = parse_long(pnm_token(in), "PNM maxval");
    if (w < 1 || h < 1 || w > (1 << 20) || h > (1 << 20))
        fail("PNM: implausible dimensions " + std::to_string(w) + "x" +
             std::to_string(h));
    if (maxval != 255)
        fail("PNM: unsupported maxval " + std::to_string(maxval) + " (only 255)");
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep))
        fail("PNM: expected single whitespace before payload at offset " +
             std::to_string(offset_of(in)));
    const std::uint64_t expect = static_cast<std::uint64_t>(w) * h * channels;
    const std::uint64_t have = bytes_remaining(in);
    if (have != expect)
        fail("PNM: payload length mismatch: expected " + std::to_string(expect) +
             " bytes, stream has " + std::to_string(have));
    std::vector<unsigned char> bytes(expect);
    read_exact(in, bytes.data(), bytes.size(), "PNM payload");
    RasterImage img(static_cast<int>(w), static_cast<int>(h), channels, 0.0);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        img.intensity[i] = static_cast<double>(bytes[i]) / 255.0;
    return img;
}

RasterImage read_image(const std::string& path) {
    auto in = open_input(path);
    return read_image(in);
}

void write_image(const RasterImage& img, std::ostream& out) {
    if (img.width < 1 || img.height < 1)
        throw DimensionError("write_image: empty image");
    out << (img.channels == 1 ? "P5" : "P6") << "\n"
        << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> bytes(img.intensity.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const double v = std::clamp(img.intensity[i], 0.0, 1.0);
        bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

void write_image(const RasterImage& img, const std::string& path) {
    atomic_write(path, [&](std::ostream& out) { write_image(img, out); });
}

void write_mask_pgm(const std::vector<std::uint8_t>& mask, int width, int height,
                    const std::string& path) {
    if (static_cast<std::size_t>(width) * height != mask.size())
        throw DimensionError("write_mask_pgm: mask size does not match dimensions");
    RasterImage img(width, height, 1, 0.0);
    for (std::size_t i = 0; i < mask.size(); ++i)
        img.intensity[i] = mask[i] ? 1.0 : 0.0;
    write_image(img, path);
}

// ---- Calibration ----

namespace {

constexpr const char* kCalibKeys[] = {"focal_px",   "baseline_m",
                                      "stride",     "z_min_m",
                                      "depth_interval_m", "num_depth_levels"};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

}  // namespace

StereoCalib read_calib(std::istream& in) {
    StereoCalib calib;
    bool seen[6] = {false, false, false, false, false, false};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail("calib: line " + std::to_string(lineno) +
                 " is not 'key = value': '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            fail("calib: line " + std::to_string(lineno) + " has an empty key or value");
        if (key == "focal_px") {
            calib.focal_px = parse_double(value, "calib focal_px");
            seen[0] = true;
        } else if (key == "baseline_m") {
            calib.baseline_m = parse_double(value, "calib baseline_m");
            seen[1] = true;
        } else if (key == "stride") {
            calib.stride = static_cast<int>(parse_long(value, "calib stride"));
            seen[2] = true;
        } else if (key == "z_min_m") {
            calib.z_min_m = parse_double(value, "calib z_min_m");
            seen[3] = true;
        } else if (key == "depth_interval_m") {
            calib.depth_interval_m = parse_double(value, "calib depth_interval_m");
            seen[4] = true;
        } else if (key == "num_depth_levels") {
            calib.num_depth_levels =
                static_cast<int>(parse_long(value, "calib num_depth_levels"));
            seen[5] = true;
        }
        // unknown keys are ignored
    }
    for (int i = 0; i < 6; ++i)
        if (!seen[i])
            fail(std::string("calib: missing required key '") + kCalibKeys[i] + "'");
    try {
        calib.validate();
    } catch (const DomainError& e) {
        fail(std::string("calib: ") + e.what());
    }
    return calib;
}

StereoCalib read_calib(const std::string& path) {
    auto in = open_input(path);
    return read_calib(in);
}

void write_calib(const StereoCalib& calib, std::ostream& out) {
    std::ostringstream os;
    os.precision(17);
    os << "focal_px = " << calib.focal_px << "\n"
       << "baseline_m = " << calib.baseline_m << "\n"
       << "stride = " << calib.stride << "\n"
       << "z_min_m = " << calib.z_min_m << "\n"
       << "depth_interval_m = " << calib.depth_interval_m << "\n"
       << "num_depth_levels = " << calib.num_depth_levels << "\n";
    out << os.str();
}

void write_calib(const StereoCalib& calib, const std::string& path) {
    atomic_write(path, [&](std::ostream& out) { write_calib(calib, out); });
}

}  // namespace pstereo
