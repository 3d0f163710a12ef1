#include "flowseg/flow_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "flowseg/stats.hpp"

namespace flowseg {

namespace {

constexpr float kFloMagic = 202021.25f;
constexpr int kMaxDim = 99999;

std::uint32_t load_u32le(const std::byte* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float load_f32le(const std::byte* p) { return std::bit_cast<float>(load_u32le(p)); }

void store_u32le(std::uint32_t v, std::vector<std::byte>& out) {
    out.push_back(static_cast<std::byte>(v & 0xFF));
    out.push_back(static_cast<std::byte>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::byte>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::byte>((v >> 24) & 0xFF));
}

void store_f32le(float v, std::vector<std::byte>& out) { store_u32le(std::bit_cast<std::uint32_t>(v), out); }

std::vector<std::byte> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::byte> bytes(data.size());
    std::memcpy(bytes.data(), data.data(), data.size());
    return bytes;
}

void spit(std::span<const std::byte> bytes, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + path);
}

}  // namespace

FlowField read_flo(std::span<const std::byte> bytes) {
    if (bytes.size() < 12) throw FormatError(FormatError::Kind::Truncated, "flo: header truncated");
    if (load_f32le(bytes.data()) != kFloMagic)
        throw FormatError(FormatError::Kind::BadMagic, "flo: bad magic sentinel");
    const auto w = static_cast<std::int32_t>(load_u32le(bytes.data() + 4));
    const auto h = static_cast<std::int32_t>(load_u32le(bytes.data() + 8));
    if (w <= 0 || h <= 0 || w > kMaxDim || h > kMaxDim)
        throw FormatError(FormatError::Kind::BadDims,
                          "flo: bad dimensions " + std::to_string(w) + "x" + std::to_string(h));
    const std::size_t expected = 12 + 8ull * w * h;
    if (bytes.size() != expected)
        throw FormatError(FormatError::Kind::Truncated,
                          "flo: expected " + std::to_string(expected) + " bytes, got " +
                              std::to_string(bytes.size()));

    FlowField f(w, h);
    const std::byte* p = bytes.data() + 12;
    for (Vec2& vec : f.vectors) {
        const float u = load_f32le(p);
        const float v = load_f32le(p + 4);
        if (!std::isfinite(u) || !std::isfinite(v))
            throw FormatError(FormatError::Kind::NonFinite, "flo: non-finite flow component");
        vec = {u, v};
        p += 8;
    }
    return f;
}

std::vector<std::byte> write_flo(const FlowField& f) {
    std::vector<std::byte> out;
    out.reserve(12 + 8ull * f.site_count());
    store_f32le(kFloMagic, out);
    store_u32le(static_cast<std::uint32_t>(f.width), out);
    store_u32le(static_cast<std::uint32_t>(f.height), out);
    for (const Vec2& vec : f.vectors) {
        store_f32le(static_cast<float>(vec.u), out);
        store_f32le(static_cast<float>(vec.v), out);
    }
    return out;
}

FlowField read_flo_file(const std::string& path) { return read_flo(slurp(path)); }

void write_flo_file(const FlowField& f, const std::string& path) { spit(write_flo(f), path); }

FlowField resize_bilinear(const FlowField& f, int new_w, int new_h) {
    FlowField out(new_w, new_h);
    const double su = static_cast<double>(new_w) / f.width;
    const double sv = static_cast<double>(new_h) / f.height;
    for (int y = 0; y < new_h; ++y) {
        // pixel-center aligned source coordinates, clamped at the border
        double sy = (y + 0.5) / sv - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(f.height - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, f.height - 1);
        const double fy = sy - y0;
        for (int x = 0; x < new_w; ++x) {
            double sx = (x + 0.5) / su - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(f.width - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, f.width - 1);
            const double fx = sx - x0;

            const Vec2 a = f.at(x0, y0);
            const Vec2 b = f.at(x1, y0);
            const Vec2 c = f.at(x0, y1);
            const Vec2 d = f.at(x1, y1);
            const Vec2 top = a + fx * (b - a);
            const Vec2 bot = c + fx * (d - c);
            const Vec2 s = top + fy * (bot - top);
            out.at(x, y) = {s.u * su, s.v * sv};
        }
    }
    return out;
}

namespace {

std::array<std::uint8_t, 3> hsv_to_rgb(double hue_deg, double sat, double val) {
    const double c = val * sat;
    const double hp = hue_deg / 60.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1)      { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else             { r = c; b = x; }
    const double m = val - c;
    auto to8 = [](double t) { return static_cast<std::uint8_t>(std::lround(255.0 * t)); };
    return {to8(r + m), to8(g + m), to8(b + m)};
}

}  // namespace

RgbImage flow_to_color(const FlowField& f, std::optional<double> max_mag) {
    const double scale = max_mag.value_or(magnitude_percentile(f, 99.0));
    RgbImage img(f.width, f.height);
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            const Vec2 w = f.at(x, y);
            const double mag = std::hypot(w.u, w.v);
            double hue = 0.0;
            if (mag > 0.0) {
                hue = std::atan2(w.v, w.u) * 180.0 / std::numbers::pi;
                if (hue < 0.0) hue += 360.0;
                if (hue >= 360.0) hue = 0.0;
            }
            const double sat = scale > 0.0 ? std::min(1.0, mag / scale) : 0.0;
            const auto rgb = hsv_to_rgb(hue, sat, 1.0);
            std::uint8_t* px = img.at(x, y);
            px[0] = rgb[0];
            px[1] = rgb[1];
            px[2] = rgb[2];
        }
    }
    return img;
}

namespace {

constexpr std::array<std::array<std::uint8_t, 3>, 12> kPalette = {{
    {{68, 119, 170}},   // blue
    {{238, 119, 51}},   // orange
    {{34, 136, 51}},    // green
    {{204, 51, 17}},    // red
    {{170, 51, 119}},   // purple
    {{221, 170, 51}},   // yellow
    {{102, 204, 238}},  // cyan
    {{187, 187, 187}},  // grey
    {{0, 68, 136}},     // dark blue
    {{153, 34, 136}},   // magenta
    {{17, 119, 51}},    // dark green
    {{136, 34, 85}},    // wine
}};

}  // namespace

RgbImage render_labels(const LabelMap& labels, int k, const RgbImage* overlay) {
    if (overlay && (overlay->width != labels.width || overlay->height != labels.height))
        throw DimMismatch("render_labels: overlay dimensions differ from label map");
    RgbImage img(labels.width, labels.height);
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x) {
            const int lab = labels.at(x, y);
            if (lab < 0 || lab >= k)
                throw LabelOutOfRange("render_labels: label " + std::to_string(lab) +
                                      " outside [0, " + std::to_string(k) + ")");
            const auto& color = kPalette[static_cast<std::size_t>(lab) % kPalette.size()];
            std::uint8_t* px = img.at(x, y);
            for (int c = 0; c < 3; ++c) {
                if (overlay) {
                    const double blended = 0.5 * overlay->at(x, y)[c] + 0.5 * color[c];
                    px[c] = static_cast<std::uint8_t>(std::lround(blended));
                } else {
                    px[c] = color[c];
                }
            }
        }
    }
    return img;
}

namespace {

void append_text(const std::string& s, std::vector<std::byte>& out) {
    for (char ch : s) out.push_back(static_cast<std::byte>(ch));
}

}  // namespace

std::vector<std::byte> write_ppm(const RgbImage& img) {
    std::vector<std::byte> out;
    append_text("P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n", out);
    for (std::uint8_t b : img.pixels) out.push_back(static_cast<std::byte>(b));
    return out;
}

void write_ppm_file(const RgbImage& img, const std::string& path) { spit(write_ppm(img), path); }

std::vector<std::byte> write_pgm(const LabelMap& labels) {
    std::vector<std::byte> out;
    append_text("P5\n" + std::to_string(labels.width) + " " + std::to_string(labels.height) + "\n255\n",
                out);
    for (int v : labels.labels) {
        if (v < 0 || v > 255)
            throw LabelOutOfRange("write_pgm: label " + std::to_string(v) + " does not fit in a byte");
        out.push_back(static_cast<std::byte>(v));
    }
    return out;
}

void write_pgm_file(const LabelMap& labels, const std::string& path) { spit(write_pgm(labels), path); }

namespace {

// PNM header tokenizer: skips whitespace and '#' comment lines.
struct PnmCursor {
    std::span<const std::byte> bytes;
    std::size_t pos = 0;

    bool eof() const { return pos >= bytes.size(); }
    char peek() const { return static_cast<char>(bytes[pos]); }

    void skip_space() {
        while (!eof()) {
            const char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else {
                break;
            }
        }
    }

    int next_int() {
        skip_space();
        if (eof() || peek() < '0' || peek() > '9')
            throw FormatError(FormatError::Kind::BadHeader, "pgm: expected integer in header");
        long v = 0;
        while (!eof() && peek() >= '0' && peek() <= '9') {
            v = v * 10 + (peek() - '0');
            if (v > 1'000'000'000) throw FormatError(FormatError::Kind::BadHeader, "pgm: header value overflow");
            ++pos;
        }
        return static_cast<int>(v);
    }
};

}  // namespace

LabelMap read_pgm(std::span<const std::byte> bytes) {
    if (bytes.size() < 2 || static_cast<char>(bytes[0]) != 'P' || static_cast<char>(bytes[1]) != '5')
        throw FormatError(FormatError::Kind::BadHeader, "pgm: not a binary P5 file");
    PnmCursor cur{bytes, 2};
    const int w = cur.next_int();
    const int h = cur.next_int();
    const int maxval = cur.next_int();
    if (w <= 0 || h <= 0 || w > kMaxDim || h > kMaxDim)
        throw FormatError(FormatError::Kind::BadDims, "pgm: bad dimensions");
    if (maxval <= 0 || maxval > 255)
        throw FormatError(FormatError::Kind::BadHeader, "pgm: only 8-bit maxval supported");
    // exactly one whitespace byte separates the header from the raster
    if (cur.eof()) throw FormatError(FormatError::Kind::Truncated, "pgm: missing raster");
    ++cur.pos;
    const std::size_t need = static_cast<std::size_t>(w) * h;
    if (bytes.size() - cur.pos != need)
        throw FormatError(FormatError::Kind::Truncated, "pgm: raster size mismatch");

    LabelMap labels(w, h);
    for (std::size_t i = 0; i < need; ++i)
        labels.labels[i] = static_cast<int>(static_cast<std::uint8_t>(bytes[cur.pos + i]));
    return labels;
}

LabelMap read_pgm_file(const std::string& path) { return read_pgm(slurp(path)); }

BinaryMask mask_from_gt(const LabelMap& gt) {
    BinaryMask mask(gt.width, gt.height);
    for (std::size_t i = 0; i < gt.labels.size(); ++i) mask.fg[i] = gt.labels[i] > 127 ? 1 : 0;
    return mask;
}

}  // namespace flowseg
