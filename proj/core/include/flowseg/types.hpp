#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowseg {

struct Vec2 {
    double u = 0.0;
    double v = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.u + b.u, a.v + b.v}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.u - b.u, a.v - b.v}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.u, s * a.v}; }

/// Dense 2D vector field over a W x H pixel grid, row-major.
/// Components are in pixels/frame of the grid they live on.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<Vec2> vectors;

    FlowField() = default;
    FlowField(int w, int h) : width(w), height(h), vectors(static_cast<std::size_t>(w) * h) {}

    int site_count() const { return width * height; }

    Vec2& at(int x, int y) { return vectors[static_cast<std::size_t>(y) * width + x]; }
    const Vec2& at(int x, int y) const { return vectors[static_cast<std::size_t>(y) * width + x]; }
};

/// 8-bit RGB image, row-major, 3 bytes per pixel.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t* at(int x, int y) { return &pixels[(static_cast<std::size_t>(y) * width + x) * 3]; }
    const std::uint8_t* at(int x, int y) const {
        return &pixels[(static_cast<std::size_t>(y) * width + x) * 3];
    }
};

/// Per-site integer layer labels in [0, K).
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<int> labels;

    LabelMap() = default;
    LabelMap(int w, int h) : width(w), height(h), labels(static_cast<std::size_t>(w) * h, 0) {}

    int site_count() const { return width * height; }

    int& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }
    int at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

/// Per-site probability distribution over K layers.
/// probs is laid out layer-major: probs[k * I + i] for site i = y*W + x.
struct SoftSegmentation {
    int layers = 0;
    int width = 0;
    int height = 0;
    std::vector<double> probs;

    SoftSegmentation() = default;
    SoftSegmentation(int k, int w, int h)
        : layers(k), width(w), height(h), probs(static_cast<std::size_t>(k) * w * h, 0.0) {}

    int site_count() const { return width * height; }

    double& at(int k, int i) { return probs[static_cast<std::size_t>(k) * site_count() + i]; }
    double at(int k, int i) const { return probs[static_cast<std::size_t>(k) * site_count() + i]; }
};

/// Foreground flags over a W x H grid.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> fg;

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), fg(static_cast<std::size_t>(w) * h, 0) {}

    int site_count() const { return width * height; }

    bool at(int x, int y) const { return fg[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { fg[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
};

}  // namespace flowseg
