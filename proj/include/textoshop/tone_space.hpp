#pragma once

// Tone vectors, their RGB encoding, and the hue/saturation wheel over it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "textoshop/errors.hpp"

namespace textoshop {

inline constexpr int kToneLevels = 11;  // 0..10 on each axis

struct ToneVector {
    int formality = 5;
    int sentiment = 5;
    int complexity = 5;

    bool operator==(const ToneVector&) const = default;

    bool valid() const noexcept
    {
        auto ok = [](int v) { return v >= 0 && v < kToneLevels; };
        return ok(formality) && ok(sentiment) && ok(complexity);
    }
};

struct ToneColour {
    int r = 0;
    int g = 0;
    int b = 0;

    bool operator==(const ToneColour&) const = default;
};

struct WheelPosition {
    double hue_deg = 0.0;     // [0, 360)
    double saturation = 0.0;  // [0, 1], disc radius
    double value = 0.0;       // [0, 1], kept off-disc
};

struct DiscVector {
    double x = 0.0;
    double y = 0.0;
};

/// Direction of strongest increase of each tone axis on the wheel disc.
struct ToneArrows {
    DiscVector formality;
    DiscVector sentiment;
    DiscVector complexity;
};

namespace detail {

// Half away from zero.
inline int round_half_away(double v) { return static_cast<int>(std::round(v)); }

inline void require_valid(const ToneVector& t)
{
    if (!t.valid()) throw ValidationError("tone components must lie in [0, 10]");
}

struct Rgb {
    double r, g, b;
};

// Hexcone HSV -> RGB on [0,1] channels. Saturation outside [0,1] is allowed
// so finite differences can straddle the rim.
inline Rgb hsv_to_rgb(double hue_deg, double s, double v)
{
    double h = std::fmod(hue_deg, 360.0);
    if (h < 0) h += 360.0;
    const double sector = h / 60.0;
    const int i = static_cast<int>(std::floor(sector)) % 6;
    const double f = sector - std::floor(sector);
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    switch (i) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
    }
}

inline WheelPosition rgb_to_hsv(double r, double g, double b)
{
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;
    WheelPosition w;
    w.value = mx;
    w.saturation = mx > 0.0 ? delta / mx : 0.0;
    if (delta <= 0.0) {
        w.hue_deg = 0.0;
        w.saturation = 0.0;
        return w;
    }
    double h = 0.0;
    if (mx == r) {
        h = 60.0 * std::fmod((g - b) / delta, 6.0);
    } else if (mx == g) {
        h = 60.0 * ((b - r) / delta + 2.0);
    } else {
        h = 60.0 * ((r - g) / delta + 4.0);
    }
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    w.hue_deg = h;
    return w;
}

}  // namespace detail

inline ToneColour tone_to_colour(const ToneVector& t)
{
    detail::require_valid(t);
    auto ch = [](int v) { return detail::round_half_away(255.0 * v / 10.0); };
    return {ch(t.formality), ch(t.sentiment), ch(t.complexity)};
}

inline ToneVector colour_to_tone(const ToneColour& c)
{
    auto axis = [](int ch) {
        if (ch < 0 || ch > 255) throw ValidationError("colour channels must lie in [0, 255]");
        return detail::round_half_away(10.0 * ch / 255.0);
    };
    return {axis(c.r), axis(c.g), axis(c.b)};
}

inline WheelPosition tone_to_wheel(const ToneVector& t)
{
    const ToneColour c = tone_to_colour(t);
    return detail::rgb_to_hsv(c.r / 255.0, c.g / 255.0, c.b / 255.0);
}

inline void validate(const WheelPosition& w)
{
    if (!(w.hue_deg >= 0.0 && w.hue_deg < 360.0) || !(w.saturation >= 0.0 && w.saturation <= 1.0) ||
        !(w.value >= 0.0 && w.value <= 1.0)) {
        throw ValidationError("wheel position out of range");
    }
}

inline ToneVector wheel_to_tone(const WheelPosition& w)
{
    validate(w);
    const auto rgb = detail::hsv_to_rgb(w.hue_deg, w.saturation, w.value);
    const ToneColour c{detail::round_half_away(rgb.r * 255.0), detail::round_half_away(rgb.g * 255.0),
                       detail::round_half_away(rgb.b * 255.0)};
    return colour_to_tone(c);
}

inline DiscVector wheel_to_disc(const WheelPosition& w)
{
    constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
    return {w.saturation * std::cos(w.hue_deg * kDegToRad), w.saturation * std::sin(w.hue_deg * kDegToRad)};
}

/// Unquantized tone axes (0..10 scale) at a disc point with fixed value.
inline std::array<double, 3> continuous_tone_at(DiscVector p, double value)
{
    constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;
    const double s = std::hypot(p.x, p.y);
    const double hue = s > 0.0 ? std::atan2(p.y, p.x) * kRadToDeg : 0.0;
    const auto rgb = detail::hsv_to_rgb(hue, s, value);
    return {10.0 * rgb.r, 10.0 * rgb.g, 10.0 * rgb.b};
}

inline constexpr double kArrowStep = 1e-3;      // fraction of the disc radius
inline constexpr double kArrowZeroNorm = 1e-9;

/// Gradient directions of each tone axis with respect to disc position.
/// Central differences are taken along three directions 120 degrees apart
/// and combined by least squares, so the arrows rotate with the hexcone.
inline ToneArrows strongest_change_arrows(const WheelPosition& w)
{
    validate(w);
    const DiscVector c = wheel_to_disc(w);
    constexpr double kPi = 3.14159265358979323846;
    std::array<DiscVector, 3> grad{};
    for (int k = 0; k < 3; ++k) {
        const double angle = 2.0 * kPi * k / 3.0;
        const DiscVector u{std::cos(angle), std::sin(angle)};
        const auto plus = continuous_tone_at({c.x + kArrowStep * u.x, c.y + kArrowStep * u.y}, w.value);
        const auto minus = continuous_tone_at({c.x - kArrowStep * u.x, c.y - kArrowStep * u.y}, w.value);
        for (int axis = 0; axis < 3; ++axis) {
            const double d = (plus[axis] - minus[axis]) / (2.0 * kArrowStep);
            grad[axis].x += (2.0 / 3.0) * d * u.x;
            grad[axis].y += (2.0 / 3.0) * d * u.y;
        }
    }
    auto unit = [](DiscVector g) {
        const double n = std::hypot(g.x, g.y);
        if (n < kArrowZeroNorm) return DiscVector{};
        return DiscVector{g.x / n, g.y / n};
    };
    return {unit(grad[0]), unit(grad[1]), unit(grad[2])};
}

}  // namespace textoshop
