#ifndef RCOVER_SHAPES_HPP
#define RCOVER_SHAPES_HPP

// Parametric open sets of the torus: balls, axis-aligned boxes and images of
// the unit cube under an affine map with prescribed singular values.
//
// Local coordinates: a ball is centred at the origin; a box occupies
// [0,a_1] x ... x [0,a_d]; an affine cube occupies L([0,1]^d) with
// L = R diag(alpha). A placed shape puts the shape's centroid at its
// translation vector.

#include <rcover/errors.hpp>
#include <rcover/torus.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace rcover {

enum class ShapeKind { ball, box, affine_cube };

inline std::string to_string(ShapeKind k) {
    switch (k) {
    case ShapeKind::ball: return "ball";
    case ShapeKind::box: return "box";
    case ShapeKind::affine_cube: return "affine";
    }
    return "unknown";
}

/// Row-major d x d matrix.
using Matrix = std::array<double, kMaxDim * kMaxDim>;

inline Matrix identity_matrix(int d) {
    Matrix m{};
    for (int j = 0; j < d; ++j) {
        m[j * kMaxDim + j] = 1.0;
    }
    return m;
}

/// Planar rotation by `angle` radians embedded in the (0,1) coordinate plane.
inline Matrix rotation_2d(double angle, int d = 2) {
    Matrix m = identity_matrix(d);
    m[0] = std::cos(angle);
    m[1] = -std::sin(angle);
    m[kMaxDim] = std::sin(angle);
    m[kMaxDim + 1] = std::cos(angle);
    return m;
}

class ShapeSpec {
public:
    static ShapeSpec ball(int dim, double radius) {
        detail::require(dim >= 1 && dim <= kMaxDim, "ball: dimension must be in [1, 4]");
        detail::require(radius > 0.0 && std::isfinite(radius), "ball: radius must be positive");
        ShapeSpec s(ShapeKind::ball, dim);
        s.sizes_[0] = radius;
        return s;
    }

    /// One-dimensional ball of the given length.
    static ShapeSpec interval(double length) {
        detail::require(length > 0.0, "interval: length must be positive");
        return ball(1, 0.5 * length);
    }

    static ShapeSpec box(std::span<const double> sides) {
        int d = static_cast<int>(sides.size());
        detail::require(d >= 1 && d <= kMaxDim, "box: dimension must be in [1, 4]");
        ShapeSpec s(ShapeKind::box, d);
        for (int j = 0; j < d; ++j) {
            detail::require(sides[j] > 0.0 && std::isfinite(sides[j]), "box: sides must be positive");
            s.sizes_[j] = sides[j];
        }
        return s;
    }

    static ShapeSpec box(std::initializer_list<double> sides) {
        return box(std::span<const double>(sides.begin(), sides.size()));
    }

    /// Image of the unit cube under R diag(alpha), alpha descending in (0,1).
    static ShapeSpec affine_cube(std::span<const double> singular_values, const Matrix& rotation) {
        int d = static_cast<int>(singular_values.size());
        detail::require(d >= 1 && d <= kMaxDim, "affine cube: dimension must be in [1, 4]");
        ShapeSpec s(ShapeKind::affine_cube, d);
        for (int j = 0; j < d; ++j) {
            double a = singular_values[j];
            detail::require(a > 0.0 && a < 1.0, "affine cube: singular values must lie in (0,1)");
            detail::require(j == 0 || a <= singular_values[j - 1],
                            "affine cube: singular values must be in descending order");
            s.sizes_[j] = a;
        }
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) {
                double dot = 0.0;
                for (int k = 0; k < d; ++k) {
                    dot += rotation[k * kMaxDim + r] * rotation[k * kMaxDim + c];
                }
                detail::require(std::abs(dot - (r == c ? 1.0 : 0.0)) < 1e-9,
                                "affine cube: rotation matrix is not orthogonal");
            }
        }
        s.rotation_ = rotation;
        return s;
    }

    static ShapeSpec affine_cube(std::initializer_list<double> singular_values) {
        return affine_cube(std::span<const double>(singular_values.begin(), singular_values.size()),
                           identity_matrix(static_cast<int>(singular_values.size())));
    }

    ShapeKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }
    double radius() const noexcept { return sizes_[0]; }

    /// Box sides, or the singular values of an affine cube (descending).
    std::span<const double> sides() const noexcept { return {sizes_.data(), static_cast<std::size_t>(dim_)}; }
    const Matrix& rotation() const noexcept { return rotation_; }

    /// Lebesgue measure of the shape.
    double measure() const noexcept {
        if (kind_ == ShapeKind::ball) {
            return unit_ball_volume(dim_) * std::pow(sizes_[0], dim_);
        }
        double v = 1.0;
        for (int j = 0; j < dim_; ++j) {
            v *= sizes_[j];
        }
        return v;
    }

    double diameter() const noexcept {
        if (kind_ == ShapeKind::ball) {
            return 2.0 * sizes_[0];
        }
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) {
            s += sizes_[j] * sizes_[j];
        }
        return std::sqrt(s);
    }

    /// True when the shape embeds in T^d without self-overlap (diameter < 1).
    bool fits_torus() const noexcept { return diameter() < 1.0; }

    /// Half-width of the axis-aligned bounding box about the centroid.
    Coords half_extents() const noexcept {
        Coords h{};
        for (int j = 0; j < dim_; ++j) {
            switch (kind_) {
            case ShapeKind::ball: h[j] = sizes_[0]; break;
            case ShapeKind::box: h[j] = 0.5 * sizes_[j]; break;
            case ShapeKind::affine_cube: {
                double e = 0.0;
                for (int k = 0; k < dim_; ++k) {
                    e += std::abs(rotation_[j * kMaxDim + k]) * sizes_[k];
                }
                h[j] = 0.5 * e;
                break;
            }
            }
        }
        return h;
    }

    /// Centroid in local coordinates.
    Coords centroid() const noexcept {
        Coords c{};
        if (kind_ == ShapeKind::ball) {
            return c;
        }
        Coords half{};
        for (int j = 0; j < dim_; ++j) {
            half[j] = 0.5;
        }
        return cube_image(half);
    }

    /// Open-set membership of a point given relative to the centroid.
    bool contains_centered(const Coords& z) const noexcept {
        switch (kind_) {
        case ShapeKind::ball: {
            double s = 0.0;
            for (int j = 0; j < dim_; ++j) {
                s += z[j] * z[j];
            }
            return s < sizes_[0] * sizes_[0];
        }
        case ShapeKind::box:
            for (int j = 0; j < dim_; ++j) {
                if (!(std::abs(z[j]) < 0.5 * sizes_[j])) {
                    return false;
                }
            }
            return true;
        case ShapeKind::affine_cube:
            for (int k = 0; k < dim_; ++k) {
                // q_k = (R^T z)_k / alpha_k
                double q = 0.0;
                for (int j = 0; j < dim_; ++j) {
                    q += rotation_[j * kMaxDim + k] * z[j];
                }
                if (!(std::abs(q) < 0.5 * sizes_[k])) {
                    return false;
                }
            }
            return true;
        }
        return false;
    }

    /// Membership in local coordinates.
    bool contains_local(const Coords& x) const noexcept {
        Coords c = centroid();
        Coords z{};
        for (int j = 0; j < dim_; ++j) {
            z[j] = x[j] - c[j];
        }
        return contains_centered(z);
    }

    /// Uniform draw inside the shape, in local coordinates.
    Coords sample_interior(RngHandle& rng) const noexcept {
        Coords x{};
        switch (kind_) {
        case ShapeKind::ball: {
            if (dim_ == 1) {
                x[0] = sizes_[0] * (2.0 * rng.uniform() - 1.0);
                return x;
            }
            Coords u = rng.direction(dim_);
            double rad = sizes_[0] * std::pow(rng.uniform(), 1.0 / dim_);
            for (int j = 0; j < dim_; ++j) {
                x[j] = rad * u[j];
            }
            return x;
        }
        case ShapeKind::box:
            for (int j = 0; j < dim_; ++j) {
                x[j] = sizes_[j] * rng.uniform();
            }
            return x;
        case ShapeKind::affine_cube: {
            Coords q{};
            for (int j = 0; j < dim_; ++j) {
                q[j] = rng.uniform();
            }
            return cube_image(q);
        }
        }
        return x;
    }

    /// Uniform draw relative to the centroid.
    Coords sample_centered(RngHandle& rng) const noexcept {
        Coords x = sample_interior(rng);
        Coords c = centroid();
        for (int j = 0; j < dim_; ++j) {
            x[j] -= c[j];
        }
        return x;
    }

    /// R diag(alpha) q for an affine cube, diag(a) q for a box.
    Coords cube_image(const Coords& q) const noexcept {
        Coords x{};
        if (kind_ == ShapeKind::box) {
            for (int j = 0; j < dim_; ++j) {
                x[j] = sizes_[j] * q[j];
            }
            return x;
        }
        for (int j = 0; j < dim_; ++j) {
            double s = 0.0;
            for (int k = 0; k < dim_; ++k) {
                s += rotation_[j * kMaxDim + k] * sizes_[k] * q[k];
            }
            x[j] = s;
        }
        return x;
    }

    friend bool operator==(const ShapeSpec&, const ShapeSpec&) = default;

private:
    ShapeSpec(ShapeKind k, int d) : kind_(k), dim_(d), rotation_(identity_matrix(d)) {}

    ShapeKind kind_;
    int dim_;
    Coords sizes_{};
    Matrix rotation_{};
};

/// A shape translated so that its centroid sits at `translation`: V = U + v.
class PlacedShape {
public:
    PlacedShape(ShapeSpec spec, TorusPoint translation) : spec_(spec), translation_(translation) {
        detail::require(spec_.dim() == translation_.dim(), "placed shape: dimension mismatch");
        detail::require(spec_.fits_torus(), "placed shape: diameter must be < 1 to embed in the torus");
    }

    const ShapeSpec& spec() const noexcept { return spec_; }
    const TorusPoint& translation() const noexcept { return translation_; }
    double measure() const noexcept { return spec_.measure(); }

    bool contains(const TorusPoint& x) const {
        detail::require(x.dim() == spec_.dim(), "contains: dimension mismatch");
        return spec_.contains_centered(wrapped_difference(x, translation_));
    }

    /// Maps a centroid-relative offset to its torus point.
    TorusPoint at_offset(const Coords& z) const noexcept { return translation_.shifted(z); }

    /// Uniform draw from V on the torus.
    TorusPoint sample(RngHandle& rng) const noexcept { return at_offset(spec_.sample_centered(rng)); }

private:
    ShapeSpec spec_;
    TorusPoint translation_;
};

/// Lebesgue measure of the shape.
inline double measure(const ShapeSpec& s) noexcept { return s.measure(); }

inline bool contains(const PlacedShape& p, const TorusPoint& x) { return p.contains(x); }

} // namespace rcover

#endif
