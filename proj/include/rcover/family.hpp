#ifndef RCOVER_FAMILY_HPP
#define RCOVER_FAMILY_HPP

// Power-law sequences of shapes U_i.
//
//   balls:        r_i = c i^{-a}
//   boxes:        side_j(i) = c_j i^{-gamma_j},  gamma_1 <= ... <= gamma_d
//   affine cubes: alpha_j(i) = c_j i^{-gamma_j}, fixed rotation
//
// Early indices may produce shapes that do not fit the torus; the family
// starts at the first index i_min from which every shape is valid.

#include <rcover/errors.hpp>
#include <rcover/shapes.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace rcover {

enum class FamilyKind { balls, boxes, affine_cubes };

inline std::string to_string(FamilyKind k) {
    switch (k) {
    case FamilyKind::balls: return "balls";
    case FamilyKind::boxes: return "boxes";
    case FamilyKind::affine_cubes: return "affine";
    }
    return "unknown";
}

class SequenceFamily {
public:
    static SequenceFamily balls(int dim, double coefficient, double exponent) {
        detail::require(dim >= 1 && dim <= kMaxDim, "ball family: dimension must be in [1, 4]");
        return SequenceFamily(FamilyKind::balls, dim, {coefficient}, {exponent}, identity_matrix(dim));
    }

    static SequenceFamily boxes(std::vector<double> coefficients, std::vector<double> exponents) {
        int d = static_cast<int>(exponents.size());
        Matrix id = identity_matrix(std::max(d, 1));
        return SequenceFamily(FamilyKind::boxes, d, std::move(coefficients), std::move(exponents), id);
    }

    static SequenceFamily affine_cubes(std::vector<double> coefficients, std::vector<double> exponents,
                                       const Matrix& rotation) {
        int d = static_cast<int>(exponents.size());
        return SequenceFamily(FamilyKind::affine_cubes, d, std::move(coefficients), std::move(exponents), rotation);
    }

    FamilyKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }
    const std::vector<double>& coefficients() const noexcept { return coefficients_; }
    const std::vector<double>& exponents() const noexcept { return exponents_; }
    const Matrix& rotation() const noexcept { return rotation_; }
    std::int64_t i_min() const noexcept { return i_min_; }

    /// Per-axis decay exponents, ascending (the same exponent d times for balls).
    std::vector<double> axis_exponents() const {
        if (kind_ == FamilyKind::balls) {
            return std::vector<double>(static_cast<std::size_t>(dim_), exponents_[0]);
        }
        return exponents_;
    }

    /// Exponent V with lambda(U_i) proportional to i^{-V}.
    double volume_exponent() const noexcept {
        double v = 0.0;
        for (double g : axis_exponents()) {
            v += g;
        }
        return v;
    }

    /// Whether shape(i) satisfies every shape invariant.
    bool valid_at(std::int64_t i) const {
        if (i < 1) {
            return false;
        }
        auto sizes = raw_sizes(i);
        switch (kind_) {
        case FamilyKind::balls: return 2.0 * sizes[0] < 1.0;
        case FamilyKind::boxes: {
            double s = 0.0;
            for (double a : sizes) {
                s += a * a;
            }
            return s < 1.0;
        }
        case FamilyKind::affine_cubes: {
            double s = 0.0;
            for (std::size_t j = 0; j < sizes.size(); ++j) {
                if (sizes[j] >= 1.0 || (j > 0 && sizes[j] > sizes[j - 1])) {
                    return false;
                }
                s += sizes[j] * sizes[j];
            }
            return s < 1.0;
        }
        }
        return false;
    }

    /// The shape U_i; requires i >= i_min().
    ShapeSpec shape(std::int64_t i) const {
        detail::require(i >= i_min_, "family: index " + std::to_string(i) + " precedes i_min = " +
                                         std::to_string(i_min_));
        auto sizes = raw_sizes(i);
        switch (kind_) {
        case FamilyKind::balls: return ShapeSpec::ball(dim_, sizes[0]);
        case FamilyKind::boxes: return ShapeSpec::box(sizes);
        case FamilyKind::affine_cubes: return ShapeSpec::affine_cube(sizes, rotation_);
        }
        return ShapeSpec::ball(1, 0.1);
    }

    double measure(std::int64_t i) const { return shape(i).measure(); }

    /// Short identifier used in CSV output.
    std::string id() const {
        std::ostringstream os;
        os << to_string(kind_) << "_d" << dim_;
        for (std::size_t j = 0; j < exponents_.size(); ++j) {
            os << (j == 0 ? "_g" : "-") << exponents_[j];
        }
        return os.str();
    }

    friend bool operator==(const SequenceFamily&, const SequenceFamily&) = default;

private:
    SequenceFamily(FamilyKind k, int d, std::vector<double> c, std::vector<double> g, const Matrix& rot)
        : kind_(k), dim_(d), coefficients_(std::move(c)), exponents_(std::move(g)), rotation_(rot) {
        detail::require(d >= 1 && d <= kMaxDim, "family: dimension must be in [1, 4]");
        std::size_t n = (k == FamilyKind::balls) ? 1 : static_cast<std::size_t>(d);
        detail::require(coefficients_.size() == n && exponents_.size() == n,
                        "family: expected " + std::to_string(n) + " coefficients and exponents");
        for (std::size_t j = 0; j < n; ++j) {
            detail::require(coefficients_[j] > 0.0 && std::isfinite(coefficients_[j]),
                            "family: coefficients must be positive");
            detail::require(exponents_[j] > 0.0 && std::isfinite(exponents_[j]),
                            "family: exponents must be positive");
            detail::require(j == 0 || exponents_[j] >= exponents_[j - 1],
                            "family: exponents must be in ascending order");
        }
        if (k == FamilyKind::affine_cubes) {
            // validates orthogonality
            std::vector<double> probe(n, 0.5);
            (void)ShapeSpec::affine_cube(probe, rot);
        }
        i_min_ = find_i_min();
    }

    std::vector<double> raw_sizes(std::int64_t i) const {
        std::vector<double> s(coefficients_.size());
        double li = std::log(static_cast<double>(i));
        for (std::size_t j = 0; j < s.size(); ++j) {
            s[j] = coefficients_[j] * std::exp(-exponents_[j] * li);
        }
        return s;
    }

    // Validity is monotone in i (sizes shrink, orderings settle), so an
    // exponential search followed by bisection finds the first valid index.
    std::int64_t find_i_min() const {
        constexpr std::int64_t kLimit = std::int64_t{1} << 60;
        std::int64_t hi = 1;
        while (!valid_at(hi)) {
            detail::require(hi < kLimit, "family: shapes never fit the torus");
            hi *= 2;
        }
        std::int64_t lo = hi / 2;
        if (hi == 1) {
            return 1;
        }
        while (hi - lo > 1) {
            std::int64_t mid = lo + (hi - lo) / 2;
            (valid_at(mid) ? hi : lo) = mid;
        }
        return hi;
    }

    FamilyKind kind_;
    int dim_;
    std::vector<double> coefficients_;
    std::vector<double> exponents_;
    Matrix rotation_{};
    std::int64_t i_min_ = 1;
};

} // namespace rcover

#endif
