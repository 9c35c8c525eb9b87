#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace perturb {

/// A point of the ground space: an atom index in the discrete regime, or a
/// coordinate tuple (at most kMaxDim coordinates) in a box.  Points compare by
/// exact identity.
struct Point {
    static constexpr std::size_t kMaxDim = 4;

    std::int32_t atom = -1;
    std::uint8_t dim = 0;
    std::array<double, kMaxDim> x{};

    static Point on_atom(std::int32_t id) {
        Point p;
        p.atom = id;
        return p;
    }
    static Point at(std::span<const double> coords);
    static Point at(std::initializer_list<double> coords) {
        return at(std::span<const double>(coords.begin(), coords.size()));
    }

    bool is_atom() const { return atom >= 0; }
    std::span<const double> coords() const { return {x.data(), dim}; }

    friend bool operator==(const Point&, const Point&) = default;
};

/// Strict weak order on points (atom, then coordinates lexicographically).
bool point_less(const Point& a, const Point& b);

struct PointLess {
    bool operator()(const Point& a, const Point& b) const { return point_less(a, b); }
};

/// The space hosting intensity measures: either a finite set of named atoms
/// or an axis-aligned box.
class GroundSpace {
public:
    enum class Kind { discrete, box };

    /// Throws std::invalid_argument on duplicate atom names.
    static std::shared_ptr<const GroundSpace> discrete(std::vector<std::string> names);
    /// Throws std::invalid_argument unless lower[i] < upper[i] for every axis.
    static std::shared_ptr<const GroundSpace> box(std::vector<double> lower, std::vector<double> upper);

    Kind kind() const { return kind_; }
    bool is_discrete() const { return kind_ == Kind::discrete; }

    std::size_t atom_count() const { return names_.size(); }
    const std::string& atom_name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& atom_names() const { return names_; }
    std::optional<std::int32_t> find_atom(const std::string& name) const;
    /// Throws std::out_of_range for unknown names.
    std::int32_t atom_index(const std::string& name) const;

    std::size_t dimension() const { return lower_.size(); }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    double volume() const;

    bool contains(const Point& p) const;
    bool same_as(const GroundSpace& other) const;

private:
    GroundSpace() = default;

    Kind kind_ = Kind::discrete;
    std::vector<std::string> names_;
    std::vector<double> lower_;
    std::vector<double> upper_;
};

using SpacePtr = std::shared_ptr<const GroundSpace>;

/// A window: the sub-region a functional looks at or a sampler is restricted
/// to.
class Region {
public:
    enum class Kind { all, atoms, box };

    static Region all() { return Region(); }
    static Region atoms(std::vector<std::int32_t> ids);
    static Region box(std::vector<double> lower, std::vector<double> upper);

    Kind kind() const { return kind_; }
    bool contains(const Point& p) const;
    const std::vector<std::int32_t>& atom_ids() const { return atoms_; }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }

private:
    Kind kind_ = Kind::all;
    std::vector<std::int32_t> atoms_;
    std::vector<double> lower_;
    std::vector<double> upper_;
};

}  // namespace perturb
