#include "perturb/space.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace perturb {

Point Point::at(std::span<const double> coords) {
    if (coords.size() > kMaxDim) throw std::invalid_argument("Point: too many coordinates");
    Point p;
    p.dim = static_cast<std::uint8_t>(coords.size());
    std::copy(coords.begin(), coords.end(), p.x.begin());
    return p;
}

bool point_less(const Point& a, const Point& b) {
    if (a.atom != b.atom) return a.atom < b.atom;
    if (a.dim != b.dim) return a.dim < b.dim;
    for (std::size_t i = 0; i < a.dim; ++i) {
        if (a.x[i] != b.x[i]) return a.x[i] < b.x[i];
    }
    return false;
}

std::shared_ptr<const GroundSpace> GroundSpace::discrete(std::vector<std::string> names) {
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) throw std::invalid_argument("GroundSpace: empty atom name");
        if (!seen.insert(n).second) throw std::invalid_argument("GroundSpace: duplicate atom '" + n + "'");
    }
    std::shared_ptr<GroundSpace> s(new GroundSpace());
    s->kind_ = Kind::discrete;
    s->names_ = std::move(names);
    return s;
}

std::shared_ptr<const GroundSpace> GroundSpace::box(std::vector<double> lower, std::vector<double> upper) {
    if (lower.size() != upper.size() || lower.empty() || lower.size() > Point::kMaxDim)
        throw std::invalid_argument("GroundSpace: bad box dimension");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i])) throw std::invalid_argument("GroundSpace: box needs lower < upper on every axis");
    }
    std::shared_ptr<GroundSpace> s(new GroundSpace());
    s->kind_ = Kind::box;
    s->lower_ = std::move(lower);
    s->upper_ = std::move(upper);
    return s;
}

std::optional<std::int32_t> GroundSpace::find_atom(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::int32_t>(it - names_.begin());
}

std::int32_t GroundSpace::atom_index(const std::string& name) const {
    if (auto i = find_atom(name)) return *i;
    throw std::out_of_range("unknown atom '" + name + "'");
}

double GroundSpace::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lower_.size(); ++i) v *= upper_[i] - lower_[i];
    return v;
}

bool GroundSpace::contains(const Point& p) const {
    if (kind_ == Kind::discrete) return p.is_atom() && static_cast<std::size_t>(p.atom) < names_.size();
    if (p.is_atom() || p.dim != lower_.size()) return false;
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (p.x[i] < lower_[i] || p.x[i] > upper_[i]) return false;
    }
    return true;
}

bool GroundSpace::same_as(const GroundSpace& other) const {
    return kind_ == other.kind_ && names_ == other.names_ && lower_ == other.lower_ && upper_ == other.upper_;
}

Region Region::atoms(std::vector<std::int32_t> ids) {
    Region r;
    r.kind_ = Kind::atoms;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    r.atoms_ = std::move(ids);
    return r;
}

Region Region::box(std::vector<double> lower, std::vector<double> upper) {
    if (lower.size() != upper.size()) throw std::invalid_argument("Region: bound size mismatch");
    Region r;
    r.kind_ = Kind::box;
    r.lower_ = std::move(lower);
    r.upper_ = std::move(upper);
    return r;
}

bool Region::contains(const Point& p) const {
    switch (kind_) {
        case Kind::all: return true;
        case Kind::atoms: return p.is_atom() && std::binary_search(atoms_.begin(), atoms_.end(), p.atom);
        case Kind::box:
            if (p.is_atom() || p.dim != lower_.size()) return false;
            for (std::size_t i = 0; i < lower_.size(); ++i) {
                if (p.x[i] < lower_[i] || p.x[i] > upper_[i]) return false;
            }
            return true;
    }
    return false;
}

}  // namespace perturb
