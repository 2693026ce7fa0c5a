#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace liouville {

enum class RadialMapKind : std::uint32_t { uniform = 0, sinh = 1, sqrt_uniform = 2, sqrt_sinh = 3 };

// Maps s in [0,1] to r in [0,1]. The sinh map clusters nodes near the origin with
// length scale about 1/sinh(kappa); the sqrt kinds are the images under y -> y^{1/2}.
struct RadialMap {
    RadialMapKind kind = RadialMapKind::uniform;
    double param = 0.0;

    double operator()(double s) const {
        switch (kind) {
            case RadialMapKind::uniform: return s;
            case RadialMapKind::sinh: return std::sinh(param * s) / std::sinh(param);
            case RadialMapKind::sqrt_uniform: return std::sqrt(s);
            case RadialMapKind::sqrt_sinh: return std::sqrt(std::sinh(param * s) / std::sinh(param));
        }
        return s;
    }

    double inverse(double r) const {
        switch (kind) {
            case RadialMapKind::uniform: return r;
            case RadialMapKind::sinh: return std::asinh(r * std::sinh(param)) / param;
            case RadialMapKind::sqrt_uniform: return r * r;
            case RadialMapKind::sqrt_sinh: return std::asinh(r * r * std::sinh(param)) / param;
        }
        return r;
    }

    RadialMap folded() const {
        if (kind == RadialMapKind::uniform) return {RadialMapKind::sqrt_uniform, param};
        if (kind == RadialMapKind::sinh) return {RadialMapKind::sqrt_sinh, param};
        throw std::invalid_argument("RadialMap::folded: map already folded");
    }
};

// Polar cell-centred grid of the closed unit disk: ring i has centre radius r[i] and
// faces face[i] < r[i] < face[i+1], face[0] = 0, face[n_r] = 1; angles theta_j = 2 pi j / n_theta.
//
// The polar layout lives in a coordinate z. With a centre a != 0 the physical node is
// x = (z + a) / (1 + conj(a) z), the disk automorphism taking 0 to a, so the pole of the grid sits
// on a; the Dirichlet Laplacian is invariant and only cell weights pick up |dx/dz|^2.
class DiskGrid {
public:
    DiskGrid(int n_r, int n_theta, RadialMap map = {}, Point center = {}) : n_r_(n_r), n_theta_(n_theta), map_(map), center_(center) {
        if (n_r < 4 || n_theta < 4 || n_theta % 2 != 0) throw std::invalid_argument("DiskGrid: need n_r >= 4, even n_theta >= 4");
        if (!(center.norm2() < 1)) throw std::invalid_argument("DiskGrid: centre must lie inside the disk");
        r_.resize(n_r);
        face_.resize(n_r + 1);
        area_.resize(n_r);
        for (int i = 0; i <= n_r; ++i) face_[i] = map_(static_cast<double>(i) / n_r);
        face_[0] = 0.0;
        face_[n_r] = 1.0;
        for (int i = 0; i < n_r; ++i) {
            r_[i] = map_((i + 0.5) / n_r);
            area_[i] = 0.5 * (face_[i + 1] * face_[i + 1] - face_[i] * face_[i]) * dtheta();
        }
        cos_.resize(n_theta);
        sin_.resize(n_theta);
        for (int j = 0; j < n_theta; ++j) {
            cos_[j] = std::cos(theta(j));
            sin_[j] = std::sin(theta(j));
        }
    }

    // Sinh-clustered grid resolving a scale delta near the centre.
    static std::shared_ptr<const DiskGrid> clustered(int n_r, int n_theta, double delta, Point center = {}) {
        const double kappa = std::asinh(1.0 / std::max(delta, 1e-12));
        return std::make_shared<const DiskGrid>(n_r, n_theta, RadialMap{RadialMapKind::sinh, kappa}, center);
    }
    static std::shared_ptr<const DiskGrid> uniform(int n_r, int n_theta) {
        return std::make_shared<const DiskGrid>(n_r, n_theta, RadialMap{});
    }

    int n_r() const { return n_r_; }
    int n_theta() const { return n_theta_; }
    std::size_t size() const { return static_cast<std::size_t>(n_r_) * n_theta_; }
    const RadialMap& map() const { return map_; }
    double dtheta() const { return kTwoPi / n_theta_; }
    double theta(int j) const { return kTwoPi * j / n_theta_; }
    double r(int i) const { return r_[i]; }
    double face(int i) const { return face_[i]; }
    double area(int i) const { return area_[i]; }  // cell area, includes dtheta
    const std::vector<double>& radii() const { return r_; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_theta_ + j; }
    Point center() const { return center_; }
    bool centered() const { return center_.x1 == 0 && center_.x2 == 0; }

    // Node in the polar coordinate z.
    Point zpoint(int i, int j) const { return {r_[i] * cos_[j], r_[i] * sin_[j]}; }
    Point point(int i, int j) const { return centered() ? zpoint(i, j) : from_z(zpoint(i, j)); }
    Point point(std::size_t k) const { return point(static_cast<int>(k / n_theta_), static_cast<int>(k % n_theta_)); }
    Point boundary_point(int j) const { return centered() ? Point{cos_[j], sin_[j]} : from_z({cos_[j], sin_[j]}); }

    Point from_z(Point z) const {
        const std::complex<double> a = center_.complex(), zc = z.complex();
        return Point((zc + a) / (1.0 + std::conj(a) * zc));
    }
    Point to_z(Point x) const {
        const std::complex<double> a = center_.complex(), xc = x.complex();
        return Point((xc - a) / (1.0 - std::conj(a) * xc));
    }
    // |dx/dz|^2 at node (i, j).
    double jacobian(int i, int j) const {
        if (centered()) return 1.0;
        const std::complex<double> a = center_.complex();
        const double s = 1 - center_.norm2();
        const double d = std::norm(1.0 + std::conj(a) * zpoint(i, j).complex());
        return s * s / (d * d);
    }
    // Physical cell measure.
    double weight(int i, int j) const { return area_[i] * jacobian(i, j); }

    // Largest cell dimension at ring i.
    double spacing(int i) const { return std::max(face_[i + 1] - face_[i], r_[i] * dtheta()); }

    // Ring whose cell contains radius rho.
    int ring_of(double rho) const {
        int lo = 0, hi = n_r_ - 1;
        while (lo < hi) {
            const int mid = (lo + hi + 1) / 2;
            if (face_[mid] <= rho) lo = mid; else hi = mid - 1;
        }
        return lo;
    }

    // Same polar layout (the centre may differ).
    bool same_layout(const DiskGrid& o) const {
        return n_r_ == o.n_r_ && n_theta_ == o.n_theta_ && map_.kind == o.map_.kind && map_.param == o.map_.param;
    }

private:
    int n_r_, n_theta_;
    RadialMap map_;
    Point center_;
    std::vector<double> r_, face_, area_, cos_, sin_;
};

using GridPtr = std::shared_ptr<const DiskGrid>;

struct DiskField {
    GridPtr grid;
    std::vector<double> values;
    double boundary_value = 0.0;

    DiskField() = default;
    explicit DiskField(GridPtr g, double fill = 0.0) : grid(std::move(g)), values(grid->size(), fill) {}
    DiskField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid->size()) throw std::invalid_argument("DiskField: size mismatch");
    }

    template <class F>
    static DiskField sample(GridPtr g, F&& f) {
        DiskField out(g);
        for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = f(g->point(k));
        return out;
    }

    double& operator()(int i, int j) { return values[grid->index(i, j)]; }
    double operator()(int i, int j) const { return values[grid->index(i, j)]; }

    double integral() const {
        std::vector<double> ring(grid->n_r());
        for (int i = 0; i < grid->n_r(); ++i) {
            double s = 0;
            for (int j = 0; j < grid->n_theta(); ++j) s += (*this)(i, j) * grid->jacobian(i, j);
            ring[i] = s * grid->area(i);
        }
        double total = 0;
        for (double v : ring) total += v;
        return total;
    }

    double max_abs() const {
        double m = 0;
        for (double v : values) m = std::max(m, std::fabs(v));
        return m;
    }
};

// Binary container: 64-byte header then n_r * n_theta little-endian doubles, row-major by ring.
namespace dskf {

inline constexpr char kMagic[4] = {'D', 'S', 'K', 'F'};
inline constexpr std::uint32_t kVersion = 1;

struct Header {
    char magic[4];
    std::uint32_t version;
    std::uint64_t n_r;
    std::uint64_t n_theta;
    double boundary_value;
    std::uint32_t map_kind;
    std::uint32_t pad;
    double map_param;
    double center[2];
};
static_assert(sizeof(Header) == 64);

inline void save(const DiskField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("dskf::save: cannot open " + path);
    Header h{};
    std::memcpy(h.magic, kMagic, 4);
    h.version = kVersion;
    h.n_r = static_cast<std::uint64_t>(f.grid->n_r());
    h.n_theta = static_cast<std::uint64_t>(f.grid->n_theta());
    h.boundary_value = f.boundary_value;
    h.map_kind = static_cast<std::uint32_t>(f.grid->map().kind);
    h.map_param = f.grid->map().param;
    h.center[0] = f.grid->center().x1;
    h.center[1] = f.grid->center().x2;
    os.write(reinterpret_cast<const char*>(&h), sizeof h);
    os.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!os) throw std::runtime_error("dskf::save: write failed for " + path);
}

inline DiskField load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("dskf::load: cannot open " + path);
    Header h{};
    is.read(reinterpret_cast<char*>(&h), sizeof h);
    if (!is || std::memcmp(h.magic, kMagic, 4) != 0) throw std::runtime_error("dskf::load: bad magic in " + path);
    if (h.version != kVersion) throw std::runtime_error("dskf::load: unsupported version");
    if (h.map_kind > 3) throw std::runtime_error("dskf::load: unknown radial map");
    auto grid = std::make_shared<const DiskGrid>(static_cast<int>(h.n_r), static_cast<int>(h.n_theta),
                                                 RadialMap{static_cast<RadialMapKind>(h.map_kind), h.map_param},
                                                 Point{h.center[0], h.center[1]});
    DiskField f(grid);
    f.boundary_value = h.boundary_value;
    is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!is) throw std::runtime_error("dskf::load: truncated data in " + path);
    return f;
}

inline void export_csv(const DiskField& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("export_csv: cannot open " + path);
    os << "r,theta,value\n" << std::setprecision(17);
    for (int i = 0; i < f.grid->n_r(); ++i)
        for (int j = 0; j < f.grid->n_theta(); ++j) {
            const Point x = f.grid->point(i, j);
            os << x.norm() << ',' << std::atan2(x.x2, x.x1) << ',' << f(i, j) << '\n';
        }
}

}  // namespace dskf
}  // namespace liouville
