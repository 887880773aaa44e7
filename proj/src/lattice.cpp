#include "fraccal/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace fraccal {

namespace {

// Nearest integer multiple of h, or throws if x is not one (relative
// tolerance absorbs decimal spacings like 0.02 or 1/60 that are not exact
// binary fractions).
long to_grid_units(double x, double h, const char* what) {
    double q = x / h;
    double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * (1.0 + std::abs(q))) {
        throw Error(ErrorCode::EndpointNotAligned,
                    std::string(what) + " endpoint " + std::to_string(x) +
                        " is not an integer multiple of h=" + std::to_string(h));
    }
    return static_cast<long>(r);
}

}  // namespace

Lattice Lattice::build(Interval omega, const std::vector<Interval>& windows, double h) {
    if (!(h > 0.0)) throw Error(ErrorCode::ConfigError, "grid spacing h must be positive");

    struct GridInterval {
        long a, b;
        const char* name;
    };
    std::vector<GridInterval> regions;
    regions.push_back({to_grid_units(omega.a, h, "omega"), to_grid_units(omega.b, h, "omega"), "omega"});
    for (std::size_t k = 0; k < windows.size(); ++k) {
        regions.push_back({to_grid_units(windows[k].a, h, "window"),
                           to_grid_units(windows[k].b, h, "window"), "window"});
    }
    for (const auto& r : regions) {
        if (r.b - r.a < 2) {
            throw Error(ErrorCode::EmptyRegion,
                        std::string(r.name) + " spans fewer than 2h (no interior node)");
        }
    }
    // Pairwise closure separation of at least one grid cell.
    for (std::size_t i = 0; i < regions.size(); ++i) {
        for (std::size_t j = i + 1; j < regions.size(); ++j) {
            long gap = std::max(regions[i].a, regions[j].a) - std::min(regions[i].b, regions[j].b);
            if (gap < 1) {
                throw Error(ErrorCode::RegionsTouch,
                            "region closures are closer than h (separation "
                            + std::to_string(static_cast<double>(gap) * h) + ")");
            }
        }
    }

    long lo = regions.front().a, hi = regions.front().b;
    for (const auto& r : regions) {
        lo = std::min(lo, r.a);
        hi = std::max(hi, r.b);
    }

    Lattice lat;
    lat.h_ = h;
    lat.left_ = static_cast<double>(lo) * h;
    lat.right_ = static_cast<double>(hi) * h;
    lat.omega_ = omega;
    lat.windows_ = windows;
    lat.omega_intervals_ = static_cast<int>(regions[0].b - regions[0].a);
    lat.omega_left_index_ = static_cast<int>(regions[0].a - lo);

    long n_nodes = hi - lo + 1;
    lat.nodes_.resize(static_cast<std::size_t>(n_nodes));
    for (long i = 0; i < n_nodes; ++i)
        lat.nodes_[static_cast<std::size_t>(i)] = static_cast<double>(lo + i) * h;

    // Active nodes: strictly interior to each region, ascending; runs are
    // contiguous because regions are separated.
    struct Run {
        long a, b;      // interior node index range [a+1, b-1] on the hull grid
        int region_id;  // 0 = omega, k >= 1 = window k
    };
    std::vector<Run> runs;
    runs.push_back({regions[0].a, regions[0].b, 0});
    for (std::size_t k = 1; k < regions.size(); ++k)
        runs.push_back({regions[k].a, regions[k].b, static_cast<int>(k)});
    std::sort(runs.begin(), runs.end(), [](const Run& x, const Run& y) { return x.a < y.a; });

    lat.w_local_.resize(windows.size());
    for (const auto& run : runs) {
        Slice s;
        s.offset = static_cast<int>(lat.active_.size());
        for (long i = run.a + 1; i <= run.b - 1; ++i)
            lat.active_.push_back(static_cast<int>(i - lo));
        s.size = static_cast<int>(lat.active_.size()) - s.offset;
        if (run.region_id == 0)
            lat.omega_local_ = s;
        else
            lat.w_local_[static_cast<std::size_t>(run.region_id - 1)] = s;
    }
    return lat;
}

Lattice::Slice Lattice::slice_checked(Region r) const {
    if (r == Region::Omega) return omega_local_;
    if (r == Region::WindowUnion)
        throw Error(ErrorCode::ConfigError, "window union is not a contiguous slice");
    int k = static_cast<int>(r);
    if (k < 0 || k >= static_cast<int>(w_local_.size()))
        throw Error(ErrorCode::ConfigError, "window index out of range");
    return w_local_[static_cast<std::size_t>(k)];
}

Lattice::Slice Lattice::slice(Region r) const { return slice_checked(r); }

int Lattice::size(Region r) const {
    if (r == Region::WindowUnion) {
        int n = 0;
        for (const auto& s : w_local_) n += s.size;
        return n;
    }
    return slice_checked(r).size;
}

Eigen::VectorXd restrict_to(const Lattice& lat, const Eigen::VectorXd& u, Region r) {
    if (r == Region::WindowUnion) {
        Eigen::VectorXd out(lat.size(r));
        int pos = 0;
        for (int k = 1; k <= lat.num_windows(); ++k) {
            auto s = lat.slice(window(k));
            out.segment(pos, s.size) = u.segment(s.offset, s.size);
            pos += s.size;
        }
        return out;
    }
    auto s = lat.slice(r);
    return u.segment(s.offset, s.size);
}

Eigen::VectorXd extend_from(const Lattice& lat, const Eigen::VectorXd& u, Region r) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(lat.num_active());
    if (r == Region::WindowUnion) {
        int pos = 0;
        for (int k = 1; k <= lat.num_windows(); ++k) {
            auto s = lat.slice(window(k));
            out.segment(s.offset, s.size) = u.segment(pos, s.size);
            pos += s.size;
        }
        return out;
    }
    auto s = lat.slice(r);
    out.segment(s.offset, s.size) = u;
    return out;
}

void require_support(const Lattice& lat, const Eigen::VectorXd& u, Region r,
                     const std::string& what) {
    auto inside = [&](int pos) {
        if (r == Region::WindowUnion) {
            for (int k = 1; k <= lat.num_windows(); ++k) {
                auto s = lat.slice(window(k));
                if (pos >= s.offset && pos < s.offset + s.size) return true;
            }
            return false;
        }
        auto s = lat.slice(r);
        return pos >= s.offset && pos < s.offset + s.size;
    };
    for (int i = 0; i < u.size(); ++i) {
        if (u[i] != 0.0 && !inside(i))
            throw Error(ErrorCode::SupportViolation, what + " has support outside its region");
    }
}

}  // namespace fraccal
