#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "fraccal/errors.hpp"

namespace fraccal {

struct Interval {
    double a = 0.0;
    double b = 0.0;
    double length() const { return b - a; }
};

// Region selector over the tagged index sets of a lattice. Window k is
// Window1 + (k - 1); WindowUnion concatenates all windows in input order.
enum class Region : int { Omega = -1, WindowUnion = -2, Window1 = 0, Window2 = 1 };

inline Region window(int k) { return static_cast<Region>(k - 1); }

// Uniform 1D grid over the hull of Omega and the exterior windows, with
// tagged index sets for the nodes strictly inside each region. All region
// endpoints must be integer multiples of the spacing h, so node positions
// and region membership are exact integer arithmetic on grid indices.
class Lattice {
public:
    static Lattice build(Interval omega, const std::vector<Interval>& windows, double h);

    double h() const { return h_; }
    double left() const { return left_; }
    double right() const { return right_; }
    int num_windows() const { return static_cast<int>(w_local_.size()); }

    // Node coordinates of the full hull grid (including region endpoints
    // and gap nodes, which never carry degrees of freedom).
    const std::vector<double>& nodes() const { return nodes_; }

    // Hull-grid node indices of the active (Omega or window) nodes in
    // ascending coordinate order; all matrices and lattice functions are
    // indexed by position in this list.
    const std::vector<int>& active_idx() const { return active_; }
    int num_active() const { return static_cast<int>(active_.size()); }

    // Positions within the active ordering (contiguous runs per region).
    struct Slice {
        int offset = 0;
        int size = 0;
    };
    Slice slice(Region r) const;
    int size(Region r) const;

    double node_x(int active_pos) const { return nodes_[active_[active_pos]]; }
    // Coordinate of the j-th node of a region (j local to the region).
    double region_x(Region r, int j) const { return node_x(slice_checked(r).offset + j); }

    const Interval& omega() const { return omega_; }
    const Interval& window_interval(int k) const { return windows_.at(k - 1); }

    // Number of grid intervals spanned by Omega (used for basis partition
    // alignment checks).
    int omega_intervals() const { return omega_intervals_; }
    // Hull-grid index of the left endpoint of Omega.
    int omega_left_index() const { return omega_left_index_; }

private:
    Slice slice_checked(Region r) const;

    double h_ = 0.0;
    double left_ = 0.0;
    double right_ = 0.0;
    Interval omega_;
    std::vector<Interval> windows_;
    std::vector<double> nodes_;
    std::vector<int> active_;
    Slice omega_local_;
    std::vector<Slice> w_local_;
    int omega_intervals_ = 0;
    int omega_left_index_ = 0;
};

// A real-valued function on the active nodes of a lattice.
enum class RoleTag { Solution, ExteriorDatum, Target, PotentialDensity };

struct LatticeFunction {
    Eigen::VectorXd values;  // length = lattice.num_active()
    RoleTag role = RoleTag::Solution;
};

// Extracts the region-local segment of an active-length vector.
Eigen::VectorXd restrict_to(const Lattice& lat, const Eigen::VectorXd& u, Region r);

// Embeds a region-local vector into an active-length vector (zero elsewhere).
Eigen::VectorXd extend_from(const Lattice& lat, const Eigen::VectorXd& u, Region r);

// Throws SupportViolation unless every entry of u outside region r is
// exactly zero.
void require_support(const Lattice& lat, const Eigen::VectorXd& u, Region r,
                     const std::string& what);

}  // namespace fraccal
