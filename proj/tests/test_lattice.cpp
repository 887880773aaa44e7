#include <doctest.h>

#include "fraccal/lattice.hpp"

using namespace fraccal;

TEST_CASE("two-window geometry node counts") {
    Lattice lat = Lattice::build({-1.0, 1.0}, {{2.0, 3.0}, {-3.0, -2.0}}, 0.05);
    CHECK(lat.size(Region::Omega) == 39);
    CHECK(lat.size(Region::Window1) == 19);
    CHECK(lat.size(Region::Window2) == 19);
    CHECK(lat.size(Region::WindowUnion) == 38);
    CHECK(lat.left() == doctest::Approx(-3.0));
    CHECK(lat.right() == doctest::Approx(3.0));
    CHECK(lat.num_active() == 39 + 19 + 19);
}

TEST_CASE("coarse lattice places the forced interior nodes") {
    Lattice lat = Lattice::build({-1.0, 1.0}, {{2.0, 3.0}}, 0.5);
    REQUIRE(lat.size(Region::Omega) == 3);
    CHECK(lat.region_x(Region::Omega, 0) == doctest::Approx(-0.5));
    CHECK(lat.region_x(Region::Omega, 1) == doctest::Approx(0.0));
    CHECK(lat.region_x(Region::Omega, 2) == doctest::Approx(0.5));
    REQUIRE(lat.size(Region::Window1) == 1);
    CHECK(lat.region_x(Region::Window1, 0) == doctest::Approx(2.5));
}

TEST_CASE("build failures") {
    CHECK_THROWS_WITH_AS(Lattice::build({-1.0, 1.0}, {{0.9, 2.0}}, 0.1), doctest::Contains("RegionsTouch"),
                         Error);
    CHECK_THROWS_WITH_AS(Lattice::build({-1.0, 1.0}, {{2.03, 3.0}}, 0.1),
                         doctest::Contains("EndpointNotAligned"), Error);
    CHECK_THROWS_WITH_AS(Lattice::build({-1.0, 1.0}, {{2.0, 2.1}}, 0.1),
                         doctest::Contains("EmptyRegion"), Error);
    // Exact adjacency (closures meet at a node) also counts as touching.
    CHECK_THROWS_WITH_AS(Lattice::build({-1.0, 1.0}, {{1.0, 2.0}}, 0.1),
                         doctest::Contains("RegionsTouch"), Error);
}

TEST_CASE("active nodes belong to exactly one region") {
    Lattice lat = Lattice::build({-1.0, 1.0}, {{1.5, 2.5}, {-2.5, -1.5}}, 0.1);
    auto in = [&](Region r, int pos) {
        auto s = lat.slice(r);
        return pos >= s.offset && pos < s.offset + s.size;
    };
    for (int pos = 0; pos < lat.num_active(); ++pos) {
        int count = in(Region::Omega, pos) + in(Region::Window1, pos) + in(Region::Window2, pos);
        CHECK(count == 1);
    }
    // Separation of closures by at least h.
    CHECK(lat.window_interval(1).a - lat.omega().b >= lat.h() - 1e-12);
    CHECK(lat.omega().a - lat.window_interval(2).b >= lat.h() - 1e-12);
}

TEST_CASE("restrict and extend round-trip") {
    Lattice lat = Lattice::build({-1.0, 1.0}, {{2.0, 3.0}, {-3.0, -2.0}}, 0.25);
    Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(lat.size(Region::Window2), 1.0, 2.0);
    Eigen::VectorXd active = extend_from(lat, w, Region::Window2);
    CHECK(restrict_to(lat, active, Region::Window2) == w);
    CHECK(restrict_to(lat, active, Region::Omega).cwiseAbs().maxCoeff() == 0.0);
    CHECK_NOTHROW(require_support(lat, active, Region::Window2, "test"));
    CHECK_NOTHROW(require_support(lat, active, Region::WindowUnion, "test"));
    CHECK_THROWS_AS(require_support(lat, active, Region::Window1, "test"), Error);

    Eigen::VectorXd u = Eigen::VectorXd::Ones(lat.size(Region::WindowUnion));
    Eigen::VectorXd au = extend_from(lat, u, Region::WindowUnion);
    CHECK(restrict_to(lat, au, Region::WindowUnion) == u);
}

TEST_CASE("irrational-looking spacings still align") {
    // 1/60 is not a binary fraction; endpoint checks must tolerate that.
    double h = 1.0 / 60.0;
    Lattice lat = Lattice::build({-1.0, 1.0}, {{2.0, 3.0}, {-3.0, -2.0}}, h);
    CHECK(lat.size(Region::Omega) == 119);
    CHECK(lat.omega_intervals() == 120);
}
