#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fraclab/kernel.hpp"
#include "fraclab/rng.hpp"

using namespace fraclab;

TEST_CASE("isotropic kernel at unit distance") {
    FractionalKernel k(2, 0.55, 2.0);
    CHECK(kernel_eval(k, {1.0, 0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(kernel_eval(k, {0.0, 1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("homogeneity K(tz) = t^{-(n+sp)} K(z)") {
    FractionalKernel k(2, 0.55, 2.0);
    const Point z{0.3, -0.7, 0.0};
    const double base = kernel_eval(k, z);
    for (double t : {0.5, 2.0, 10.0}) {
        Point tz{t * z[0], t * z[1], 0.0};
        CHECK(kernel_eval(k, tz) ==
              doctest::Approx(std::pow(t, -(2.0 + 1.1)) * base).epsilon(1e-13));
    }
    // doubling z scales the value by 2^{-(n+sp)}
    Point z2{2 * z[0], 2 * z[1], 0.0};
    CHECK(kernel_eval(k, z2) / base ==
          doctest::Approx(std::pow(2.0, -3.1)).epsilon(1e-13));
}

TEST_CASE("anisotropic value at theta = 0") {
    Anisotropy a;
    a.id = Anisotropy::Id::Cos2;
    a.strength = 0.5;
    a.axis = {1.0, 0.0, 0.0};
    FractionalKernel k(2, 0.55, 2.0, a);
    CHECK(kernel_eval(k, {1.0, 0.0, 0.0}) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(kernel_eval(k, {0.0, 1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("ellipticity sandwich on random directions") {
    Anisotropy a;
    a.id = Anisotropy::Id::Cos2;
    a.strength = 0.8;
    FractionalKernel k(2, 0.6, 2.2, a);
    const double alpha = k.alpha();
    rng::Sequence rs(31);
    for (int i = 0; i < 1000; ++i) {
        const double ang = rs.next_in(0.0, 2.0 * M_PI);
        const double r = rs.next_in(0.05, 20.0);
        Point z{r * std::cos(ang), r * std::sin(ang), 0.0};
        const double iso = std::pow(r, -k.exponent());
        const double v = kernel_eval(k, z);
        CHECK(v >= iso / alpha * (1.0 - 1e-12));
        CHECK(v <= iso * alpha * (1.0 + 1e-12));
    }
}

TEST_CASE("kernel singularity and parameter validation") {
    FractionalKernel k(2, 0.55, 2.0);
    CHECK_THROWS_AS(kernel_eval(k, {0.0, 0.0, 0.0}), Error);
    CHECK_THROWS_AS(FractionalKernel(2, 0.4, 2.0), Error);   // sp < 1
    CHECK_THROWS_AS(FractionalKernel(2, 0.99, 2.5), Error);  // sp > n
    CHECK_NOTHROW(FractionalKernel(3, 0.55, 2.0));
}
