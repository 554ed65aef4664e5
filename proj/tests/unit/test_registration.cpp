#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "georeg/errors.hpp"
#include "georeg/registration.hpp"

using namespace georeg;

namespace {

DescriptorMatch make_match(const RigidTransform2D& t, Point2 p) {
    const Point2 q = apply_transform(t, p);
    return {p.x, p.y, q.x, q.y};
}

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected georeg::Error");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("quarter-turn from two matches") {
    const std::vector<DescriptorMatch> m = {{0, 0, 0, 10}, {10, 0, 0, 0}};
    const TransformEstimate est = estimate_transform(m);
    CHECK(est.transform.angle() == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
    CHECK(est.transform.t_x == doctest::Approx(10.0));
    CHECK(std::abs(est.transform.t_y) < 1e-12);
    CHECK(est.n_pairs_used == 1);
    CHECK(est.residual_rms < 1e-12);
}

TEST_CASE("identity matches give the identity transform") {
    const std::vector<DescriptorMatch> m = {{1, 2, 1, 2}, {-5, 7, -5, 7}, {3, -4, 3, -4}};
    const TransformEstimate est = estimate_transform(m);
    CHECK(std::abs(est.transform.angle()) < 1e-15);
    CHECK(std::abs(est.transform.t_x) < 1e-12);
    CHECK(std::abs(est.transform.t_y) < 1e-12);
    CHECK(est.n_pairs_used == 3);
}

TEST_CASE("pairwise estimate inverts apply_transform") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> pos(-500.0, 500.0);
    for (int k = 0; k < 500; ++k) {
        const RigidTransform2D truth = RigidTransform2D::from_angle(ang(gen), pos(gen), pos(gen));
        const auto m1 = make_match(truth, {pos(gen), pos(gen)});
        const auto m2 = make_match(truth, {pos(gen), pos(gen)});
        const RigidTransform2D est = estimate_pairwise(m1, m2).normalized();
        CHECK(std::abs(std::remainder(est.angle() - truth.angle(), 2 * std::numbers::pi)) < 1e-9);
        CHECK(est.t_x == doctest::Approx(truth.t_x).epsilon(1e-9).scale(1.0));
        CHECK(est.t_y == doctest::Approx(truth.t_y).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("many-match estimate, exhaustive and sampled") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> pos(-300.0, 300.0);
    const RigidTransform2D truth = RigidTransform2D::from_angle(0.3, 12.5, -40.0);
    for (std::size_t n : {3u, 50u, 256u, 600u}) {
        std::vector<DescriptorMatch> m;
        for (std::size_t i = 0; i < n; ++i) m.push_back(make_match(truth, {pos(gen), pos(gen)}));
        const TransformEstimate est = estimate_transform(m);
        CHECK(est.transform.angle() == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(est.transform.t_x == doctest::Approx(12.5).epsilon(1e-9));
        CHECK(est.transform.t_y == doctest::Approx(-40.0).epsilon(1e-9));
        CHECK(est.residual_rms < 1e-9);
        if (n <= 256) CHECK(est.n_pairs_used == n * (n - 1) / 2);
    }
}

TEST_CASE("sampled pairs are reproducible for a fixed seed") {
    std::mt19937_64 gen(9);
    std::normal_distribution<double> noise(0.0, 0.5);
    std::uniform_real_distribution<double> pos(-300.0, 300.0);
    const RigidTransform2D truth = RigidTransform2D::from_angle(-1.1, 3.0, 4.0);
    std::vector<DescriptorMatch> m;
    for (int i = 0; i < 400; ++i) {
        auto d = make_match(truth, {pos(gen), pos(gen)});
        d.x2 += noise(gen);
        d.y2 += noise(gen);
        m.push_back(d);
    }
    AveragingPolicy policy;
    policy.seed = 77;
    const auto a = estimate_transform(m, policy);
    const auto b = estimate_transform(m, policy);
    CHECK(a.transform.cos_theta == b.transform.cos_theta);
    CHECK(a.transform.t_x == b.transform.t_x);
    CHECK(a.residual_rms > 0.1);
    CHECK(a.transform.angle() == doctest::Approx(-1.1).epsilon(1e-2));
}

TEST_CASE("degenerate and insufficient inputs") {
    CHECK(kind_of([] { estimate_pairwise({1, 1, 5, 5}, {2, 3, 5, 5}); }) == ErrorKind::DegenerateMatchPair);
    CHECK(kind_of([] { estimate_pairwise({1, 1, 5, 5}, {1, 1, 6, 9}); }) == ErrorKind::DegenerateMatchPair);
    const std::vector<DescriptorMatch> one = {{0, 0, 1, 1}};
    CHECK(kind_of([&] { estimate_transform(one); }) == ErrorKind::InsufficientMatches);
    const std::vector<DescriptorMatch> same = {{0, 0, 1, 1}, {2, 2, 1, 1}, {4, 1, 1, 1}};
    CHECK(kind_of([&] { estimate_transform(same); }) == ErrorKind::AllPairsDegenerate);
    CHECK(kind_of([] { RigidTransform2D{0, 0, 0, 0}.normalized(); }) == ErrorKind::DegenerateMatchPair);
}

TEST_CASE("a single degenerate pair is skipped") {
    const RigidTransform2D truth = RigidTransform2D::from_angle(0.7, 1.0, 2.0);
    std::vector<DescriptorMatch> m = {make_match(truth, {0, 0}), make_match(truth, {0, 0}), make_match(truth, {10, 5})};
    const TransformEstimate est = estimate_transform(m);
    CHECK(est.n_pairs_used == 2);
    CHECK(est.transform.angle() == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("displacement std scales as 1/sqrt(n)") {
    CHECK(displacement_std(24.49, 600) == doctest::Approx(24.49 / std::sqrt(600.0)));
    CHECK(displacement_std(24.49, 600) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(displacement_std(10.0, 4) == doctest::Approx(2.0 * displacement_std(10.0, 16)));
    CHECK(kind_of([] { displacement_std(1.0, 0); }) == ErrorKind::InvalidCount);
    CHECK(kind_of([] { displacement_std(-1.0, 3); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("quantization bound is half a pixel") {
    CHECK(quantization_error_bound(0.5) == 0.25);
    CHECK(kind_of([] { quantization_error_bound(0.0); }) == ErrorKind::InvalidArgument);
}
