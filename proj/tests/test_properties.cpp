#include <catch_amalgamated.hpp>

#include "properties.hpp"

namespace {

void require_all(const properties::Outcome& o) {
    INFO("passed " << o.passed << "/" << o.total << ", worst defect " << o.worst);
    CHECK(o.total == 100);
    CHECK(o.ok());
}

}  // namespace

TEST_CASE("Hermitian symmetry", "[property]") { require_all(properties::hermitian_symmetry(100)); }
TEST_CASE("pointwise product identity", "[property]") { require_all(properties::product_identity(100)); }
TEST_CASE("Duhamel ODE identity", "[property]") { require_all(properties::duhamel_ode(100)); }
TEST_CASE("semigroup additivity", "[property]") { require_all(properties::semigroup_additivity(100)); }
TEST_CASE("homogeneity of Xi_j", "[property]") { require_all(properties::homogeneity(100)); }
TEST_CASE("rational scaling symmetry", "[property]") { require_all(properties::scaling_symmetry(100)); }

TEST_CASE("other seeds", "[property][seeds]") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        CHECK(properties::hermitian_symmetry(30, seed).ok());
        CHECK(properties::product_identity(30, seed).ok());
        CHECK(properties::duhamel_ode(30, seed).ok());
        CHECK(properties::semigroup_additivity(30, seed).ok());
        CHECK(properties::homogeneity(30, seed).ok());
        CHECK(properties::scaling_symmetry(30, seed).ok());
    }
}

TEST_CASE("an injected defect is caught", "[property][meta]") {
    properties::Outcome o;
    o.record(1e-15, 1e-14);
    o.record(2e-14, 1e-14);
    CHECK(o.passed == 1);
    CHECK_FALSE(o.ok());
    CHECK(o.worst == 2e-14);
}
