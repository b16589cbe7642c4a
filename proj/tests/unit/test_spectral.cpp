#include "catch_amalgamated.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "gridsplit/error.hpp"
#include "gridsplit/spectral.hpp"
#include "json.hpp"

using namespace gridsplit;
using gridsplit::testing::Rng;
using Catch::Matchers::WithinAbs;

namespace {

ZoneGraph path3() { return ZoneGraph({"a", "b", "c"}, {{0, 1, 1.0}, {1, 2, 1.0}}); }

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("Laplacians of a three-vertex path", "[spectral]") {
    const auto l = laplacians(path3());
    Eigen::MatrixXd expected(3, 3);
    expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    CHECK(max_abs(l.laplacian - expected) < 1e-15);
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXd normalized(3, 3);
    normalized << 1, -s, 0, -s, 1, -s, 0, -s, 1;
    CHECK(max_abs(l.normalized - normalized) < 1e-15);
    CHECK(l.degree == Eigen::Vector3d(1, 2, 1));
}

TEST_CASE("Laplacian properties on random graphs", "[spectral]") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto n = 3 + rng.index(40);
        const auto graph = gridsplit::testing::random_connected_graph(rng, n, 0.2);
        const auto l = laplacians(graph);
        CHECK(max_abs(l.laplacian - l.laplacian.transpose()) == 0.0);
        CHECK(l.laplacian.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
        const Eigen::VectorXd root = l.degree.cwiseSqrt();
        CHECK((l.normalized * root).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((l.normalized.diagonal().array() - 1.0).abs().maxCoeff() < 1e-15);
        const auto eig = eig_sym(l.normalized);
        CHECK(eig.values[0] > -1e-10);
        CHECK(eig.values[eig.values.size() - 1] < 2.0 + 1e-10);
    }
}

TEST_CASE("Laplacian rejects isolated vertices and tiny graphs", "[spectral]") {
    CHECK_THROWS_AS(laplacians(ZoneGraph({"a", "b", "c"}, {{0, 1, 1.0}})), Error);
    CHECK_THROWS_AS(laplacians(ZoneGraph({"a"}, {})), Error);
}

TEST_CASE("eigensolver on the identity", "[spectral]") {
    const auto eig = eig_sym(Eigen::MatrixXd::Identity(4, 4));
    CHECK(eig.values == Eigen::Vector4d::Ones());
    CHECK(max_abs(eig.vectors - Eigen::MatrixXd::Identity(4, 4)) == 0.0);
}

TEST_CASE("eigensolver on a two-vertex path", "[spectral]") {
    Eigen::Matrix2d m;
    m << 1, -1, -1, 1;
    const auto eig = eig_sym(m);
    CHECK_THAT(eig.values[0], WithinAbs(0.0, 1e-14));
    CHECK_THAT(eig.values[1], WithinAbs(2.0, 1e-14));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK_THAT(eig.vectors(0, 0), WithinAbs(s, 1e-14));
    CHECK_THAT(eig.vectors(1, 0), WithinAbs(s, 1e-14));
    // Tie on |entry|: the lower index is made positive.
    CHECK_THAT(eig.vectors(0, 1), WithinAbs(s, 1e-14));
    CHECK_THAT(eig.vectors(1, 1), WithinAbs(-s, 1e-14));
}

TEST_CASE("eigensolver agrees with a reference solver", "[spectral]") {
    Rng rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const auto n = 2 + rng.index(60);
        Eigen::MatrixXd m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = rng.uniform(-5.0, 5.0);
        }
        const auto eig = eig_sym(m);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> reference(m);
        CHECK((eig.values - reference.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
        for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
            const Eigen::VectorXd residual = m * eig.vectors.col(i) - eig.values[i] * eig.vectors.col(i);
            CHECK(residual.norm() < 1e-10 * std::max(1.0, m.norm()));
        }
        CHECK(max_abs(eig.vectors.transpose() * eig.vectors - Eigen::MatrixXd::Identity(n, n)) < 1e-10);
        for (Eigen::Index i = 1; i < eig.values.size(); ++i) CHECK(eig.values[i - 1] <= eig.values[i]);
    }
}

TEST_CASE("eigensolver rejects asymmetric input", "[spectral]") {
    Eigen::Matrix2d m;
    m << 1, 2, 3, 1;
    try {
        eig_sym(m);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_argument);
    }
    CHECK_THROWS_AS(eig_sym(Eigen::MatrixXd(2, 3)), Error);
}

TEST_CASE("eigensolver reports exhausted sweeps as numerical", "[spectral]") {
    Rng rng(5);
    Eigen::MatrixXd m(8, 8);
    for (int i = 0; i < 8; ++i) {
        for (int j = i; j < 8; ++j) m(i, j) = m(j, i) = rng.uniform(-1.0, 1.0);
    }
    try {
        eig_sym(m, {.max_sweeps = 1});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::numerical);
    }
}

TEST_CASE("zero eigenvalue multiplicity counts components", "[spectral]") {
    Rng rng(99);
    const auto graph = gridsplit::testing::random_multi_component_graph(rng, {4, 6, 5});
    const auto eig = eig_sym(laplacians(graph).normalized);
    int zeros = 0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) zeros += std::abs(eig.values[i]) < 1e-9;
    CHECK(zeros == 3);
    const auto choice = choose_k(std::vector<double>(eig.values.data(), eig.values.data() + eig.values.size()));
    CHECK(choice.chosen_k == 3);
}

TEST_CASE("k_max defaults", "[spectral]") {
    CHECK(default_k_max(2) == 1);
    CHECK(default_k_max(3) == 2);
    CHECK(default_k_max(4) == 3);
    CHECK(default_k_max(5) == 3);
    CHECK(default_k_max(6) == 3);
    CHECK(default_k_max(7) == 4);
    CHECK(default_k_max(22) == 11);
}

TEST_CASE("eigengap choice", "[spectral]") {
    const std::vector<double> values{0.0, 0.1, 0.15, 0.9, 1.0, 1.1};
    const auto choice = choose_k(values);
    CHECK(choice.chosen_k == 3);
    CHECK(choice.k_max == 3);
    REQUIRE(choice.eigengaps.size() == 5);
    CHECK_THAT(choice.eigengaps[2], WithinAbs(0.75, 1e-15));

    // Equal gaps resolve to the smaller k.
    const std::vector<double> even{0.0, 0.5, 1.0, 1.5, 2.0};
    CHECK(choose_k(even, 4).chosen_k == 2);

    // A gap beyond k_max is not considered.
    const std::vector<double> late{0.0, 0.1, 0.25, 0.3, 1.5, 1.6};
    CHECK(choose_k(late).chosen_k == 2);
    CHECK(choose_k(late, 4).chosen_k == 4);
    // Requests past N - 1 are clamped.
    CHECK(choose_k(late, 6).k_max == 5);
}

TEST_CASE("embedding rows have unit length", "[spectral]") {
    Rng rng(3);
    const auto graph = gridsplit::testing::random_connected_graph(rng, 15, 0.3);
    const auto l = laplacians(graph);
    for (std::size_t k = 1; k <= 5; ++k) {
        const auto x = embed(l.normalized, k);
        CHECK(x.rows() == 15);
        CHECK(static_cast<std::size_t>(x.cols()) == k);
        CHECK((x.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(embed(l.normalized, 0), Error);
    CHECK_THROWS_AS(embed(l.normalized, 16), Error);
}

TEST_CASE("spectral analysis of a two-vertex graph uses k = 2", "[spectral]") {
    const auto report = spectral_analysis(ZoneGraph({"1", "X"}, {{0, 1, 3.0}}));
    CHECK(report.chosen_k == 2);
    CHECK_FALSE(report.k_from_eigengap);
    CHECK(report.embedding.cols() == 2);
}

TEST_CASE("spectral analysis honours an override", "[spectral]") {
    Rng rng(8);
    const auto graph = gridsplit::testing::random_connected_graph(rng, 10, 0.3);
    const auto report = spectral_analysis(graph, 4);
    CHECK(report.chosen_k == 4);
    CHECK_FALSE(report.k_from_eigengap);
    CHECK(report.embedding.cols() == 4);
    CHECK_THROWS_AS(spectral_analysis(graph, 11), Error);
    CHECK_THROWS_AS(spectral_analysis(graph, 0), Error);
    const auto json = to_json(report);
    CHECK(json.find("gridsplit-spectral/1") != std::string::npos);
    CHECK(nlohmann::json::parse(json)["chosen_k"] == 4);
}

TEST_CASE("planted communities give three clusters by eigengap", "[spectral]") {
    const auto network = gridsplit::testing::planted_case();
    const auto report = spectral_analysis(build_zone_graph(network, case_state_flows(network)));
    CHECK(report.chosen_k == 3);
    CHECK(report.k_from_eigengap);
    CHECK(report.vertices.size() == 22);
}
