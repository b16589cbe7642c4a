#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridsplit/zone_graph.hpp"

namespace gridsplit {

struct Laplacians {
    Eigen::MatrixXd adjacency;
    Eigen::VectorXd degree;  // diagonal of D
    Eigen::MatrixXd laplacian;   // D - A
    Eigen::MatrixXd normalized;  // D^-1/2 (D - A) D^-1/2
};

// Requires N >= 2 and every vertex with positive degree.
Laplacians laplacians(const ZoneGraph& graph);

struct JacobiOptions {
    double tolerance = 1e-12;  // off-diagonal Frobenius norm, relative to max(1, ||M||_F)
    int max_sweeps = 100;
    double symmetry_tolerance = 1e-10;
};

struct EigenDecomposition {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // column i pairs with values[i]; largest |entry| positive
    int sweeps = 0;
};

// Cyclic Jacobi rotations for dense symmetric matrices.
EigenDecomposition eig_sym(const Eigen::MatrixXd& matrix, const JacobiOptions& options = {});

struct EigengapChoice {
    std::size_t chosen_k = 0;
    std::size_t k_max = 0;
    std::vector<double> eigengaps;  // eigengaps[k-1] = lambda_{k+1} - lambda_k
};

// Default upper bound on k: ceil(N/2), but at least 3 when N >= 4.
std::size_t default_k_max(std::size_t n);

// argmax over 2 <= k <= k_max of the eigengap; ties go to the smaller k.
EigengapChoice choose_k(std::span<const double> eigenvalues,
                        std::optional<std::size_t> k_max = std::nullopt);

// Rows of the first k eigenvectors, each scaled to unit length. Throws when a
// row is exactly zero.
Eigen::MatrixXd embed(const EigenDecomposition& decomposition, std::size_t k);
Eigen::MatrixXd embed(const Eigen::MatrixXd& normalized_laplacian, std::size_t k);

struct SpectralReport {
    std::vector<ZoneId> vertices;
    std::vector<double> eigenvalues;
    std::vector<double> eigengaps;
    std::size_t chosen_k = 0;
    std::size_t k_max = 0;
    bool k_from_eigengap = true;
    Eigen::MatrixXd embedding;
};

// Laplacian, decomposition, k selection and embedding. `k_override` skips the
// eigengap rule; graphs with two vertices always embed in two dimensions.
SpectralReport spectral_analysis(const ZoneGraph& graph,
                                 std::optional<std::size_t> k_override = std::nullopt);

std::string to_json(const SpectralReport& report);

}  // namespace gridsplit
