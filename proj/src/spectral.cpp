#include "gridsplit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridsplit/error.hpp"
#include "json_util.hpp"

namespace gridsplit {

Laplacians laplacians(const ZoneGraph& graph) {
    const auto n = static_cast<Eigen::Index>(graph.order());
    if (n < 2) throw Error(ErrorKind::invalid_argument, "Laplacians need at least two vertices");
    Laplacians out;
    out.adjacency = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : graph.edges()) {
        const auto i = static_cast<Eigen::Index>(e.i);
        const auto j = static_cast<Eigen::Index>(e.j);
        out.adjacency(i, j) = e.weight;
        out.adjacency(j, i) = e.weight;
    }
    out.degree = out.adjacency.rowwise().sum();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(out.degree[i] > 0.0)) {
            throw Error(ErrorKind::validation, "vertex '" + graph.vertices()[static_cast<std::size_t>(i)] +
                                                   "' has zero weighted degree; D is not invertible");
        }
    }
    out.laplacian = -out.adjacency;
    out.laplacian.diagonal() += out.degree;
    const Eigen::VectorXd inv_sqrt = out.degree.cwiseSqrt().cwiseInverse();
    out.normalized = inv_sqrt.asDiagonal() * out.laplacian * inv_sqrt.asDiagonal();
    return out;
}

EigenDecomposition eig_sym(const Eigen::MatrixXd& matrix, const JacobiOptions& options) {
    if (matrix.rows() != matrix.cols()) throw Error(ErrorKind::invalid_argument, "matrix is not square");
    const Eigen::Index n = matrix.rows();
    const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > options.symmetry_tolerance * scale) {
        throw Error(ErrorKind::invalid_argument, "matrix is not symmetric");
    }

    Eigen::MatrixXd a = matrix;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double threshold = options.tolerance * std::max(1.0, matrix.norm());
    auto off_diagonal = [&a, n] {
        double sum = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = 0; q < n; ++q) {
                if (p != q) sum += a(p, q) * a(p, q);
            }
        }
        return std::sqrt(sum);
    };

    EigenDecomposition out;
    double residual = off_diagonal();
    while (residual >= threshold) {
        if (out.sweeps >= options.max_sweeps) {
            throw Error(ErrorKind::numerical, "Jacobi eigensolver did not converge in " +
                                                  std::to_string(options.max_sweeps) +
                                                  " sweeps (off-diagonal norm " + std::to_string(residual) + ")");
        }
        ++out.sweeps;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = theta == 0.0 ? 1.0
                                              : std::copysign(1.0, theta) /
                                                    (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        residual = off_diagonal();
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::ranges::stable_sort(order, [&a](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const auto src = order[static_cast<std::size_t>(c)];
        out.values[c] = a(src, src);
        Eigen::VectorXd column = v.col(src);
        Eigen::Index lead = 0;
        for (Eigen::Index k = 1; k < n; ++k) {
            if (std::abs(column[k]) > std::abs(column[lead])) lead = k;
        }
        if (column[lead] < 0.0) column = -column;
        out.vectors.col(c) = column;
    }
    return out;
}

std::size_t default_k_max(std::size_t n) {
    if (n < 2) return 1;
    if (n < 4) return n - 1;
    return std::min(n - 1, std::max<std::size_t>(3, (n + 1) / 2));
}

EigengapChoice choose_k(std::span<const double> eigenvalues, std::optional<std::size_t> k_max) {
    const std::size_t n = eigenvalues.size();
    if (n < 3) throw Error(ErrorKind::invalid_argument, "eigengap selection needs at least three eigenvalues");
    EigengapChoice out;
    for (std::size_t k = 1; k < n; ++k) out.eigengaps.push_back(eigenvalues[k] - eigenvalues[k - 1]);
    out.k_max = std::clamp<std::size_t>(k_max.value_or(default_k_max(n)), 2, n - 1);
    out.chosen_k = 2;
    double best = out.eigengaps[1];
    for (std::size_t k = 3; k <= out.k_max; ++k) {
        const double gap = out.eigengaps[k - 1];
        if (gap > best + 1e-12 * std::max(1.0, std::abs(best))) {
            best = gap;
            out.chosen_k = k;
        }
    }
    return out;
}

Eigen::MatrixXd embed(const EigenDecomposition& decomposition, std::size_t k) {
    const auto n = decomposition.vectors.rows();
    if (k < 1 || static_cast<Eigen::Index>(k) > n) {
        throw Error(ErrorKind::invalid_argument, "embedding dimension must lie in [1, N]");
    }
    Eigen::MatrixXd rows = decomposition.vectors.leftCols(static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = rows.row(i).norm();
        if (norm < 1e-10) {
            throw Error(ErrorKind::validation,
                        "vertex " + std::to_string(i) + " has no spectral coordinates in " + std::to_string(k) +
                            " dimensions (graph has more components than k); raise k");
        }
        rows.row(i) /= norm;
    }
    return rows;
}

Eigen::MatrixXd embed(const Eigen::MatrixXd& normalized_laplacian, std::size_t k) {
    return embed(eig_sym(normalized_laplacian), k);
}

SpectralReport spectral_analysis(const ZoneGraph& graph, std::optional<std::size_t> k_override) {
    const auto lap = laplacians(graph);
    const auto decomposition = eig_sym(lap.normalized);
    const std::size_t n = graph.order();

    SpectralReport report;
    report.vertices = graph.vertices();
    report.eigenvalues.assign(decomposition.values.data(), decomposition.values.data() + decomposition.values.size());
    for (std::size_t k = 1; k < n; ++k) {
        report.eigengaps.push_back(report.eigenvalues[k] - report.eigenvalues[k - 1]);
    }
    if (k_override) {
        if (*k_override < 1 || *k_override > n) {
            throw Error(ErrorKind::invalid_argument, "embedding dimension must lie in [1, N]");
        }
        report.chosen_k = *k_override;
        report.k_max = default_k_max(n);
        report.k_from_eigengap = false;
    } else if (n < 3) {
        report.chosen_k = n;
        report.k_max = n;
        report.k_from_eigengap = false;
    } else {
        const auto choice = choose_k(report.eigenvalues);
        report.chosen_k = choice.chosen_k;
        report.k_max = choice.k_max;
    }
    report.embedding = embed(decomposition, report.chosen_k);
    return report;
}

std::string to_json(const SpectralReport& report) {
    detail::Json doc;
    doc["schema"] = "gridsplit-spectral/1";
    doc["vertices"] = report.vertices;
    doc["eigenvalues"] = report.eigenvalues;
    doc["eigengaps"] = report.eigengaps;
    doc["chosen_k"] = report.chosen_k;
    doc["k_max"] = report.k_max;
    doc["k_from_eigengap"] = report.k_from_eigengap;
    auto rows = detail::Json::array();
    for (Eigen::Index i = 0; i < report.embedding.rows(); ++i) {
        auto row = detail::Json::array();
        for (Eigen::Index c = 0; c < report.embedding.cols(); ++c) row.push_back(report.embedding(i, c));
        rows.push_back(std::move(row));
    }
    doc["embedding"] = std::move(rows);
    return detail::dump(doc);
}

}  // namespace gridsplit
