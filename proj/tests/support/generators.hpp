#pragma once

// Hand-rolled random instance generators for the property tests.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "distobs/decomp.hpp"
#include "distobs/netgraph.hpp"

namespace distobs::testgen {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

inline Matrix random_matrix(Rng& rng, int r, int c) {
    Matrix M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = uniform(rng, -1.0, 1.0);
    return M;
}

inline Matrix random_orthogonal(Rng& rng, int n) {
    if (n == 0) return Matrix(0, 0);
    Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n, n));
    return qr.householderQ() * Matrix::Identity(n, n);
}

// Scales M so its spectral radius is `rho` (no-op for a nilpotent M).
inline Matrix with_radius(const Matrix& M, double rho) {
    if (M.size() == 0) return M;
    const double r = M.eigenvalues().cwiseAbs().maxCoeff();
    return r > 1e-12 ? Matrix(M * (rho / r)) : M;
}

inline Matrix strictly_lower(Rng& rng, int n) {
    Matrix M = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) M(i, j) = uniform(rng, -1.0, 1.0);
    return M;
}

// Plant with a known unobservable subspace of dimension u_dim. In the hidden
// basis A' = [A_o 0; A_c A_u] and every C_i' = [R_i S_i 0], where S_i picks a
// random subset of the observable coordinates. A = Q A' Q^T, C_i = C_i' Q^T.
struct PlantCase {
    Plant plant;
    int u_dim = 0;
    Matrix A_u;  // spectrum of the unobservable part
};

struct PlantSpec {
    int n = 4;
    int N = 3;
    int u_dim = 0;
    double rho_obs = 1.2;  // spectral radius of the observable block
    bool nilpotent_unobs = false;
    bool every_node_measures = false;
};

inline PlantCase random_plant(Rng& rng, const PlantSpec& s) {
    const int n = s.n, u = s.u_dim, o = n - u;
    Matrix Ap = Matrix::Zero(n, n);
    Ap.topLeftCorner(o, o) = with_radius(random_matrix(rng, o, o), s.rho_obs);
    Ap.bottomLeftCorner(u, o) = random_matrix(rng, u, o);
    const Matrix Au = s.nilpotent_unobs ? strictly_lower(rng, u) : random_matrix(rng, u, u);
    Ap.bottomRightCorner(u, u) = Au;
    const Matrix Q = random_orthogonal(rng, n);
    PlantCase pc;
    pc.u_dim = u;
    pc.A_u = Au;
    pc.plant.A = Q * Ap * Q.transpose();
    int total_rows = 0;
    for (int i = 0; i < s.N; ++i) {
        const int lo = s.every_node_measures ? 1 : 0;
        int r = o == 0 ? uniform_int(rng, 0, 1) : uniform_int(rng, lo, 2);
        if (i == s.N - 1 && total_rows == 0 && o > 0) r = 1;
        Matrix Cp = Matrix::Zero(r, n);
        if (o > 0) {
            const int forced = uniform_int(rng, 0, o - 1);  // rows never vanish
            for (int a = 0; a < o; ++a)
                if (a == forced || coin(rng, 0.7))
                    for (int b = 0; b < r; ++b) Cp(b, a) = uniform(rng, -1.0, 1.0);
        }
        pc.plant.C.push_back(Cp * Q.transpose());
        total_rows += r;
    }
    return pc;
}

// Strongly connected digraph: a random Hamiltonian cycle plus extra edges.
inline Digraph random_strongly_connected(Rng& rng, int N, double extra = 0.3) {
    std::vector<NodeId> perm(N);
    std::iota(perm.begin(), perm.end(), 1);
    std::shuffle(perm.begin(), perm.end(), rng);
    Digraph g(N);
    for (int k = 0; k < N && N > 1; ++k) g.add_edge(perm[k], perm[(k + 1) % N]);
    for (NodeId a = 1; a <= N; ++a)
        for (NodeId b = 1; b <= N; ++b)
            if (a != b && coin(rng, extra)) g.add_edge(a, b);
    return g;
}

// Arbitrary digraph, possibly disconnected.
inline Digraph random_digraph(Rng& rng, int N, double p = 0.35) {
    Digraph g(N);
    for (NodeId a = 1; a <= N; ++a)
        for (NodeId b = 1; b <= N; ++b)
            if (a != b && coin(rng, p)) g.add_edge(a, b);
    return g;
}

inline std::vector<NodeId> random_permutation(Rng& rng, int N) {
    std::vector<NodeId> v(N);
    std::iota(v.begin(), v.end(), 1);
    std::shuffle(v.begin(), v.end(), rng);
    return v;
}

// Sorted moduli-then-phase matching of two spectra; returns the worst distance.
inline double spectrum_distance(Eigen::VectorXcd a, Eigen::VectorXcd b) {
    if (a.size() != b.size()) return 1e300;
    std::vector<std::complex<double>> x(a.data(), a.data() + a.size()), y(b.data(), b.data() + b.size());
    // greedy nearest matching is enough for the well separated random spectra used here
    double worst = 0.0;
    for (const auto& z : x) {
        auto it = std::min_element(y.begin(), y.end(),
                                   [&](const auto& p, const auto& q) { return std::abs(p - z) < std::abs(q - z); });
        worst = std::max(worst, std::abs(*it - z));
        y.erase(it);
    }
    return worst;
}

}  // namespace distobs::testgen
