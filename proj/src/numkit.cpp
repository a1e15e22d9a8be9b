#include "distobs/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace distobs {

void ToleranceConfig::validate() const {
    if (!(rank_tol > 0) || !(eig_cluster_tol > 0) || !(schur_margin > 0))
        throw SchemaError("tolerances must be strictly positive");
}

std::vector<Complex> PolePolicy::poles_for(int dim) const {
    return std::vector<Complex>(static_cast<size_t>(std::max(dim, 0)), Complex(value, 0.0));
}

std::vector<int> EigenInfo::unstable_classes(const ToleranceConfig& tol) const {
    std::vector<int> out;
    for (size_t j = 0; j < classes.size(); ++j)
        if (is_unstable(classes[j].value, tol)) out.push_back(static_cast<int>(j));
    return out;
}

void require_finite(const Matrix& M, const char* what) {
    if (!M.allFinite()) throw InvalidMatrix(std::string(what) + " has non-finite entries");
}

bool is_unstable(Complex lambda, const ToleranceConfig& tol) {
    return std::abs(lambda) >= 1.0 - tol.eig_cluster_tol;
}

double norm2(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

namespace {

// `scale` floors the reference magnitude: a shifted matrix A - lambda I whose
// entries are all roundoff must come out rank deficient.
template <typename Mat>
int rank_of(const Mat& M, const ToleranceConfig& tol, double scale = 0.0) {
    if (M.size() == 0) return 0;
    if (!M.allFinite()) throw InvalidMatrix("rank of a matrix with non-finite entries");
    Eigen::JacobiSVD<Mat> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || std::max(s(0), scale) == 0.0) return 0;
    const double cut = tol.rank_tol * std::max(s(0), scale);
    int r = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) > cut) ++r;
    return r;
}

void check_square(const Matrix& A, const char* what) {
    if (A.rows() != A.cols()) throw ShapeError(std::string(what) + " must be square");
}

void check_pair(const Matrix& A, const Matrix& C) {
    check_square(A, "A");
    if (C.cols() != A.rows())
        throw ShapeError("C has " + std::to_string(C.cols()) + " columns, expected " + std::to_string(A.rows()));
}

// Real block-diagonal matrix with the given spectrum. Consecutive blocks are
// chained through a unit entry so that repeated poles form a single Jordan
// chain.
Matrix realization_of(const std::vector<Complex>& poles, double tol, bool chain) {
    const int m = static_cast<int>(poles.size());
    Matrix D = Matrix::Zero(m, m);
    int k = 0;
    int prev = -1;
    std::vector<bool> used(poles.size(), false);
    for (int a = 0; a < m; ++a) {
        if (used[a]) continue;
        used[a] = true;
        const Complex p = poles[a];
        if (std::abs(p.imag()) <= tol) {
            D(k, k) = p.real();
            if (chain && prev >= 0) D(prev, k) = 1.0;
            prev = k;
            k += 1;
        } else {
            for (int b = a + 1; b < m; ++b) {
                if (!used[b] && std::abs(poles[b] - std::conj(p)) <= tol) {
                    used[b] = true;
                    break;
                }
            }
            const double re = p.real(), im = std::abs(p.imag());
            D(k, k) = re;
            D(k, k + 1) = im;
            D(k + 1, k) = -im;
            D(k + 1, k + 1) = re;
            if (chain && prev >= 0) D(prev, k) = 1.0;
            prev = k + 1;
            k += 2;
        }
    }
    return D;
}

void check_conjugate_closed(const std::vector<Complex>& poles, double tol) {
    std::vector<bool> used(poles.size(), false);
    for (size_t a = 0; a < poles.size(); ++a) {
        if (used[a]) continue;
        used[a] = true;
        if (std::abs(poles[a].imag()) <= tol) continue;
        bool found = false;
        for (size_t b = a + 1; b < poles.size(); ++b) {
            if (!used[b] && std::abs(poles[b] - std::conj(poles[a])) <= tol) {
                used[b] = true;
                found = true;
                break;
            }
        }
        if (!found) throw ShapeError("requested poles are not closed under conjugation");
    }
}

// Split `poles` into a conjugate-closed part of size `first` and the rest.
bool split_poles(const std::vector<Complex>& poles, int first, double tol, std::vector<Complex>& head,
                 std::vector<Complex>& tail) {
    std::vector<Complex> reals;
    std::vector<Complex> pairs;  // upper members only
    for (const auto& p : poles) {
        if (std::abs(p.imag()) <= tol)
            reals.emplace_back(p.real(), 0.0);
        else if (p.imag() > 0)
            pairs.push_back(p);
    }
    int n_pairs = std::min(static_cast<int>(pairs.size()), first / 2);
    int n_reals = first - 2 * n_pairs;
    if (n_reals > static_cast<int>(reals.size())) return false;
    head.clear();
    tail.clear();
    for (int k = 0; k < static_cast<int>(pairs.size()); ++k) {
        auto& dst = k < n_pairs ? head : tail;
        dst.push_back(pairs[k]);
        dst.push_back(std::conj(pairs[k]));
    }
    for (int k = 0; k < static_cast<int>(reals.size()); ++k) (k < n_reals ? head : tail).push_back(reals[k]);
    return true;
}

struct PlacementFailed {};

// Recursive placement on the output staircase. With C Q = [C1 0] and C1 of
// full column rank, the gain is chosen so that the closed loop is similar to
// [[D1, A12], [0, A22 - M A12]] where M places the reduced pair (A22, A12).
Matrix staircase_place(const Matrix& A, const Matrix& C, const std::vector<Complex>& poles, double cut,
                       double pole_tol) {
    const int m = static_cast<int>(A.rows());
    const int r = static_cast<int>(C.rows());
    if (m == 0) return Matrix::Zero(0, r);
    Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int rho = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) > cut) ++rho;
    if (rho == 0) throw NotObservable("pair is not observable");
    const Matrix Q = svd.matrixV();
    const Matrix C1pinv =
        s.head(rho).cwiseInverse().asDiagonal() * svd.matrixU().leftCols(rho).transpose();  // rho x r
    const Matrix Ab = Q.transpose() * A * Q;

    std::vector<Complex> head, tail;
    if (!split_poles(poles, rho, pole_tol, head, tail)) throw PlacementFailed{};
    const Matrix D1 = realization_of(head, pole_tol, false);
    const int rest = m - rho;

    Matrix Lt(m, r);
    if (rest == 0) {
        Lt = (Ab - D1) * C1pinv;
    } else {
        const Matrix A11 = Ab.topLeftCorner(rho, rho);
        const Matrix A12 = Ab.topRightCorner(rho, rest);
        const Matrix A21 = Ab.bottomLeftCorner(rest, rho);
        const Matrix A22 = Ab.bottomRightCorner(rest, rest);
        const Matrix M = staircase_place(A22, A12, tail, cut, pole_tol);
        Lt.topRows(rho) = (A11 + A12 * M - D1) * C1pinv;
        Lt.bottomRows(rest) = (A21 + A22 * M - M * D1) * C1pinv;
    }
    return Q * Lt;
}

// Dual Sylvester construction: solve A^T X - X D = C^T K for a random K, then
// A^T - C^T (K X^-1) = X D X^-1.
// Used only when the staircase split cannot keep conjugate pairs together.
Matrix sylvester_place(const Matrix& A, const Matrix& C, const std::vector<Complex>& poles, double pole_tol) {
    const int n = static_cast<int>(A.rows());
    const int r = static_cast<int>(C.rows());
    const Matrix F = A.transpose();
    const Matrix G = C.transpose();
    const Matrix D = realization_of(poles, pole_tol, true);
    const Matrix I = Matrix::Identity(n, n);
    // vec(F X - X D) = (I kron F - D^T kron I) vec(X)
    Matrix K = Matrix::Zero(n * n, n * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            K.block(a * n, b * n, n, n) += (a == b ? 1.0 : 0.0) * F;
            K.block(a * n, b * n, n, n) -= D(b, a) * I;
        }
    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible()) throw PlacementFailed{};
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> nd;
    for (int attempt = 0; attempt < 20; ++attempt) {
        Matrix Kt(r, n);
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < n; ++b) Kt(a, b) = nd(rng);
        const Matrix rhs = G * Kt;
        const Vector x = lu.solve(Eigen::Map<const Vector>(rhs.data(), rhs.size()));
        const Matrix X = Eigen::Map<const Matrix>(x.data(), n, n);
        Eigen::JacobiSVD<Matrix> svd(X);
        const auto& s = svd.singularValues();
        if (s(n - 1) <= 1e-10 * s(0)) continue;
        const Matrix Kgain = Kt * X.inverse();
        return Kgain.transpose();
    }
    throw PlacementFailed{};
}

// Mean of the computed eigenvalues attracted to each distinct requested pole.
// Cluster means are well conditioned even when individual multiple
// eigenvalues are not.
bool spectrum_matches(const Matrix& X, const std::vector<Complex>& poles, double slack, double pole_tol) {
    const int n = static_cast<int>(X.rows());
    if (n == 0) return true;
    Eigen::EigenSolver<Matrix> es(X, false);
    if (es.info() != Eigen::Success) return false;
    std::vector<Complex> distinct;
    std::vector<int> capacity;
    for (const auto& p : poles) {
        auto it = std::find_if(distinct.begin(), distinct.end(),
                               [&](const Complex& q) { return std::abs(p - q) <= pole_tol; });
        if (it == distinct.end()) {
            distinct.push_back(p);
            capacity.push_back(1);
        } else {
            capacity[it - distinct.begin()] += 1;
        }
    }
    std::vector<Complex> sum(distinct.size(), Complex(0, 0));
    std::vector<int> got(distinct.size(), 0);
    std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
    // assign eigenvalues closest-first
    std::vector<std::tuple<double, int, int>> pairs;
    for (int a = 0; a < n; ++a)
        for (size_t b = 0; b < distinct.size(); ++b) pairs.emplace_back(std::abs(ev[a] - distinct[b]), a, static_cast<int>(b));
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> taken(n, false);
    for (const auto& [d, a, b] : pairs) {
        if (taken[a] || got[b] >= capacity[b]) continue;
        taken[a] = true;
        got[b] += 1;
        sum[b] += ev[a];
    }
    for (size_t b = 0; b < distinct.size(); ++b)
        if (std::abs(sum[b] / static_cast<double>(capacity[b]) - distinct[b]) > slack) return false;
    return true;
}

}  // namespace

int rank_tol(const Matrix& M, const ToleranceConfig& tol) { return rank_of(M, tol); }
int rank_tol(const CMatrix& M, const ToleranceConfig& tol) { return rank_of(M, tol); }

Matrix null_space(const Matrix& M, const ToleranceConfig& tol, double scale) {
    const Eigen::Index n = M.cols();
    if (M.rows() == 0) return Matrix::Identity(n, n);
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int r = 0;
    const double ref = s.size() > 0 ? std::max(s(0), scale) : 0.0;
    if (ref > 0)
        for (Eigen::Index k = 0; k < s.size(); ++k)
            if (s(k) > tol.rank_tol * ref) ++r;
    return svd.matrixV().rightCols(n - r);
}

bool pbh_detectable(const Matrix& A, const Matrix& C, Complex lambda, const ToleranceConfig& tol, double scale) {
    check_pair(A, C);
    if (!is_unstable(lambda, tol)) return true;
    const Eigen::Index n = A.rows();
    if (n == 0) return true;
    CMatrix S(n + C.rows(), n);
    S.topRows(n) = A.cast<Complex>() - lambda * CMatrix::Identity(n, n);
    S.bottomRows(C.rows()) = C.cast<Complex>();
    return rank_of(S, tol, std::max(scale, norm2(A))) == n;
}

Matrix observability_matrix(const Matrix& A, const Matrix& C) {
    check_pair(A, C);
    const Eigen::Index n = A.rows(), r = C.rows();
    Matrix O(n * r, n);
    Matrix blk = C;
    for (Eigen::Index k = 0; k < n; ++k) {
        O.middleRows(k * r, r) = blk;
        blk = blk * A;
    }
    return O;
}

ObservableSplit obs_canon_decomp(const Matrix& A, const Matrix& C, const ToleranceConfig& tol, double scale_floor) {
    check_pair(A, C);
    require_finite(A, "A");
    require_finite(C, "C");
    const Eigen::Index n = A.rows();
    ObservableSplit out;
    if (n == 0) return out;
    const double scale = std::max({norm2(A), norm2(C), scale_floor});
    if (scale == 0.0) {
        out.T = Matrix::Identity(n, n);
        return out;
    }
    const double cut = tol.rank_tol * scale;

    // Block Krylov sequence of (A^T, C^T) with full reorthogonalization; its
    // span is the orthogonal complement of the unobservable subspace.
    Matrix Q(n, 0);
    Matrix W = C.transpose();
    while (Q.cols() < n && W.cols() > 0) {
        for (int pass = 0; pass < 2; ++pass) W -= Q * (Q.transpose() * W);
        Eigen::JacobiSVD<Matrix> svd(W, Eigen::ComputeThinU);
        const auto& s = svd.singularValues();
        Eigen::Index k = 0;
        while (k < s.size() && s(k) > cut) ++k;
        k = std::min<Eigen::Index>(k, n - Q.cols());
        if (k == 0) break;
        Matrix U = svd.matrixU().leftCols(k);
        U -= Q * (Q.transpose() * U);
        Eigen::HouseholderQR<Matrix> qr(U);
        U = qr.householderQ() * Matrix::Identity(n, k);
        Q.conservativeResize(n, Q.cols() + k);
        Q.rightCols(k) = U;
        W = A.transpose() * U;
    }
    const Eigen::Index k = Q.cols();
    out.n_obs = static_cast<int>(k);
    if (k == 0) {
        out.T = Matrix::Identity(n, n);
        return out;
    }
    Eigen::HouseholderQR<Matrix> qr(Q);
    const Matrix full = qr.householderQ() * Matrix::Identity(n, n);
    out.T.resize(n, n);
    out.T.leftCols(k) = Q;
    out.T.rightCols(n - k) = full.rightCols(n - k);
    return out;
}

EigenInfo eigen_info(const Matrix& A, const ToleranceConfig& tol) {
    check_square(A, "A");
    require_finite(A, "A");
    EigenInfo info;
    const Eigen::Index n = A.rows();
    if (n == 0) return info;
    const double normA = norm2(A);
    Eigen::EigenSolver<Matrix> es(A, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
    info.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);

    // single-linkage clustering of the values folded onto the upper half plane
    const double ct = tol.eig_cluster_tol;
    std::vector<Complex> folded(n);
    for (Eigen::Index k = 0; k < n; ++k)
        folded[k] = Complex(info.eigenvalues[k].real(), std::abs(info.eigenvalues[k].imag()));
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a + 1; b < n; ++b)
            if (std::abs(folded[a] - folded[b]) <= ct) parent[find(static_cast<int>(a))] = find(static_cast<int>(b));

    std::vector<std::vector<int>> groups;
    std::vector<int> slot(n, -1);
    for (Eigen::Index k = 0; k < n; ++k) {
        int root = find(static_cast<int>(k));
        if (slot[root] < 0) {
            slot[root] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[slot[root]].push_back(static_cast<int>(k));
    }
    for (auto& g : groups) {
        Complex mean(0, 0);
        for (int k : g) mean += folded[k];
        mean /= static_cast<double>(g.size());
        EigenClass cls;
        cls.members = g;
        if (mean.imag() <= ct) {
            cls.value = Complex(mean.real(), 0.0);
            cls.algebraic = static_cast<int>(g.size());
            cls.geometric = static_cast<int>(n) - rank_of(Matrix(A - mean.real() * Matrix::Identity(n, n)), tol, normA);
        } else {
            if (g.size() % 2 != 0)
                throw NumericalError("eigenvalue cluster near " + format_complex(mean) + " is not conjugate-closed");
            cls.conjugate_pair = true;
            cls.value = mean;
            cls.algebraic = static_cast<int>(g.size() / 2);
            CMatrix S = A.cast<Complex>() - mean * CMatrix::Identity(n, n);
            cls.geometric = static_cast<int>(n) - rank_of(S, tol, normA);
        }
        info.classes.push_back(std::move(cls));
    }
    std::sort(info.classes.begin(), info.classes.end(), [ct](const EigenClass& a, const EigenClass& b) {
        const double ma = std::abs(a.value), mb = std::abs(b.value);
        if (std::abs(ma - mb) > ct) return ma > mb;
        if (std::abs(a.value.real() - b.value.real()) > ct) return a.value.real() > b.value.real();
        return a.value.imag() < b.value.imag();
    });
    return info;
}

Matrix place_observer_gain(const Matrix& A, const Matrix& C, const std::vector<Complex>& poles_in,
                           const ToleranceConfig& tol) {
    check_pair(A, C);
    require_finite(A, "A");
    require_finite(C, "C");
    const int n = static_cast<int>(A.rows());
    const int r = static_cast<int>(C.rows());
    if (n == 0) return Matrix::Zero(0, r);
    std::vector<Complex> poles = poles_in.empty() ? std::vector<Complex>(n, Complex(0, 0)) : poles_in;
    if (static_cast<int>(poles.size()) != n)
        throw ShapeError("expected " + std::to_string(n) + " poles, got " + std::to_string(poles.size()));
    const double pole_tol = tol.eig_cluster_tol;
    check_conjugate_closed(poles, pole_tol);
    if (obs_canon_decomp(A, C, tol).n_obs != n) throw NotObservable("pair (A, C) is not observable");

    const double scale = std::max(norm2(A), norm2(C));
    const double cut = tol.rank_tol * scale;
    Matrix L;
    try {
        L = staircase_place(A, C, poles, cut, pole_tol);
    } catch (const PlacementFailed&) {
        try {
            L = sylvester_place(A, C, poles, pole_tol);
        } catch (const PlacementFailed&) {
            throw NumericalError("pole placement failed");
        }
    }
    if (!L.allFinite()) throw NumericalError("pole placement produced non-finite gain");
    const Matrix X = A - L * C;
    const double slack = 1e-6 * std::max(1.0, norm2(X));
    if (!spectrum_matches(X, poles, slack, pole_tol))
        throw NumericalError("pole placement missed the requested spectrum");
    return L;
}

Matrix place_detectable_gain(const Matrix& A, const Matrix& C, const PolePolicy& policy,
                             const ToleranceConfig& tol) {
    check_pair(A, C);
    const int n = static_cast<int>(A.rows());
    const int r = static_cast<int>(C.rows());
    if (n == 0) return Matrix::Zero(0, r);
    const ObservableSplit split = obs_canon_decomp(A, C, tol);
    const int k = split.n_obs;
    const Matrix Ab = split.T.transpose() * A * split.T;
    if (k < n) {
        const Matrix Au = Ab.bottomRightCorner(n - k, n - k);
        if (spectral_radius(Au) >= 1.0 - tol.eig_cluster_tol)
            throw NotObservable("pair is not detectable: unobservable part has spectral radius " +
                                std::to_string(spectral_radius(Au)));
    }
    if (k == 0) return Matrix::Zero(n, r);
    const Matrix Ao = Ab.topLeftCorner(k, k);
    const Matrix Co = C * split.T.leftCols(k);
    const Matrix Lo = place_observer_gain(Ao, Co, policy.poles_for(k), tol);
    return split.T.leftCols(k) * Lo;
}

double spectral_radius(const Matrix& M) {
    check_square(M, "matrix");
    if (M.rows() == 0) return 0.0;
    require_finite(M, "matrix");
    Eigen::EigenSolver<Matrix> es(M, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

int zero_eigen_multiplicity(const Matrix& M, const ToleranceConfig& tol) {
    check_square(M, "matrix");
    const double scale = norm2(M);
    if (M.rows() == 0) return 0;
    if (scale == 0.0) return static_cast<int>(M.rows());
    const double cut = tol.rank_tol * scale;
    Matrix X = M;
    int total = 0;
    while (X.rows() > 0) {
        Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        Eigen::Index r = 0;
        while (r < s.size() && s(r) > cut) ++r;
        const Eigen::Index d = X.rows() - r;
        if (d == 0) break;
        total += static_cast<int>(d);
        // X maps its null space to zero; continue on the quotient.
        const Matrix R = svd.matrixV().leftCols(r);
        X = R.transpose() * X * R;
    }
    return total;
}

double structured_spectral_radius(const Matrix& M, const ToleranceConfig& tol) {
    check_square(M, "matrix");
    const Eigen::Index n = M.rows();
    if (n == 0) return 0.0;
    require_finite(M, "matrix");
    // Once the zero eigenvalue is split off, the largest modulus is unaffected
    // by which computed values belonged to it.
    if (zero_eigen_multiplicity(M, tol) >= n) return 0.0;
    return spectral_radius(M);
}

double block_triangular_spectral_radius(const Matrix& M, const std::vector<int>& sizes, const ToleranceConfig& tol) {
    check_square(M, "matrix");
    if (std::accumulate(sizes.begin(), sizes.end(), 0) != M.rows())
        throw ShapeError("block sizes do not add up to the matrix dimension");
    const double cut = tol.rank_tol * std::max(norm2(M), 1e-300);
    std::vector<int> off(sizes.size() + 1, 0);
    for (size_t b = 0; b < sizes.size(); ++b) off[b + 1] = off[b] + sizes[b];
    for (size_t a = 0; a < sizes.size(); ++a)
        for (size_t b = a + 1; b < sizes.size(); ++b) {
            if (sizes[a] == 0 || sizes[b] == 0) continue;
            if (M.block(off[a], off[b], sizes[a], sizes[b]).cwiseAbs().maxCoeff() > cut)
                return structured_spectral_radius(M, tol);
        }
    double rho = 0.0;
    for (size_t b = 0; b < sizes.size(); ++b)
        rho = std::max(rho, structured_spectral_radius(M.block(off[b], off[b], sizes[b], sizes[b]), tol));
    return rho;
}

}  // namespace distobs
