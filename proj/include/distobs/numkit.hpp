#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "distobs/errors.hpp"

namespace distobs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

struct ToleranceConfig {
    double rank_tol = 1e-9;         // relative to the largest singular value
    double eig_cluster_tol = 1e-7;  // absolute distance for merging eigenvalues
    double schur_margin = 1e-6;     // certified designs need rho <= 1 - margin

    void validate() const;
};

// One class of numerically equal eigenvalues. A complex conjugate pair is a
// single class: `value` has positive imaginary part, `algebraic` and
// `geometric` count multiplicities of `value` itself and `dimension()` is the
// real dimension of the class (both members).
struct EigenClass {
    Complex value;
    bool conjugate_pair = false;
    int algebraic = 0;
    int geometric = 0;
    std::vector<int> members;  // indices into EigenInfo::eigenvalues

    int dimension() const { return conjugate_pair ? 2 * algebraic : algebraic; }
};

struct EigenInfo {
    std::vector<Complex> eigenvalues;
    std::vector<EigenClass> classes;  // descending |λ|, then descending Re, then ascending Im

    std::vector<int> unstable_classes(const ToleranceConfig& tol = {}) const;
};

// Where a design places observer poles: every pole at the same real value.
// The default (0) is deadbeat.
struct PolePolicy {
    double value = 0.0;

    std::vector<Complex> poles_for(int dim) const;
};

struct ObservableSplit {
    Matrix T;  // orthogonal; leading n_obs columns span the observable directions
    int n_obs = 0;
};

void require_finite(const Matrix& M, const char* what);

bool is_unstable(Complex lambda, const ToleranceConfig& tol = {});

int rank_tol(const Matrix& M, const ToleranceConfig& tol = {});
int rank_tol(const CMatrix& M, const ToleranceConfig& tol = {});

// Orthonormal basis of the numerical null space. `scale` floors the reference
// magnitude as in obs_canon_decomp.
Matrix null_space(const Matrix& M, const ToleranceConfig& tol = {}, double scale = 0.0);

// The rank test is measured against the larger of norm(A) and `scale`, so a
// shift A - lambda I made only of roundoff counts as rank deficient.
bool pbh_detectable(const Matrix& A, const Matrix& C, Complex lambda,
                    const ToleranceConfig& tol = {}, double scale = 0.0);

Matrix observability_matrix(const Matrix& A, const Matrix& C);

// `scale` raises the reference magnitude for the rank cutoff; pass the size of
// the enclosing problem when (A, C) is a residual block of it.
ObservableSplit obs_canon_decomp(const Matrix& A, const Matrix& C, const ToleranceConfig& tol = {},
                                 double scale = 0.0);

EigenInfo eigen_info(const Matrix& A, const ToleranceConfig& tol = {});

// Gain L with sp(A - L C) = poles. Empty `poles` means deadbeat.
Matrix place_observer_gain(const Matrix& A, const Matrix& C, const std::vector<Complex>& poles = {},
                           const ToleranceConfig& tol = {});

// Same, for a detectable pair: only the observable part is placed and the
// remaining (stable) directions get zero gain.
Matrix place_detectable_gain(const Matrix& A, const Matrix& C, const PolePolicy& policy = {},
                             const ToleranceConfig& tol = {});

double spectral_radius(const Matrix& M);

double norm2(const Matrix& M);

// Spectral radius that reports 0 for a numerically nilpotent matrix, detected
// by rank-revealing deflation at tolerance rank_tol. A plain eigensolve of a
// k-step nilpotent block returns moduli of order eps^(1/k).
double structured_spectral_radius(const Matrix& M, const ToleranceConfig& tol = {});

// Multiplicity of the eigenvalue 0 determined by successive null-space deflation.
int zero_eigen_multiplicity(const Matrix& M, const ToleranceConfig& tol = {});

// Spectral radius of a block lower-triangular matrix from its diagonal blocks.
// Falls back to the full matrix if any block above the diagonal is nonzero.
double block_triangular_spectral_radius(const Matrix& M, const std::vector<int>& block_sizes,
                                        const ToleranceConfig& tol = {});

}  // namespace distobs
