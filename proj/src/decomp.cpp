#include "distobs/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace distobs {

Matrix Plant::stacked_C(const std::vector<NodeId>& nodes) const {
    int rows = 0;
    for (NodeId i : nodes) rows += static_cast<int>(C_of(i).rows());
    Matrix S(rows, n());
    int at = 0;
    for (NodeId i : nodes) {
        S.middleRows(at, C_of(i).rows()) = C_of(i);
        at += static_cast<int>(C_of(i).rows());
    }
    return S;
}

void Plant::validate() const {
    if (A.rows() != A.cols()) throw ShapeError("A must be square");
    if (A.rows() < 1) throw ShapeError("A must be at least 1x1");
    if (C.empty()) throw ShapeError("plant needs at least one node");
    require_finite(A, "A");
    for (size_t i = 0; i < C.size(); ++i) {
        if (C[i].cols() != A.rows())
            throw ShapeError("C_" + std::to_string(i + 1) + " has " + std::to_string(C[i].cols()) +
                             " columns, expected " + std::to_string(A.rows()));
        require_finite(C[i], "C");
    }
}

int MultiSensorDecomposition::offset(int slot) const {
    if (slot < 0 || slot > slots()) throw ShapeError("slot index out of range");
    return std::accumulate(dims.begin(), dims.begin() + slot, 0);
}

int MultiSensorDecomposition::slot_of(NodeId node) const {
    auto it = std::find(order.begin(), order.end(), node);
    return it == order.end() ? -1 : static_cast<int>(it - order.begin());
}

Matrix MultiSensorDecomposition::A_block(int row_slot, int col_slot) const {
    return Abar.block(offset(row_slot), offset(col_slot), dim(row_slot), dim(col_slot));
}

Matrix MultiSensorDecomposition::C_block(int node_slot, int col_slot) const {
    const Matrix& Cb = Cbar.at(node_slot);
    return Cb.middleCols(offset(col_slot), dim(col_slot));
}

Matrix MultiSensorDecomposition::Abar_diag() const {
    Matrix D = Matrix::Zero(Abar.rows(), Abar.cols());
    for (int s = 0; s <= slots(); ++s) {
        const int o = offset(s), d = dim(s);
        D.block(o, o, d, d) = Abar.block(o, o, d, d);
    }
    return D;
}

Matrix MultiSensorDecomposition::Abar_lower() const { return Abar - Abar_diag(); }

double MultiSensorDecomposition::condition_number() const {
    if (T.size() == 0) return 1.0;
    Eigen::JacobiSVD<Matrix> svd(T);
    const auto& s = svd.singularValues();
    return s(0) / s(s.size() - 1);
}

double MultiSensorDecomposition::structure_violation() const {
    double worst = 0.0;
    for (int r = 0; r <= slots(); ++r)
        for (int c = r + 1; c <= slots(); ++c) {
            const Matrix B = A_block(r, c);
            if (B.size()) worst = std::max(worst, B.cwiseAbs().maxCoeff());
        }
    for (int j = 0; j < slots(); ++j) {
        const int end = offset(j) + dims[j];
        const Matrix tail = Cbar[j].rightCols(n() - end);
        if (tail.size()) worst = std::max(worst, tail.cwiseAbs().maxCoeff());
    }
    return worst;
}

namespace {

void check_order(const Plant& p, const std::vector<NodeId>& order) {
    std::set<NodeId> seen;
    for (NodeId i : order) {
        if (i < 1 || i > p.n_nodes()) throw SchemaError("sensor order names unknown node " + std::to_string(i));
        if (!seen.insert(i).second) throw SchemaError("sensor order repeats node " + std::to_string(i));
    }
}

Matrix checked_inverse(const Matrix& T, int n) {
    if (T.rows() != n || T.cols() != n) throw ShapeError("transformation must be " + std::to_string(n) + "x" + std::to_string(n));
    require_finite(T, "transformation");
    Eigen::JacobiSVD<Matrix> svd(T);
    const auto& s = svd.singularValues();
    if (s(n - 1) == 0.0 || s(0) / s(n - 1) >= 1e12) throw InvalidTransform("transformation is singular or ill-conditioned");
    return T.partialPivLu().inverse();
}

Matrix block_diag(const std::vector<Matrix>& blocks) {
    int n = 0;
    for (const auto& b : blocks) n += static_cast<int>(b.rows());
    Matrix D = Matrix::Zero(n, n);
    int at = 0;
    for (const auto& b : blocks) {
        D.block(at, at, b.rows(), b.cols()) = b;
        at += static_cast<int>(b.rows());
    }
    return D;
}

}  // namespace

MultiSensorDecomposition multisensor_decompose(const Plant& p, const std::vector<NodeId>& order,
                                               const ToleranceConfig& tol) {
    p.validate();
    check_order(p, order);
    const int n = p.n();
    MultiSensorDecomposition d;
    d.A = p.A;
    d.order = order;
    for (NodeId i : order) d.C.push_back(p.C_of(i));
    d.T = Matrix::Identity(n, n);
    Matrix Abar = p.A;
    int done = 0;
    for (size_t step = 0; step < order.size(); ++step) {
        const int rest = n - done;
        if (rest == 0) {
            d.dims.push_back(0);
            continue;
        }
        const Matrix Ares = Abar.bottomRightCorner(rest, rest);
        const Matrix Cres = (p.C_of(order[step]) * d.T).rightCols(rest);
        ObservableSplit split;
        try {
            split = obs_canon_decomp(Ares, Cres, tol, std::max(norm2(p.A), norm2(p.C_of(order[step]))));
        } catch (const Error& e) {
            throw NumericalError("decomposition step " + std::to_string(step + 1) + ": " + e.what());
        }
        Matrix Ti = Matrix::Identity(n, n);
        Ti.bottomRightCorner(rest, rest) = split.T;
        d.T = d.T * Ti;
        Abar = Ti.transpose() * Abar * Ti;
        d.dims.push_back(split.n_obs);
        done += split.n_obs;
    }
    d.u_dim = n - done;
    d.T_inv = d.T.transpose();
    d.Abar = d.T_inv * p.A * d.T;
    for (NodeId i : order) d.Cbar.push_back(p.C_of(i) * d.T);
    if (!d.Abar.allFinite()) throw NumericalError("decomposition produced non-finite entries");
    return d;
}

TransformedPlant apply_given_transformation(const Plant& p, const Matrix& T) {
    p.validate();
    const Matrix Tinv = checked_inverse(T, p.n());
    TransformedPlant out;
    out.Abar = Tinv * p.A * T;
    for (const auto& C : p.C) out.Cbar.push_back(C * T);
    return out;
}

MultiSensorDecomposition decomposition_from_transformation(const Plant& p, const std::vector<NodeId>& order,
                                                           const Matrix& T, const std::vector<int>& dims) {
    p.validate();
    check_order(p, order);
    if (dims.size() != order.size()) throw SchemaError("need one sub-state dimension per node in the order");
    int total = 0;
    for (int o : dims) {
        if (o < 0) throw SchemaError("sub-state dimensions must be non-negative");
        total += o;
    }
    if (total > p.n()) throw SchemaError("sub-state dimensions exceed the state dimension");
    MultiSensorDecomposition d;
    d.A = p.A;
    d.order = order;
    for (NodeId i : order) d.C.push_back(p.C_of(i));
    d.dims = dims;
    d.u_dim = p.n() - total;
    d.T = T;
    d.T_inv = checked_inverse(T, p.n());
    d.Abar = d.T_inv * p.A * d.T;
    for (NodeId i : order) d.Cbar.push_back(p.C_of(i) * d.T);
    return d;
}

Matrix JordanSystem::J() const {
    std::vector<Matrix> blocks;
    for (const auto& c : classes) blocks.push_back(c.J);
    return block_diag(blocks);
}

JordanSystem jordan_grouped(const Matrix& A, const ToleranceConfig& tol) {
    const EigenInfo info = eigen_info(A, tol);
    const int n = static_cast<int>(A.rows());
    const Matrix I = Matrix::Identity(n, n);
    const double normA = norm2(A);
    JordanSystem js;
    std::vector<Matrix> bases;
    int at = 0;
    for (const auto& cls : info.classes) {
        Matrix M;
        // upper bound on the norm of M, the reference for its null space
        double m_scale = normA + std::abs(cls.value);
        if (cls.conjugate_pair) {
            const double a = cls.value.real(), b = cls.value.imag();
            M = (A - a * I) * (A - a * I) + b * b * I;
            m_scale *= m_scale;
        } else {
            M = A - cls.value.real() * I;
        }
        Matrix P = I;
        double p_scale = 1.0;
        for (int k = 0; k < cls.algebraic; ++k) {
            P = P * M;
            p_scale *= m_scale;
        }
        Matrix V = null_space(P, tol, p_scale);
        if (V.cols() != cls.dimension())
            throw IllConditionedJordan(cls.value, "generalized eigenspace has dimension " + std::to_string(V.cols()) +
                                                      ", expected " + std::to_string(cls.dimension()));
        JordanClass jc;
        jc.eig = cls;
        jc.offset = at;
        jc.dim = cls.dimension();
        // Within the class use a real Schur basis so J_j is quasi-triangular.
        const Matrix Jc = V.transpose() * A * V;
        Eigen::RealSchur<Matrix> schur(Jc);
        V = V * schur.matrixU();
        for (Eigen::Index c = 0; c < V.cols(); ++c) {
            Eigen::Index k;
            V.col(c).cwiseAbs().maxCoeff(&k);
            if (V(k, c) < 0) V.col(c) = -V.col(c);
        }
        bases.push_back(V);
        js.classes.push_back(jc);
        at += jc.dim;
    }
    js.T.resize(n, n);
    at = 0;
    for (const auto& V : bases) {
        js.T.middleCols(at, V.cols()) = V;
        at += static_cast<int>(V.cols());
    }
    Eigen::JacobiSVD<Matrix> svd(js.T);
    const auto& s = svd.singularValues();
    if (s(n - 1) <= 1e-10 * s(0)) {
        const Complex lam = js.classes.empty() ? Complex(0, 0) : js.classes.front().eig.value;
        throw IllConditionedJordan(lam, "generalized eigenspaces are numerically dependent");
    }
    js.T_inv = js.T.partialPivLu().inverse();
    const Matrix Jfull = js.T_inv * A * js.T;
    for (auto& jc : js.classes) jc.J = Jfull.block(jc.offset, jc.offset, jc.dim, jc.dim);
    const double err = (js.T * js.J() * js.T_inv - A).norm();
    if (err > 1e-7 * std::max(A.norm(), 1.0)) {
        // name the class whose off-diagonal coupling is largest
        double worst = -1.0;
        Complex lam(0, 0);
        for (const auto& jc : js.classes) {
            Matrix row = Jfull.middleRows(jc.offset, jc.dim);
            row.middleCols(jc.offset, jc.dim).setZero();
            const double v = row.norm();
            if (v > worst) {
                worst = v;
                lam = jc.eig.value;
            }
        }
        throw IllConditionedJordan(lam, "block-diagonal form does not reproduce A");
    }
    return js;
}

NodeSplit node_local_split(const JordanSystem& js, NodeId i, const Matrix& C_i, const ToleranceConfig& tol) {
    const int n = static_cast<int>(js.T.rows());
    if (C_i.cols() != n) throw ShapeError("C_i has the wrong number of columns");
    NodeSplit s;
    s.node = i;
    const Matrix Cz = C_i * js.T;
    const double scale = std::max(norm2(js.J()), norm2(Cz));
    for (size_t j = 0; j < js.classes.size(); ++j) {
        const auto& jc = js.classes[j];
        const bool ok = pbh_detectable(jc.J, Cz.middleCols(jc.offset, jc.dim), jc.eig.value, tol, scale);
        (ok ? s.detectable : s.undetectable).push_back(static_cast<int>(j));
    }
    std::vector<Matrix> jo, juo;
    for (int j : s.detectable) {
        const auto& jc = js.classes[j];
        for (int k = 0; k < jc.dim; ++k) s.perm.push_back(jc.offset + k);
        jo.push_back(jc.J);
    }
    for (int j : s.undetectable) {
        const auto& jc = js.classes[j];
        for (int k = 0; k < jc.dim; ++k) s.perm.push_back(jc.offset + k);
        juo.push_back(jc.J);
    }
    s.P = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) s.P(s.perm[k], k) = 1.0;
    s.J_O = block_diag(jo);
    s.J_UO = block_diag(juo);
    const int o = s.o_dim();
    const int uo = s.uo_dim();
    const Matrix Cperm = Cz * s.P;
    s.C_O = Cperm.leftCols(o);
    s.C_UO = Cperm.rightCols(uo);

    const ObservableSplit split = obs_canon_decomp(s.J_UO, s.C_UO, tol, scale);
    s.Tbar = uo ? split.T : Matrix(0, 0);
    s.w_O_dim = split.n_obs;
    const int w = s.w_O_dim;
    const Matrix Jt = s.Tbar.transpose() * s.J_UO * s.Tbar;
    s.G_O = Jt.topLeftCorner(w, w);
    s.G_UO = Jt.bottomRightCorner(uo - w, uo - w);
    s.H_O = (s.C_UO * s.Tbar).leftCols(w);
    s.JJ = block_diag({s.J_O, s.G_O});
    s.FF.resize(C_i.rows(), o + w);
    s.FF.leftCols(o) = s.C_O;
    s.FF.rightCols(w) = s.H_O;
    return s;
}

JordanSystem jordan_system(const Plant& p, const ToleranceConfig& tol) {
    p.validate();
    JordanSystem js = jordan_grouped(p.A, tol);
    for (NodeId i = 1; i <= p.n_nodes(); ++i) js.nodes.push_back(node_local_split(js, i, p.C_of(i), tol));
    return js;
}

}  // namespace distobs
