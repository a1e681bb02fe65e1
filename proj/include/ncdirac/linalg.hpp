#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace ncdirac {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Default residual tolerance; NCDIRAC_TOL in the environment overrides it.
inline double default_tol() {
    if (const char* s = std::getenv("NCDIRAC_TOL")) {
        char* end = nullptr;
        const double v = std::strtod(s, &end);
        if (end != s && v > 0.0) return v;
    }
    return 1e-9;
}

inline RealVector singular_values(const ComplexMatrix& x) {
    if (x.size() == 0) return RealVector::Zero(0);
    Eigen::JacobiSVD<ComplexMatrix> svd(x);
    return svd.singularValues();
}

/// Schatten p-norm for p in (0, inf]; p = inf gives the operator norm.
inline double schatten_norm(const ComplexMatrix& x, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("schatten_norm: p must be positive");
    const RealVector sv = singular_values(x);
    if (sv.size() == 0) return 0.0;
    if (std::isinf(p)) return sv.maxCoeff();
    double acc = 0.0;
    for (Index i = 0; i < sv.size(); ++i) acc += std::pow(sv[i], p);
    return std::pow(acc, 1.0 / p);
}

inline double operator_norm(const ComplexMatrix& x) { return schatten_norm(x, kInf); }

inline ComplexMatrix hermitian_part(const ComplexMatrix& x) {
    return 0.5 * (x + x.adjoint());
}

/// Hermitian within tol and min eigenvalue >= -tol * ||x||_inf.
inline bool is_psd(const ComplexMatrix& x, double tol = 1e-10) {
    if (x.rows() != x.cols()) throw std::invalid_argument("is_psd: matrix must be square");
    if (x.size() == 0) return true;
    const double herm_resid = (x - x.adjoint()).norm();
    if (herm_resid > tol * std::max(1.0, x.norm())) return false;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(x), Eigen::EigenvaluesOnly);
    const RealVector ev = es.eigenvalues();
    const double scale = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
    return ev.minCoeff() >= -tol * scale;
}

/// PSD square root via spectral decomposition; negative round-off eigenvalues clamp to zero.
inline ComplexMatrix mat_sqrt_psd(const ComplexMatrix& x) {
    if (x.rows() != x.cols()) throw std::invalid_argument("mat_sqrt_psd: matrix must be square");
    if (!is_psd(x, 1e-8)) throw std::invalid_argument("mat_sqrt_psd: input is not PSD");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(x));
    RealVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// A finite-dimensional space presented by a spanning set with a (PSD) Gram matrix.
struct WeightedSpace {
    Index dim = 0;
    ComplexMatrix gram;
};

/// Basis change out of a WeightedSpace: basis is dim x effective_dim with
/// basis^* G basis = Id on the retained part.
struct OrthoBasis {
    ComplexMatrix basis;
    Index effective_dim = 0;
};

/// Orthonormalize a weighted space, discarding Gram eigenvalues below tol * lambda_max.
/// Columns are ordered by descending eigenvalue and phase-fixed for determinism.
inline OrthoBasis orthonormalize(const WeightedSpace& sp, double tol = 1e-10) {
    if (sp.gram.rows() != sp.dim || sp.gram.cols() != sp.dim)
        throw std::invalid_argument("orthonormalize: gram dimension mismatch");
    OrthoBasis out;
    if (sp.dim == 0) {
        out.basis = ComplexMatrix::Zero(0, 0);
        return out;
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(sp.gram));
    const RealVector ev = es.eigenvalues();
    const double lmax = std::max(ev.maxCoeff(), 0.0);
    const double cut = tol * lmax;
    std::vector<Index> keep;
    for (Index i = sp.dim - 1; i >= 0; --i)
        if (ev[i] >= cut && ev[i] > 0.0) keep.push_back(i);
    out.effective_dim = static_cast<Index>(keep.size());
    out.basis = ComplexMatrix::Zero(sp.dim, out.effective_dim);
    for (Index c = 0; c < out.effective_dim; ++c) {
        ComplexVector col = es.eigenvectors().col(keep[c]) / std::sqrt(ev[keep[c]]);
        Index imax = 0;
        col.cwiseAbs().maxCoeff(&imax);
        const Complex ph = col[imax] / std::abs(col[imax]);
        out.basis.col(c) = col * std::conj(ph);
    }
    return out;
}

/// Coefficients of a raw-coordinate vector in the orthonormal basis.
inline ComplexVector onb_coords(const WeightedSpace& sp, const OrthoBasis& ob,
                                const ComplexVector& raw) {
    return ob.basis.adjoint() * (sp.gram * raw);
}

inline double rel_residual(const ComplexMatrix& got, const ComplexMatrix& want) {
    return (got - want).norm() / std::max(1.0, want.norm());
}

inline ComplexVector vec_rowmajor(const ComplexMatrix& x) {
    ComplexVector v(x.size());
    Index k = 0;
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < x.cols(); ++j) v[k++] = x(i, j);
    return v;
}

inline ComplexMatrix unvec_rowmajor(const ComplexVector& v, Index rows, Index cols) {
    if (v.size() != rows * cols) throw std::invalid_argument("unvec_rowmajor: size mismatch");
    ComplexMatrix x(rows, cols);
    Index k = 0;
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) x(i, j) = v[k++];
    return x;
}

inline ComplexMatrix random_complex_matrix(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
    return m;
}

inline ComplexMatrix random_hermitian(Index n, std::mt19937_64& rng) {
    const ComplexMatrix m = random_complex_matrix(n, n, rng);
    return hermitian_part(m);
}

inline ComplexMatrix random_unitary(Index n, std::mt19937_64& rng) {
    const ComplexMatrix m = random_complex_matrix(n, n, rng);
    Eigen::HouseholderQR<ComplexMatrix> qr(m);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < n; ++i) {
        const Complex d = r(i, i);
        if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
    }
    return q;
}

inline nlohmann::json matrix_to_json(const ComplexMatrix& m) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> re, im;
    re.reserve(m.size());
    im.reserve(m.size());
    for (Index i = 0; i < m.rows(); ++i)
        for (Index k = 0; k < m.cols(); ++k) {
            re.push_back(m(i, k).real());
            im.push_back(m(i, k).imag());
        }
    j["re"] = re;
    j["im"] = im;
    return j;
}

inline ComplexMatrix matrix_from_json(const nlohmann::json& j) {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const auto re = j.at("re").get<std::vector<double>>();
    std::vector<double> im;
    if (j.contains("im")) im = j.at("im").get<std::vector<double>>();
    else im.assign(re.size(), 0.0);
    if (static_cast<Index>(re.size()) != rows * cols || im.size() != re.size())
        throw std::invalid_argument("matrix_from_json: entry count mismatch");
    ComplexMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index k = 0; k < cols; ++k) {
            const auto idx = static_cast<size_t>(i * cols + k);
            m(i, k) = Complex(re[idx], im[idx]);
        }
    return m;
}

}  // namespace ncdirac
