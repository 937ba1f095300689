#pragma once
// Exterior-algebra combinatorics on a 4-dimensional coframe, shared error
// types, and small fixed-size helpers used throughout the library.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ac4 {

using cplx = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846264338327950288;

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};
struct config_error : error {
    explicit config_error(const std::string& msg) : error(msg) {}
};
struct numerical_error : error {
    explicit numerical_error(const std::string& msg) : error(msg) {}
};
struct io_error : error {
    explicit io_error(const std::string& msg) : error(msg) {}
};

inline constexpr int dim = 4;

/// Number of components of a p-form on a 4-dimensional coframe.
inline constexpr int form_dim(int p) {
    constexpr int c[5] = {1, 4, 6, 4, 1};
    return (p >= 0 && p <= 4) ? c[p] : 0;
}

/// Strictly increasing multi-indices, degree 0..4, in lexicographic order.
/// idx2[k] lists the two coframe labels of the k-th 2-form component, etc.
inline constexpr std::array<std::array<int, 1>, 4> idx1{{{0}, {1}, {2}, {3}}};
inline constexpr std::array<std::array<int, 2>, 6> idx2{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
inline constexpr std::array<std::array<int, 3>, 4> idx3{
    {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};

inline int index2(int a, int b) {
    // position of {a,b} (a<b) in idx2
    static constexpr int tbl[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
    return tbl[a][b];
}

inline int index3(int a, int b, int c) {
    // position of {a,b,c} sorted in idx3 = 6 - a - b - c missing-label trick
    int missing = 6 - a - b - c;
    return 3 - missing;
}

/// Sign of sorting the label list into increasing order; 0 on repeats.
inline int sort_sign(int* v, int n) {
    int sign = 1;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (v[i] == v[j]) return 0;
            if (v[i] > v[j]) {
                std::swap(v[i], v[j]);
                sign = -sign;
            }
        }
    return sign;
}

/// Multi-index tables as runtime spans, degree-indexed.
inline const int* multi_index(int p, int comp) {
    switch (p) {
        case 0: return nullptr;
        case 1: return idx1[comp].data();
        case 2: return idx2[comp].data();
        case 3: return idx3[comp].data();
        default: {
            static constexpr int full[4] = {0, 1, 2, 3};
            return full;
        }
    }
}

/// Find the component index of a (possibly unsorted) label list; sign out.
inline int component_of(int p, const int* labels, int& sign) {
    int v[4];
    for (int i = 0; i < p; ++i) v[i] = labels[i];
    sign = sort_sign(v, p);
    if (sign == 0) return -1;
    switch (p) {
        case 0: return 0;
        case 1: return v[0];
        case 2: return index2(v[0], v[1]);
        case 3: return index3(v[0], v[1], v[2]);
        case 4: return 0;
        default: return -1;
    }
}

/// Complement of the multi-index `comp` of degree p, and the sign of the
/// permutation (I, I^c) relative to (0,1,2,3).
inline int complement(int p, int comp, int& sign) {
    const int* I = multi_index(p, comp);
    bool used[4] = {false, false, false, false};
    for (int i = 0; i < p; ++i) used[I[i]] = true;
    int perm[4], k = 0;
    for (int i = 0; i < p; ++i) perm[k++] = I[i];
    int Ic[4], m = 0;
    for (int a = 0; a < 4; ++a)
        if (!used[a]) {
            perm[k++] = a;
            Ic[m++] = a;
        }
    // parity of perm
    int s = 1;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (perm[i] > perm[j]) s = -s;
    sign = s;
    int dummy;
    return component_of(4 - p, Ic, dummy);
}

/// Structure constants of the wedge product: for components i (deg p) and
/// j (deg q), returns the target component of deg p+q and the sign (0 if
/// the indices collide).
inline int wedge_component(int p, int i, int q, int j, int& sign) {
    int labels[4];
    const int* I = multi_index(p, i);
    const int* J = multi_index(q, j);
    for (int k = 0; k < p; ++k) labels[k] = I[k];
    for (int k = 0; k < q; ++k) labels[p + k] = J[k];
    return component_of(p + q, labels, sign);
}

/// p-th compound matrix action: given a 4x4 matrix M (M[r][c] = coefficient
/// of basis vector r in the image of basis vector c) and p-form degree,
/// out[I] = sum_K det(M[K_a][I_b]) in[K].  This is how a linear map on the
/// frame acts on form components by pullback.
template <class T, class U>
inline void compound_apply(int p, const T* M /*16*/, const U* in, U* out) {
    int n = form_dim(p);
    if (p == 0) {
        out[0] = in[0];
        return;
    }
    for (int ic = 0; ic < n; ++ic) {
        const int* I = multi_index(p, ic);
        U acc{};
        for (int kc = 0; kc < n; ++kc) {
            const int* K = multi_index(p, kc);
            // det of p x p submatrix M[K][I]
            T det{};
            if (p == 1) {
                det = M[K[0] * 4 + I[0]];
            } else if (p == 2) {
                det = M[K[0] * 4 + I[0]] * M[K[1] * 4 + I[1]] -
                      M[K[0] * 4 + I[1]] * M[K[1] * 4 + I[0]];
            } else if (p == 3) {
                det = T{};
                static constexpr int perm3[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1},
                                                    {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
                for (int t = 0; t < 6; ++t) {
                    T term = M[K[0] * 4 + I[perm3[t][0]]] * M[K[1] * 4 + I[perm3[t][1]]] *
                             M[K[2] * 4 + I[perm3[t][2]]];
                    det += (t < 3) ? term : -term;
                }
            } else {
                // p == 4: determinant of M
                det = T{};
                static constexpr int p4[24][4] = {
                    {0, 1, 2, 3}, {0, 1, 3, 2}, {0, 2, 1, 3}, {0, 2, 3, 1}, {0, 3, 1, 2},
                    {0, 3, 2, 1}, {1, 0, 2, 3}, {1, 0, 3, 2}, {1, 2, 0, 3}, {1, 2, 3, 0},
                    {1, 3, 0, 2}, {1, 3, 2, 0}, {2, 0, 1, 3}, {2, 0, 3, 1}, {2, 1, 0, 3},
                    {2, 1, 3, 0}, {2, 3, 0, 1}, {2, 3, 1, 0}, {3, 0, 1, 2}, {3, 0, 2, 1},
                    {3, 1, 0, 2}, {3, 1, 2, 0}, {3, 2, 0, 1}, {3, 2, 1, 0}};
                static constexpr int s4[24] = {1, -1, -1, 1, 1, -1, -1, 1, 1, -1, -1, 1,
                                               1, -1, -1, 1, 1, -1, -1, 1, 1, -1, -1, 1};
                for (int t = 0; t < 24; ++t) {
                    T term = M[0 * 4 + p4[t][0]] * M[1 * 4 + p4[t][1]] * M[2 * 4 + p4[t][2]] *
                             M[3 * 4 + p4[t][3]];
                    det += (s4[t] > 0) ? term : -term;
                }
            }
            acc += det * in[kc];
        }
        out[ic] = acc;
    }
}

/// Gram matrix of Lambda^p from the inverse metric on 1-forms.
/// ginv is row-major 4x4; out has form_dim(p)^2 entries.
template <class T>
inline void gram_p(int p, const T* ginv, T* out) {
    int n = form_dim(p);
    if (p == 0) {
        out[0] = T(1);
        return;
    }
    for (int i = 0; i < n; ++i) {
        const int* I = multi_index(p, i);
        for (int j = 0; j < n; ++j) {
            const int* J = multi_index(p, j);
            T det{};
            if (p == 1) {
                det = ginv[I[0] * 4 + J[0]];
            } else if (p == 2) {
                det = ginv[I[0] * 4 + J[0]] * ginv[I[1] * 4 + J[1]] -
                      ginv[I[0] * 4 + J[1]] * ginv[I[1] * 4 + J[0]];
            } else if (p == 3) {
                static constexpr int perm3[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1},
                                                    {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
                for (int t = 0; t < 6; ++t) {
                    T term = ginv[I[0] * 4 + J[perm3[t][0]]] * ginv[I[1] * 4 + J[perm3[t][1]]] *
                             ginv[I[2] * 4 + J[perm3[t][2]]];
                    det += (t < 3) ? term : -term;
                }
            } else {
                T m[16];
                for (int a = 0; a < 16; ++a) m[a] = ginv[a];
                T o[1], in[1] = {T(1)};
                compound_apply(4, m, in, o);
                det = o[0];
            }
            out[i * n + j] = det;
        }
    }
}

/// 4x4 inverse for small pointwise solves.
template <class T>
inline bool invert4(const T* m, T* out) {
    // cofactor expansion
    T inv[16];
    inv[0] = m[5] * m[10] * m[15] - m[5] * m[11] * m[14] - m[9] * m[6] * m[15] +
             m[9] * m[7] * m[14] + m[13] * m[6] * m[11] - m[13] * m[7] * m[10];
    inv[4] = -m[4] * m[10] * m[15] + m[4] * m[11] * m[14] + m[8] * m[6] * m[15] -
             m[8] * m[7] * m[14] - m[12] * m[6] * m[11] + m[12] * m[7] * m[10];
    inv[8] = m[4] * m[9] * m[15] - m[4] * m[11] * m[13] - m[8] * m[5] * m[15] +
             m[8] * m[7] * m[13] + m[12] * m[5] * m[11] - m[12] * m[7] * m[9];
    inv[12] = -m[4] * m[9] * m[14] + m[4] * m[10] * m[13] + m[8] * m[5] * m[14] -
              m[8] * m[6] * m[13] - m[12] * m[5] * m[10] + m[12] * m[6] * m[9];
    inv[1] = -m[1] * m[10] * m[15] + m[1] * m[11] * m[14] + m[9] * m[2] * m[15] -
             m[9] * m[3] * m[14] - m[13] * m[2] * m[11] + m[13] * m[3] * m[10];
    inv[5] = m[0] * m[10] * m[15] - m[0] * m[11] * m[14] - m[8] * m[2] * m[15] +
             m[8] * m[3] * m[14] + m[12] * m[2] * m[11] - m[12] * m[3] * m[10];
    inv[9] = -m[0] * m[9] * m[15] + m[0] * m[11] * m[13] + m[8] * m[1] * m[15] -
             m[8] * m[3] * m[13] - m[12] * m[1] * m[11] + m[12] * m[3] * m[9];
    inv[13] = m[0] * m[9] * m[14] - m[0] * m[10] * m[13] - m[8] * m[1] * m[14] +
              m[8] * m[2] * m[13] + m[12] * m[1] * m[10] - m[12] * m[2] * m[9];
    inv[2] = m[1] * m[6] * m[15] - m[1] * m[7] * m[14] - m[5] * m[2] * m[15] +
             m[5] * m[3] * m[14] + m[13] * m[2] * m[7] - m[13] * m[3] * m[6];
    inv[6] = -m[0] * m[6] * m[15] + m[0] * m[7] * m[14] + m[4] * m[2] * m[15] -
             m[4] * m[3] * m[14] - m[12] * m[2] * m[7] + m[12] * m[3] * m[6];
    inv[10] = m[0] * m[5] * m[15] - m[0] * m[7] * m[13] - m[4] * m[1] * m[15] +
              m[4] * m[3] * m[13] + m[12] * m[1] * m[7] - m[12] * m[3] * m[5];
    inv[14] = -m[0] * m[5] * m[14] + m[0] * m[6] * m[13] + m[4] * m[1] * m[14] -
              m[4] * m[2] * m[13] - m[12] * m[1] * m[6] + m[12] * m[2] * m[5];
    inv[3] = -m[1] * m[6] * m[11] + m[1] * m[7] * m[10] + m[5] * m[2] * m[11] -
             m[5] * m[3] * m[10] - m[9] * m[2] * m[7] + m[9] * m[3] * m[6];
    inv[7] = m[0] * m[6] * m[11] - m[0] * m[7] * m[10] - m[4] * m[2] * m[11] +
             m[4] * m[3] * m[10] + m[8] * m[2] * m[7] - m[8] * m[3] * m[6];
    inv[11] = -m[0] * m[5] * m[11] + m[0] * m[7] * m[9] + m[4] * m[1] * m[11] -
              m[4] * m[3] * m[9] - m[8] * m[1] * m[7] + m[8] * m[3] * m[5];
    inv[15] = m[0] * m[5] * m[10] - m[0] * m[6] * m[9] - m[4] * m[1] * m[10] +
              m[4] * m[2] * m[9] + m[8] * m[1] * m[6] - m[8] * m[2] * m[5];
    T det = m[0] * inv[0] + m[1] * inv[4] + m[2] * inv[8] + m[3] * inv[12];
    if (std::abs(det) < 1e-300) return false;
    T idet = T(1) / det;
    for (int i = 0; i < 16; ++i) out[i] = inv[i] * idet;
    return true;
}

/// FNV-1a 64-bit hash, used for config provenance.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace ac4
