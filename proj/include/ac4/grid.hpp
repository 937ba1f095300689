#pragma once
// Periodic tensor grids, complex scalar fields, spectral derivatives (FFT
// along one axis), band-limited synthesis and a 4th-order finite-difference
// derivative kept as an independent oracle.

#include <fftw3.h>

#include <map>
#include <numeric>
#include <random>

#include "ac4/core.hpp"

namespace ac4 {

/// Periodic tensor grid over the four coordinates (t,x,y,z).  Inactive
/// coordinates carry a single grid layer; fields are constant along them.
struct GridSpec {
    std::array<int, 4> n{1, 1, 1, 1};
    std::array<double, 4> period{1.0, 1.0, 1.0, 1.0};
    std::array<bool, 4> active{false, false, false, false};

    static bool is_pow2(int v) { return v >= 1 && (v & (v - 1)) == 0; }

    static GridSpec make(std::array<int, 4> dims, std::array<double, 4> periods = {1, 1, 1, 1}) {
        GridSpec g;
        for (int c = 0; c < 4; ++c) {
            if (dims[c] <= 0) throw config_error("grid: nonpositive resolution");
            g.active[c] = dims[c] > 1;
            if (g.active[c] && (dims[c] < 4 || !is_pow2(dims[c])))
                throw config_error("grid: active resolutions must be powers of two >= 4");
            if (periods[c] <= 0) throw config_error("grid: nonpositive period");
            g.n[c] = dims[c];
            g.period[c] = periods[c];
        }
        return g;
    }

    std::size_t size() const {
        return std::size_t(n[0]) * std::size_t(n[1]) * std::size_t(n[2]) * std::size_t(n[3]);
    }
    /// Row-major strides, coordinate t slowest.
    std::array<std::size_t, 4> strides() const {
        std::array<std::size_t, 4> s;
        s[3] = 1;
        s[2] = std::size_t(n[3]);
        s[1] = s[2] * std::size_t(n[2]);
        s[0] = s[1] * std::size_t(n[1]);
        return s;
    }
    double spacing(int c) const { return period[c] / double(n[c]); }
    /// Uniform quadrature weight of one node; weights sum to the cell volume
    /// prod(period).
    double cell_weight() const {
        double w = 1.0;
        for (int c = 0; c < 4; ++c) w *= period[c] / double(n[c]);
        return w;
    }
    double total_volume() const {
        return period[0] * period[1] * period[2] * period[3];
    }
    std::array<double, 4> point(std::size_t flat) const {
        auto s = strides();
        std::array<double, 4> x;
        for (int c = 0; c < 4; ++c) {
            std::size_t ic = (flat / s[c]) % std::size_t(n[c]);
            x[c] = double(ic) * spacing(c);
        }
        return x;
    }
    bool operator==(const GridSpec& o) const {
        return n == o.n && period == o.period && active == o.active;
    }
};

/// Complex scalar field on a GridSpec.  Geometry data and form components
/// are all stored in this one type; real content is kept exactly real by
/// the constructors that produce it.
struct Field {
    std::vector<cplx> v;

    Field() = default;
    explicit Field(const GridSpec& g, cplx fill = 0.0) : v(g.size(), fill) {}

    std::size_t size() const { return v.size(); }
    cplx& operator[](std::size_t i) { return v[i]; }
    const cplx& operator[](std::size_t i) const { return v[i]; }

    Field& operator+=(const Field& o) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
        return *this;
    }
    Field& operator*=(cplx s) {
        for (auto& x : v) x *= s;
        return *this;
    }
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(cplx s, Field a) { return a *= s; }
};

inline Field multiply(const Field& a, const Field& b) {
    Field r = a;
    for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] *= b.v[i];
    return r;
}

inline Field conjugate(Field a) {
    for (auto& x : a.v) x = std::conj(x);
    return a;
}

inline double max_abs(const Field& a) {
    double m = 0;
    for (auto& x : a.v) m = std::max(m, std::abs(x));
    return m;
}

/// Discrete L2 pairing with uniform weights (the flat-measure integral);
/// metric-weighted inner products live with the manifold.
inline cplx integrate(const Field& a, const GridSpec& g) {
    cplx s = 0;
    for (auto& x : a.v) s += x;
    return s * g.cell_weight();
}

namespace fft_detail {

/// One cached in-place 1D complex plan pair per line length.
struct PlanPair {
    fftw_plan fwd = nullptr, bwd = nullptr;
    std::vector<cplx> buf;
};

inline PlanPair& plans_for(int n) {
    static std::map<int, PlanPair> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    PlanPair p;
    p.buf.resize(n);
    auto* b = reinterpret_cast<fftw_complex*>(p.buf.data());
    p.fwd = fftw_plan_dft_1d(n, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
    p.bwd = fftw_plan_dft_1d(n, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
    return cache.emplace(n, std::move(p)).first->second;
}

template <class LineOp>
inline void for_each_line(const GridSpec& g, int axis, LineOp&& op) {
    auto s = g.strides();
    int n = g.n[axis];
    std::size_t total = g.size();
    std::size_t line_stride = s[axis];
    // iterate over all base points with index_axis == 0
    for (std::size_t base = 0; base < total; ++base) {
        if ((base / line_stride) % std::size_t(n) != 0) continue;
        op(base, line_stride, n);
    }
}

}  // namespace fft_detail

/// In-place complex FFT along one active axis. sign = -1 forward, +1
/// backward; backward is normalized by 1/n so fwd+bwd is the identity.
inline void fft_axis(Field& f, const GridSpec& g, int axis, int sign) {
    if (!g.active[axis]) return;
    auto& pl = fft_detail::plans_for(g.n[axis]);
    fft_detail::for_each_line(g, axis, [&](std::size_t base, std::size_t stride, int n) {
        for (int k = 0; k < n; ++k) pl.buf[k] = f[base + stride * k];
        fftw_execute(sign < 0 ? pl.fwd : pl.bwd);
        double scale = sign < 0 ? 1.0 : 1.0 / double(n);
        for (int k = 0; k < n; ++k) f[base + stride * k] = pl.buf[k] * scale;
    });
}

/// Signed frequency of bin k for an n-point transform.
inline int signed_mode(int k, int n) { return (k <= n / 2) ? k : k - n; }

/// Spectral partial derivative along a coordinate axis (zero for inactive
/// axes).  The Nyquist bin of the derivative is set to zero.
inline Field partial_spectral(const Field& f, const GridSpec& g, int axis) {
    if (!g.active[axis]) return Field(g, 0.0);
    Field r = f;
    fft_axis(r, g, axis, -1);
    int n = g.n[axis];
    double f0 = 2.0 * pi / g.period[axis];
    auto s = g.strides();
    std::size_t stride = s[axis];
    for (std::size_t i = 0; i < r.size(); ++i) {
        int k = int((i / stride) % std::size_t(n));
        int m = signed_mode(k, n);
        if (2 * k == n) m = 0;  // drop Nyquist for odd-order derivative
        r[i] *= cplx(0.0, f0 * double(m));
    }
    fft_axis(r, g, axis, +1);
    return r;
}

/// 4th-order centered finite difference along an axis -- an independent
/// oracle for the spectral derivative, never used inside the operators.
inline Field partial_fd4(const Field& f, const GridSpec& g, int axis) {
    Field r(g, 0.0);
    if (!g.active[axis]) return r;
    auto s = g.strides();
    int n = g.n[axis];
    std::size_t stride = s[axis];
    double h = g.spacing(axis);
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::size_t k = (i / stride) % std::size_t(n);
        auto at = [&](int off) {
            int kk = int((int(k) + off % n + n) % n);
            return f[i + (std::size_t(kk) - k) * stride];
        };
        r[i] = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
    }
    return r;
}

/// Mean value over the grid (flat measure).
inline cplx mean(const Field& f, const GridSpec& g) {
    cplx s = 0;
    for (auto& x : f.v) s += x;
    return s / double(f.size());
}

/// List of integer modes with 0 < |k|_2 <= kmax on the active axes, in a
/// fixed deterministic order (lexicographic).
inline std::vector<std::array<int, 4>> mode_list(const GridSpec& g, int kmax, bool include_zero) {
    std::vector<std::array<int, 4>> modes;
    std::array<int, 4> lo{}, hi{};
    for (int c = 0; c < 4; ++c) {
        lo[c] = g.active[c] ? -kmax : 0;
        hi[c] = g.active[c] ? kmax : 0;
    }
    for (int k0 = lo[0]; k0 <= hi[0]; ++k0)
        for (int k1 = lo[1]; k1 <= hi[1]; ++k1)
            for (int k2 = lo[2]; k2 <= hi[2]; ++k2)
                for (int k3 = lo[3]; k3 <= hi[3]; ++k3) {
                    long q = long(k0) * k0 + long(k1) * k1 + long(k2) * k2 + long(k3) * k3;
                    if (q > long(kmax) * kmax) continue;
                    if (q == 0 && !include_zero) continue;
                    modes.push_back({k0, k1, k2, k3});
                }
    return modes;
}

/// Real trig field cos(2 pi k.x + phase) sampled on the grid.
inline Field trig_field(const GridSpec& g, const std::array<int, 4>& k, double phase,
                        double amp = 1.0) {
    Field f(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto x = g.point(i);
        double arg = phase;
        for (int c = 0; c < 4; ++c) arg += 2.0 * pi * double(k[c]) * x[c] / g.period[c];
        f[i] = amp * std::cos(arg);
    }
    return f;
}

/// Deterministic band-limited real random field: sum of cosines over all
/// modes |k| <= kmax with unit-normal amplitudes and uniform phases drawn
/// from `rng` in the fixed mode order.  mean_zero drops the k=0 term.
inline Field random_band_field(const GridSpec& g, int kmax, std::mt19937_64& rng,
                               bool mean_zero = true) {
    std::normal_distribution<double> amp(0.0, 1.0);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * pi);
    Field f(g, 0.0);
    if (!mean_zero) {
        double a = amp(rng);
        for (auto& x : f.v) x += a;
    }
    // half-space of modes; each cosine with phase covers the conjugate pair
    for (auto& k : mode_list(g, kmax, false)) {
        if (std::lexicographical_compare(k.begin(), k.end(), std::array<int, 4>{0, 0, 0, 0}.begin(),
                                         std::array<int, 4>{0, 0, 0, 0}.end()))
            continue;  // keep one representative of {k,-k}
        double a = amp(rng);
        double p = ph(rng);
        f += trig_field(g, k, p, a);
    }
    return f;
}

inline Field imag_unit_times(const Field& f) {
    Field r = f;
    for (auto& x : r.v) x *= cplx(0, 1);
    return r;
}

}  // namespace ac4
