#pragma once

// Welford accumulators with the Chan et al. pairwise merge. Adding identical
// values leaves the mean bit-exact, which the exact-null checks rely on.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kinlab {

struct RunningStats {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    void merge(const RunningStats& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
        const double delta = o.mean - mean;
        const double total = na + nb;
        if (delta != 0.0) mean += delta * (nb / total);
        m2 += o.m2 + delta * delta * (na * nb / total);
        n += o.n;
    }

    /// Unbiased sample variance; 0 for fewer than two samples.
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

/// Complex mean with the scalar spread E|z - mean|^2.
struct ComplexStats {
    std::size_t n = 0;
    std::complex<double> mean{};
    double m2 = 0.0;

    void add(std::complex<double> z) {
        ++n;
        const auto delta = z - mean;
        mean += delta / static_cast<double>(n);
        m2 += std::real(std::conj(delta) * (z - mean));
    }

    void merge(const ComplexStats& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
        const auto delta = o.mean - mean;
        const double total = na + nb;
        if (delta != std::complex<double>{}) mean += delta * (nb / total);
        m2 += o.m2 + std::norm(delta) * (na * nb / total);
        n += o.n;
    }

    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

/// Componentwise RunningStats over a fixed-length vector.
struct VectorStats {
    std::size_t n = 0;
    std::vector<double> mean;
    std::vector<double> m2;

    VectorStats() = default;
    explicit VectorStats(std::size_t size) : mean(size, 0.0), m2(size, 0.0) {}

    void add(const std::vector<double>& x) {
        if (x.size() != mean.size()) throw std::invalid_argument("VectorStats::add: size mismatch");
        ++n;
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double delta = x[i] - mean[i];
            mean[i] += delta * inv;
            m2[i] += delta * (x[i] - mean[i]);
        }
    }

    void merge(const VectorStats& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        if (o.mean.size() != mean.size()) throw std::invalid_argument("VectorStats::merge: size mismatch");
        const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
        const double total = na + nb;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double delta = o.mean[i] - mean[i];
            if (delta != 0.0) mean[i] += delta * (nb / total);
            m2[i] += o.m2[i] + delta * delta * (na * nb / total);
        }
        n += o.n;
    }

    std::vector<double> std_error() const {
        std::vector<double> se(mean.size(), 0.0);
        if (n < 2) return se;
        const double scale = 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n));
        for (std::size_t i = 0; i < se.size(); ++i) se[i] = std::sqrt(m2[i] * scale);
        return se;
    }
};

}  // namespace kinlab
