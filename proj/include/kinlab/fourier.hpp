#pragma once

#include "kinlab/lattice.hpp"

#include <span>
#include <vector>

typedef struct fftw_plan_s* fftw_plan;

namespace kinlab {

/// In-place d-dimensional DFT on an owned, FFTW-aligned buffer.
///
/// The buffer is in "FFT order": axis index j holds coordinate j mod L.
/// forward() applies sum_x e^{-2 pi i p.x}; backward() the unnormalized
/// conjugate sum. Plan creation is serialized; execution is thread-safe
/// as long as each thread owns its engine.
class FourierEngine {
public:
    explicit FourierEngine(const LatticeSpec& spec);
    ~FourierEngine();
    FourierEngine(const FourierEngine&) = delete;
    FourierEngine& operator=(const FourierEngine&) = delete;

    const LatticeSpec& spec() const { return spec_; }
    std::span<cplx> buffer() { return {data_, spec_.sites()}; }

    void forward();
    void backward();

    /// Lexicographic [-L/2, L/2) layout <-> FFT order. Since L is even both
    /// directions are the same half-swap per axis.
    void load(std::span<const cplx> lexicographic);
    void store(std::span<cplx> lexicographic) const;

private:
    LatticeSpec spec_;
    cplx* data_;
    fftw_plan forward_plan_;
    fftw_plan backward_plan_;
    std::vector<std::size_t> perm_;
};

/// Version string of the linked FFTW library.
const char* fftw_library_version();

/// Permutation taking lexicographic index to FFT-order index.
std::vector<std::size_t> fft_order_permutation(const LatticeSpec& spec);

}  // namespace kinlab
