#include "kinlab/fourier.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace kinlab {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

FourierEngine::FourierEngine(const LatticeSpec& spec)
    : spec_(spec), data_(nullptr), perm_(fft_order_permutation(spec)) {
    std::vector<int> dims(static_cast<std::size_t>(spec.dim()), spec.side());
    std::lock_guard lock(planner_mutex());
    data_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * spec.sites()));
    if (!data_) throw std::bad_alloc();
    auto* raw = reinterpret_cast<fftw_complex*>(data_);
    forward_plan_ = fftw_plan_dft(spec.dim(), dims.data(), raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_plan_ = fftw_plan_dft(spec.dim(), dims.data(), raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!forward_plan_ || !backward_plan_) {
        fftw_free(data_);
        throw std::runtime_error("FFTW plan creation failed");
    }
}

FourierEngine::~FourierEngine() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_plan_);
    fftw_destroy_plan(backward_plan_);
    fftw_free(data_);
}

const char* fftw_library_version() { return fftw_version; }

void FourierEngine::forward() { fftw_execute(forward_plan_); }
void FourierEngine::backward() { fftw_execute(backward_plan_); }

std::vector<std::size_t> fft_order_permutation(const LatticeSpec& spec) {
    const auto grid = MomentumGrid::of(spec);
    const auto l = static_cast<std::size_t>(spec.side());
    std::vector<std::size_t> perm(spec.sites());
    for (std::size_t i = 0; i < spec.sites(); ++i) {
        std::size_t j = 0;
        for (int c : grid.coords(i)) {
            const int wrapped = c < 0 ? c + spec.side() : c;
            j = j * l + static_cast<std::size_t>(wrapped);
        }
        perm[i] = j;
    }
    return perm;
}

void FourierEngine::load(std::span<const cplx> lexicographic) {
    if (lexicographic.size() != spec_.sites())
        throw std::invalid_argument("FourierEngine::load: size mismatch");
    for (std::size_t i = 0; i < perm_.size(); ++i) data_[perm_[i]] = lexicographic[i];
}

void FourierEngine::store(std::span<cplx> lexicographic) const {
    if (lexicographic.size() != spec_.sites())
        throw std::invalid_argument("FourierEngine::store: size mismatch");
    for (std::size_t i = 0; i < perm_.size(); ++i) lexicographic[i] = data_[perm_[i]];
}

}  // namespace kinlab
