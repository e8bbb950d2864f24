#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <span>
#include <utility>
#include <vector>

namespace nqkr {

using cplx = std::complex<double>;

// 64-byte aligned storage so FFTW plans made on scratch buffers are valid
// for every array we execute them on.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), alignment));
    }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <class U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using CVector = std::vector<cplx, AlignedAllocator<cplx>>;

enum class FftEffort {
    estimate,  // deterministic heuristic plan, instant
    measure,   // timed planning; faster for very large sizes but may differ between processes
};

// Pair of out-of-place plans of one size. FFTW's new-array execute interface
// is thread-safe, so a single instance is shared by every propagator of that
// size; only plan creation needs the lock.
class FftPlans {
public:
    FftPlans(int n, FftEffort effort) : n_(n) {
        unsigned flags = effort == FftEffort::measure ? FFTW_MEASURE : FFTW_ESTIMATE;
        CVector a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
        forward_ = fftw_plan_dft_1d(n, raw(a.data()), raw(b.data()), FFTW_FORWARD, flags);
        backward_ = fftw_plan_dft_1d(n, raw(a.data()), raw(b.data()), FFTW_BACKWARD, flags);
    }
    ~FftPlans() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;

    int size() const { return n_; }

    /// out_k = sum_j in_j exp(-2 pi i jk / n), unnormalized.
    void forward(std::span<const cplx> in, std::span<cplx> out) const {
        fftw_execute_dft(forward_, raw(const_cast<cplx*>(in.data())), raw(out.data()));
    }
    /// out_j = sum_k in_k exp(+2 pi i jk / n), unnormalized.
    void backward(std::span<const cplx> in, std::span<cplx> out) const {
        fftw_execute_dft(backward_, raw(const_cast<cplx*>(in.data())), raw(out.data()));
    }

    /// Process-wide plan cache.
    static std::shared_ptr<const FftPlans> get(int n, FftEffort effort = FftEffort::estimate) {
        static std::mutex mutex;
        static std::map<std::pair<int, FftEffort>, std::shared_ptr<const FftPlans>> cache;
        std::lock_guard lock(mutex);
        auto& slot = cache[{n, effort}];
        if (!slot) slot = std::make_shared<const FftPlans>(n, effort);
        return slot;
    }

private:
    static fftw_complex* raw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

    int n_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

}  // namespace nqkr
