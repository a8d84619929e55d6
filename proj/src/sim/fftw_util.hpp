#pragma once

#include <complex>
#include <cstddef>
#include <mutex>

#include <fftw3.h>

namespace fivec::detail {

/// Planner calls are not thread safe in FFTW; every plan goes through this lock.
std::mutex& fftw_planner_mutex();

/// Enables FFTW's OpenMP backend once per process.
void ensure_fftw_threads();

/// Owning fftw_malloc buffer, so all plans share the same alignment.
template <class T>
class FftwBuffer {
public:
    FftwBuffer() = default;
    explicit FftwBuffer(size_t n) { resize(n); }
    ~FftwBuffer() { release(); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    FftwBuffer(FftwBuffer&& o) noexcept : ptr_(o.ptr_), n_(o.n_) {
        o.ptr_ = nullptr;
        o.n_ = 0;
    }
    FftwBuffer& operator=(FftwBuffer&& o) noexcept {
        if (this != &o) {
            release();
            ptr_ = o.ptr_;
            n_ = o.n_;
            o.ptr_ = nullptr;
            o.n_ = 0;
        }
        return *this;
    }

    void resize(size_t n) {
        release();
        ptr_ = static_cast<T*>(fftw_malloc(sizeof(T) * n));
        n_ = n;
        for (size_t i = 0; i < n; ++i) ptr_[i] = T{};
    }
    T* data() { return ptr_; }
    const T* data() const { return ptr_; }
    size_t size() const { return n_; }
    T& operator[](size_t i) { return ptr_[i]; }
    const T& operator[](size_t i) const { return ptr_[i]; }

    fftw_complex* fc() { return reinterpret_cast<fftw_complex*>(ptr_); }

private:
    void release() {
        if (ptr_) fftw_free(ptr_);
        ptr_ = nullptr;
        n_ = 0;
    }
    T* ptr_ = nullptr;
    size_t n_ = 0;
};

using RealBuffer = FftwBuffer<double>;
using ComplexBuffer = FftwBuffer<std::complex<double>>;

/// Unnormalized 2-D complex transforms on one grid shape, usable with any FftwBuffer of that size.
class ComplexFft2 {
public:
    ComplexFft2(int n1, int n2);
    ~ComplexFft2();
    ComplexFft2(const ComplexFft2&) = delete;
    ComplexFft2& operator=(const ComplexFft2&) = delete;

    void forward(FftwBuffer<std::complex<double>>& in, FftwBuffer<std::complex<double>>& out) const;
    void backward(FftwBuffer<std::complex<double>>& in, FftwBuffer<std::complex<double>>& out) const;

private:
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

/// Signed integer frequency of FFT index i on an n-point axis.
inline long signed_index(long i, long n) { return i <= n / 2 ? i : i - n; }

}  // namespace fivec::detail
