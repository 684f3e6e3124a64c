#include "isac/fft3.hpp"

#include <cstring>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace isac {

namespace {
// fftw_execute is thread-safe, plan creation/destruction is not.
std::mutex g_plan_mutex;
} // namespace

void dft3_zero_padded(const Cube& in, Cube& out) {
    const std::size_t n0 = out.dim0(), n1 = out.dim1(), n2 = out.dim2();
    if (in.dim0() > n0 || in.dim1() > n1 || in.dim2() > n2)
        throw std::invalid_argument("dft3_zero_padded: output smaller than input");
    if (n0 == 0 || n1 == 0 || n2 == 0)
        throw std::invalid_argument("dft3_zero_padded: empty output");

    std::memset(out.data(), 0, out.size() * sizeof(cdouble));
    for (std::size_t k = 0; k < in.dim0(); ++k)
        for (std::size_t n = 0; n < in.dim1(); ++n)
            std::memcpy(&out(k, n, 0), &in(k, n, 0), in.dim2() * sizeof(cdouble));

    auto* buf = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan = nullptr;
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        plan = fftw_plan_dft_3d(static_cast<int>(n0), static_cast<int>(n1),
                                static_cast<int>(n2), buf, buf, FFTW_FORWARD,
                                FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("dft3_zero_padded: fftw plan failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        fftw_destroy_plan(plan);
    }
}

} // namespace isac
