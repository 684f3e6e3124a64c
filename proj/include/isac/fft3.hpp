#ifndef ISAC_FFT3_HPP
#define ISAC_FFT3_HPP

#include "isac/tensor.hpp"

namespace isac {

/// Forward zero-padded 3D DFT:
///   out[u,v,w] = sum_{k,n,m} in[k,n,m] e^{-j 2 pi (u k / N0 + v n / N1 + w m / N2)}.
/// `out` supplies the FFT sizes (N0, N1, N2); each must be >= the matching
/// input dimension. Its previous contents are discarded.
///
/// Results are bit-deterministic for a fixed binary and sizes: plans are
/// created with FFTW_ESTIMATE (no timing-dependent algorithm choice).
void dft3_zero_padded(const Cube& in, Cube& out);

} // namespace isac

#endif
